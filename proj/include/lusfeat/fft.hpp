#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <tuple>

#include <fftw3.h>

namespace lusfeat::fft {

// fftw_malloc'd storage, so every buffer shares the alignment the plans were
// created with and plans can be reused through the new-array execute calls.
template <typename T>
class Buffer {
 public:
  Buffer() = default;
  explicit Buffer(std::size_t n) : size_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)))) {
    if (!data_) throw std::bad_alloc();
  }
  ~Buffer() { fftw_free(data_); }

  Buffer(Buffer&& o) noexcept : size_(o.size_), data_(o.data_) {
    o.data_ = nullptr;
    o.size_ = 0;
  }
  Buffer& operator=(Buffer&& o) noexcept {
    std::swap(size_, o.size_);
    std::swap(data_, o.data_);
    return *this;
  }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;

  T* data() { return data_; }
  const T* data() const { return data_; }
  std::size_t size() const { return size_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t size_ = 0;
  T* data_ = nullptr;
};

using ComplexBuffer = Buffer<std::complex<double>>;
using RealBuffer = Buffer<double>;

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  fftw_plan get() const { return plan_; }

  // The FFTW planner is not re-entrant; plan execution is.
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  fftw_plan plan_;
};

namespace detail {

enum class Kind { Forward2d, Backward2d, ColumnsR2c, ColumnsC2r };

using Key = std::tuple<Kind, std::size_t, std::size_t>;

inline std::shared_ptr<const Plan> cached(Key key) {
  static std::mutex cache_mutex;
  static std::map<Key, std::shared_ptr<const Plan>> cache;
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const auto [kind, n0, n1] = key;
  fftw_plan raw = nullptr;
  {
    std::lock_guard lock(Plan::planner_mutex());
    const unsigned flags = FFTW_ESTIMATE;
    const int rows = static_cast<int>(n0);
    const int cols = static_cast<int>(n1);
    switch (kind) {
      case Kind::Forward2d:
      case Kind::Backward2d: {
        ComplexBuffer in(n0 * n1), out(n0 * n1);
        raw = fftw_plan_dft_2d(rows, cols, as_fftw(in.data()), as_fftw(out.data()),
                               kind == Kind::Forward2d ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
      }
      case Kind::ColumnsR2c: {
        // n0 = transform length along rows, n1 = number of columns; data is
        // row-major so each column is strided by n1.
        const int len = rows;
        const int half = rows / 2 + 1;
        RealBuffer in(n0 * n1);
        ComplexBuffer out(static_cast<std::size_t>(half) * n1);
        raw = fftw_plan_many_dft_r2c(1, &len, cols, in.data(), nullptr, cols, 1, as_fftw(out.data()), nullptr, cols,
                                     1, flags);
        break;
      }
      case Kind::ColumnsC2r: {
        const int len = rows;
        const int half = rows / 2 + 1;
        ComplexBuffer in(static_cast<std::size_t>(half) * n1);
        RealBuffer out(n0 * n1);
        raw = fftw_plan_many_dft_c2r(1, &len, cols, as_fftw(in.data()), nullptr, cols, 1, out.data(), nullptr, cols,
                                     1, flags);
        break;
      }
    }
  }
  if (!raw) throw std::runtime_error("fftw planning failed");
  auto plan = std::make_shared<const Plan>(raw);

  std::lock_guard lock(cache_mutex);
  return cache.try_emplace(key, std::move(plan)).first->second;
}

}  // namespace detail

// Unnormalized 2-D complex transforms over a rows x cols row-major buffer.
inline void forward_2d(ComplexBuffer& in, ComplexBuffer& out, std::size_t rows, std::size_t cols) {
  auto plan = detail::cached({detail::Kind::Forward2d, rows, cols});
  fftw_execute_dft(plan->get(), as_fftw(in.data()), as_fftw(out.data()));
}

inline void backward_2d(ComplexBuffer& in, ComplexBuffer& out, std::size_t rows, std::size_t cols) {
  auto plan = detail::cached({detail::Kind::Backward2d, rows, cols});
  fftw_execute_dft(plan->get(), as_fftw(in.data()), as_fftw(out.data()));
}

// Batched 1-D real transforms down every column of a length x cols buffer.
// The complex side holds (length/2 + 1) x cols coefficients.
inline void columns_r2c(RealBuffer& in, ComplexBuffer& out, std::size_t length, std::size_t cols) {
  auto plan = detail::cached({detail::Kind::ColumnsR2c, length, cols});
  fftw_execute_dft_r2c(plan->get(), in.data(), as_fftw(out.data()));
}

// Unnormalized; c2r destroys its input.
inline void columns_c2r(ComplexBuffer& in, RealBuffer& out, std::size_t length, std::size_t cols) {
  auto plan = detail::cached({detail::Kind::ColumnsC2r, length, cols});
  fftw_execute_dft_c2r(plan->get(), as_fftw(in.data()), out.data());
}

// Signed frequency (cycles/sample) of DFT bin k for a length-n transform,
// with the Nyquist bin mapped to -0.5.
inline double centered_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (k < (n + 1) / 2 ? kk : kk - nn) / nn;
}

}  // namespace lusfeat::fft

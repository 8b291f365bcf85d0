#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lusfeat {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(std::size_t row, std::size_t col)
      : Error("non-finite pixel at (" + std::to_string(row) + ", " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Dense row-major grid of 32-bit intensities. Row index is depth (grows
// downward), column index is lateral position.
class Image {
 public:
  static constexpr std::size_t kMinExtent = 2;

  Image() = default;

  Image(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols) {
    check_extent(rows, cols);
    data_.assign(rows * cols, fill);
  }

  Image(std::size_t rows, std::size_t cols, std::vector<float> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_extent(rows, cols);
    if (data_.size() != rows * cols) {
      throw DimensionError("image data has " + std::to_string(data_.size()) +
                           " values, expected " + std::to_string(rows * cols));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const float> pixels() const { return data_; }
  std::span<float> pixels() { return data_; }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }
  std::span<float> row(std::size_t r) { return std::span<float>(data_).subspan(r * cols_, cols_); }

  bool same_shape(const Image& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static void check_extent(std::size_t rows, std::size_t cols) {
    if (rows < kMinExtent || cols < kMinExtent) {
      throw DimensionError("image must be at least 2x2, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// Severity class of the five-level lung ultrasound taxonomy:
// 1 A-lines, 2 no A-lines, 3 discrete B-lines, 4 confluent B-lines,
// 5 consolidation.
class SeverityClass {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 5;
  static constexpr int kCount = 5;

  constexpr explicit SeverityClass(int value) : value_(value) {
    if (value < kMin || value > kMax) {
      throw std::out_of_range("severity class must be in [1, 5], got " + std::to_string(value));
    }
  }

  constexpr int value() const { return value_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }

  friend constexpr bool operator==(SeverityClass, SeverityClass) = default;
  friend constexpr auto operator<=>(SeverityClass, SeverityClass) = default;

 private:
  int value_;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

inline void require_finite(const Image& img) {
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!std::isfinite(px[i])) throw NonFiniteError(i / img.cols(), i % img.cols());
  }
}

// Min-max rescale to [0, 1]. A constant image carries no signal and maps to
// all zeros.
inline Image normalize(const Image& img) {
  require_finite(img);
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Image out(img.rows(), img.cols(), 0.0f);
  if (!(hi > lo)) return out;
  const double scale = 1.0 / (hi - lo);
  auto dst = out.pixels();
  const auto src = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(std::clamp((src[i] - lo) * scale, 0.0, 1.0));
  }
  return out;
}

inline float max_value(const Image& img) {
  return *std::max_element(img.pixels().begin(), img.pixels().end());
}

inline float min_value(const Image& img) {
  return *std::min_element(img.pixels().begin(), img.pixels().end());
}

// Mean of each row; index is depth.
inline std::vector<double> row_means(const Image& img) {
  std::vector<double> out(img.rows(), 0.0);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    double s = 0.0;
    for (float v : img.row(r)) s += v;
    out[r] = s / static_cast<double>(img.cols());
  }
  return out;
}

// Mean of each column over rows [row_begin, rows).
inline std::vector<double> column_means(const Image& img, std::size_t row_begin = 0) {
  std::vector<double> out(img.cols(), 0.0);
  if (row_begin >= img.rows()) return out;
  for (std::size_t r = row_begin; r < img.rows(); ++r) {
    const auto row = img.row(r);
    for (std::size_t c = 0; c < img.cols(); ++c) out[c] += row[c];
  }
  const double n = static_cast<double>(img.rows() - row_begin);
  for (double& v : out) v /= n;
  return out;
}

// Index of the largest element; ties resolve to the smallest index.
template <typename Range>
std::size_t argmax(const Range& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < std::size(values); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace lusfeat

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lusfeat/fft.hpp"
#include "lusfeat/image.hpp"

namespace lusfeat {

struct LogGaborParams {
  double wavelength0 = 32.0;  // center wavelength, pixels
  double sigma_ratio = 0.55;  // sigma / f0

  void validate() const {
    if (!(wavelength0 > 2.0) || !std::isfinite(wavelength0)) {
      throw std::invalid_argument("log-Gabor wavelength must exceed 2 pixels, got " + std::to_string(wavelength0));
    }
    if (!(sigma_ratio > 0.0 && sigma_ratio < 1.0)) {
      throw std::invalid_argument("log-Gabor sigma ratio must lie in (0, 1), got " + std::to_string(sigma_ratio));
    }
  }
};

// Even part (m1) and the two odd Riesz parts along depth (m2) and lateral
// position (m3).
struct MonogenicComponents {
  Image m1;
  Image m2;
  Image m3;
};

// Fourth power of the intensities, rescaled back to [0, 1]. Lifts specular
// reflections above the surrounding speckle.
inline Image enhance(const Image& img) {
  Image out(img.rows(), img.cols());
  const auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double sq = static_cast<double>(src[i]) * src[i];
    dst[i] = static_cast<float>(sq * sq);
  }
  return normalize(out);
}

// Radial log-Gabor response in DFT bin order (DC at index 0). Row bins carry
// the depth frequency, column bins the lateral frequency.
class LogGaborSpectrum {
 public:
  LogGaborSpectrum(std::size_t rows, std::size_t cols, const LogGaborParams& params)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
    params.validate();
    const double f0 = 1.0 / params.wavelength0;
    const double log_sigma = std::log(params.sigma_ratio);
    const double denom = 2.0 * log_sigma * log_sigma;
    for (std::size_t r = 0; r < rows; ++r) {
      const double u = fft::centered_frequency(r, rows);
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = fft::centered_frequency(c, cols);
        const double w = std::sqrt(u * u + v * v);
        if (w == 0.0) continue;
        const double l = std::log(w / f0);
        values_[r * cols + c] = std::exp(-(l * l) / denom);
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  // Value of the closed form at an arbitrary radial frequency.
  static double at(double radial_frequency, const LogGaborParams& params) {
    if (radial_frequency <= 0.0) return 0.0;
    const double l = std::log(radial_frequency * params.wavelength0);
    const double ls = std::log(params.sigma_ratio);
    return std::exp(-(l * l) / (2.0 * ls * ls));
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

inline LogGaborSpectrum log_gabor_spectrum(std::size_t rows, std::size_t cols, const LogGaborParams& params) {
  return LogGaborSpectrum(rows, cols, params);
}

// Band-pass the image with the log-Gabor filter and take its Riesz
// transform, all in the frequency domain:
//   m1 = Re F^-1(F G), m2 = Re F^-1(F G (-i u/|w|)), m3 = Re F^-1(F G (-i v/|w|)).
inline MonogenicComponents monogenic(const Image& img, const LogGaborParams& params) {
  require_finite(img);
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  const std::size_t n = rows * cols;
  const LogGaborSpectrum filter(rows, cols, params);

  fft::ComplexBuffer spatial(n), spectrum(n);
  const auto px = img.pixels();
  for (std::size_t i = 0; i < n; ++i) spatial[i] = px[i];
  fft::forward_2d(spatial, spectrum, rows, cols);

  // Both products below are Hermitian, so their inverses are real and can
  // share one complex transform. The odd multipliers are zeroed on their own
  // Nyquist line, where the real part of the inverse cancels them anyway.
  fft::ComplexBuffer even(n), odd(n);
  const bool nyq_row = rows % 2 == 0;
  const bool nyq_col = cols % 2 == 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = fft::centered_frequency(r, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = fft::centered_frequency(c, cols);
      const std::size_t i = r * cols + c;
      const std::complex<double> band = spectrum[i] * filter(r, c);
      even[i] = band;
      const double w = std::sqrt(u * u + v * v);
      if (w == 0.0) {
        odd[i] = 0.0;
        continue;
      }
      const double hu = (nyq_row && r == rows / 2) ? 0.0 : u / w;
      const double hv = (nyq_col && c == cols / 2) ? 0.0 : v / w;
      // band * (-i hu) + i * band * (-i hv)
      odd[i] = band * std::complex<double>(hv, -hu);
    }
  }
  fft::backward_2d(even, spatial, rows, cols);
  fft::backward_2d(odd, spectrum, rows, cols);

  MonogenicComponents out{Image(rows, cols), Image(rows, cols), Image(rows, cols)};
  const double inv = 1.0 / static_cast<double>(n);
  auto m1 = out.m1.pixels();
  auto m2 = out.m2.pixels();
  auto m3 = out.m3.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    m1[i] = static_cast<float>(spatial[i].real() * inv);
    m2[i] = static_cast<float>(spectrum[i].real() * inv);
    m3[i] = static_cast<float>(spectrum[i].imag() * inv);
  }
  return out;
}

inline constexpr double kPhaseEpsilon = 1e-12;

// 1 - (2/pi) atan(|odd| / (|m1| + eps)), in [0, 1]. Near 1 on line-like
// (even) structure, near 0 on edges.
inline Image local_phase_image(const MonogenicComponents& mono) {
  require_same_shape(mono.m1, mono.m2, "local_phase_image");
  require_same_shape(mono.m1, mono.m3, "local_phase_image");
  Image out(mono.m1.rows(), mono.m1.cols());
  const auto m1 = mono.m1.pixels();
  const auto m2 = mono.m2.pixels();
  const auto m3 = mono.m3.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double odd = std::hypot(static_cast<double>(m2[i]), static_cast<double>(m3[i]));
    const double even = std::abs(static_cast<double>(m1[i])) + kPhaseEpsilon;
    const double lpi = 1.0 - (2.0 / std::numbers::pi) * std::atan(odd / even);
    dst[i] = static_cast<float>(std::clamp(lpi, 0.0, 1.0));
  }
  return out;
}

}  // namespace lusfeat

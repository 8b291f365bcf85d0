#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lusfeat/fft.hpp"
#include "lusfeat/image.hpp"

namespace lusfeat {

struct ShadowParams {
  double sigma_divisor = 4.0;  // Gaussian sigma = rows / sigma_divisor
  // Sum I(x, y) instead of I(k, y) under the Gaussian; kept only to audit the
  // printed form of the shadow equation, which degenerates to the identity.
  bool literal_index = false;

  void validate() const {
    if (!(sigma_divisor > 0.0) || !std::isfinite(sigma_divisor)) {
      throw std::invalid_argument("sigma divisor must be positive, got " + std::to_string(sigma_divisor));
    }
  }
};

// Integrated backscatter: running sum of squared intensity down each column,
// top row through the current row inclusive, divided by its maximum.
inline Image ibs_map(const Image& img) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  std::vector<double> acc(cols, 0.0);
  std::vector<double> raw(rows * cols);
  double peak = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = img.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = row[c];
      acc[c] += v * v;
      raw[r * cols + c] = acc[c];
    }
  }
  for (double v : acc) peak = std::max(peak, v);

  Image out(rows, cols);
  if (peak <= 0.0) return out;
  auto dst = out.pixels();
  for (std::size_t i = 0; i < raw.size(); ++i) dst[i] = static_cast<float>(raw[i] / peak);
  return out;
}

// Shadow map: at each pixel, the Gaussian-weighted mean of the pixels at and
// below it in the same column,
//   SH(x) = sum_{k>=x} G(k-x) I(k) / sum_{k>=x} G(k-x),  G(d) = exp(-d^2 / 2 sigma^2).
// The numerator is a one-sided correlation, evaluated for all columns at once
// with zero-padded FFTs of length >= 2R.
inline Image shadow_map(const Image& img, const ShadowParams& params = {}) {
  params.validate();
  if (params.literal_index) return img;

  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  const double sigma = static_cast<double>(rows) / params.sigma_divisor;

  std::vector<double> weight(rows);
  for (std::size_t d = 0; d < rows; ++d) {
    const double dd = static_cast<double>(d);
    weight[d] = std::exp(-(dd * dd) / (2.0 * sigma * sigma));
  }
  // denom[x] = sum_{d=0}^{rows-1-x} weight[d]
  std::vector<double> prefix(rows + 1, 0.0);
  for (std::size_t d = 0; d < rows; ++d) prefix[d + 1] = prefix[d] + weight[d];

  const std::size_t length = std::bit_ceil(2 * rows);
  const std::size_t half = length / 2 + 1;

  fft::RealBuffer signal(length * cols);
  std::fill(signal.data(), signal.data() + signal.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = img.row(r);
    std::copy(row.begin(), row.end(), signal.data() + r * cols);
  }
  fft::ComplexBuffer spectrum(half * cols);
  fft::columns_r2c(signal, spectrum, length, cols);

  fft::RealBuffer kernel(length);
  std::fill(kernel.data(), kernel.data() + length, 0.0);
  std::copy(weight.begin(), weight.end(), kernel.data());
  fft::ComplexBuffer kernel_spectrum(half);
  fft::columns_r2c(kernel, kernel_spectrum, length, 1);

  for (std::size_t k = 0; k < half; ++k) {
    const std::complex<double> g = std::conj(kernel_spectrum[k]);
    for (std::size_t c = 0; c < cols; ++c) spectrum[k * cols + c] *= g;
  }
  fft::columns_c2r(spectrum, signal, length, cols);

  const auto [lo_it, hi_it] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const float lo = *lo_it;
  const float hi = *hi_it;
  const double inv_len = 1.0 / static_cast<double>(length);

  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double denom = prefix[rows - r];
    auto dst = out.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double num = signal[r * cols + c] * inv_len;
      dst[c] = std::clamp(static_cast<float>(num / denom), lo, hi);
    }
  }
  return out;
}

// Shadow-weighted backscatter: pixelwise product, rescaled to [0, 1].
inline Image shibs(const Image& sh, const Image& ibs) {
  require_same_shape(sh, ibs, "shibs");
  Image out(sh.rows(), sh.cols());
  const auto a = sh.pixels();
  const auto b = ibs.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] * b[i];
  return normalize(out);
}

}  // namespace lusfeat

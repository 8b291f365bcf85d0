#pragma once

// Slow, obviously-correct reference implementations used only by the tests.
// None of them share code with the library beyond the Image container.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lusfeat/image.hpp"

namespace oracle {

using lusfeat::Image;

inline Image random_image(std::size_t rows, std::size_t cols, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  Image img(rows, cols);
  for (auto& v : img.pixels()) v = u(rng);
  return img;
}

// Max elementwise |a - b| over max |b|.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

inline std::vector<double> to_double(const Image& img) { return {img.pixels().begin(), img.pixels().end()}; }

// raw(x, y) = sum_{k <= x} I(k, y)^2, then divided by the global max.
inline std::vector<double> ibs(const Image& img) {
  const std::size_t R = img.rows(), C = img.cols();
  std::vector<double> raw(R * C, 0.0);
  double peak = 0.0;
  for (std::size_t x = 0; x < R; ++x) {
    for (std::size_t y = 0; y < C; ++y) {
      double s = 0.0;
      for (std::size_t k = 0; k <= x; ++k) s += double(img(k, y)) * double(img(k, y));
      raw[x * C + y] = s;
      peak = std::max(peak, s);
    }
  }
  if (peak > 0.0) {
    for (auto& v : raw) v /= peak;
  }
  return raw;
}

// SH(x, y) = sum_{k >= x} G(k - x) I(k, y) / sum_{k >= x} G(k - x).
inline std::vector<double> shadow(const Image& img, double sigma_divisor) {
  const std::size_t R = img.rows(), C = img.cols();
  const double sigma = double(R) / sigma_divisor;
  std::vector<double> out(R * C);
  for (std::size_t x = 0; x < R; ++x) {
    for (std::size_t y = 0; y < C; ++y) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = x; k < R; ++k) {
        const double d = double(k - x);
        const double g = std::exp(-d * d / (2.0 * sigma * sigma));
        num += g * img(k, y);
        den += g;
      }
      out[x * C + y] = num / den;
    }
  }
  return out;
}

struct Monogenic {
  std::vector<double> m1, m2, m3;
};

// Spatial route: build the three filter kernels by a naive inverse DFT of
// their frequency responses, then circularly convolve the image with the
// real part of each kernel.
inline Monogenic monogenic(const Image& img, double wavelength0, double sigma_ratio) {
  const std::size_t R = img.rows(), C = img.cols();
  const double f0 = 1.0 / wavelength0;
  const double ls = std::log(sigma_ratio);
  auto freq = [](std::size_t k, std::size_t n) {
    // signed frequency in cycles per sample; the n/2 bin of an even n is -1/2
    const long s = long(k) >= long((n + 1) / 2) ? long(k) - long(n) : long(k);
    return double(s) / double(n);
  };

  using cd = std::complex<double>;
  std::vector<cd> H1(R * C), H2(R * C), H3(R * C);
  for (std::size_t a = 0; a < R; ++a) {
    for (std::size_t b = 0; b < C; ++b) {
      const double u = freq(a, R), v = freq(b, C);
      const double w = std::hypot(u, v);
      double g = 0.0;
      if (w > 0.0) {
        const double l = std::log(w / f0);
        g = std::exp(-l * l / (2.0 * ls * ls));
      }
      H1[a * C + b] = g;
      H2[a * C + b] = w > 0.0 ? cd(0.0, -u / w) * g : 0.0;
      H3[a * C + b] = w > 0.0 ? cd(0.0, -v / w) * g : 0.0;
    }
  }

  auto kernel = [&](const std::vector<cd>& H) {
    std::vector<double> h(R * C);
    for (std::size_t x = 0; x < R; ++x) {
      for (std::size_t y = 0; y < C; ++y) {
        cd s = 0.0;
        for (std::size_t a = 0; a < R; ++a) {
          for (std::size_t b = 0; b < C; ++b) {
            const double ph = 2.0 * std::numbers::pi * (double(a * x) / double(R) + double(b * y) / double(C));
            s += H[a * C + b] * cd(std::cos(ph), std::sin(ph));
          }
        }
        h[x * C + y] = s.real() / double(R * C);
      }
    }
    return h;
  };

  auto convolve = [&](const std::vector<double>& h) {
    std::vector<double> out(R * C, 0.0);
    for (std::size_t x = 0; x < R; ++x) {
      for (std::size_t y = 0; y < C; ++y) {
        double s = 0.0;
        for (std::size_t i = 0; i < R; ++i) {
          for (std::size_t j = 0; j < C; ++j) {
            s += double(img(i, j)) * h[((x + R - i) % R) * C + (y + C - j) % C];
          }
        }
        out[x * C + y] = s;
      }
    }
    return out;
  };

  return {convolve(kernel(H1)), convolve(kernel(H2)), convolve(kernel(H3))};
}

struct Tally {
  std::array<std::array<std::size_t, 5>, 5> confusion{};
  std::array<std::size_t, 5> tp{}, fp{}, tn{}, fn{};
};

// Counts every (sample, class) pair directly.
inline Tally tally(const std::vector<int>& pred, const std::vector<int>& truth) {
  Tally t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++t.confusion[truth[i] - 1][pred[i] - 1];
    for (int k = 1; k <= 5; ++k) {
      const bool p = pred[i] == k, g = truth[i] == k;
      if (p && g) ++t.tp[k - 1];
      if (p && !g) ++t.fp[k - 1];
      if (!p && !g) ++t.tn[k - 1];
      if (!p && g) ++t.fn[k - 1];
    }
  }
  return t;
}

// Apex, radius band and half-angle rendered directly into a raster: a pixel
// is inside when its center's polar coordinates fall in the band.
struct Fan {
  double apex_row, apex_col, r0, r1, theta;
};

inline Image render_fan(const Fan& f, std::size_t rows, std::size_t cols, float value = 1.0f) {
  Image img(rows, cols);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      const double dy = double(y) - f.apex_row, dx = double(x) - f.apex_col;
      const double r = std::hypot(dy, dx);
      const double t = std::atan2(dx, dy);
      if (r >= f.r0 && r <= f.r1 && std::abs(t) <= f.theta) img(y, x) = value;
    }
  }
  return img;
}

}  // namespace oracle

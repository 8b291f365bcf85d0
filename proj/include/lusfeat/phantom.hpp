#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lusfeat/image.hpp"

namespace lusfeat {

struct BLine {
  double center = 0.0;     // column
  double width = 6.0;      // pixels
  double intensity = 1.0;  // relative to PhantomSpec::b_line_level
};

// Subpleural hypoechoic patch, as fractions of image depth.
struct Consolidation {
  double depth_lo_frac = 0.22;
  double depth_hi_frac = 0.45;
  double intensity = 0.38;
};

struct PhantomSpec {
  std::size_t rows = 512;
  std::size_t cols = 512;
  SeverityClass severity{1};
  double pleura_depth_frac = 0.2;
  double pleura_thickness = 6.0;  // full width at half maximum, pixels
  std::size_t a_line_count = 3;
  double a_line_decay = 0.6;
  std::vector<BLine> b_lines;
  double confluent_frac = 0.0;
  std::optional<Consolidation> consolidation;
  double speckle_sigma = 0.05;
  std::uint64_t seed = 0;

  double tissue_level = 0.25;  // soft tissue above the pleura
  double lung_level = 0.02;    // aerated lung below the pleura
  double b_line_level = 0.45;
  double pleura_irregularity = 0.045;  // class 5 only, fraction of depth

  std::size_t pleura_row() const {
    return static_cast<std::size_t>(std::lround(pleura_depth_frac * static_cast<double>(rows)));
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("phantom spec: " + msg); };
    if (rows < 16 || cols < 16) fail("image must be at least 16x16");
    if (!(pleura_depth_frac > 0.1 && pleura_depth_frac < 0.5)) fail("pleura_depth_frac must lie in (0.1, 0.5)");
    if (!(pleura_thickness > 0.0)) fail("pleura_thickness must be positive");
    if (!(a_line_decay > 0.0 && a_line_decay < 1.0)) fail("a_line_decay must lie in (0, 1)");
    if (!(confluent_frac >= 0.0 && confluent_frac <= 1.0)) fail("confluent_frac must lie in [0, 1]");
    if (!(speckle_sigma >= 0.0)) fail("speckle_sigma must be non-negative");
    for (const auto& b : b_lines) {
      if (!(b.center >= 0.0 && b.center < static_cast<double>(cols))) fail("B-line column outside the image");
      if (!(b.width > 0.0)) fail("B-line width must be positive");
      if (!(b.intensity > 0.0 && b.intensity <= 1.0)) fail("B-line intensity must lie in (0, 1]");
    }
    if (consolidation) {
      const auto& c = *consolidation;
      if (!(c.depth_lo_frac >= 0.0 && c.depth_hi_frac > c.depth_lo_frac && c.depth_hi_frac <= 1.0)) {
        fail("consolidation depth band must satisfy 0 <= lo < hi <= 1");
      }
      if (!(c.intensity > 0.0 && c.intensity <= 1.0)) fail("consolidation intensity must lie in (0, 1]");
    }

    const int k = severity.value();
    const bool has_a = a_line_count > 0;
    const bool has_b = !b_lines.empty();
    const std::string cls = "class " + std::to_string(k) + ": ";
    if (k != 1 && has_a) fail(cls + "A-lines are only valid for class 1");
    if ((k == 1 || k == 2 || k == 5) && has_b) fail(cls + "B-lines are only valid for classes 3 and 4");
    if (k != 5 && consolidation) fail(cls + "consolidation is only valid for class 5");
    if (k != 4 && confluent_frac > 0.0) fail(cls + "confluent_frac is only valid for class 4");
    if (k == 1) {
      if (!has_a) fail(cls + "needs at least one A-line");
      if ((a_line_count + 1) * pleura_row() >= rows) fail(cls + "A-lines do not fit inside the image");
    }
    if ((k == 3 || k == 4) && !has_b) fail(cls + "needs at least one B-line");
    if (k == 4 && !(confluent_frac > 0.0)) fail(cls + "needs confluent_frac > 0");
    if (k == 5 && !consolidation) fail(cls + "needs a consolidation patch");
  }
};

struct GroundTruth {
  std::size_t pleura_row = 0;
  std::vector<std::size_t> a_line_rows;
  std::vector<std::size_t> b_line_columns;
  SeverityClass severity{1};
};

struct Phantom {
  Image image;
  GroundTruth truth;
  std::vector<BLine> b_lines;  // after class 4 widening
};

namespace detail {

inline double band_profile(double offset, double fwhm) {
  const double s = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  return std::exp(-(offset * offset) / (2.0 * s * s));
}

// 1 inside the line, linear 2-pixel shoulders outside it.
inline double lateral_profile(double col, const BLine& b) {
  const double d = std::abs(col - b.center) - 0.5 * b.width;
  if (d <= -1.0) return 1.0;
  if (d >= 1.0) return 0.0;
  return 0.5 * (1.0 - d);
}

// Bright core, 25% dimmer at the line's nominal edges.
inline double core_profile(double col, const BLine& b) {
  const double d = std::min(1.0, std::abs(col - b.center) / (0.5 * b.width));
  return 1.0 - 0.25 * d * d;
}

inline double coverage(const std::vector<BLine>& lines, std::size_t cols) {
  std::size_t lit = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    for (const auto& b : lines) {
      if (lateral_profile(static_cast<double>(c), b) > 0.5) {
        ++lit;
        break;
      }
    }
  }
  return static_cast<double>(lit) / static_cast<double>(cols);
}

// Confluent B-lines: scale every width until the union covers the
// requested fraction of columns.
inline std::vector<BLine> widen_to_coverage(std::vector<BLine> lines, std::size_t cols, double target) {
  const std::vector<BLine> base = lines;
  for (double f = 1.0; coverage(lines, cols) < target && f < 1e3; f *= 1.02) {
    for (std::size_t i = 0; i < lines.size(); ++i) lines[i].width = base[i].width * f;
  }
  return lines;
}

// Smooth random lateral signal in roughly [-1, 1].
inline std::vector<double> lateral_wobble(std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> cycles(1.5, 4.0);
  std::vector<double> out(cols, 0.0);
  const double amps[3] = {0.6, 0.3, 0.2};
  for (int m = 0; m < 3; ++m) {
    const double p = phase(rng);
    const double k = cycles(rng) * (1 + m);  // cycles across the image width
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] += amps[m] * std::sin(2.0 * std::numbers::pi * k * static_cast<double>(c) / static_cast<double>(cols) + p);
    }
  }
  return out;
}

}  // namespace detail

// Renders a synthetic lung ultrasound frame. Deterministic for a given spec,
// seed included.
inline Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  const std::size_t rows = spec.rows;
  const std::size_t cols = spec.cols;
  const std::size_t p = spec.pleura_row();
  const int k = spec.severity.value();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> img(rows * cols);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return img[r * cols + c]; };

  // Textured soft tissue above the pleura, near-black aerated lung below.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double u = unit(rng);
      at(r, c) = r < p ? spec.tissue_level * (0.7 + 0.6 * u) : spec.lung_level * 2.0 * u;
    }
  }

  GroundTruth truth;
  truth.pleura_row = p;
  truth.severity = spec.severity;
  const double t = spec.pleura_thickness;
  const auto reach = static_cast<long>(std::ceil(2.0 * t));

  auto paint_band = [&](double center, double amplitude) {
    const long c0 = std::lround(center);
    for (long r = c0 - reach; r <= c0 + reach; ++r) {
      if (r < 0 || r >= static_cast<long>(rows)) continue;
      const double v = amplitude * detail::band_profile(static_cast<double>(r) - center, t);
      for (std::size_t c = 0; c < cols; ++c) at(static_cast<std::size_t>(r), c) = std::max(at(static_cast<std::size_t>(r), c), v);
    }
  };

  std::vector<BLine> lines = spec.b_lines;
  if (k == 4) lines = detail::widen_to_coverage(std::move(lines), cols, spec.confluent_frac);

  if (k != 5) {
    paint_band(static_cast<double>(p), 1.0);
  }

  if (k == 1) {
    double amp = 1.0;
    for (std::size_t n = 2; n <= spec.a_line_count + 1; ++n) {
      amp *= spec.a_line_decay;
      paint_band(static_cast<double>(n * p), amp);
      truth.a_line_rows.push_back(n * p);
    }
  }

  if (k == 3 || k == 4) {
    const double depth = static_cast<double>(rows - p);
    for (const auto& b : lines) {
      truth.b_line_columns.push_back(static_cast<std::size_t>(std::lround(b.center)));
      for (std::size_t c = 0; c < cols; ++c) {
        const double lw = detail::lateral_profile(static_cast<double>(c), b) * detail::core_profile(static_cast<double>(c), b);
        if (lw <= 0.0) continue;
        for (std::size_t r = p; r < rows; ++r) {
          const double fade = 1.0 - 0.35 * static_cast<double>(r - p) / depth;
          at(r, c) = std::max(at(r, c), spec.b_line_level * b.intensity * lw * fade);
        }
      }
    }
  }

  if (k == 5) {
    const auto& cons = *spec.consolidation;
    const auto wobble = detail::lateral_wobble(cols, rng);
    const auto bright = detail::lateral_wobble(cols, rng);
    const auto floor_wobble = detail::lateral_wobble(cols, rng);
    const double amp = spec.pleura_irregularity * static_cast<double>(rows);
    const double lo = cons.depth_lo_frac * static_cast<double>(rows);
    const double hi = cons.depth_hi_frac * static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double center = static_cast<double>(p) + amp * wobble[c];
      // Broken, uneven pleural line.
      const double level = std::clamp(0.7 + 0.45 * bright[c], 0.15, 1.0);
      const double bottom = hi + 0.08 * static_cast<double>(rows) * floor_wobble[c];
      for (std::size_t r = 0; r < rows; ++r) {
        const double rr = static_cast<double>(r);
        if (rr > center + 0.5 * t && rr >= lo && rr <= bottom) {
          at(r, c) = std::max(at(r, c), cons.intensity * (0.6 + 0.8 * unit(rng)));
        }
        const double off = rr - center;
        if (std::abs(off) <= 2.0 * t) at(r, c) = std::max(at(r, c), level * detail::band_profile(off, t));
      }
    }
  }

  if (spec.speckle_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.speckle_sigma);
    for (double& v : img) v *= std::max(0.0, 1.0 + noise(rng));
  }

  std::vector<float> data(img.begin(), img.end());
  return {normalize(Image(rows, cols, std::move(data))), std::move(truth), std::move(lines)};
}

// Canonical spec for a class; the seed only drives texture and speckle.
inline PhantomSpec default_spec(SeverityClass severity, std::size_t rows = 512, std::size_t cols = 512,
                                std::uint64_t seed = 0) {
  PhantomSpec s;
  s.rows = rows;
  s.cols = cols;
  s.severity = severity;
  s.seed = seed;
  s.pleura_thickness = std::max(3.0, 0.012 * static_cast<double>(rows));
  s.a_line_count = 0;
  const double w = static_cast<double>(cols);
  switch (severity.value()) {
    case 1:
      s.a_line_count = 3;
      s.a_line_decay = 0.6;
      break;
    case 2:
      s.pleura_thickness *= 0.6;
      break;
    case 3:
      s.b_lines = {{0.35 * w, std::max(4.0, 0.015 * w), 1.0}, {0.65 * w, std::max(4.0, 0.015 * w), 0.9}};
      break;
    case 4:
      s.pleura_thickness *= 0.8;
      s.b_lines = {{0.25 * w, 0.05 * w, 1.0}, {0.5 * w, 0.05 * w, 0.9}, {0.75 * w, 0.05 * w, 0.95}};
      s.confluent_frac = 0.7;
      break;
    case 5:
      s.consolidation = Consolidation{};
      break;
  }
  return s;
}

// Draws class-consistent parameters from the seed, for batch self-checks.
inline PhantomSpec sample_spec(SeverityClass severity, std::size_t rows, std::size_t cols, std::uint64_t seed,
                               double speckle_sigma) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(severity.value()));
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double h = static_cast<double>(rows);
  const double w = static_cast<double>(cols);

  PhantomSpec s = default_spec(severity, rows, cols, seed);
  s.speckle_sigma = speckle_sigma;
  s.tissue_level = uniform(0.2, 0.3);
  s.lung_level = uniform(0.01, 0.03);
  s.b_line_level = uniform(0.38, 0.52);
  s.pleura_thickness = std::max(3.0, h * uniform(0.010, 0.016));

  switch (severity.value()) {
    case 1:
      s.pleura_depth_frac = uniform(0.12, 0.2);
      s.a_line_decay = uniform(0.5, 0.7);
      s.a_line_count = 3;
      break;
    case 2:
      s.pleura_depth_frac = uniform(0.12, 0.3);
      s.pleura_thickness *= 0.6;
      break;
    case 3: {
      s.pleura_depth_frac = uniform(0.12, 0.3);
      const auto n = static_cast<std::size_t>(uniform(1.0, 4.0));
      s.b_lines.clear();
      const double slot = 0.8 * w / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double center = 0.1 * w + slot * (static_cast<double>(i) + uniform(0.3, 0.7));
        s.b_lines.push_back({center, std::max(4.0, w * uniform(0.012, 0.03)), uniform(0.8, 1.0)});
      }
      break;
    }
    case 4: {
      s.pleura_depth_frac = uniform(0.12, 0.3);
      s.pleura_thickness *= 0.8;
      const auto n = static_cast<std::size_t>(uniform(2.0, 5.0));
      s.b_lines.clear();
      const double slot = 0.9 * w / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double center = 0.05 * w + slot * (static_cast<double>(i) + uniform(0.4, 0.6));
        s.b_lines.push_back({center, 0.05 * w, uniform(0.8, 1.0)});
      }
      s.confluent_frac = uniform(0.6, 0.85);
      break;
    }
    case 5: {
      s.pleura_depth_frac = uniform(0.12, 0.3);
      const double lo = s.pleura_depth_frac + 0.01;
      s.consolidation = Consolidation{lo, std::min(0.9, lo + uniform(0.15, 0.3)), uniform(0.3, 0.45)};
      s.pleura_irregularity = uniform(0.035, 0.06);
      break;
    }
  }
  return s;
}

}  // namespace lusfeat

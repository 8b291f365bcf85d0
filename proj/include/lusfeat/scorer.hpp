#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lusfeat/image.hpp"
#include "lusfeat/pipeline.hpp"

namespace lusfeat {

// Rule-based stand-in for a learned five-class classifier. Thresholds were
// calibrated once against the noise-free phantom generator.
struct ScorerConfig {
  double pleura_band_lo = 0.05;  // fractions of depth
  double pleura_band_hi = 0.6;

  double tau_consolidation = 0.5;
  double tau_confluent = 0.4;
  double tau_a_line = 0.5;

  double b_line_threshold_frac = 0.3;
  double b_line_min_contrast = 0.3;
  double b_line_baseline_quantile = 0.1;
  double b_line_skip_frac = 0.05;  // rows skipped below the pleura

  double consolidation_deficit_weight = 0.5;
  double consolidation_irregularity_weight = 0.5;
  double irregularity_scale = 0.02;  // fraction of depth mapped to score 1

  void validate() const {
    if (!(pleura_band_lo >= 0.0 && pleura_band_lo < pleura_band_hi && pleura_band_hi <= 1.0)) {
      throw std::invalid_argument("pleura search band must satisfy 0 <= lo < hi <= 1");
    }
    if (!(b_line_threshold_frac > 0.0 && b_line_threshold_frac < 1.0)) {
      throw std::invalid_argument("B-line threshold fraction must lie in (0, 1)");
    }
    if (!(irregularity_scale > 0.0)) throw std::invalid_argument("irregularity scale must be positive");
  }
};

struct FeatureSummary {
  std::size_t pleura_row = 0;
  double a_line_score = 0.0;
  std::size_t b_line_count = 0;
  double confluent_frac = 0.0;
  // Artifact-defined proxy: pleural-band intensity deficit plus pleura
  // irregularity. There is no dedicated C-line detector.
  double consolidation_score = 0.0;
};

struct BLineDetection {
  std::size_t count = 0;
  double confluent_frac = 0.0;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> band_rows(std::size_t rows, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw std::invalid_argument("search band (" + std::to_string(lo) + ", " + std::to_string(hi) + ") is empty");
  }
  const double n = static_cast<double>(rows);
  const auto begin = static_cast<std::size_t>(std::floor(lo * n));
  const auto end = std::min(rows, static_cast<std::size_t>(std::ceil(hi * n)));
  if (begin >= end) throw std::invalid_argument("search band holds no rows");
  return {begin, end};
}

}  // namespace detail

// Row with the highest mean local phase inside the band; smallest row wins ties.
inline std::size_t detect_pleura(const Image& lpi, double band_lo = 0.05, double band_hi = 0.6) {
  const auto [begin, end] = detail::band_rows(lpi.rows(), band_lo, band_hi);
  const auto means = row_means(lpi);
  std::size_t best = begin;
  for (std::size_t r = begin + 1; r < end; ++r) {
    if (means[r] > means[best]) best = r;
  }
  return best;
}

// Row maximizing the mean of LPI x intensity: bright and even. Because the
// local phase uses |m1|, the dark side lobes of the band-pass response a
// half wavelength from a bright line are as "even" as the line itself, so
// the phase alone cannot tell the pleura from its side lobes.
inline std::size_t detect_pleura(const Image& lpi, const Image& intensity, double band_lo = 0.05,
                                 double band_hi = 0.6) {
  require_same_shape(lpi, intensity, "detect_pleura");
  const auto [begin, end] = detail::band_rows(lpi.rows(), band_lo, band_hi);
  std::size_t best = begin;
  double best_score = -1.0;
  for (std::size_t r = begin; r < end; ++r) {
    const auto a = lpi.row(r);
    const auto b = intensity.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += static_cast<double>(a[c]) * b[c];
    if (s > best_score) {
      best_score = s;
      best = r;
    }
  }
  return best;
}

// Reverberation score: how much the depth profile below the pleura peaks at
// 2, 3 and 4 times the pleura depth, relative to its mean, squashed as
// 1 - 1/ratio into [0, 1].
inline double detect_a_lines(const Image& img, std::size_t pleura_row) {
  if (pleura_row < 2) throw std::invalid_argument("A-line detection needs pleura_row >= 2");
  if (pleura_row >= img.rows()) throw std::invalid_argument("pleura row outside the image");
  const auto profile = row_means(img);
  const std::size_t rows = img.rows();

  // Snap to the brightest row nearby; harmonics amplify any offset.
  std::size_t p = pleura_row;
  for (std::size_t r = pleura_row - 2; r <= std::min(rows - 1, pleura_row + 2); ++r) {
    if (profile[r] > profile[p]) p = r;
  }

  const std::size_t start = p + (p + 1) / 2;
  if (start >= rows) return 0.0;
  double peak_sum = 0.0;
  std::size_t harmonics = 0;
  for (std::size_t k = 2; k <= 4; ++k) {
    const std::size_t center = k * p;
    if (center >= rows) break;
    double best = profile[center - 1];
    for (std::size_t r = center; r <= std::min(rows - 1, center + 1); ++r) best = std::max(best, profile[r]);
    peak_sum += best;
    ++harmonics;
  }
  if (harmonics == 0) return 0.0;

  double mean = 0.0;
  for (std::size_t r = start; r < rows; ++r) mean += profile[r];
  mean /= static_cast<double>(rows - start);
  if (!(mean > 0.0)) return 0.0;

  const double ratio = (peak_sum / static_cast<double>(harmonics)) / mean;
  return std::clamp(1.0 - 1.0 / ratio, 0.0, 1.0);
}

// Vertical bright bands in the shadow-backscatter map below the pleura.
// Columns whose mean rises above baseline + threshold_frac (max - baseline)
// are lit; lit runs at least 3 columns wide count as B-lines. The baseline
// is a low quantile of the column means, and a profile whose spread is
// below min_contrast of its maximum has no B-lines at all.
inline BLineDetection detect_b_lines(const Image& shibs_map, std::size_t pleura_row, double threshold_frac,
                                     const ScorerConfig& cfg = {}) {
  if (pleura_row >= shibs_map.rows()) throw std::invalid_argument("pleura row outside the image");
  const std::size_t rows = shibs_map.rows();
  const auto skip = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(cfg.b_line_skip_frac * rows)));
  const std::size_t start = std::min(rows - 1, pleura_row + skip);
  const auto means = column_means(shibs_map, start);

  const double peak = *std::max_element(means.begin(), means.end());
  if (!(peak > 0.0)) return {};
  auto sorted = means;
  const auto q = static_cast<std::size_t>(cfg.b_line_baseline_quantile * static_cast<double>(sorted.size() - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
  const double base = sorted[q];
  if (peak - base < cfg.b_line_min_contrast * peak) return {};

  const double cut = base + threshold_frac * (peak - base);
  BLineDetection out;
  std::size_t lit = 0;
  std::size_t run = 0;
  auto close_run = [&] {
    if (run > 2) ++out.count;
    run = 0;
  };
  for (double m : means) {
    if (m > cut) {
      ++lit;
      ++run;
    } else {
      close_run();
    }
  }
  close_run();
  out.confluent_frac = static_cast<double>(lit) / static_cast<double>(means.size());
  return out;
}

// Consolidation proxy in [0, 1]: weighted sum of
//  - deficit: 1 - (pleura-row intensity / per-column maximum in the band),
//  - irregularity: spread of the per-column brightest row.
inline double consolidation_score(const Image& img, std::size_t pleura_row, const ScorerConfig& cfg = {}) {
  const auto [begin, end] = detail::band_rows(img.rows(), cfg.pleura_band_lo, cfg.pleura_band_hi);
  const std::size_t lo = pleura_row > 0 ? pleura_row - 1 : 0;
  const std::size_t hi = std::min(img.rows() - 1, pleura_row + 1);

  double at_pleura = 0.0;
  double col_max = 0.0;
  double pos_sum = 0.0;
  double pos_sq = 0.0;
  for (std::size_t c = 0; c < img.cols(); ++c) {
    std::size_t best = begin;
    for (std::size_t r = begin + 1; r < end; ++r) {
      if (img(r, c) > img(best, c)) best = r;
    }
    float here = 0.0f;
    for (std::size_t r = lo; r <= hi; ++r) here = std::max(here, img(r, c));
    at_pleura += here;
    col_max += img(best, c);
    const double b = static_cast<double>(best);
    pos_sum += b;
    pos_sq += b * b;
  }
  const double n = static_cast<double>(img.cols());
  const double deficit = col_max > 0.0 ? std::clamp(1.0 - at_pleura / col_max, 0.0, 1.0) : 0.0;
  const double mean = pos_sum / n;
  const double spread = std::sqrt(std::max(0.0, pos_sq / n - mean * mean));
  const double irregularity = std::min(1.0, spread / (cfg.irregularity_scale * static_cast<double>(img.rows())));
  return std::clamp(cfg.consolidation_deficit_weight * deficit + cfg.consolidation_irregularity_weight * irregularity,
                    0.0, 1.0);
}

// Fixed precedence: consolidation, confluent B-lines, discrete B-lines,
// A-lines, otherwise no A-lines.
inline SeverityClass classify(const FeatureSummary& fs, const ScorerConfig& cfg = {}) {
  if (fs.consolidation_score > cfg.tau_consolidation) return SeverityClass(5);
  if (fs.confluent_frac > cfg.tau_confluent) return SeverityClass(4);
  if (fs.b_line_count >= 1) return SeverityClass(3);
  if (fs.a_line_score > cfg.tau_a_line) return SeverityClass(1);
  return SeverityClass(2);
}

inline FeatureSummary summarize(const FeatureMaps& maps, const ScorerConfig& cfg = {}) {
  cfg.validate();
  FeatureSummary fs;
  fs.pleura_row = detect_pleura(maps.lpi, maps.rectified, cfg.pleura_band_lo, cfg.pleura_band_hi);
  fs.a_line_score = fs.pleura_row >= 2 ? detect_a_lines(maps.rectified, fs.pleura_row) : 0.0;
  const auto b = detect_b_lines(maps.shibs, fs.pleura_row, cfg.b_line_threshold_frac, cfg);
  fs.b_line_count = b.count;
  fs.confluent_frac = b.confluent_frac;
  fs.consolidation_score = consolidation_score(maps.rectified, fs.pleura_row, cfg);
  return fs;
}

struct Assessment {
  FeatureMaps maps;
  FeatureSummary summary;
  SeverityClass severity{2};
};

inline Assessment assess(const Image& rectified, const FeatureParams& params = {}, const ScorerConfig& cfg = {}) {
  Assessment a{compute_features(rectified, params), {}, SeverityClass(2)};
  a.summary = summarize(a.maps, cfg);
  a.severity = classify(a.summary, cfg);
  return a;
}

}  // namespace lusfeat

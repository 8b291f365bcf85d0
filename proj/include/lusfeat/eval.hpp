#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lusfeat/image.hpp"

namespace lusfeat {

class DomainError : public Error {
 public:
  using Error::Error;
};

struct LossParams {
  double lambda1 = 0.3;  // reconstruction (MSE) weight
  double lambda2 = 0.7;  // classification (cross-entropy) weight

  void validate() const {
    if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1 + lambda2 > 0.0)) {
      throw std::invalid_argument("loss weights must be non-negative with a positive sum");
    }
  }
};

using ClassVector = std::array<double, SeverityClass::kCount>;

inline double mean_squared_error(const Image& x, const Image& y) {
  require_same_shape(x, y, "mean_squared_error");
  const auto a = x.pixels();
  const auto b = y.pixels();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

// Joint loss of a reconstruct-and-classify network:
//   lambda1 * MSE(X, Y) - lambda2 * sum_i y_i log(yhat_i)
// with y one-hot over the five classes and yhat a probability vector.
inline double lusnet_loss(const Image& target, const Image& output, const ClassVector& onehot, const ClassVector& probs,
                          const LossParams& params = {}) {
  params.validate();
  std::size_t hot = 0;
  std::size_t hot_index = 0;
  for (std::size_t i = 0; i < onehot.size(); ++i) {
    if (onehot[i] == 1.0) {
      ++hot;
      hot_index = i;
    } else if (onehot[i] != 0.0) {
      throw std::invalid_argument("label vector must be one-hot");
    }
  }
  if (hot != 1) throw std::invalid_argument("label vector must be one-hot");

  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("probabilities must sum to 1");
  if (!(probs[hot_index] > 0.0)) {
    throw DomainError("predicted probability of the true class is " + std::to_string(probs[hot_index]) +
                      "; log is undefined");
  }

  const double cross_entropy = -std::log(probs[hot_index]);
  return params.lambda1 * mean_squared_error(target, output) + params.lambda2 * cross_entropy;
}

inline ClassVector one_hot(SeverityClass c) {
  ClassVector v{};
  v[c.index()] = 1.0;
  return v;
}

using AnnotationTriple = std::array<SeverityClass, 3>;

// Fraction of triples where at least two of the three annotators agree.
inline double similarity_score(const std::vector<AnnotationTriple>& triples) {
  if (triples.empty()) throw std::invalid_argument("similarity score needs at least one triple");
  std::size_t similar = 0;
  for (const auto& t : triples) {
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) ++similar;
  }
  return static_cast<double>(similar) / static_cast<double>(triples.size());
}

struct ConfidenceInterval {
  double half_width = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Normal-approximation 95% interval of an accuracy measured on n samples.
inline ConfidenceInterval acc_ci95(double acc, std::size_t n) {
  if (!(acc >= 0.0 && acc <= 1.0)) throw std::invalid_argument("accuracy must lie in [0, 1]");
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  const double hw = 1.96 * std::sqrt(acc * (1.0 - acc) / static_cast<double>(n));
  return {hw, std::max(0.0, acc - hw), std::min(1.0, acc + hw)};
}

struct PerClassMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  std::optional<double> sensitivity;  // empty when TP + FN == 0
  std::optional<double> specificity;  // empty when TN + FP == 0
};

struct ClassMetrics {
  // confusion[truth][pred], zero-based class indices
  std::array<std::array<std::size_t, SeverityClass::kCount>, SeverityClass::kCount> confusion{};
  std::array<PerClassMetrics, SeverityClass::kCount> per_class{};
};

// One-vs-rest accuracy, sensitivity and specificity for each class.
inline ClassMetrics class_metrics(const std::vector<SeverityClass>& pred, const std::vector<SeverityClass>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("prediction and truth lists differ in length (" + std::to_string(pred.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw std::invalid_argument("metrics need at least one sample");
  ClassMetrics m;
  for (std::size_t i = 0; i < pred.size(); ++i) ++m.confusion[truth[i].index()][pred[i].index()];

  const std::size_t n = pred.size();
  for (std::size_t k = 0; k < SeverityClass::kCount; ++k) {
    auto& c = m.per_class[k];
    c.tp = m.confusion[k][k];
    for (std::size_t j = 0; j < SeverityClass::kCount; ++j) {
      if (j == k) continue;
      c.fn += m.confusion[k][j];
      c.fp += m.confusion[j][k];
    }
    c.tn = n - c.tp - c.fn - c.fp;
    c.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    if (c.tp + c.fn > 0) c.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tn + c.fp > 0) c.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Published accuracy cells with their printed +/- half-widths, transcribed
// as printed (including the three cells written "±06"/"±07").

struct PublishedCell {
  int table;  // 2 = cross-validation ablations, 3 = new acquisition system
  std::string_view configuration;
  std::string_view backbone;
  int severity;
  double acc;
  double printed_half_width;
  std::string_view printed;
};

inline const std::vector<PublishedCell>& published_cells() {
  static const std::vector<PublishedCell> cells = [] {
    struct Row {
      std::string_view config;
      int severity;
      std::array<std::string_view, 3> printed;  // Resnet34, VGG16, InceptionV3
    };
    static constexpr std::array<std::string_view, 3> backbones = {"Resnet34", "VGG16", "InceptionV3"};
    const std::vector<Row> table2 = {
        {"Encoder only, image input", 1, {"0.98±0.02", "0.99±0.02", "0.99±0.01"}},
        {"Encoder only, image input", 2, {"0.68±06", "0.63±0.07", "0.63±0.07"}},
        {"Encoder only, image input", 3, {"0.62±07", "0.62±0.07", "0.62±0.07"}},
        {"Encoder only, image input", 4, {"0.65±07", "0.60±0.07", "0.60±0.07"}},
        {"Encoder only, image input", 5, {"0.99±0.01", "1.00±0", "1.00±0"}},
        {"Encoder only, multichannel input", 1, {"0.99±0.01", "0.98±0.02", "0.99±0.01"}},
        {"Encoder only, multichannel input", 2, {"0.64±0.07", "0.65±0.07", "0.63±0.07"}},
        {"Encoder only, multichannel input", 3, {"0.64±0.07", "0.61±0.07", "0.63±0.07"}},
        {"Encoder only, multichannel input", 4, {"0.59±0.07", "0.65±0.07", "0.60±0.07"}},
        {"Encoder only, multichannel input", 5, {"1.00±0", "1.00±0.01", "1.00±0"}},
        {"U-net, image input", 1, {"0.99±0.01", "0.98±0.02", "0.99±0.01"}},
        {"U-net, image input", 2, {"0.94±0.03", "0.92±0.04", "0.95±0.03"}},
        {"U-net, image input", 3, {"0.96±0.03", "0.96±0.03", "0.97±0.03"}},
        {"U-net, image input", 4, {"0.96±0.03", "0.95±0.03", "0.96±0.03"}},
        {"U-net, image input", 5, {"1.00±0", "1.00±0", "1.00±0"}},
        {"U-net, multichannel input", 1, {"0.99±0.01", "0.99±0.02", "0.99±0.01"}},
        {"U-net, multichannel input", 2, {"0.94±0.03", "0.93±0.04", "0.94±0.03"}},
        {"U-net, multichannel input", 3, {"0.95±0.03", "0.95±0.03", "0.96±0.03"}},
        {"U-net, multichannel input", 4, {"0.95±0.03", "0.95±0.03", "0.96±0.03"}},
        {"U-net, multichannel input", 5, {"1.00±0.01", "1.00±0", "1.00±0"}},
        {"U-net, fused input", 1, {"0.99±0.01", "0.99±0.01", "0.99±0.01"}},
        {"U-net, fused input", 2, {"0.94±0.03", "0.95±0.03", "0.93±0.03"}},
        {"U-net, fused input", 3, {"0.95±0.03", "0.96±0.03", "0.95±0.03"}},
        {"U-net, fused input", 4, {"0.95±0.03", "0.96±0.03", "0.95±0.03"}},
        {"U-net, fused input", 5, {"1.00±0.01", "1.00±0", "1.00±0"}},
    };
    const std::vector<Row> table3 = {
        {"Encoder only, image input", 1, {"", "", "0.77±0.06"}},
        {"Encoder only, image input", 2, {"", "", "0.79±0.06"}},
        {"Encoder only, image input", 3, {"", "", "0.25±0.06"}},
        {"Encoder only, image input", 4, {"", "", "0.85±0.05"}},
        {"Encoder only, image input", 5, {"", "", "0.81±0.05"}},
        {"Encoder only, multichannel input", 1, {"", "", "0.82±0.05"}},
        {"Encoder only, multichannel input", 2, {"", "", "0.56±0.07"}},
        {"Encoder only, multichannel input", 3, {"", "", "0.44±0.07"}},
        {"Encoder only, multichannel input", 4, {"", "", "0.87±0.05"}},
        {"Encoder only, multichannel input", 5, {"", "", "0.81±0.05"}},
        {"U-net, image input", 1, {"", "", "0.85±0.05"}},
        {"U-net, image input", 2, {"", "", "0.77±0.06"}},
        {"U-net, image input", 3, {"", "", "0.72±0.06"}},
        {"U-net, image input", 4, {"", "", "0.89±0.04"}},
        {"U-net, image input", 5, {"", "", "0.75±0.06"}},
        {"U-net, multichannel input", 1, {"", "", "0.62±0.07"}},
        {"U-net, multichannel input", 2, {"", "", "0.75±0.06"}},
        {"U-net, multichannel input", 3, {"", "", "0.79±0.06"}},
        {"U-net, multichannel input", 4, {"", "", "0.86±0.05"}},
        {"U-net, multichannel input", 5, {"", "", "0.68±0.06"}},
        {"U-net, fused input", 1, {"", "", "0.85±0.05"}},
        {"U-net, fused input", 2, {"", "", "0.80±0.06"}},
        {"U-net, fused input", 3, {"", "", "0.71±0.06"}},
        {"U-net, fused input", 4, {"", "", "0.91±0.04"}},
        {"U-net, fused input", 5, {"", "", "0.61±0.07"}},
    };

    // "0.94±0.03" -> (0.94, 0.03); "0.68±06" -> (0.68, 0.06); "1.00±0" -> (1.0, 0)
    auto parse = [](std::string_view s) {
      const auto pm = s.find("±");
      const double acc = std::stod(std::string(s.substr(0, pm)));
      const std::string rest(s.substr(pm + std::string_view("±").size()));
      const double hw = rest.find('.') == std::string::npos && rest.size() == 2 ? std::stod(rest) / 100.0
                                                                                 : std::stod(rest);
      return std::pair{acc, hw};
    };

    std::vector<PublishedCell> out;
    auto add = [&](int table, const std::vector<Row>& rows) {
      for (const auto& r : rows) {
        for (std::size_t b = 0; b < 3; ++b) {
          if (r.printed[b].empty()) continue;
          const auto [acc, hw] = parse(r.printed[b]);
          out.push_back({table, r.config, backbones[b], r.severity, acc, hw, r.printed[b]});
        }
      }
    };
    add(2, table2);
    add(3, table3);
    return out;
  }();
  return cells;
}

// Half-width rounded to two decimals, in hundredths.
inline long rounded_hundredths(double half_width) { return std::lround(half_width * 100.0); }

struct CellCheck {
  PublishedCell cell;
  double half_width = 0.0;  // from the printed accuracy, n samples
  bool nominal_match = false;
  // Some accuracy that prints as the published value (|a - acc| <= 0.005)
  // reproduces the printed half-width.
  bool interval_consistent = false;
};

inline CellCheck check_cell(const PublishedCell& cell, std::size_t n = 200) {
  CellCheck out{cell};
  const long want = std::lround(cell.printed_half_width * 100.0);
  out.half_width = acc_ci95(cell.acc, n).half_width;
  out.nominal_match = rounded_hundredths(out.half_width) == want;
  for (int i = -500; i <= 500 && !out.interval_consistent; ++i) {
    const double a = cell.acc + static_cast<double>(i) * 1e-5;
    if (a < 0.0 || a > 1.0) continue;
    if (rounded_hundredths(acc_ci95(a, n).half_width) == want) out.interval_consistent = true;
  }
  return out;
}

}  // namespace lusfeat

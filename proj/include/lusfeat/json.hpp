#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "lusfeat/eval.hpp"
#include "lusfeat/io.hpp"
#include "lusfeat/phantom.hpp"
#include "lusfeat/pipeline.hpp"
#include "lusfeat/rectify.hpp"
#include "lusfeat/scorer.hpp"

namespace nlohmann {

template <>
struct adl_serializer<lusfeat::SeverityClass> {
  static lusfeat::SeverityClass from_json(const json& j) { return lusfeat::SeverityClass(j.get<int>()); }
  static void to_json(json& j, lusfeat::SeverityClass c) { j = c.value(); }
};

}  // namespace nlohmann

namespace lusfeat {

using nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

// Rejects keys the reader does not know, so typos in config files surface.
inline void require_known_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(std::string(what) + ": unknown key \"" + k + "\"");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace detail

inline void to_json(json& j, const Point& p) { j = json{{"row", p.row}, {"col", p.col}}; }
inline void from_json(const json& j, Point& p) {
  detail::require_known_keys(j, {"row", "col"}, "point");
  p.row = j.at("row").get<double>();
  p.col = j.at("col").get<double>();
}

inline void to_json(json& j, const SectorGeometry& g) {
  j = json{{"apex", g.apex}, {"r0", g.r0}, {"r1", g.r1}, {"theta_max", g.theta_max}};
}

inline void to_json(json& j, const LogGaborParams& p) {
  j = json{{"wavelength0", p.wavelength0}, {"sigma_ratio", p.sigma_ratio}};
}
inline void to_json(json& j, const ShadowParams& p) {
  j = json{{"sigma_divisor", p.sigma_divisor}, {"literal_index", p.literal_index}};
}
inline void to_json(json& j, const FeatureParams& p) { j = json{{"log_gabor", p.log_gabor}, {"shadow", p.shadow}}; }

inline void to_json(json& j, const BLine& b) {
  j = json{{"center", b.center}, {"width", b.width}, {"intensity", b.intensity}};
}
inline void from_json(const json& j, BLine& b) {
  detail::require_known_keys(j, {"center", "width", "intensity"}, "b_line");
  b = BLine{};
  b.center = j.at("center").get<double>();
  detail::read_opt(j, "width", b.width);
  detail::read_opt(j, "intensity", b.intensity);
}

inline void to_json(json& j, const Consolidation& c) {
  j = json{{"depth_lo_frac", c.depth_lo_frac}, {"depth_hi_frac", c.depth_hi_frac}, {"intensity", c.intensity}};
}
inline void from_json(const json& j, Consolidation& c) {
  detail::require_known_keys(j, {"depth_lo_frac", "depth_hi_frac", "intensity"}, "consolidation");
  c = Consolidation{};
  detail::read_opt(j, "depth_lo_frac", c.depth_lo_frac);
  detail::read_opt(j, "depth_hi_frac", c.depth_hi_frac);
  detail::read_opt(j, "intensity", c.intensity);
}

inline void to_json(json& j, const PhantomSpec& s) {
  j = json{{"rows", s.rows},
           {"cols", s.cols},
           {"severity", s.severity},
           {"pleura_depth_frac", s.pleura_depth_frac},
           {"pleura_thickness", s.pleura_thickness},
           {"a_line_count", s.a_line_count},
           {"a_line_decay", s.a_line_decay},
           {"b_lines", s.b_lines},
           {"confluent_frac", s.confluent_frac},
           {"consolidation", s.consolidation ? json(*s.consolidation) : json(nullptr)},
           {"speckle_sigma", s.speckle_sigma},
           {"seed", s.seed},
           {"tissue_level", s.tissue_level},
           {"lung_level", s.lung_level},
           {"b_line_level", s.b_line_level},
           {"pleura_irregularity", s.pleura_irregularity}};
}
inline void from_json(const json& j, PhantomSpec& s) {
  detail::require_known_keys(j,
                             {"rows", "cols", "severity", "pleura_depth_frac", "pleura_thickness", "a_line_count",
                              "a_line_decay", "b_lines", "confluent_frac", "consolidation", "speckle_sigma", "seed",
                              "tissue_level", "lung_level", "b_line_level", "pleura_irregularity"},
                             "phantom spec");
  s = PhantomSpec{};
  s.severity = j.at("severity").get<SeverityClass>();
  detail::read_opt(j, "rows", s.rows);
  detail::read_opt(j, "cols", s.cols);
  detail::read_opt(j, "pleura_depth_frac", s.pleura_depth_frac);
  detail::read_opt(j, "pleura_thickness", s.pleura_thickness);
  detail::read_opt(j, "a_line_count", s.a_line_count);
  detail::read_opt(j, "a_line_decay", s.a_line_decay);
  detail::read_opt(j, "b_lines", s.b_lines);
  detail::read_opt(j, "confluent_frac", s.confluent_frac);
  if (j.contains("consolidation") && !j.at("consolidation").is_null()) {
    s.consolidation = j.at("consolidation").get<Consolidation>();
  }
  detail::read_opt(j, "speckle_sigma", s.speckle_sigma);
  detail::read_opt(j, "seed", s.seed);
  detail::read_opt(j, "tissue_level", s.tissue_level);
  detail::read_opt(j, "lung_level", s.lung_level);
  detail::read_opt(j, "b_line_level", s.b_line_level);
  detail::read_opt(j, "pleura_irregularity", s.pleura_irregularity);
}

inline void to_json(json& j, const GroundTruth& t) {
  j = json{{"pleura_row", t.pleura_row},
           {"a_line_rows", t.a_line_rows},
           {"b_line_columns", t.b_line_columns},
           {"severity", t.severity}};
}
inline void from_json(const json& j, GroundTruth& t) {
  t.pleura_row = j.at("pleura_row").get<std::size_t>();
  t.a_line_rows = j.at("a_line_rows").get<std::vector<std::size_t>>();
  t.b_line_columns = j.at("b_line_columns").get<std::vector<std::size_t>>();
  t.severity = j.at("severity").get<SeverityClass>();
}

inline void to_json(json& j, const FeatureSummary& f) {
  j = json{{"pleura_row", f.pleura_row},
           {"a_line_score", f.a_line_score},
           {"b_line_count", f.b_line_count},
           {"confluent_frac", f.confluent_frac},
           {"consolidation_score", f.consolidation_score},
           {"consolidation_score_kind", "artifact-defined proxy"}};
}

inline void to_json(json& j, const ScorerConfig& c) {
  j = json{{"pleura_band_lo", c.pleura_band_lo},
           {"pleura_band_hi", c.pleura_band_hi},
           {"tau_consolidation", c.tau_consolidation},
           {"tau_confluent", c.tau_confluent},
           {"tau_a_line", c.tau_a_line},
           {"b_line_threshold_frac", c.b_line_threshold_frac},
           {"b_line_min_contrast", c.b_line_min_contrast},
           {"b_line_baseline_quantile", c.b_line_baseline_quantile},
           {"b_line_skip_frac", c.b_line_skip_frac},
           {"consolidation_deficit_weight", c.consolidation_deficit_weight},
           {"consolidation_irregularity_weight", c.consolidation_irregularity_weight},
           {"irregularity_scale", c.irregularity_scale}};
}
// Missing keys keep their defaults.
inline void from_json(const json& j, ScorerConfig& c) {
  detail::require_known_keys(
      j,
      {"pleura_band_lo", "pleura_band_hi", "tau_consolidation", "tau_confluent", "tau_a_line", "b_line_threshold_frac",
       "b_line_min_contrast", "b_line_baseline_quantile", "b_line_skip_frac", "consolidation_deficit_weight",
       "consolidation_irregularity_weight", "irregularity_scale"},
      "scorer config");
  c = ScorerConfig{};
  detail::read_opt(j, "pleura_band_lo", c.pleura_band_lo);
  detail::read_opt(j, "pleura_band_hi", c.pleura_band_hi);
  detail::read_opt(j, "tau_consolidation", c.tau_consolidation);
  detail::read_opt(j, "tau_confluent", c.tau_confluent);
  detail::read_opt(j, "tau_a_line", c.tau_a_line);
  detail::read_opt(j, "b_line_threshold_frac", c.b_line_threshold_frac);
  detail::read_opt(j, "b_line_min_contrast", c.b_line_min_contrast);
  detail::read_opt(j, "b_line_baseline_quantile", c.b_line_baseline_quantile);
  detail::read_opt(j, "b_line_skip_frac", c.b_line_skip_frac);
  detail::read_opt(j, "consolidation_deficit_weight", c.consolidation_deficit_weight);
  detail::read_opt(j, "consolidation_irregularity_weight", c.consolidation_irregularity_weight);
  detail::read_opt(j, "irregularity_scale", c.irregularity_scale);
  c.validate();
}

inline void to_json(json& j, const LossParams& p) { j = json{{"lambda1", p.lambda1}, {"lambda2", p.lambda2}}; }

inline void to_json(json& j, const ConfidenceInterval& ci) {
  j = json{{"half_width", ci.half_width}, {"lo", ci.lo}, {"hi", ci.hi}};
}

inline json metrics_json(const ClassMetrics& m) {
  auto ratio = [](const std::optional<double>& v) { return v ? json(*v) : json("n/a"); };
  json classes = json::array();
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    const auto& c = m.per_class[k];
    classes.push_back({{"class", k + 1},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"tn", c.tn},
                       {"fn", c.fn},
                       {"accuracy", c.accuracy},
                       {"sensitivity", ratio(c.sensitivity)},
                       {"specificity", ratio(c.specificity)}});
  }
  return json{{"per_class", classes}, {"confusion", m.confusion}};
}

inline json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON (" + e.what() + ")");
  }
}

inline json load_json(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

// Stable text form: two-space indent and a trailing newline.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline void save_json(const json& j, const std::filesystem::path& path) { write_file_atomic(path, dump_json(j)); }

}  // namespace lusfeat

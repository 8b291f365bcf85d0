#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lusfeat/eval.hpp"
#include "lusfeat/io.hpp"
#include "lusfeat/json.hpp"
#include "lusfeat/phantom.hpp"
#include "lusfeat/pipeline.hpp"
#include "lusfeat/rectify.hpp"
#include "lusfeat/scorer.hpp"

namespace lusfeat::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

inline std::string version_string() {
  return std::string("lusfeat ") + kToolVersion + " (images: PGM P5 maxval 255, PFM float32 little-endian; report schema " +
         std::to_string(kReportSchema) + ")";
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeometryOptions {
  std::vector<double> edges;
  bool auto_edges = false;
  bool identity = false;
  float threshold = 0.0f;
  std::optional<std::size_t> out_rows;
  std::optional<std::size_t> out_cols;
};

struct FeatureOptions {
  double wavelength = LogGaborParams{}.wavelength0;
  double sigma_ratio = LogGaborParams{}.sigma_ratio;
  double sigma_divisor = ShadowParams{}.sigma_divisor;
  bool literal_shadow = false;

  FeatureParams params() const {
    FeatureParams p;
    p.log_gabor = {wavelength, sigma_ratio};
    p.shadow.sigma_divisor = sigma_divisor;
    p.shadow.literal_index = literal_shadow;
    p.log_gabor.validate();
    if (!(sigma_divisor > 0.0)) throw UsageError("--sigma-divisor must be positive");
    return p;
  }
};

namespace detail {

inline void add_geometry_flags(CLI::App* app, GeometryOptions& g) {
  auto* edges = app->add_option("--edges", g.edges, "Fan edge endpoints r0,c0,r1,c1,r0',c0',r1',c1' (left then right)")
                    ->delimiter(',');
  auto* autoe = app->add_flag("--auto-edges", g.auto_edges, "Fit the fan edges from the nonzero support");
  auto* ident = app->add_flag("--identity", g.identity, "Input is already rectangular (default)");
  edges->excludes(autoe)->excludes(ident);
  autoe->excludes(ident);
  app->add_option("--threshold", g.threshold, "Content threshold for edge and radius detection")->capture_default_str();
  app->add_option("--out-rows", g.out_rows, "Rectified rows (default: input rows)");
  app->add_option("--out-cols", g.out_cols, "Rectified columns (default: arc length at the outer radius)");
}

inline void add_feature_flags(CLI::App* app, FeatureOptions& f) {
  app->add_option("--wavelength", f.wavelength, "Log-Gabor center wavelength in pixels")->capture_default_str();
  app->add_option("--sigma-ratio", f.sigma_ratio, "Log-Gabor bandwidth ratio")->capture_default_str();
  app->add_option("--sigma-divisor", f.sigma_divisor, "Shadow Gaussian sigma = rows / divisor")->capture_default_str();
  app->add_flag("--literal-shadow", f.literal_shadow, "Weight I(k, y) as printed, giving SH = I");
}

inline std::string geometry_mode(const GeometryOptions& g) {
  if (!g.edges.empty()) return "edges";
  if (g.auto_edges) return "auto-edges";
  return "identity";
}

inline json geometry_request_json(const GeometryOptions& g) {
  json j{{"mode", geometry_mode(g)}, {"threshold", g.threshold}};
  j["edges"] = g.edges;
  j["out_rows"] = g.out_rows ? json(*g.out_rows) : json(nullptr);
  j["out_cols"] = g.out_cols ? json(*g.out_cols) : json(nullptr);
  return j;
}

inline void check_geometry(const GeometryOptions& g) {
  if (!g.edges.empty() && g.edges.size() != 8) {
    throw UsageError("--edges needs 8 numbers, got " + std::to_string(g.edges.size()));
  }
  if (geometry_mode(g) == "identity" && (g.out_rows || g.out_cols)) {
    throw UsageError("--out-rows/--out-cols need --edges or --auto-edges");
  }
  for (auto v : {g.out_rows, g.out_cols}) {
    if (v && *v < Image::kMinExtent) throw UsageError("rectified size must be at least 2x2");
  }
}

struct Rectified {
  Image image;
  json geometry;
};

inline Rectified apply_geometry(const Image& raw, const GeometryOptions& g) {
  const auto mode = geometry_mode(g);
  if (mode == "identity") return {rectify_identity(raw), json{{"mode", mode}}};

  EdgeSegment left, right;
  if (mode == "edges") {
    const auto& e = g.edges;
    left = {{e[0], e[1]}, {e[2], e[3]}};
    right = {{e[4], e[5]}, {e[6], e[7]}};
  } else {
    std::tie(left, right) = detect_edges(raw, g.threshold);
  }
  const Point apex = estimate_apex(left, right);
  const SectorGeometry geo = derive_geometry(apex, raw, left, right, g.threshold);
  auto [rows, cols] = default_output_size(raw, geo);
  if (g.out_rows) rows = *g.out_rows;
  if (g.out_cols) cols = *g.out_cols;
  return {rectify(raw, geo, rows, cols), json{{"mode", mode}, {"sector", geo}, {"rows", rows}, {"cols", cols}}};
}

inline void check_not_input(const fs::path& in, const fs::path& out) {
  std::error_code ec1, ec2;
  const auto a = fs::weakly_canonical(in, ec1);
  const auto b = fs::weakly_canonical(out, ec2);
  if (!ec1 && !ec2 && a == b) throw UsageError("output '" + out.string() + "' would overwrite input");
}

inline ScorerConfig load_scorer_config(const std::string& path) {
  if (path.empty()) return {};
  return load_json(path).get<ScorerConfig>();
}

inline json effective_config(const std::string& command, json params) {
  return json{{"tool", "lusfeat"}, {"version", kToolVersion}, {"command", command}, {"params", std::move(params)}};
}

inline const std::vector<std::pair<const char*, Image FeatureMaps::*>>& map_members() {
  static const std::vector<std::pair<const char*, Image FeatureMaps::*>> members = {
      {"rectified", &FeatureMaps::rectified}, {"lpi", &FeatureMaps::lpi},     {"ibs", &FeatureMaps::ibs},
      {"shadow", &FeatureMaps::shadow},       {"shibs", &FeatureMaps::shibs}, {"fused", &FeatureMaps::fused}};
  return members;
}

// Writes every map of an assessment plus report.json into dir. The
// rectified map is the geometry output before normalization.
inline json write_frame(const fs::path& dir, const Image& rectified, const Assessment& a, const json& params,
                        const json& geometry, const std::string& input_name) {
  fs::create_directories(dir);
  json maps = json::object();
  for (const auto& [name, member] : map_members()) {
    const std::string file = std::string(name) + ".pfm";
    save_image(std::string_view(name) == "rectified" ? rectified : a.maps.*member, dir / file);
    maps[name] = file;
  }
  json report{{"tool", "lusfeat"},
              {"version", kToolVersion},
              {"schema", kReportSchema},
              {"input", input_name},
              {"params", params},
              {"geometry", geometry},
              {"severity", a.severity},
              {"summary", a.summary},
              {"maps", maps}};
  save_json(report, dir / "report.json");
  return report;
}

inline bool is_frame(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".pfm";
}

inline Image image_from_json(const json& j, const std::string& what) {
  if (j.is_string()) return load_image(j.get<std::string>());
  if (!j.is_object()) throw ConfigError(what + ": expected an image path or {rows, cols, data}");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto data = j.at("data").get<std::vector<float>>();
  if (data.size() != rows * cols) throw ConfigError(what + ": data length does not match rows x cols");
  return Image(rows, cols, std::move(data));
}

inline void emit(const json& result, const std::string& out_path, std::ostream& out) {
  if (!out_path.empty()) save_json(result, out_path);
  out << dump_json(result);
}

inline std::string table_check_grid(std::size_t n) {
  std::ostringstream os;
  os << "table  configuration                      backbone     class  printed     half_width  nominal  interval\n";
  std::size_t t2_cells = 0, t2_nominal = 0, t2_interval = 0, t3_cells = 0, t3_nominal = 0;
  for (const auto& cell : published_cells()) {
    const auto c = check_cell(cell, n);
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-34s %-12s %-6d %-11s %-11.4f %-8s %s\n",
                  cell.table == 2 ? "II" : "III", std::string(cell.configuration).c_str(),
                  std::string(cell.backbone).c_str(), cell.severity, std::string(cell.printed).c_str(), c.half_width,
                  c.nominal_match ? "PASS" : "FAIL", c.interval_consistent ? "consistent" : "inconsistent");
    os << line;
    if (cell.table == 2) {
      ++t2_cells;
      t2_nominal += c.nominal_match;
      t2_interval += c.interval_consistent;
    } else {
      ++t3_cells;
      t3_nominal += c.nominal_match;
    }
  }
  os << "table II: " << t2_nominal << "/" << t2_cells << " cells reproduce the printed half-width at n=" << n << "; "
     << t2_interval << "/" << t2_cells << " are consistent once ACC rounding is allowed\n";
  os << "table III: " << t3_nominal << "/" << t3_cells << " cells reproduce the printed half-width at n=" << n << "\n";
  return os.str();
}

}  // namespace detail

// Runs one command line (without the program name). Exit codes: 0 success,
// 1 processing error, 2 usage error. The effective configuration is echoed
// to `err` as one JSON line before any processing.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Lung ultrasound feature pipeline", "lusfeat"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  GeometryOptions geom;
  FeatureOptions feat;

  // rectify
  std::string rect_in, rect_out;
  auto* rect = app.add_subcommand("rectify", "Scan-convert a fan image to a rectangle");
  rect->add_option("--in", rect_in, "Input image (.pgm/.pfm)")->required();
  rect->add_option("--out", rect_out, "Output image")->required();
  add_geometry_flags(rect, geom);

  // features
  std::string feat_in, feat_lpi, feat_ibs, feat_shadow, feat_shibs, feat_fused;
  auto* features = app.add_subcommand("features", "Compute feature maps of a rectified image");
  features->add_option("--in", feat_in, "Rectified image")->required();
  features->add_option("--lpi", feat_lpi, "Local phase output");
  features->add_option("--ibs", feat_ibs, "Integrated backscatter output");
  features->add_option("--shadow", feat_shadow, "Shadow map output");
  features->add_option("--shibs", feat_shibs, "Shadow-backscatter product output");
  features->add_option("--fused", feat_fused, "Fused image output");
  add_feature_flags(features, feat);

  // fuse
  std::string fuse_in, fuse_lpi, fuse_shibs, fuse_out;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse an image with its local phase and SHIBS maps");
  fuse_cmd->add_option("--in", fuse_in, "Rectified image")->required();
  fuse_cmd->add_option("--lpi", fuse_lpi, "Local phase image")->required();
  fuse_cmd->add_option("--shibs", fuse_shibs, "SHIBS image")->required();
  fuse_cmd->add_option("--out", fuse_out, "Fused output")->required();

  // phantom
  std::optional<int> ph_class;
  std::size_t ph_rows = 512, ph_cols = 512;
  std::uint64_t ph_seed = 0;
  double ph_speckle = PhantomSpec{}.speckle_sigma;
  bool ph_randomize = false;
  std::string ph_spec, ph_out, ph_truth;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic frame with ground truth");
  auto* ph_class_opt = phantom->add_option("--class", ph_class, "Severity class 1..5")->check(CLI::Range(1, 5));
  auto* ph_rows_opt = phantom->add_option("--rows", ph_rows, "Rows")->capture_default_str();
  auto* ph_cols_opt = phantom->add_option("--cols", ph_cols, "Columns")->capture_default_str();
  auto* ph_seed_opt = phantom->add_option("--seed", ph_seed, "Random seed")->capture_default_str();
  auto* ph_speckle_opt =
      phantom->add_option("--speckle", ph_speckle, "Multiplicative speckle sigma")->capture_default_str();
  auto* ph_random_opt = phantom->add_flag("--randomize", ph_randomize, "Draw class parameters from the seed");
  auto* ph_spec_opt = phantom->add_option("--spec", ph_spec, "Full phantom spec as JSON (replaces the other flags)");
  for (auto* o : {ph_class_opt, ph_rows_opt, ph_cols_opt, ph_seed_opt, ph_speckle_opt, ph_random_opt}) {
    ph_spec_opt->excludes(o);
  }
  phantom->add_option("--out", ph_out, "Output image")->required();
  phantom->add_option("--truth", ph_truth, "Ground truth JSON output");

  // classify
  std::string cl_in, cl_config, cl_maps, cl_report;
  auto* classify_cmd = app.add_subcommand("classify", "Score the severity class of a frame");
  classify_cmd->add_option("--in", cl_in, "Input frame")->required();
  classify_cmd->add_option("--config", cl_config, "Scorer thresholds (JSON)");
  classify_cmd->add_option("--maps-dir", cl_maps, "Directory for intermediate maps");
  classify_cmd->add_option("--report", cl_report, "Report JSON output")->required();
  add_geometry_flags(classify_cmd, geom);
  add_feature_flags(classify_cmd, feat);

  // pipeline
  std::string pl_in, pl_out, pl_config;
  std::size_t pl_workers = 0;
  auto* pipeline = app.add_subcommand("pipeline", "Rectify, compute all maps and score one frame or a directory");
  pipeline->add_option("--in", pl_in, "Input frame or directory of frames")->required();
  pipeline->add_option("--out-dir", pl_out, "Output directory")->required();
  pipeline->add_option("--workers", pl_workers, "Worker threads (0: available parallelism)")->capture_default_str();
  pipeline->add_option("--config", pl_config, "Scorer thresholds (JSON)");
  add_geometry_flags(pipeline, geom);
  add_feature_flags(pipeline, feat);

  // eval
  bool ev_table = false;
  std::size_t ev_table_n = 200;
  auto* eval = app.add_subcommand("eval", "Evaluation formulas");
  eval->add_flag("--table2-check", ev_table, "Reproduce the published accuracy half-widths");
  eval->add_option("--n", ev_table_n, "Samples per class for --table2-check")->capture_default_str();
  eval->require_subcommand(0, 1);

  double ci_acc = 0.0;
  std::size_t ci_n = 200;
  std::string ci_out;
  auto* ev_ci = eval->add_subcommand("ci", "95% interval of an accuracy");
  ev_ci->add_option("--acc", ci_acc, "Accuracy in [0, 1]")->required();
  ev_ci->add_option("--n", ci_n, "Sample count")->capture_default_str();
  ev_ci->add_option("--out", ci_out, "Also write the result here");

  std::string loss_in, loss_out;
  auto* ev_loss = eval->add_subcommand("loss", "Joint reconstruction and classification loss");
  ev_loss->add_option("--input", loss_in, "JSON: target, output, label, probs[, lambda1, lambda2]")->required();
  ev_loss->add_option("--out", loss_out, "Also write the result here");

  std::string sim_in, sim_out;
  auto* ev_sim = eval->add_subcommand("similarity", "Fraction of annotation triples with a majority");
  ev_sim->add_option("--input", sim_in, "JSON: {\"triples\": [[a, b, c], ...]}")->required();
  ev_sim->add_option("--out", sim_out, "Also write the result here");

  std::string met_in, met_out;
  auto* ev_met = eval->add_subcommand("metrics", "Per-class accuracy, sensitivity and specificity");
  ev_met->add_option("--input", met_in, "JSON: {\"pred\": [...], \"truth\": [...]}")->required();
  ev_met->add_option("--out", met_out, "Also write the result here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto echo = [&](const std::string& command, json params) {
    err << effective_config(command, std::move(params)).dump() << "\n";
  };

  try {
    if (rect->parsed()) {
      check_geometry(geom);
      check_not_input(rect_in, rect_out);
      echo("rectify", {{"in", rect_in}, {"out", rect_out}, {"geometry", geometry_request_json(geom)}});
      const std::string bytes = read_file(rect_in);
      const Image raw = decode_image(bytes, format_from_path(rect_in));
      if (geometry_mode(geom) == "identity" && format_from_path(rect_in) == format_from_path(rect_out)) {
        write_file_atomic(rect_out, bytes);
      } else {
        save_image(apply_geometry(raw, geom).image, rect_out);
      }
      return 0;
    }

    if (features->parsed()) {
      const auto params = feat.params();
      const std::vector<std::pair<std::string, std::string*>> outputs = {{"lpi", &feat_lpi},
                                                                         {"ibs", &feat_ibs},
                                                                         {"shadow", &feat_shadow},
                                                                         {"shibs", &feat_shibs},
                                                                         {"fused", &feat_fused}};
      json outs = json::object();
      for (const auto& [name, path] : outputs) {
        if (!path->empty()) {
          check_not_input(feat_in, *path);
          outs[name] = *path;
        }
      }
      if (outs.empty()) throw UsageError("features: give at least one of --lpi --ibs --shadow --shibs --fused");
      echo("features", {{"in", feat_in}, {"outputs", outs}, {"features", params}});
      const auto maps = compute_features(load_image(feat_in), params);
      if (!feat_lpi.empty()) save_image(maps.lpi, feat_lpi);
      if (!feat_ibs.empty()) save_image(maps.ibs, feat_ibs);
      if (!feat_shadow.empty()) save_image(maps.shadow, feat_shadow);
      if (!feat_shibs.empty()) save_image(maps.shibs, feat_shibs);
      if (!feat_fused.empty()) save_image(maps.fused, feat_fused);
      return 0;
    }

    if (fuse_cmd->parsed()) {
      for (const auto& in : {fuse_in, fuse_lpi, fuse_shibs}) check_not_input(in, fuse_out);
      echo("fuse", {{"in", fuse_in}, {"lpi", fuse_lpi}, {"shibs", fuse_shibs}, {"out", fuse_out}});
      save_image(fuse(normalize(load_image(fuse_in)), load_image(fuse_lpi), load_image(fuse_shibs)), fuse_out);
      return 0;
    }

    if (phantom->parsed()) {
      PhantomSpec spec;
      if (!ph_spec.empty()) {
        spec = load_json(ph_spec).get<PhantomSpec>();
      } else {
        if (!ph_class) throw UsageError("phantom: --class or --spec is required");
        const SeverityClass cls(*ph_class);
        if (ph_randomize) {
          spec = sample_spec(cls, ph_rows, ph_cols, ph_seed, ph_speckle);
        } else {
          spec = default_spec(cls, ph_rows, ph_cols, ph_seed);
          spec.speckle_sigma = ph_speckle;
        }
      }
      echo("phantom", {{"spec", spec}, {"out", ph_out}, {"truth", ph_truth.empty() ? json(nullptr) : json(ph_truth)}});
      const auto ph = generate(spec);
      save_image(ph.image, ph_out);
      if (!ph_truth.empty()) save_json(json(ph.truth), ph_truth);
      return 0;
    }

    if (classify_cmd->parsed()) {
      check_geometry(geom);
      check_not_input(cl_in, cl_report);
      const auto params = feat.params();
      const auto cfg = load_scorer_config(cl_config);
      const json eff{{"geometry", geometry_request_json(geom)}, {"features", params}, {"scorer", cfg}};
      echo("classify", {{"in", cl_in}, {"report", cl_report}, {"maps_dir", cl_maps}, {"config", eff}});
      const auto rect_img = apply_geometry(load_image(cl_in), geom);
      const auto a = assess(rect_img.image, params, cfg);
      json maps = json::object();
      if (!cl_maps.empty()) {
        fs::create_directories(cl_maps);
        for (const auto& [name, member] : map_members()) {
          const auto path = fs::path(cl_maps) / (std::string(name) + ".pfm");
          save_image(std::string_view(name) == "rectified" ? rect_img.image : a.maps.*member, path);
          maps[name] = path.string();
        }
      }
      const json report{{"tool", "lusfeat"},
                        {"version", kToolVersion},
                        {"schema", kReportSchema},
                        {"input", cl_in},
                        {"params", eff},
                        {"geometry", rect_img.geometry},
                        {"severity", a.severity},
                        {"summary", a.summary},
                        {"maps", maps}};
      save_json(report, cl_report);
      return 0;
    }

    if (pipeline->parsed()) {
      check_geometry(geom);
      const auto params = feat.params();
      const auto cfg = load_scorer_config(pl_config);
      const std::size_t workers =
          pl_workers > 0 ? pl_workers : std::max<std::size_t>(1, std::thread::hardware_concurrency());
      const json eff{{"geometry", geometry_request_json(geom)}, {"features", params}, {"scorer", cfg}};
      echo("pipeline", {{"in", pl_in}, {"out_dir", pl_out}, {"workers", workers}, {"config", eff}});

      const fs::path in(pl_in);
      const fs::path out_dir(pl_out);
      auto process = [&](const fs::path& frame, const fs::path& dir) {
        const auto rect_img = apply_geometry(load_image(frame), geom);
        const auto a = assess(rect_img.image, params, cfg);
        return write_frame(dir, rect_img.image, a, eff, rect_img.geometry, frame.filename().string());
      };

      if (!fs::is_directory(in)) {
        if (!fs::exists(in)) throw FormatError(FormatError::Kind::Io, "cannot open '" + pl_in + "' for reading");
        process(in, out_dir);
        return 0;
      }

      std::vector<fs::path> frames;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && is_frame(entry.path())) frames.push_back(entry.path());
      }
      std::sort(frames.begin(), frames.end());
      if (frames.empty()) throw UsageError("pipeline: no .pgm or .pfm frames in '" + pl_in + "'");

      std::vector<json> reports(frames.size());
      std::vector<std::string> errors(frames.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < frames.size(); i = next++) {
          try {
            reports[i] = process(frames[i], out_dir / frames[i].stem());
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      };
      {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(workers, frames.size()); ++t) pool.emplace_back(worker);
      }

      json index = json::array();
      bool failed = false;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto name = frames[i].filename().string();
        if (!errors[i].empty()) {
          err << "error: " << name << ": " << errors[i] << "\n";
          index.push_back({{"input", name}, {"error", errors[i]}});
          failed = true;
        } else {
          index.push_back({{"input", name},
                           {"dir", frames[i].stem().string()},
                           {"severity", reports[i]["severity"]},
                           {"summary", reports[i]["summary"]}});
        }
      }
      save_json(json{{"tool", "lusfeat"},
                     {"version", kToolVersion},
                     {"schema", kReportSchema},
                     {"params", eff},
                     {"frames", index}},
                out_dir / "report.json");
      return failed ? 1 : 0;
    }

    if (eval->parsed()) {
      if (ev_ci->parsed()) {
        echo("eval ci", {{"acc", ci_acc}, {"n", ci_n}});
        json r = acc_ci95(ci_acc, ci_n);
        r["acc"] = ci_acc;
        r["n"] = ci_n;
        emit(r, ci_out, out);
        return 0;
      }
      if (ev_loss->parsed()) {
        const json in = load_json(loss_in);
        lusfeat::detail::require_known_keys(in, {"target", "output", "label", "probs", "lambda1", "lambda2"}, "loss input");
        LossParams p;
        lusfeat::detail::read_opt(in, "lambda1", p.lambda1);
        lusfeat::detail::read_opt(in, "lambda2", p.lambda2);
        echo("eval loss", {{"input", loss_in}, {"loss", p}});
        const Image target = image_from_json(in.at("target"), "target");
        const Image output = image_from_json(in.at("output"), "output");
        const auto label = in.at("label").get<SeverityClass>();
        const auto probs = in.at("probs").get<ClassVector>();
        const double loss = lusnet_loss(target, output, one_hot(label), probs, p);
        emit(json{{"loss", loss},
                  {"mse", mean_squared_error(target, output)},
                  {"cross_entropy", -std::log(probs[label.index()])},
                  {"lambda1", p.lambda1},
                  {"lambda2", p.lambda2}},
             loss_out, out);
        return 0;
      }
      if (ev_sim->parsed()) {
        const json in = load_json(sim_in);
        lusfeat::detail::require_known_keys(in, {"triples"}, "similarity input");
        echo("eval similarity", {{"input", sim_in}});
        const auto triples = in.at("triples").get<std::vector<AnnotationTriple>>();
        const double s = similarity_score(triples);
        emit(json{{"similarity", s}, {"triples", triples.size()}}, sim_out, out);
        return 0;
      }
      if (ev_met->parsed()) {
        const json in = load_json(met_in);
        lusfeat::detail::require_known_keys(in, {"pred", "truth"}, "metrics input");
        echo("eval metrics", {{"input", met_in}});
        const auto m = class_metrics(in.at("pred").get<std::vector<SeverityClass>>(),
                                     in.at("truth").get<std::vector<SeverityClass>>());
        emit(metrics_json(m), met_out, out);
        return 0;
      }
      if (ev_table) {
        if (ev_table_n == 0) throw UsageError("--n must be positive");
        echo("eval table2-check", {{"n", ev_table_n}});
        out << table_check_grid(ev_table_n);
        return 0;
      }
      throw UsageError("eval: give a subcommand (loss, similarity, ci, metrics) or --table2-check");
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const GeometryError& e) {
    err << "geometry error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace lusfeat::cli

#pragma once

// JSON and CSV interchange: configuration files and overrides, suite files,
// and the run reports written by the command-line tool.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alw/error.hpp"
#include "alw/phantom.hpp"
#include "alw/segmenter.hpp"

namespace alw::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Configuration

inline std::string_view to_string(RoiPolicy p) { return p == RoiPolicy::seed_box ? "seed_box" : "circle_box"; }

inline RoiPolicy roi_policy_from_string(std::string_view s) {
  if (s == "circle_box") return RoiPolicy::circle_box;
  if (s == "seed_box") return RoiPolicy::seed_box;
  throw InvalidConfig("unknown roi_policy '" + std::string(s) + "'");
}

inline json to_json(const SegConfig& c) {
  return json{{"model", energy::to_string(c.model)},
              {"mu", c.mu},
              {"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"window_mode", c.window_mode.to_string()},
              {"epsilon", c.epsilon},
              {"band_radius", c.band_radius},
              {"dt_max", c.dt_max},
              {"max_step", c.max_step},
              {"reinit_every", c.reinit_every},
              {"max_iters", c.max_iters},
              {"conv_tol", c.conv_tol},
              {"conv_tol_energy", c.conv_tol_energy},
              {"conv_patience", c.conv_patience},
              {"n_g", c.n_g},
              {"glcm_d", c.glcm_d},
              {"hist_bins", c.hist_bins},
              {"w_min", c.w_min},
              {"w_max", c.w_max},
              {"contrast_scale", c.contrast_scale},
              {"window_log_base", c.window_log_base},
              {"window_hysteresis", c.window_hysteresis},
              {"force_quantile", c.force_quantile},
              {"clahe", c.clahe},
              {"clahe_tiles_x", c.clahe_params.tiles_x},
              {"clahe_tiles_y", c.clahe_params.tiles_y},
              {"clahe_clip_limit", c.clahe_params.clip_limit},
              {"clahe_bins", c.clahe_params.bins},
              {"roi_margin", c.roi_margin},
              {"roi_policy", to_string(c.roi_policy)},
              {"threads", c.threads}};
}

namespace detail {

inline double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InvalidConfig("config key '" + key + "' must be a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<int>(v.get<double>()))) {
      return static_cast<int>(v.get<double>());
    }
    throw InvalidConfig("config key '" + key + "' must be an integer");
  }
  return v.get<int>();
}

inline bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw InvalidConfig("config key '" + key + "' must be true or false");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw InvalidConfig("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Sets one configuration field from a JSON value; unknown keys are rejected.
inline void set_field(SegConfig& c, const std::string& key, const json& v) {
  using namespace detail;
  if (key == "model") c.model = energy::model_from_string(as_string(v, key));
  else if (key == "mu") c.mu = as_number(v, key);
  else if (key == "lambda1") c.lambda1 = as_number(v, key);
  else if (key == "lambda2") c.lambda2 = as_number(v, key);
  else if (key == "window_mode") c.window_mode = WindowMode::parse(as_string(v, key));
  else if (key == "epsilon") c.epsilon = as_number(v, key);
  else if (key == "band_radius") c.band_radius = as_number(v, key);
  else if (key == "dt_max") c.dt_max = as_number(v, key);
  else if (key == "max_step") c.max_step = as_number(v, key);
  else if (key == "reinit_every") c.reinit_every = as_int(v, key);
  else if (key == "max_iters") c.max_iters = as_int(v, key);
  else if (key == "conv_tol") c.conv_tol = as_number(v, key);
  else if (key == "conv_tol_energy") c.conv_tol_energy = as_number(v, key);
  else if (key == "conv_patience") c.conv_patience = as_int(v, key);
  else if (key == "n_g") c.n_g = as_int(v, key);
  else if (key == "glcm_d") c.glcm_d = as_int(v, key);
  else if (key == "hist_bins") c.hist_bins = as_int(v, key);
  else if (key == "w_min") c.w_min = as_int(v, key);
  else if (key == "w_max") c.w_max = as_int(v, key);
  else if (key == "contrast_scale") c.contrast_scale = as_number(v, key);
  else if (key == "window_log_base") c.window_log_base = as_number(v, key);
  else if (key == "window_hysteresis") c.window_hysteresis = as_number(v, key);
  else if (key == "force_quantile") c.force_quantile = as_number(v, key);
  else if (key == "clahe") c.clahe = as_bool(v, key);
  else if (key == "clahe_tiles_x") c.clahe_params.tiles_x = as_int(v, key);
  else if (key == "clahe_tiles_y") c.clahe_params.tiles_y = as_int(v, key);
  else if (key == "clahe_clip_limit") c.clahe_params.clip_limit = as_number(v, key);
  else if (key == "clahe_bins") c.clahe_params.bins = as_int(v, key);
  else if (key == "roi_margin") c.roi_margin = as_int(v, key);
  else if (key == "roi_policy") c.roi_policy = roi_policy_from_string(as_string(v, key));
  else if (key == "threads") c.threads = as_int(v, key);
  else throw InvalidConfig("unknown config key '" + key + "'");
}

/// Applies every key of a JSON object onto `c`.
inline void apply(SegConfig& c, const json& j) {
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
  for (const auto& [key, value] : j.items()) set_field(c, key, value);
}

/// Applies a "key=value" override. The value is read as JSON when it parses
/// (numbers, true/false), otherwise as a bare string.
inline void apply_override(SegConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidConfig("override must look like key=value: '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  const std::string text = kv.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded() || value.is_object() || value.is_array() || value.is_null()) value = text;
  set_field(c, key, value);
}

inline SegConfig from_json(const json& j, SegConfig base = {}) {
  apply(base, j);
  return base;
}

// ---------------------------------------------------------------------------
// Suites

inline json to_json(const phantom::PhantomSpec& s) {
  return json{{"id", s.id},
              {"shape", phantom::to_string(s.shape)},
              {"size_px", s.size_px},
              {"aspect", s.aspect},
              {"angle_deg", s.angle_deg},
              {"contrast", s.contrast},
              {"heterogeneity", s.heterogeneity},
              {"noise_sigma", s.noise_sigma},
              {"background", phantom::to_string(s.background)},
              {"texture_amplitude", s.texture_amplitude},
              {"background_level", s.background_level},
              {"canvas", s.canvas},
              {"rng_seed", s.rng_seed}};
}

inline json suite_to_json(const std::vector<phantom::PhantomSpec>& suite) {
  json cases = json::array();
  for (const auto& s : suite) cases.push_back(to_json(s));
  return json{{"cases", cases}};
}

namespace detail {

struct SuiteError {
  std::string path;
  std::string message;
  [[noreturn]] void raise() const { throw InvalidInput("suite schema violation at " + path + ": " + message); }
};

inline phantom::PhantomSpec parse_case(const json& c, const std::string& path) {
  if (!c.is_object()) SuiteError{path, "expected an object"}.raise();
  for (const char* req : {"id", "shape", "size_px", "contrast"}) {
    if (!c.contains(req)) SuiteError{path, std::string("missing required key '") + req + "'"}.raise();
  }
  phantom::PhantomSpec s;
  auto number = [&](const std::string& key, double& out) {
    if (!c.contains(key)) return;
    if (!c[key].is_number()) SuiteError{path + "." + key, "expected a number"}.raise();
    out = c[key].get<double>();
  };
  auto text = [&](const std::string& key) -> std::string {
    if (!c[key].is_string()) SuiteError{path + "." + key, "expected a string"}.raise();
    return c[key].get<std::string>();
  };
  for (const auto& [key, value] : c.items()) {
    static const char* known[] = {"id",           "shape",      "size_px",    "aspect",
                                  "angle_deg",    "contrast",   "heterogeneity", "noise_sigma",
                                  "background",   "texture_amplitude", "background_level", "canvas",
                                  "rng_seed"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) SuiteError{path + "." + key, "unknown key"}.raise();
  }
  s.id = text("id");
  if (s.id.empty()) SuiteError{path + ".id", "must not be empty"}.raise();
  try {
    s.shape = phantom::shape_from_string(text("shape"));
  } catch (const InvalidInput& e) {
    SuiteError{path + ".shape", e.what()}.raise();
  }
  if (c.contains("background")) {
    try {
      s.background = phantom::background_from_string(text("background"));
    } catch (const InvalidInput& e) {
      SuiteError{path + ".background", e.what()}.raise();
    }
  }
  number("size_px", s.size_px);
  number("aspect", s.aspect);
  number("angle_deg", s.angle_deg);
  number("contrast", s.contrast);
  number("heterogeneity", s.heterogeneity);
  number("noise_sigma", s.noise_sigma);
  number("texture_amplitude", s.texture_amplitude);
  number("background_level", s.background_level);
  if (c.contains("canvas")) {
    if (!c["canvas"].is_number_integer()) SuiteError{path + ".canvas", "expected an integer"}.raise();
    s.canvas = c["canvas"].get<int>();
  }
  if (c.contains("rng_seed")) {
    if (!c["rng_seed"].is_number_unsigned()) SuiteError{path + ".rng_seed", "expected a non-negative integer"}.raise();
    s.rng_seed = c["rng_seed"].get<std::uint64_t>();
  }
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    SuiteError{path, e.what()}.raise();
  }
  return s;
}

}  // namespace detail

/// Parses a suite document `{"cases": [...]}`. Throws InvalidInput naming the
/// first violation (JSON path and reason).
inline std::vector<phantom::PhantomSpec> parse_suite(const json& j) {
  if (!j.is_object()) detail::SuiteError{"$", "expected an object with a 'cases' array"}.raise();
  if (!j.contains("cases")) detail::SuiteError{"$", "missing required key 'cases'"}.raise();
  for (const auto& [key, value] : j.items()) {
    if (key != "cases" && key != "description") detail::SuiteError{"$." + key, "unknown key"}.raise();
  }
  const json& cases = j["cases"];
  if (!cases.is_array()) detail::SuiteError{"$.cases", "expected an array"}.raise();
  if (cases.empty()) detail::SuiteError{"$.cases", "suite has no cases"}.raise();
  std::vector<phantom::PhantomSpec> out;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string path = "$.cases[" + std::to_string(i) + "]";
    auto spec = detail::parse_case(cases[i], path);
    if (seen.count(spec.id)) detail::SuiteError{path + ".id", "duplicate id '" + spec.id + "'"}.raise();
    seen[spec.id] = i;
    out.push_back(std::move(spec));
  }
  return out;
}

inline std::vector<phantom::PhantomSpec> parse_suite_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("suite file is not valid JSON");
  return parse_suite(j);
}

// ---------------------------------------------------------------------------
// Reports

inline json seed_json(const SeedAxis& s) { return json::array({s.p1.x, s.p1.y, s.p2.x, s.p2.y}); }

inline json roi_json(const Roi& r) { return json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}}; }

/// Run report of one segmentation (also used for collapsed runs' partial traces).
inline json segment_report(const SegResult& r, const SegConfig& config, const SeedAxis& seed) {
  json windows = json::array();
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    windows.push_back(json{{"min_x", it.windows.min_x},
                           {"mean_x", it.windows.mean_x},
                           {"max_x", it.windows.max_x},
                           {"min_y", it.windows.min_y},
                           {"mean_y", it.windows.mean_y},
                           {"max_y", it.windows.max_y}});
    iterations.push_back(json{{"mean_energy", it.mean_energy},
                              {"sign_change_fraction", it.sign_change_fraction},
                              {"zls_points", it.zls_points},
                              {"reinitialized", it.reinitialized}});
  }
  std::size_t inside = 0;
  for (auto v : r.mask.values()) inside += v ? 1 : 0;
  return json{{"kind", "segment"},
              {"schema_version", kSchemaVersion},
              {"config", to_json(config)},
              {"seed", seed_json(seed)},
              {"roi", roi_json(r.roi)},
              {"stop_reason", to_string(r.stop_reason)},
              {"converged", r.converged},
              {"iterations", r.iterations_run},
              {"energy_trace", r.energy_trace},
              {"window_trace", windows},
              {"iteration_trace", iterations},
              {"global_texture", json{{"gh", r.global_texture.gh}, {"gc", r.global_texture.gc}}},
              {"mask_pixels", inside}};
}

inline json phantom_report(const phantom::PhantomSpec& spec, const phantom::Phantom& ph) {
  std::size_t inside = 0;
  for (auto v : ph.truth.values()) inside += v ? 1 : 0;
  return json{{"kind", "phantom"},
              {"schema_version", kSchemaVersion},
              {"spec", to_json(spec)},
              {"seed", seed_json(ph.seed)},
              {"width", ph.image.width()},
              {"height", ph.image.height()},
              {"truth_pixels", inside}};
}

inline json interval_json(const phantom::Interval& i) { return json::array({i.lo, i.hi}); }

inline json eval_json(const phantom::EvalReport& rep) {
  json cases = json::array();
  for (const auto& c : rep.cases) {
    json runs = json::array();
    for (const auto& r : c.runs) {
      json run{{"seed_index", r.seed_index}, {"ok", r.ok}, {"dice", r.dice}, {"iterations", r.iterations},
               {"converged", r.converged}};
      if (!r.ok) run["error"] = r.error;
      runs.push_back(run);
    }
    cases.push_back(json{{"case_id", c.case_id},
                         {"method", c.method},
                         {"ok", c.ok},
                         {"mean_dice", c.mean_dice},
                         {"dice_spread", c.dice_spread},
                         {"runs", runs}});
  }
  json summaries = json::array();
  for (const auto& s : rep.summaries) {
    summaries.push_back(json{{"method", s.method},
                             {"mean_dice", s.mean_dice},
                             {"ci95", interval_json(s.ci)},
                             {"robustness_spread", s.robustness_spread},
                             {"cases_ok", s.cases_ok},
                             {"failures", s.failures}});
  }
  json paired = json::array();
  for (const auto& p : rep.paired) {
    json big = json::array();
    for (const auto& [id, d] : p.big_differences) big.push_back(json{{"case_id", id}, {"difference", d}});
    paired.push_back(json{{"reference", p.reference},
                          {"method", p.method},
                          {"mean_difference", p.mean_difference},
                          {"ci95", interval_json(p.ci)},
                          {"paired_cases", p.paired_cases},
                          {"big_differences", big}});
  }
  return json{{"methods", rep.methods}, {"case_ids", rep.case_ids}, {"cases", cases},
              {"summaries", summaries}, {"paired", paired}, {"failures", rep.failures}};
}

inline json compare_report(const phantom::EvalReport& rep, const SegConfig& base, const phantom::CompareOptions& opt) {
  json j = eval_json(rep);
  j["kind"] = "compare";
  j["schema_version"] = kSchemaVersion;
  j["config"] = to_json(base);
  j["options"] = json{{"perturbations", opt.perturbations},
                      {"perturb_diameter", opt.perturb_diameter},
                      {"bootstrap_resamples", opt.bootstrap_resamples},
                      {"bootstrap_seed", opt.bootstrap_seed},
                      {"big_difference", opt.big_difference}};
  return j;
}

/// Flat per-run Dice table.
inline std::string dice_csv(const phantom::EvalReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "case_id,method,seed_index,ok,dice,iterations,converged\n";
  for (const auto& c : rep.cases) {
    for (const auto& r : c.runs) {
      out << c.case_id << ',' << c.method << ',' << r.seed_index << ',' << (r.ok ? 1 : 0) << ',' << r.dice << ','
          << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

/// Serialized JSON text with a trailing newline; stable key order.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace alw::report

// alw: command-line front end for adaptive-local-window level-set segmentation.
//
//   alw segment --image a.pgm --seed 50,50,70,50 [--model local-pc] [--window fixed:11]
//               [--config cfg.json] [--out DIR] [key=value ...]
//   alw phantom --out DIR [--shape ellipse --size 60 ...] | [--suite S.json --case ID]
//   alw compare [--suite S.json | --builtin NAME] [--methods alw,flw11,...] [--out DIR]
//   alw sweep   --param glcm_d --values 1,2,3,4,5 [--suite S.json | --builtin NAME] [--method alw]
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure (contour collapse).

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alw/alw.hpp"

namespace fs = std::filesystem;
using alw::report::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

alw::SeedAxis parse_seed(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw alw::InvalidSeed("seed must be x1,y1,x2,y2");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    std::size_t used = 0;
    try {
      v[i] = std::stod(parts[static_cast<std::size_t>(i)], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != parts[static_cast<std::size_t>(i)].size() || !std::isfinite(v[i])) {
      throw alw::InvalidSeed("seed coordinate '" + parts[static_cast<std::size_t>(i)] + "' is not a number");
    }
  }
  return {{v[0], v[1]}, {v[2], v[3]}};
}

struct ConfigArgs {
  std::string config_file;
  std::string model;
  std::string window;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file (keys mirror the configuration fields)");
    app->add_option("--model", model, "energy model: local-pc, global-pc, ms, hs");
    app->add_option("--window", window, "window mode: adaptive, global, fixed:K");
    app->add_option("overrides", overrides, "key=value configuration overrides");
  }

  // defaults < config file < command-line flags < key=value overrides
  alw::SegConfig build(alw::SegConfig config = {}) const {
    if (!config_file.empty()) {
      const auto j = json::parse(alw::io::read_file(config_file), nullptr, false);
      if (j.is_discarded()) throw alw::InvalidConfig("config file '" + config_file + "' is not valid JSON");
      alw::report::apply(config, j);
    }
    if (!model.empty()) config.model = alw::energy::model_from_string(model);
    if (!window.empty()) config.window_mode = alw::WindowMode::parse(window);
    for (const auto& kv : overrides) alw::report::apply_override(config, kv);
    config.validate();
    return config;
  }
};

struct SuiteArgs {
  std::string suite_file;
  std::string builtin;

  void attach(CLI::App* app) {
    app->add_option("--suite", suite_file, "suite JSON file ({\"cases\": [...]})");
    app->add_option("--builtin", builtin, "built-in suite: standard, easy, hard, large-textured, small-smooth");
  }

  std::vector<alw::phantom::PhantomSpec> load() const {
    if (!suite_file.empty() && !builtin.empty()) throw alw::InvalidInput("--suite and --builtin are exclusive");
    if (!suite_file.empty()) return alw::report::parse_suite_text(alw::io::read_file(suite_file));
    return alw::suites::by_name(builtin.empty() ? "standard" : builtin);
  }
};

int run_segment(const std::string& image_path, const std::string& seed_text, const ConfigArgs& cfg,
                const std::string& out_dir) {
  const alw::SeedAxis seed = parse_seed(seed_text);
  const alw::SegConfig config = cfg.build();
  const auto raw = alw::io::read_raster(image_path);
  fs::create_directories(out_dir);
  try {
    const alw::SegResult r = alw::segment(raw, seed, config);
    alw::io::write_mask_pgm(fs::path(out_dir) / "mask.pgm", r.mask);
    alw::io::write_file_atomic(fs::path(out_dir) / "report.json", alw::report::dump(alw::report::segment_report(r, config, seed)));
    std::cout << "stop_reason=" << alw::to_string(r.stop_reason) << " iterations=" << r.iterations_run << "\n";
    return kExitOk;
  } catch (const alw::SegmentationCollapse& e) {
    alw::io::write_file_atomic(fs::path(out_dir) / "report.json",
                               alw::report::dump(alw::report::segment_report(e.partial(), config, seed)));
    std::cerr << "alw: contour collapsed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

struct PhantomArgs {
  alw::phantom::PhantomSpec spec;
  std::string shape = "ellipse";
  std::string background = "flat";
  std::string case_id;
};

int run_phantom(PhantomArgs args, const SuiteArgs& suite, const std::string& out_dir) {
  alw::phantom::PhantomSpec spec = args.spec;
  if (!suite.suite_file.empty() || !suite.builtin.empty()) {
    if (args.case_id.empty()) throw alw::InvalidInput("--case is required with --suite/--builtin");
    bool found = false;
    for (const auto& s : suite.load()) {
      if (s.id == args.case_id) {
        spec = s;
        found = true;
      }
    }
    if (!found) throw alw::InvalidInput("no case '" + args.case_id + "' in the suite");
  } else {
    spec.shape = alw::phantom::shape_from_string(args.shape);
    spec.background = alw::phantom::background_from_string(args.background);
  }
  const auto ph = alw::phantom::generate(spec);
  fs::create_directories(out_dir);
  alw::io::write_pgm(fs::path(out_dir) / "image.pgm", ph.image);
  alw::io::write_mask_pgm(fs::path(out_dir) / "truth.pgm", ph.truth);
  alw::io::write_file_atomic(fs::path(out_dir) / "report.json", alw::report::dump(alw::report::phantom_report(spec, ph)));
  std::ostringstream seed;
  seed.precision(17);
  seed << ph.seed.p1.x << ',' << ph.seed.p1.y << ',' << ph.seed.p2.x << ',' << ph.seed.p2.y;
  alw::io::write_file_atomic(fs::path(out_dir) / "seed.txt", seed.str() + "\n");
  std::cout << "seed=" << seed.str() << "\n";
  return kExitOk;
}

std::vector<alw::phantom::Method> build_methods(const std::string& list, const alw::SegConfig& base) {
  std::vector<alw::phantom::Method> methods;
  for (const auto& name : split(list, ',')) methods.push_back(alw::phantom::method_from_name(name, base));
  return methods;
}

int run_compare(const SuiteArgs& suite_args, const std::string& method_list, const ConfigArgs& cfg,
                alw::phantom::CompareOptions opt, const std::string& out_dir) {
  const auto suite = suite_args.load();
  const alw::SegConfig base = cfg.build();
  const auto methods = build_methods(method_list, base);
  const auto rep = alw::phantom::compare(suite, methods, opt);
  fs::create_directories(out_dir);
  alw::io::write_file_atomic(fs::path(out_dir) / "report.json", alw::report::dump(alw::report::compare_report(rep, base, opt)));
  alw::io::write_file_atomic(fs::path(out_dir) / "dice.csv", alw::report::dice_csv(rep));
  for (const auto& s : rep.summaries) {
    std::cout << s.method << " mean_dice=" << s.mean_dice << " ci95=[" << s.ci.lo << ", " << s.ci.hi << "]"
              << " failures=" << s.failures << "\n";
  }
  return kExitOk;
}

int run_sweep(const SuiteArgs& suite_args, const std::string& method_name, const std::string& param,
              const std::string& values, const ConfigArgs& cfg, alw::phantom::CompareOptions opt, const std::string& out_dir) {
  const auto suite = suite_args.load();
  const alw::SegConfig base = cfg.build();
  const auto list = split(values, ',');
  if (list.empty()) throw alw::InvalidConfig("--values must list at least one value");

  std::vector<alw::phantom::Phantom> phantoms;
  for (const auto& s : suite) phantoms.push_back(alw::phantom::generate(s));

  json results = json::array();
  std::vector<double> means;
  for (const auto& v : list) {
    alw::SegConfig config = base;
    alw::report::apply_override(config, param + "=" + v);
    config.validate();
    const auto method = alw::phantom::method_from_name(method_name, config);
    std::vector<alw::phantom::CaseResult> cases(suite.size());
    alw::parallel_for(suite.size(), alw::worker_count(opt.threads), [&](std::size_t i) {
      cases[i] = alw::phantom::run_case(suite[i], phantoms[i], method, opt);
    });
    std::vector<double> dice;
    json per_case = json::array();
    int failures = 0;
    for (const auto& c : cases) {
      for (const auto& r : c.runs) failures += r.ok ? 0 : 1;
      if (c.ok) dice.push_back(c.mean_dice);
      per_case.push_back(json{{"case_id", c.case_id}, {"ok", c.ok}, {"mean_dice", c.mean_dice}});
    }
    const double mean = alw::phantom::mean_of(dice);
    means.push_back(mean);
    results.push_back(json{{"value", v}, {"mean_dice", mean}, {"failures", failures}, {"cases", per_case}});
    std::cout << param << "=" << v << " mean_dice=" << mean << "\n";
  }
  const json rep{{"kind", "sweep"},
                 {"schema_version", alw::report::kSchemaVersion},
                 {"config", alw::report::to_json(base)},
                 {"method", method_name},
                 {"parameter", param},
                 {"results", results},
                 {"mean_dice_std", alw::phantom::stddev_of(means)}};
  fs::create_directories(out_dir);
  alw::io::write_file_atomic(fs::path(out_dir) / "report.json", alw::report::dump(rep));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-local-window level-set lesion segmentation"};
  app.require_subcommand(1);

  std::string out_dir = ".";

  auto* seg = app.add_subcommand("segment", "segment one image from a long-axis seed");
  std::string image_path, seed_text;
  ConfigArgs seg_cfg;
  seg->add_option("--image", image_path, "input image (PGM or PNG, grayscale)")->required();
  seg->add_option("--seed", seed_text, "long-axis endpoints x1,y1,x2,y2")->required();
  seg->add_option("--out", out_dir, "output directory");
  seg_cfg.attach(seg);

  auto* ph = app.add_subcommand("phantom", "generate a synthetic lesion with ground truth");
  PhantomArgs ph_args;
  SuiteArgs ph_suite;
  ph->add_option("--shape", ph_args.shape, "disk, ellipse, blob");
  ph->add_option("--size", ph_args.spec.size_px, "long-axis length in px");
  ph->add_option("--aspect", ph_args.spec.aspect, "short/long axis ratio");
  ph->add_option("--angle", ph_args.spec.angle_deg, "long-axis angle in degrees");
  ph->add_option("--contrast", ph_args.spec.contrast, "lesion minus background intensity");
  ph->add_option("--heterogeneity", ph_args.spec.heterogeneity, "in-lesion intensity field amplitude");
  ph->add_option("--sigma", ph_args.spec.noise_sigma, "Gaussian noise sigma");
  ph->add_option("--background", ph_args.background, "flat, stripes, speckle");
  ph->add_option("--texture", ph_args.spec.texture_amplitude, "background texture amplitude");
  ph->add_option("--rng-seed", ph_args.spec.rng_seed, "random seed");
  ph->add_option("--case", ph_args.case_id, "case id to take from --suite/--builtin");
  ph->add_option("--out", out_dir, "output directory");
  ph_suite.attach(ph);

  alw::phantom::CompareOptions opt;
  auto add_compare_options = [&](CLI::App* sub) {
    sub->add_option("--perturbations", opt.perturbations, "perturbed seeds per case");
    sub->add_option("--perturb-diameter", opt.perturb_diameter, "perturbation disk diameter in px");
    sub->add_option("--resamples", opt.bootstrap_resamples, "bootstrap resamples");
    sub->add_option("--threads", opt.threads, "worker threads (default: ALW_THREADS or hardware)");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* cmp = app.add_subcommand("compare", "compare methods on a phantom suite");
  SuiteArgs cmp_suite;
  ConfigArgs cmp_cfg;
  std::string methods = "alw,flw11,flw15,global-pc";
  cmp->add_option("--methods", methods, "comma-separated methods (first is the paired reference)");
  cmp_suite.attach(cmp);
  cmp_cfg.attach(cmp);
  add_compare_options(cmp);

  auto* sw = app.add_subcommand("sweep", "sweep one configuration key over values");
  SuiteArgs sw_suite;
  ConfigArgs sw_cfg;
  std::string method = "alw", param, values;
  sw->add_option("--param", param, "configuration key to vary")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--method", method, "method name");
  sw_suite.attach(sw);
  sw_cfg.attach(sw);
  add_compare_options(sw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (seg->parsed()) return run_segment(image_path, seed_text, seg_cfg, out_dir);
    if (ph->parsed()) return run_phantom(ph_args, ph_suite, out_dir);
    if (cmp->parsed()) return run_compare(cmp_suite, methods, cmp_cfg, opt, out_dir);
    if (sw->parsed()) {
      opt.perturbations = sw->count("--perturbations") ? opt.perturbations : 0;
      return run_sweep(sw_suite, method, param, values, sw_cfg, opt, out_dir);
    }
  } catch (const alw::ContourCollapse& e) {
    std::cerr << "alw: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const alw::Error& e) {
    std::cerr << "alw: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "alw: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

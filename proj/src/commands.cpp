#include "hgct/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hgct/error.hpp"
#include "hgct/eval.hpp"
#include "hgct/gradcheck.hpp"
#include "hgct/pipeline.hpp"
#include "hgct/scene_io.hpp"
#include "hgct/synth.hpp"
#include "hgct/train.hpp"

namespace hgct {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return os;
}

std::vector<CorrSet> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  std::vector<CorrSet> scenes;
  for (const auto& p : list_dataset(dir)) scenes.push_back(load_scene(p));
  if (scenes.empty()) throw Error(ErrorKind::InvalidArgument, "no scenes found in " + dir.string());
  return scenes;
}

std::vector<std::string> dataset_names(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& p : list_dataset(dir)) names.push_back(p.filename().string());
  return names;
}

void print_matrix(std::ostream& out, const Eigen::Matrix4d& m) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
  out << os.str();
}

}  // namespace

HyperGCTParams params_for(const RunConfig& cfg) {
  if (!cfg.checkpoint.empty()) return load_checkpoint(cfg.checkpoint);
  return HyperGCTParams::random(cfg.model.channels, cfg.model.layers, cfg.model.init_seed);
}

void cmd_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.empty()) throw Error(ErrorKind::InvalidArgument, "gen needs an output directory (--out)");
  if (cfg.gen_scenes < 1) throw Error(ErrorKind::Config, "synth.scenes must be at least 1");
  cfg.synth.validate();
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg.output.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["format"] = "HGCT-CORR v1";
  manifest["seed"] = cfg.seed;
  manifest["scenes"] = nlohmann::json::array();
  for (int i = 0; i < cfg.gen_scenes; ++i) {
    SynthConfig sc = cfg.synth;
    sc.seed = scene_seed(cfg.seed, static_cast<std::uint64_t>(i));
    std::ostringstream name;
    name << "scene_" << std::setw(4) << std::setfill('0') << i << ".corr";
    save_scene(gen_scene(sc), cfg.output / name.str());
    manifest["scenes"].push_back(name.str());
  }
  auto os = open_out(cfg.output / "manifest.json");
  os << manifest.dump(2) << '\n';
  out << "wrote " << cfg.gen_scenes << " scene(s) to " << cfg.output.string() << '\n';
}

void cmd_train(const RunConfig& cfg, const fs::path& dataset, std::ostream& out) {
  if (cfg.output.empty()) throw Error(ErrorKind::InvalidArgument, "train needs a checkpoint path (--out)");
  cfg.train.validate();
  std::vector<CorrSet> scenes;
  if (dataset.empty()) {
    scenes = gen_suite(cfg.synth, cfg.train_suite.scenes, cfg.train_suite.ratio_min, cfg.train_suite.ratio_max);
  } else {
    scenes = load_dataset(dataset);
  }
  CompatConfig cc = cfg.compat;
  cc.sigma_d = cfg.train.sigma_d;
  std::vector<TrainingSample> samples;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    try {
      samples.push_back(prepare_sample(scenes[i], cc, cfg.train.theta_inlier));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyGraph) throw;
      std::cerr << "warning: skipping scene " << i << ": " << e.message() << '\n';
    }
  }
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no usable training scenes");

  write_epoch_csv_header(out);
  const HyperGCTParams init = params_for(cfg);
  const HyperGCTParams trained = train(samples, cfg.train, init, [&](const EpochStats& s) {
    write_epoch_csv_row(out, s);
    out.flush();
  });
  save_checkpoint(trained, cfg.output);
}

void cmd_register(const RunConfig& cfg, const fs::path& scene, std::ostream& out) {
  const CorrSet set = load_scene(scene);
  const HyperGCTParams params = params_for(cfg);
  const RegisterResult reg = register_scene(set, params, cfg.compat, cfg.pipeline);
  print_matrix(out, reg.transform.matrix());

  nlohmann::json doc;
  doc["scene"] = scene.string();
  const Eigen::Matrix4d m = reg.transform.matrix();
  for (int r = 0; r < 4; ++r) doc["transform"].push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  if (set.gt) {
    const PairResult pr = score_pair(reg.transform, set, cfg.metrics);
    out << std::setprecision(10) << "RE=" << pr.re_deg << " deg TE=" << pr.te_m << " m success=" << pr.success
        << '\n';
    doc["re_deg"] = pr.re_deg;
    doc["te_m"] = pr.te_m;
    doc["success"] = pr.success;
    doc["ip"] = pr.inliers.ip;
    doc["ir"] = pr.inliers.ir;
    doc["f1"] = pr.inliers.f1;
  }
  doc["diagnostics"] = reg.diag.to_json();
  out << doc["diagnostics"].dump(2) << '\n';
  if (!cfg.output.empty()) {
    auto os = open_out(cfg.output);
    os << doc.dump(2) << '\n';
  }
}

void cmd_bench(const RunConfig& cfg, const fs::path& dataset, std::ostream& out) {
  const std::vector<CorrSet> scenes = load_dataset(dataset);
  const std::vector<std::string> names = dataset_names(dataset);
  const HyperGCTParams params = params_for(cfg);
  std::vector<PairResult> results =
      run_benchmark(scenes, params, cfg.compat, cfg.pipeline, cfg.metrics, cfg.bench_threads);
  for (std::size_t i = 0; i < results.size(); ++i) results[i].name = names[i];
  const Summary summary = aggregate(results, cfg.metrics);
  out << summary.to_json().dump(2) << '\n';
  if (!cfg.output.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.output, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg.output.string() + ": " + ec.message());
    auto rcsv = open_out(cfg.output / "results.csv");
    write_results_csv(rcsv, results);
    auto scsv = open_out(cfg.output / "summary.csv");
    write_summary_csv_header(scsv);
    write_summary_csv(scsv, summary, dataset.filename().string());
    auto sjson = open_out(cfg.output / "summary.json");
    sjson << summary.to_json().dump(2) << '\n';
  }
}

void cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  const TrainingSample sample = gradcheck_sample(cfg.gradcheck_n, cfg.seed);
  const HyperGCTParams params = params_for(cfg);
  const GradcheckReport rep = gradcheck(sample, params, cfg.gradcheck);
  if (rep.passed()) {
    out << "PASS max_rel_err=" << rep.max_rel_err << " checked=" << rep.checked << '\n';
    return;
  }
  out << "FAIL max_rel_err=" << rep.max_rel_err << " failures=" << rep.failures << " worst_index=" << rep.worst_index
      << " analytic=" << rep.worst_analytic << " numeric=" << rep.worst_numeric << '\n';
  throw Error(ErrorKind::InvalidArgument, "gradient check failed");
}

void cmd_report(const RunConfig& cfg, const std::vector<fs::path>& results, std::ostream& out) {
  if (results.empty()) throw Error(ErrorKind::InvalidArgument, "report needs at least one results CSV");
  std::ostringstream table;
  write_summary_csv_header(table);
  std::vector<PairResult> all;
  for (const auto& p : results) {
    std::ifstream is(p);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + p.string());
    std::vector<PairResult> rows = read_results_csv(is);
    if (rows.empty()) throw Error(ErrorKind::Parse, p.string() + ": no result rows");
    write_summary_csv(table, aggregate(rows, cfg.metrics), p.string());
    all.insert(all.end(), rows.begin(), rows.end());
  }
  write_summary_csv(table, aggregate(all, cfg.metrics), "all");
  out << table.str();
  if (!cfg.output.empty()) {
    auto os = open_out(cfg.output);
    os << table.str();
  }
}

void cmd_sweep(const RunConfig& cfg, const fs::path& dataset, const std::string& target,
               const std::vector<double>& values, std::ostream& out) {
  SweepTarget which;
  if (target == "cmp") which = SweepTarget::Cmp;
  else if (target == "inlier") which = SweepTarget::Inlier;
  else throw Error(ErrorKind::InvalidArgument, "sweep target must be cmp or inlier, got '" + target + "'");
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one value");
  const std::vector<CorrSet> scenes = load_dataset(dataset);
  const auto rows =
      sweep_theta(scenes, params_for(cfg), cfg.compat, cfg.pipeline, cfg.metrics, values, which, cfg.bench_threads);
  std::ostringstream table;
  write_sweep_csv(table, rows);
  out << table.str();
  if (!cfg.output.empty()) {
    auto os = open_out(cfg.output);
    os << table.str();
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correspondence outlier rejection and rigid registration with learned hypergraph constraints", "hgct"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "global seed (overrides the config)");
  app.add_option("--out", out_path, "output path (overrides io.output)");
  app.add_option("--set", sets, "extra key=value assignment, applied after the config file");

  std::string input;
  std::vector<std::string> inputs;
  std::string target = "cmp";
  std::vector<double> values;

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset and manifest");
  auto* trn = app.add_subcommand("train", "train parameters and write a checkpoint");
  trn->add_option("dataset", input, "dataset directory (default: generated suite)");
  auto* reg = app.add_subcommand("register", "register one scene file");
  reg->add_option("scene", input, "scene file");
  auto* bench = app.add_subcommand("bench", "register every scene of a dataset and report metrics");
  bench->add_option("dataset", input, "dataset directory");
  auto* gc = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  auto* rep = app.add_subcommand("report", "merge results CSV files into a summary table");
  rep->add_option("results", inputs, "results.csv files")->required();
  auto* sweep = app.add_subcommand("sweep", "RR versus a compatibility or inlier threshold");
  sweep->add_option("dataset", input, "dataset directory");
  sweep->add_option("--target", target, "cmp or inlier");
  sweep->add_option("--values", values, "threshold values")->required();
  auto* defaults = app.add_subcommand("config", "print every configuration key with its default");
  for (auto* sub : {gen, trn, reg, bench, gc, rep, sweep, defaults}) sub->fallthrough();

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: kind=Usage message=" << e.what() << '\n';
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "--set expects key=value, got '" + kv + "'");
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      apply_config_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed) cfg.set_seed(*seed);
    if (!out_path.empty()) cfg.output = out_path;
    if (const char* env = std::getenv("HGCT_THREADS"); env && *env) {
      // worker_count() applies the cap; validate it here so typos fail loudly.
      char* end = nullptr;
      const long cap = std::strtol(env, &end, 10);
      if (*end != '\0' || cap < 1) throw Error(ErrorKind::Config, "HGCT_THREADS must be a positive integer");
    }
    const fs::path in = input.empty() ? cfg.input : fs::path(input);

    if (*gen) {
      cmd_gen(cfg, out);
    } else if (*trn) {
      cmd_train(cfg, in, out);
    } else if (*reg) {
      if (in.empty()) throw Error(ErrorKind::InvalidArgument, "register needs a scene file");
      cmd_register(cfg, in, out);
    } else if (*bench) {
      if (in.empty()) throw Error(ErrorKind::InvalidArgument, "bench needs a dataset directory");
      cmd_bench(cfg, in, out);
    } else if (*gc) {
      cmd_gradcheck(cfg, out);
    } else if (*rep) {
      cmd_report(cfg, std::vector<fs::path>(inputs.begin(), inputs.end()), out);
    } else if (*sweep) {
      if (in.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs a dataset directory");
      cmd_sweep(cfg, in, target, values, out);
    } else if (*defaults) {
      out << default_config_text();
    }
  } catch (const Error& e) {
    err << "error: kind=" << to_string(e.kind()) << " message=" << e.message() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: kind=Internal message=" << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hgct

#include "hgct/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hgct/error.hpp"

namespace hgct {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  const std::string& key;
  const std::string& value;
  int line;

  [[noreturn]] void fail(const std::string& why) const {
    std::string where = line > 0 ? " (line " + std::to_string(line) + ")" : "";
    throw Error(ErrorKind::Config, "key '" + key + "'" + where + ": " + why);
  }

  double real() const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || end != value.data() + value.size() || !std::isfinite(v)) fail("expected a number, got '" + value + "'");
    return v;
  }

  long integer() const {
    long v = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || end != value.data() + value.size()) fail("expected an integer, got '" + value + "'");
    return v;
  }

  int positive() const {
    const long v = integer();
    if (v < 1 || v > 1000000) fail("expected a positive integer, got '" + value + "'");
    return static_cast<int>(v);
  }

  std::uint64_t seed() const {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || end != value.data() + value.size()) fail("expected a nonnegative integer, got '" + value + "'");
    return v;
  }
};

using Setter = std::function<void(RunConfig&, const Ctx&)>;

struct Entry {
  ConfigKey key;
  Setter set;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"seed", "0", "global seed; also seeds synth, train and model init"},
       [](RunConfig& c, const Ctx& x) { c.set_seed(x.seed()); }},
      {{"compat.sigma_d", "0.1", "rigid-distance sensitivity, meters"},
       [](RunConfig& c, const Ctx& x) { c.compat.sigma_d = x.real(); c.train.sigma_d = c.compat.sigma_d; }},
      {{"compat.k1_frac", "0.1", "top-K fraction for the dynamic threshold"},
       [](RunConfig& c, const Ctx& x) { c.compat.k1_frac = x.real(); }},
      {{"compat.order", "SOG", "SOG (second order) or FOG (first order)"},
       [](RunConfig& c, const Ctx& x) {
         if (x.value == "SOG") c.compat.order = GraphOrder::SOG;
         else if (x.value == "FOG") c.compat.order = GraphOrder::FOG;
         else x.fail("expected SOG or FOG");
       }},
      {{"compat.theta_override", "none", "fixed compatibility threshold, or none for dynamic"},
       [](RunConfig& c, const Ctx& x) {
         if (x.value == "none") c.compat.theta_override.reset();
         else c.compat.theta_override = x.real();
       }},
      {{"pipeline.ns_frac", "0.2", "seed count as a fraction of N"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.ns_frac = x.real(); }},
      {{"pipeline.ninit_frac", "0.1", "initial hypotheses as a fraction of the seeds"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.ninit_frac = x.real(); }},
      {{"pipeline.knn_k", "20", "feature-space neighbors per seed"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.knn_k = static_cast<int>(x.integer()); }},
      {{"pipeline.minimal_size", "6", "minimal set size for window sampling"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.minimal_size = static_cast<int>(x.integer()); }},
      {{"pipeline.max_iters", "30", "windows per hyperedge"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.max_iters = static_cast<int>(x.integer()); }},
      {{"pipeline.step", "3", "window stride"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.step = static_cast<int>(x.integer()); }},
      {{"pipeline.theta_inlier", "0.1", "verification truncation, meters"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.theta_inlier = x.real(); }},
      {{"pipeline.nms_radius", "0.1", "NMS suppression radius on source points, meters"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.nms_radius = x.real(); }},
      {{"pipeline.n1_frac", "0.1", "share of seeds picked by NMS"},
       [](RunConfig& c, const Ctx& x) { c.pipeline.n1_frac = x.real(); }},
      {{"train.epochs", "200", "training epochs"},
       [](RunConfig& c, const Ctx& x) { c.train.epochs = static_cast<int>(x.integer()); }},
      {{"train.lr", "0.001", "initial ADAM learning rate"},
       [](RunConfig& c, const Ctx& x) { c.train.lr = x.real(); }},
      {{"train.lr_decay", "0.99", "per-epoch learning-rate factor"},
       [](RunConfig& c, const Ctx& x) { c.train.lr_decay = x.real(); }},
      {{"train.batch", "6", "scenes per ADAM step"},
       [](RunConfig& c, const Ctx& x) { c.train.batch = static_cast<int>(x.integer()); }},
      {{"train.theta_inlier", "0.1", "label threshold, meters"},
       [](RunConfig& c, const Ctx& x) { c.train.theta_inlier = x.real(); }},
      {{"train.threads", "0", "worker threads (0 = all cores, capped by HGCT_THREADS)"},
       [](RunConfig& c, const Ctx& x) { c.train.threads = static_cast<int>(x.integer()); }},
      {{"train.scenes", "64", "synthetic training scenes when no dataset is given"},
       [](RunConfig& c, const Ctx& x) { c.train_suite.scenes = static_cast<int>(x.integer()); }},
      {{"train.ratio_min", "0.05", "lowest inlier ratio of the training suite"},
       [](RunConfig& c, const Ctx& x) { c.train_suite.ratio_min = x.real(); }},
      {{"train.ratio_max", "0.5", "highest inlier ratio of the training suite"},
       [](RunConfig& c, const Ctx& x) { c.train_suite.ratio_max = x.real(); }},
      {{"model.channels", "32", "feature channels"},
       [](RunConfig& c, const Ctx& x) { c.model.channels = x.positive(); }},
      {{"model.layers", "5", "convolution blocks"},
       [](RunConfig& c, const Ctx& x) { c.model.layers = x.positive(); }},
      {{"model.init_seed", "0", "seed for untrained parameters"},
       [](RunConfig& c, const Ctx& x) { c.model.init_seed = x.seed(); }},
      {{"synth.n_corrs", "200", "correspondences per generated scene"},
       [](RunConfig& c, const Ctx& x) { c.synth.n_corrs = static_cast<int>(x.integer()); }},
      {{"synth.inlier_ratio", "0.3", "inlier fraction of generated scenes"},
       [](RunConfig& c, const Ctx& x) { c.synth.inlier_ratio = x.real(); }},
      {{"synth.noise_sigma", "0.01", "inlier noise, meters"},
       [](RunConfig& c, const Ctx& x) { c.synth.noise_sigma = x.real(); }},
      {{"synth.scene_extent", "1.0", "half-width of the sampling cube, meters"},
       [](RunConfig& c, const Ctx& x) { c.synth.scene_extent = x.real(); }},
      {{"synth.rot_max_deg", "180", "largest ground-truth rotation, degrees"},
       [](RunConfig& c, const Ctx& x) { c.synth.rot_max_deg = x.real(); }},
      {{"synth.trans_max", "1.0", "largest ground-truth translation, meters"},
       [](RunConfig& c, const Ctx& x) { c.synth.trans_max = x.real(); }},
      {{"synth.scenes", "1", "scenes written by gen"},
       [](RunConfig& c, const Ctx& x) { c.gen_scenes = static_cast<int>(x.integer()); }},
      {{"metrics.re_deg", "5", "success threshold on rotation error, degrees"},
       [](RunConfig& c, const Ctx& x) { c.metrics.re_deg = x.real(); }},
      {{"metrics.te_m", "0.05", "success threshold on translation error, meters"},
       [](RunConfig& c, const Ctx& x) { c.metrics.te_m = x.real(); }},
      {{"metrics.theta_inlier", "0.1", "inlier threshold for IP/IR/F1, meters"},
       [](RunConfig& c, const Ctx& x) { c.metrics.theta_inlier = x.real(); }},
      {{"bench.threads", "0", "worker pool for bench (0 = all cores, capped by HGCT_THREADS)"},
       [](RunConfig& c, const Ctx& x) { c.bench_threads = static_cast<int>(x.integer()); }},
      {{"gradcheck.n", "8", "correspondences in the gradient-check scene"},
       [](RunConfig& c, const Ctx& x) { c.gradcheck_n = static_cast<int>(x.integer()); }},
      {{"gradcheck.step", "1e-5", "central-difference step"},
       [](RunConfig& c, const Ctx& x) { c.gradcheck.step = x.real(); }},
      {{"gradcheck.tol", "1e-3", "largest accepted relative error"},
       [](RunConfig& c, const Ctx& x) { c.gradcheck.tol = x.real(); }},
      {{"io.checkpoint", "", "checkpoint path (empty = untrained parameters)"},
       [](RunConfig& c, const Ctx& x) { c.checkpoint = x.value; }},
      {{"io.input", "", "default positional input"},
       [](RunConfig& c, const Ctx& x) { c.input = x.value; }},
      {{"io.output", "", "default output path"},
       [](RunConfig& c, const Ctx& x) { c.output = x.value; }},
  };
  return table;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  synth.seed = s;
  train.seed = s;
  model.init_seed = s;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value, int line) {
  for (const auto& e : entries()) {
    if (e.key.name == key) {
      e.set(cfg, Ctx{key, value, line});
      return;
    }
  }
  Ctx{key, value, line}.fail("unknown key");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string default_config_text() {
  std::ostringstream os;
  for (const auto& k : config_keys()) os << "# " << k.doc << '\n' << k.name << " = " << k.default_value << "\n\n";
  return os.str();
}

}  // namespace hgct

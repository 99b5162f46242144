#include "hgct/eval.hpp"

#include <chrono>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "hgct/error.hpp"
#include "hgct/parallel.hpp"

namespace hgct {

void MetricThresholds::validate() const {
  if (!(re_deg > 0.0 && te_m > 0.0 && theta_inlier > 0.0))
    throw Error(ErrorKind::InvalidArgument, "metric thresholds must be positive");
}

InlierMetrics inlier_metrics(const RigidTransform& T_est, const CorrSet& set, const RigidTransform& gt,
                             double theta_inlier) {
  int pred = 0, truth = 0, both = 0;
  for (const auto& c : set.corrs) {
    const bool p = residual(T_est, c) < theta_inlier;
    const bool t = residual(gt, c) < theta_inlier;
    pred += p;
    truth += t;
    both += p && t;
  }
  InlierMetrics m;
  m.ip = pred > 0 ? static_cast<double>(both) / pred : 0.0;
  m.ir = truth > 0 ? static_cast<double>(both) / truth : 0.0;
  m.f1 = (m.ip + m.ir) > 0.0 ? 2.0 * m.ip * m.ir / (m.ip + m.ir) : 0.0;
  return m;
}

PairResult score_pair(const RigidTransform& T_est, const CorrSet& set, const MetricThresholds& th) {
  if (!set.gt) throw Error(ErrorKind::InvalidArgument, "scoring needs a ground-truth transform");
  PairResult r;
  r.re_deg = rotation_error_deg(T_est.R, set.gt->R);
  r.te_m = translation_error(T_est.t, set.gt->t);
  r.success = r.re_deg <= th.re_deg && r.te_m <= th.te_m;
  r.inliers = inlier_metrics(T_est, set, *set.gt, th.theta_inlier);
  return r;
}

nlohmann::json Summary::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"pairs", pairs},         {"successes", successes},     {"rr", rr},
          {"mean_re_deg", opt(mean_re_deg)}, {"mean_te_m", opt(mean_te_m)}, {"mean_ip", mean_ip},
          {"mean_ir", mean_ir},     {"mean_f1", mean_f1},         {"mean_runtime_s", mean_runtime_s}};
}

Summary aggregate(const std::vector<PairResult>& results, const MetricThresholds& th) {
  if (results.empty()) throw Error(ErrorKind::InvalidArgument, "aggregate needs at least one result");
  Summary s;
  s.pairs = static_cast<int>(results.size());
  double re = 0.0, te = 0.0;
  for (const auto& r : results) {
    const bool ok = r.error.empty() && r.re_deg <= th.re_deg && r.te_m <= th.te_m;
    if (ok) {
      ++s.successes;
      re += r.re_deg;
      te += r.te_m;
    }
    s.mean_ip += r.inliers.ip;
    s.mean_ir += r.inliers.ir;
    s.mean_f1 += r.inliers.f1;
    s.mean_runtime_s += r.runtime_s;
  }
  const double n = static_cast<double>(s.pairs);
  s.rr = s.successes / n;
  if (s.successes > 0) {
    s.mean_re_deg = re / s.successes;
    s.mean_te_m = te / s.successes;
  }
  s.mean_ip /= n;
  s.mean_ir /= n;
  s.mean_f1 /= n;
  s.mean_runtime_s /= n;
  return s;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n') ch = ';';
  return s;
}

constexpr const char* kResultsHeader =
    "name,success,re_deg,te_m,ip,ir,f1,runtime_s,precision_before,precision_after,error";

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<PairResult>& results) {
  os << kResultsHeader << '\n';
  os.precision(17);
  for (const auto& r : results) {
    os << sanitize(r.name) << ',' << (r.success ? 1 : 0) << ',' << r.re_deg << ',' << r.te_m << ',' << r.inliers.ip
       << ',' << r.inliers.ir << ',' << r.inliers.f1 << ',' << r.runtime_s << ','
       << opt_str(r.hyperedge_precision_before) << ',' << opt_str(r.hyperedge_precision_after) << ','
       << sanitize(r.error) << '\n';
  }
}

std::vector<PairResult> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || split_csv(line) != split_csv(kResultsHeader))
    throw Error(ErrorKind::Parse, "results CSV header mismatch");
  std::vector<PairResult> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) throw Error(ErrorKind::Parse, "results CSV line " + std::to_string(lineno) + " has wrong field count");
    try {
      PairResult r;
      r.name = f[0];
      r.success = f[1] == "1";
      r.re_deg = std::stod(f[2]);
      r.te_m = std::stod(f[3]);
      r.inliers = {std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
      r.runtime_s = std::stod(f[7]);
      r.hyperedge_precision_before = parse_opt(f[8]);
      r.hyperedge_precision_after = parse_opt(f[9]);
      r.error = f[10];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Parse, "results CSV line " + std::to_string(lineno) + " has a malformed number");
    }
  }
  return out;
}

void write_summary_csv_header(std::ostream& os) {
  os << "label,pairs,successes,rr,mean_re_deg,mean_te_m,mean_ip,mean_ir,mean_f1,mean_runtime_s\n";
}

void write_summary_csv(std::ostream& os, const Summary& s, const std::string& label) {
  os.precision(10);
  os << sanitize(label) << ',' << s.pairs << ',' << s.successes << ',' << s.rr << ',' << opt_str(s.mean_re_deg) << ','
     << opt_str(s.mean_te_m) << ',' << s.mean_ip << ',' << s.mean_ir << ',' << s.mean_f1 << ',' << s.mean_runtime_s
     << '\n';
}

std::vector<PairResult> run_benchmark(const std::vector<CorrSet>& scenes, const HyperGCTParams& params,
                                      const CompatConfig& cc, const PipelineConfig& pc, const MetricThresholds& th,
                                      int threads) {
  th.validate();
  std::vector<PairResult> out(scenes.size());
  parallel_for(static_cast<int>(scenes.size()), worker_count(threads), [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    PairResult r;
    try {
      const RegisterResult reg = register_scene(scenes[i], params, cc, pc);
      r = score_pair(reg.transform, scenes[i], th);
      r.hyperedge_precision_before = reg.diag.precision_before;
      r.hyperedge_precision_after = reg.diag.precision_after;
    } catch (const Error& e) {
      r = PairResult{};
      r.re_deg = 180.0;
      r.te_m = std::numeric_limits<double>::infinity();
      r.error = e.what();
    }
    r.name = "scene_" + std::to_string(i);
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out[i] = std::move(r);
  });
  return out;
}

std::vector<SweepRow> sweep_theta(const std::vector<CorrSet>& scenes, const HyperGCTParams& params,
                                  const CompatConfig& cc, const PipelineConfig& pc, const MetricThresholds& th,
                                  const std::vector<double>& sweep, SweepTarget which, int threads) {
  if (sweep.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one value");
  std::vector<SweepRow> rows;
  SweepRow base;
  base.label = "default";
  base.summary = aggregate(run_benchmark(scenes, params, cc, pc, th, threads), th);
  rows.push_back(base);
  for (double theta : sweep) {
    CompatConfig c2 = cc;
    PipelineConfig p2 = pc;
    if (which == SweepTarget::Cmp)
      c2.theta_override = theta;
    else
      p2.theta_inlier = theta;
    SweepRow row;
    std::ostringstream os;
    os << theta;
    row.label = os.str();
    row.theta = theta;
    row.summary = aggregate(run_benchmark(scenes, params, c2, p2, th, threads), th);
    row.delta_rr = row.summary.rr - base.summary.rr;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "theta,rr,delta_rr,successes,pairs\n";
  for (const auto& r : rows)
    os << r.label << ',' << r.summary.rr << ',' << r.delta_rr << ',' << r.summary.successes << ',' << r.summary.pairs
       << '\n';
}

}  // namespace hgct

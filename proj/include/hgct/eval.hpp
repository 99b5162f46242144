#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgct/compat.hpp"
#include "hgct/geom.hpp"
#include "hgct/params.hpp"
#include "hgct/pipeline.hpp"

namespace hgct {

struct MetricThresholds {
  double re_deg = 5.0;
  double te_m = 0.05;
  double theta_inlier = 0.1;

  void validate() const;
};

struct InlierMetrics {
  double ip = 0.0;
  double ir = 0.0;
  double f1 = 0.0;
};

struct PairResult {
  std::string name;
  double re_deg = 0.0;
  double te_m = 0.0;
  bool success = false;
  InlierMetrics inliers;
  double runtime_s = 0.0;
  std::optional<double> hyperedge_precision_before;
  std::optional<double> hyperedge_precision_after;
  std::string error;  ///< non-empty when registration threw; counts as a failure
};

InlierMetrics inlier_metrics(const RigidTransform& T_est, const CorrSet& set, const RigidTransform& gt,
                             double theta_inlier);

/// Metrics for one estimate against the scene's ground truth.
PairResult score_pair(const RigidTransform& T_est, const CorrSet& set, const MetricThresholds& th);

struct Summary {
  int pairs = 0;
  int successes = 0;
  double rr = 0.0;
  std::optional<double> mean_re_deg;  ///< over successful pairs only
  std::optional<double> mean_te_m;
  double mean_ip = 0.0, mean_ir = 0.0, mean_f1 = 0.0;
  double mean_runtime_s = 0.0;

  nlohmann::json to_json() const;
};

/// Success is re-evaluated against `th`, so loosening thresholds never lowers RR.
Summary aggregate(const std::vector<PairResult>& results, const MetricThresholds& th);

/// Column order: name,success,re_deg,te_m,ip,ir,f1,runtime_s,precision_before,precision_after,error
void write_results_csv(std::ostream& os, const std::vector<PairResult>& results);
std::vector<PairResult> read_results_csv(std::istream& is);
/// Column order: label,pairs,successes,rr,mean_re_deg,mean_te_m,mean_ip,mean_ir,mean_f1,mean_runtime_s
void write_summary_csv_header(std::ostream& os);
void write_summary_csv(std::ostream& os, const Summary& s, const std::string& label);

/// Registers every scene; failures are recorded in PairResult::error.
std::vector<PairResult> run_benchmark(const std::vector<CorrSet>& scenes, const HyperGCTParams& params,
                                      const CompatConfig& cc, const PipelineConfig& pc, const MetricThresholds& th,
                                      int threads = 0);

enum class SweepTarget { Cmp, Inlier };

struct SweepRow {
  std::string label;            ///< "default" or the θ value
  std::optional<double> theta;  ///< absent on the default row
  Summary summary;
  double delta_rr = 0.0;        ///< RR − RR(default), fraction
};

/// First row is the default configuration (dynamic θ_cmp / configured θ_inlier).
std::vector<SweepRow> sweep_theta(const std::vector<CorrSet>& scenes, const HyperGCTParams& params,
                                  const CompatConfig& cc, const PipelineConfig& pc, const MetricThresholds& th,
                                  const std::vector<double>& sweep, SweepTarget which, int threads = 0);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace hgct

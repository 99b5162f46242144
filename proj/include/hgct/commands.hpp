#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hgct/config.hpp"
#include "hgct/params.hpp"

namespace hgct {

/// Parameters named by io.checkpoint, or a fresh random draw from model.* when unset.
HyperGCTParams params_for(const RunConfig& cfg);

/// Writes synth.scenes scene files plus manifest.json into cfg.output.
void cmd_gen(const RunConfig& cfg, std::ostream& out);

/// Trains on a dataset directory (or a generated suite when `dataset` is empty);
/// epoch statistics go to `out` as CSV, the checkpoint to cfg.output.
void cmd_train(const RunConfig& cfg, const std::filesystem::path& dataset, std::ostream& out);

/// Prints the 4x4 estimate, RE/TE when the scene has a ground truth, and diagnostics JSON.
void cmd_register(const RunConfig& cfg, const std::filesystem::path& scene, std::ostream& out);

/// Registers every scene of a dataset; prints the summary JSON and, when cfg.output
/// is set, writes results.csv, summary.csv and summary.json there.
void cmd_bench(const RunConfig& cfg, const std::filesystem::path& dataset, std::ostream& out);

/// Throws InvalidArgument when the check fails, after printing the FAIL line.
void cmd_gradcheck(const RunConfig& cfg, std::ostream& out);

/// Merges results CSV files into one summary table (one row per file plus "all").
void cmd_report(const RunConfig& cfg, const std::vector<std::filesystem::path>& results, std::ostream& out);

/// RR for each θ against the default row.
void cmd_sweep(const RunConfig& cfg, const std::filesystem::path& dataset, const std::string& target,
               const std::vector<double>& values, std::ostream& out);

/// Full command-line entry point. Errors are reported on `err` as
/// `error: kind=<kind> message=<text>` with a nonzero return.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hgct

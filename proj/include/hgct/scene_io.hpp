#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hgct/geom.hpp"

namespace hgct {

/// Text scene format:
///   HGCT-CORR v1 n=<N> feat_dim=<D> has_gt=<0|1> has_labels=<0|1>
///   [12 numbers: R row-major then t]
///   N rows: xs ys zs xt yt zt [label] [f1 .. fD]
/// Numbers use the shortest round-trip decimal form, so write → read is exact.
void write_scene(std::ostream& os, const CorrSet& set);
CorrSet read_scene(std::istream& is, const std::string& source = "<stream>");

void save_scene(const CorrSet& set, const std::filesystem::path& path);
CorrSet load_scene(const std::filesystem::path& path);

/// Scene files listed in `<dir>/manifest.json`, or every *.corr file when no manifest exists.
std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir);

}  // namespace hgct

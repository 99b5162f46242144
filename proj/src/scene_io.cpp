#include "hgct/scene_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hgct/error.hpp"

namespace hgct {

namespace {

std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "number formatting failed");
  return std::string(buf.data(), end);
}

double parse_number(const std::string& tok, const std::string& source, int line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || end != tok.data() + tok.size() || !std::isfinite(v))
    throw Error(ErrorKind::Parse, source + ":" + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

long header_field(const std::vector<std::string>& toks, const std::string& key, const std::string& source) {
  for (const auto& t : toks) {
    if (t.rfind(key + "=", 0) == 0) {
      const std::string v = t.substr(key.size() + 1);
      long out = 0;
      const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (ec != std::errc() || end != v.data() + v.size() || out < 0)
        throw Error(ErrorKind::Parse, source + ":1: bad header value for " + key);
      return out;
    }
  }
  throw Error(ErrorKind::Parse, source + ":1: header is missing " + key);
}

}  // namespace

void write_scene(std::ostream& os, const CorrSet& set) {
  set.validate();
  const int dim = set.feat_dim();
  os << "HGCT-CORR v1 n=" << set.size() << " feat_dim=" << dim << " has_gt=" << (set.gt ? 1 : 0)
     << " has_labels=" << (set.labels ? 1 : 0) << '\n';
  if (set.gt) {
    const auto& R = set.gt->R;
    const auto& t = set.gt->t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) os << fmt(R(r, c)) << ' ';
    os << fmt(t.x()) << ' ' << fmt(t.y()) << ' ' << fmt(t.z()) << '\n';
  }
  for (int i = 0; i < set.size(); ++i) {
    const auto& c = set.corrs[i];
    os << fmt(c.src.x()) << ' ' << fmt(c.src.y()) << ' ' << fmt(c.src.z()) << ' ' << fmt(c.tgt.x()) << ' '
       << fmt(c.tgt.y()) << ' ' << fmt(c.tgt.z());
    if (set.labels) os << ' ' << ((*set.labels)[i] ? 1 : 0);
    for (int k = 0; k < dim; ++k) os << ' ' << fmt(c.feat[k]);
    os << '\n';
  }
}

CorrSet read_scene(std::istream& is, const std::string& source) {
  std::string line;
  int lineno = 1;
  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, source + ": empty scene file");
  const auto head = tokens(line);
  if (head.size() < 2 || head[0] != "HGCT-CORR" || head[1] != "v1")
    throw Error(ErrorKind::Parse, source + ":1: expected 'HGCT-CORR v1' header");
  const long n = header_field(head, "n", source);
  const long dim = header_field(head, "feat_dim", source);
  const long has_gt = header_field(head, "has_gt", source);
  const long has_labels = header_field(head, "has_labels", source);
  if (has_gt > 1 || has_labels > 1) throw Error(ErrorKind::Parse, source + ":1: has_gt/has_labels must be 0 or 1");

  CorrSet set;
  if (has_gt) {
    ++lineno;
    if (!std::getline(is, line)) throw Error(ErrorKind::Parse, source + ": missing ground-truth line");
    const auto t = tokens(line);
    if (t.size() != 12) throw Error(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": expected 12 numbers");
    RigidTransform gt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) gt.R(r, c) = parse_number(t[r * 3 + c], source, lineno);
    for (int k = 0; k < 3; ++k) gt.t[k] = parse_number(t[9 + k], source, lineno);
    set.gt = gt;
  }
  const std::size_t width = 6 + (has_labels ? 1 : 0) + static_cast<std::size_t>(dim);
  std::vector<bool> labels;
  set.corrs.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    ++lineno;
    if (!std::getline(is, line))
      throw Error(ErrorKind::Parse, source + ": expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    const auto t = tokens(line);
    if (t.size() != width)
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields");
    Correspondence c;
    c.src = {parse_number(t[0], source, lineno), parse_number(t[1], source, lineno), parse_number(t[2], source, lineno)};
    c.tgt = {parse_number(t[3], source, lineno), parse_number(t[4], source, lineno), parse_number(t[5], source, lineno)};
    std::size_t k = 6;
    if (has_labels) {
      if (t[k] != "0" && t[k] != "1")
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": label must be 0 or 1");
      labels.push_back(t[k] == "1");
      ++k;
    }
    c.feat.resize(dim);
    for (long d = 0; d < dim; ++d) c.feat[d] = parse_number(t[k + d], source, lineno);
    set.corrs.push_back(std::move(c));
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!tokens(line).empty())
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": trailing data after last row");
  }
  if (has_labels) set.labels = std::move(labels);
  return set;
}

void save_scene(const CorrSet& set, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_scene(os, set);
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

CorrSet load_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_scene(is, path.string());
}

std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream is(manifest);
    nlohmann::json j;
    try {
      is >> j;
      for (const auto& name : j.at("scenes")) out.push_back(dir / name.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, manifest.string() + ": " + e.what());
    }
    return out;
  }
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".corr") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hgct

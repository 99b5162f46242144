#include "hgct/params.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "hgct/error.hpp"

namespace hgct {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'G', 'C', 'T', 'C', 'K', 'P', 'T'};

AffineSlot take(int& cursor, int in, int out) {
  AffineSlot s{cursor, in, out};
  cursor += s.size();
  return s;
}

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw Error(ErrorKind::Parse, "truncated checkpoint " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

ParamLayout ParamLayout::make(int channels, int layers) {
  if (channels < 1 || layers < 1) throw Error(ErrorKind::InvalidArgument, "channels and layers must be positive");
  ParamLayout l;
  l.channels = channels;
  l.layers = layers;
  const int c = channels;
  int cursor = 0;
  l.input_lift = take(cursor, HyperGCTParams::kInputDim, c);
  for (int t = 0; t < layers; ++t) {
    ConvSlots s;
    s.mlp1_hidden = take(cursor, 2 * c, c);
    s.mlp1_out = take(cursor, c, c);
    s.mlp2_hidden = take(cursor, c, c);
    s.mlp2_out = take(cursor, c, c);
    s.nl_theta = take(cursor, c, c);
    s.nl_phi = take(cursor, c, c);
    s.nl_g = take(cursor, c, c);
    s.nl_out = take(cursor, c, c);
    l.conv.push_back(s);
  }
  for (int t = 0; t + 1 < layers; ++t) {
    UpdateSlots u;
    u.query = take(cursor, c, c);
    u.key = take(cursor, c, c);
    l.update.push_back(u);
  }
  l.conf_head = take(cursor, c, 1);
  l.log_sigma_f = cursor++;
  l.total = cursor;
  return l;
}

HyperGCTParams::HyperGCTParams(int channels, int layers)
    : layout_(ParamLayout::make(channels, layers)), flat_(Vector::Zero(layout_.total)) {}

HyperGCTParams HyperGCTParams::random(int channels, int layers, std::uint64_t seed) {
  HyperGCTParams p(channels, layers);
  std::mt19937_64 rng(seed);
  auto fill = [&](const AffineSlot& s) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int k = 0; k < s.size(); ++k) p.flat_[s.offset + k] = dist(rng);
  };
  const auto& l = p.layout_;
  fill(l.input_lift);
  for (const auto& s : l.conv) {
    for (const auto* slot : {&s.mlp1_hidden, &s.mlp1_out, &s.mlp2_hidden, &s.mlp2_out, &s.nl_theta, &s.nl_phi,
                             &s.nl_g, &s.nl_out})
      fill(*slot);
  }
  for (const auto& u : l.update) {
    fill(u.query);
    fill(u.key);
  }
  fill(l.conf_head);
  p.flat_[l.log_sigma_f] = 0.0;
  return p;
}

HyperGCTParams HyperGCTParams::zeros_like(const HyperGCTParams& other) {
  return HyperGCTParams(other.channels(), other.layers());
}

AffineView<double> HyperGCTParams::view(const AffineSlot& s) {
  return {Eigen::Map<Matrix>(flat_.data() + s.offset, s.in, s.out),
          Eigen::Map<Vector>(flat_.data() + s.offset + s.weight_size(), s.out)};
}

AffineView<const double> HyperGCTParams::view(const AffineSlot& s) const {
  return {Eigen::Map<const Matrix>(flat_.data() + s.offset, s.in, s.out),
          Eigen::Map<const Vector>(flat_.data() + s.offset + s.weight_size(), s.out)};
}

double HyperGCTParams::sigma_f() const { return std::exp(log_sigma_f()); }

bool HyperGCTParams::operator==(const HyperGCTParams& other) const {
  return channels() == other.channels() && layers() == other.layers() && flat_ == other.flat_;
}

void save_checkpoint(const HyperGCTParams& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kCheckpointVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.channels()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.layers()));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(params.flat().size()));
  for (Eigen::Index k = 0; k < params.flat().size(); ++k) put_le<double>(os, params.flat()[k]);
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

HyperGCTParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorKind::Parse, "bad checkpoint magic in " + path.string());
  const auto version = get_le<std::uint32_t>(is, path);
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::Parse, "unsupported checkpoint version " + std::to_string(version));
  const auto channels = get_le<std::uint32_t>(is, path);
  const auto layers = get_le<std::uint32_t>(is, path);
  const auto count = get_le<std::uint64_t>(is, path);
  HyperGCTParams p(static_cast<int>(channels), static_cast<int>(layers));
  if (count != static_cast<std::uint64_t>(p.flat().size()))
    throw Error(ErrorKind::Parse, "parameter count does not match layout in " + path.string());
  for (std::uint64_t k = 0; k < count; ++k) p.flat()[static_cast<Eigen::Index>(k)] = get_le<double>(is, path);
  if (!p.flat().allFinite()) throw Error(ErrorKind::NonFinite, "checkpoint contains non-finite values");
  return p;
}

}  // namespace hgct

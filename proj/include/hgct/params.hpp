#pragma once

#include <cstdint>
#include <filesystem>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "hgct/geom.hpp"

namespace hgct {

/// Location of one affine map y = x·W + b inside the flat parameter vector.
/// W is `in × out` stored column-major, immediately followed by b (`out`).
struct AffineSlot {
  int offset = 0;
  int in = 0;
  int out = 0;

  int weight_size() const { return in * out; }
  int size() const { return in * out + out; }
};

struct ConvSlots {
  AffineSlot mlp1_hidden;  ///< 2C → C
  AffineSlot mlp1_out;     ///< C → C
  AffineSlot mlp2_hidden;  ///< C → C
  AffineSlot mlp2_out;     ///< C → C
  AffineSlot nl_theta;
  AffineSlot nl_phi;
  AffineSlot nl_g;
  AffineSlot nl_out;
};

struct UpdateSlots {
  AffineSlot query;
  AffineSlot key;
};

/// Serialization order: input lift, then for each conv layer t the eight ConvSlots
/// in declaration order, then for each update block the query and key maps,
/// then the confidence head, then log σ_f as the final scalar.
struct ParamLayout {
  int channels = 0;
  int layers = 0;
  AffineSlot input_lift;
  std::vector<ConvSlots> conv;
  std::vector<UpdateSlots> update;
  AffineSlot conf_head;
  int log_sigma_f = 0;
  int total = 0;

  static ParamLayout make(int channels, int layers);
};

/// Maps W (in x out, column-major) and b of one affine slot. `Scalar` may be const.
template <typename Scalar>
struct AffineView {
  using Plain = std::remove_const_t<Scalar>;
  using MatT = std::conditional_t<std::is_const_v<Scalar>, const Eigen::Matrix<Plain, Eigen::Dynamic, Eigen::Dynamic>,
                                  Eigen::Matrix<Plain, Eigen::Dynamic, Eigen::Dynamic>>;
  using VecT = std::conditional_t<std::is_const_v<Scalar>, const Eigen::Matrix<Plain, Eigen::Dynamic, 1>,
                                  Eigen::Matrix<Plain, Eigen::Dynamic, 1>>;
  Eigen::Map<MatT> W;
  Eigen::Map<VecT> b;
};

class HyperGCTParams {
 public:
  static constexpr int kInputDim = 6;

  HyperGCTParams() : HyperGCTParams(32, 5) {}
  HyperGCTParams(int channels, int layers);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, σ_f = 1.
  static HyperGCTParams random(int channels, int layers, std::uint64_t seed);
  /// Same shape, every entry zero (gradient accumulator).
  static HyperGCTParams zeros_like(const HyperGCTParams& other);

  int channels() const { return layout_.channels; }
  int layers() const { return layout_.layers; }
  const ParamLayout& layout() const { return layout_; }

  Vector& flat() { return flat_; }
  const Vector& flat() const { return flat_; }

  AffineView<double> view(const AffineSlot& s);
  AffineView<const double> view(const AffineSlot& s) const;

  double log_sigma_f() const { return flat_[layout_.log_sigma_f]; }
  double& log_sigma_f() { return flat_[layout_.log_sigma_f]; }
  double sigma_f() const;

  bool operator==(const HyperGCTParams& other) const;

 private:
  ParamLayout layout_;
  Vector flat_;
};

constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint: 8-byte magic "HGCTCKPT", u32 version, u32 channels,
/// u32 layers, u64 parameter count, then that many little-endian f64 values in
/// ParamLayout order (log σ_f last).
void save_checkpoint(const HyperGCTParams& params, const std::filesystem::path& path);
HyperGCTParams load_checkpoint(const std::filesystem::path& path);

}  // namespace hgct

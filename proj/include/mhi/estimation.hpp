#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mhi/geometry.hpp"
#include "mhi/image.hpp"
#include "mhi/mhi.hpp"

namespace mhi {

/// Reference image plus a second view used only as photometric evidence.
struct StereoInput {
  RgbImage reference;
  RgbImage second;
  Intrinsics ref_cam;
  Intrinsics sec_cam;
  Pose rel_pose_sec;  // second -> reference

  void validate() const;
};

/// Per-layer, per-reference-pixel photometric cost of explaining the
/// reference image with the second image warped through that layer's plane.
class OrientedCostVolume {
 public:
  OrientedCostVolume(MhiConfig config);

  const MhiConfig& config() const { return config_; }
  int layer_count() const { return config_.layer_count(); }
  std::size_t layer_size() const { return static_cast<std::size_t>(config_.width) * config_.height; }

  /// Flat layer index l = i * D + j.
  int flat_index(int i, int j) const { return i * config_.distances_per_normal + j; }

  std::span<float> cost(int l) { return std::span<float>(cost_).subspan(l * layer_size(), layer_size()); }
  std::span<const float> cost(int l) const {
    return std::span<const float>(cost_).subspan(l * layer_size(), layer_size());
  }
  float at(int i, int j, int x, int y) const {
    return cost_[flat_index(i, j) * layer_size() + static_cast<std::size_t>(y) * config_.width + x];
  }
  /// True where the second image was sampled in bounds for this layer.
  bool valid(int l, int x, int y) const {
    return valid_[l * layer_size() + static_cast<std::size_t>(y) * config_.width + x] != 0;
  }
  std::span<std::uint8_t> valid_span(int l) {
    return std::span<std::uint8_t>(valid_).subspan(l * layer_size(), layer_size());
  }

  /// Cost assigned to invalid samples: the largest valid cost in the volume.
  float sentinel() const { return sentinel_; }
  void set_sentinel(float s) { sentinel_ = s; }

 private:
  MhiConfig config_;
  std::vector<float> cost_;
  std::vector<std::uint8_t> valid_;
  float sentinel_ = 0.0f;
};

/// Plane-sweeps the second image over every MHI layer: per reference pixel,
/// the mean absolute RGB difference to the warped second image, box-averaged
/// over the valid samples of a 3x3 window. Layers whose plane is degenerate
/// for the second camera are entirely sentinel.
OrientedCostVolume build_ocv(const StereoInput& input, const MhiConfig& config);

enum class EstimatorMode { winner_take_all, softmin };

std::string_view to_string(EstimatorMode m);
EstimatorMode parse_estimator_mode(std::string_view s);

struct EstimatorOptions {
  EstimatorMode mode = EstimatorMode::winner_take_all;
  double tau = 0.05;  // softmin temperature, in cost units
  int dilation_radius = 1;
};

struct AlphaEstimate {
  Mhi mhi;
  /// Per reference pixel, the flat index (i * D + j) of the layer with the
  /// largest compositing contribution before dilation. Lowest index on ties.
  std::vector<int> labels;
};

/// Assigns layer alphas from the cost volume. Layer colors are copies of the
/// reference image.
///
/// winner_take_all: α = 1 on the per-pixel argmin over all N·D layers (lowest
/// flat index on ties), 0 elsewhere.
/// softmin: p ∝ exp(−cost/τ) over all layers; inside each normal group the
/// probabilities become alphas whose over-composite contributes exactly p per
/// layer, so a group's accumulated alpha is its probability mass (≤ 1).
/// Both modes then dilate every layer's alpha by `dilation_radius` pixels.
AlphaEstimate estimate_alphas(const OrientedCostVolume& ocv, const RgbImage& reference,
                              const EstimatorOptions& options = {});

/// build_ocv followed by estimate_alphas.
AlphaEstimate estimate_mhi(const StereoInput& input, const MhiConfig& config,
                           const EstimatorOptions& options = {});

}  // namespace mhi

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mhi/geometry.hpp"
#include "mhi/image.hpp"
#include "mhi/renderer.hpp"

namespace mhi {

enum class BlendScheme { hard, soft, average };

std::string_view to_string(BlendScheme s);
/// Parses "hard" / "soft" / "average" (also "avg"); throws FormatError.
BlendScheme parse_blend_scheme(std::string_view s);

/// N per-normal planes of H×W values (costs or weights), normal-major, kept
/// in double so weights match their closed forms to 1e-9.
class NormalStack {
 public:
  NormalStack() = default;
  NormalStack(int normals, int width, int height, double fill = 0.0)
      : normals_(normals), width_(width), height_(height),
        data_(static_cast<std::size_t>(normals) * width * height, fill) {}

  int normal_count() const { return normals_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double& at(int i, int x, int y) { return data_[offset(i, x, y)]; }
  double at(int i, int x, int y) const { return data_[offset(i, x, y)]; }
  std::span<double> plane(int i) {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(i) * width_ * height_,
                                           static_cast<std::size_t>(width_) * height_);
  }
  std::span<const double> plane(int i) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(i) * width_ * height_,
                                                 static_cast<std::size_t>(width_) * height_);
  }

 private:
  std::size_t offset(int i, int x, int y) const {
    return (static_cast<std::size_t>(i) * height_ + y) * width_ + x;
  }
  int normals_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct BlendWeights {
  NormalStack weights;
  BlendScheme scheme = BlendScheme::average;
};

/// |cos| between the rotated layer normal Rᵀn and the target viewing ray
/// K_t⁻¹u. Translation plays no part.
double angle_cost(const Vec3& normal, const PixelCoord& pixel, const Intrinsics& tgt_cam,
                  const Mat3& rel_rotation);

/// angle_cost for every normal and target pixel.
NormalStack angle_costs(std::span<const Vec3> normals, const Intrinsics& tgt_cam,
                        const Mat3& rel_rotation);

/// One-hot at the per-pixel argmax; ties go to the smallest normal index.
BlendWeights hard_weights(const NormalStack& costs);

/// ω = exp(sharpness · (2δ − 1)).
BlendWeights soft_weights(const NormalStack& costs, double sharpness = 3.0);

BlendWeights average_weights(int normals, int width, int height);

BlendWeights make_weights(BlendScheme scheme, const NormalStack& costs, double sharpness = 3.0);

struct BlendResult {
  RgbImage image;
  /// Pixels with no valid weighted contributor; they hold the unmasked blend.
  Mask holes;
};

/// How the multi-normal images are normalized.
enum class BlendNormalization {
  /// Σ ωᵢ Ĉᵢ / Σ ωᵢ over valid images (weights masked by valid_mask).
  weights,
  /// Σ ωᵢ Ĉᵢ / Σ ωᵢ Âᵢ: each image counts in proportion to its accumulated
  /// alpha, so the result is opaque wherever any normal group has content.
  coverage,
};

/// Weighted average of the multi-normal images.
BlendResult blend(std::span<const MultiNormalImage> multi_normal, const BlendWeights& weights,
                  BlendNormalization normalization = BlendNormalization::weights);

/// Restricts hard weights to groups that cover a pixel: the chosen group is
/// the best-cost one among valid groups with accumulated alpha ≥ 0.5, falling
/// back to any group with nonzero alpha, then to the plain argmax.
BlendWeights coverage_hard_weights(const NormalStack& costs,
                                   std::span<const MultiNormalImage> multi_normal);

/// Per-pixel normalized weights ωᵢ / Σω as one gray image per normal.
std::vector<GrayImage> normalized_weight_maps(const BlendWeights& weights);

}  // namespace mhi

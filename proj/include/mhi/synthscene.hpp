#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mhi/estimation.hpp"
#include "mhi/geometry.hpp"
#include "mhi/image.hpp"

namespace mhi {

/// Deterministic random source. Only the raw engine output is used so the
/// stream is identical on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

enum class TextureKind { checkerboard, value_noise };

/// Raster texture over the unit square; texel k covers [k/W, (k+1)/W) with
/// its center at (k + 0.5) / W.
struct TextureSpec {
  TextureKind kind = TextureKind::value_noise;
  std::uint64_t seed = 0;
  int texels_u = 64;
  int texels_v = 64;
  /// Checkerboard square size or noise lattice cell, in texels.
  double cell_texels = 8.0;
  std::array<float, 3> color_a{0.1f, 0.1f, 0.1f};
  std::array<float, 3> color_b{0.9f, 0.9f, 0.9f};
};

RgbImage make_texture(const TextureSpec& spec);

/// Parallelogram on `plane` spanned by edge_u, edge_v from `origin`;
/// texture coordinate (s, t) in [0,1]² maps to origin + s·edge_u + t·edge_v.
struct TexturedQuad {
  Plane plane = Plane::through_axis_depth(Vec3::UnitZ(), 1.0);
  Vec3 origin = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitX();
  Vec3 edge_v = Vec3::UnitY();
  TextureSpec texture;
  RgbImage texels;

  /// Builds the quad and its texels; corners must lie on the plane.
  static TexturedQuad make(const Plane& plane, const Vec3& origin, const Vec3& edge_u,
                           const Vec3& edge_v, const TextureSpec& texture);

  std::array<Vec3, 4> corners() const;
};

struct PlanarScene {
  std::vector<TexturedQuad> quads;
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
};

struct OracleView {
  RgbImage image;
  DepthImage depth;  // z in the camera frame; 0 where no quad is hit
  std::vector<int> hit_quad;  // -1 on miss
};

/// Ray-casts every pixel center against all quads (nearest hit wins) and
/// samples the hit quad's texture bilinearly. `pose` maps camera coordinates
/// to scene (reference) coordinates.
OracleView render_oracle(const PlanarScene& scene, const Intrinsics& cam, const Pose& pose);

/// Target pixels whose surface point is visible in the reference view: it
/// projects inside the reference image and all four bilinear neighbors see
/// the same depth (relative tolerance `depth_tol`).
Mask cross_visible_mask(const OracleView& target, const Intrinsics& tgt_cam, const Pose& tgt_pose,
                        const OracleView& reference, const Intrinsics& ref_cam,
                        double depth_tol = 0.05);

enum class RotationBin { upto2, from2to4, from4to8 };

std::string_view to_string(RotationBin b);
RotationBin parse_rotation_bin(std::string_view s);
/// Bin bounds (lo, hi] in degrees.
std::pair<double, double> bin_bounds(RotationBin b);
/// Bin containing θ; throws InvariantViolation outside (0, 8].
RotationBin bin_for_angle(double deg);
inline constexpr std::array<RotationBin, 3> kRotationBins{RotationBin::upto2, RotationBin::from2to4,
                                                          RotationBin::from4to8};

struct TargetView {
  Intrinsics intrinsics;
  Pose pose;  // target -> reference
  RgbImage ground_truth;
  Mask valid;  // cross-visible pixels
  double rotation_deg = 0.0;
  bool extrapolation = false;
};

struct SceneSample {
  std::string id;
  std::uint64_t seed = 0;
  StereoInput input;
  std::vector<TargetView> targets;
  RotationBin bin = RotationBin::upto2;
  PlanarScene scene;
};

struct SuiteOptions {
  int width = 192;
  int height = 128;
  double hfov_deg = 90.0;
  /// Maximum second-view parallax for the nearest scene point, pixels.
  double max_parallax_px = 64.0;
  /// Approximate noise lattice cell size as seen in the reference, pixels.
  double texture_cell_px = 10.0;
  /// Targets orbit a look-at point this far in front of the reference camera.
  double orbit_radius_min = 0.5;
  double orbit_radius_max = 1.0;
};

/// Deterministic suite of `scenes_per_bin` samples for each rotation bin.
/// Quads are tilted by up to slant_range_deg; one target per sample, with
/// interpolating and extrapolating targets alternating.
std::vector<SceneSample> generate_suite(std::uint64_t seed, int scenes_per_bin,
                                        double slant_range_deg, const SuiteOptions& options = {});

/// Builds one sample (used by generate_suite).
SceneSample generate_sample(std::uint64_t seed, RotationBin bin, bool extrapolate,
                            double slant_range_deg, const SuiteOptions& options);

/// Rounds every image value to the nearest multiple of 1/255.
void quantize_8bit(RgbImage& img);

/// `suite.json` plus per-sample PNGs.
void save_suite(const std::vector<SceneSample>& suite, const std::filesystem::path& dir,
                std::uint64_t seed, double slant_range_deg, const SuiteOptions& options);

/// Loads images, cameras and masks (scene geometry is not restored).
std::vector<SceneSample> load_suite(const std::filesystem::path& dir);

}  // namespace mhi

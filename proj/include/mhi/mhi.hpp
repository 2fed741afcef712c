#pragma once

#include <filesystem>
#include <vector>

#include "mhi/geometry.hpp"
#include "mhi/image.hpp"

namespace mhi {

/// Sampling schedule of a multiple homography image: N layer normals, each
/// swept over D planes whose optical-axis depths are evenly spaced in
/// disparity between near_depth and far_depth.
struct MhiConfig {
  std::vector<Vec3> normals;
  double near_depth = 1.0;
  double far_depth = 100.0;
  int distances_per_normal = 32;
  int width = 0;
  int height = 0;
  Intrinsics ref_intrinsics;

  int normal_count() const { return static_cast<int>(normals.size()); }
  int layer_count() const { return normal_count() * distances_per_normal; }

  /// 1/depth for j = 0..D-1, from 1/near down to 1/far.
  std::vector<double> disparities() const;
  /// Axis depths, strictly increasing; endpoints are exactly near and far.
  std::vector<double> depths() const;
  /// Plane of layer (normal i, distance j), both 0-based.
  Plane plane(int normal_index, int distance_index) const;

  void validate() const;
};

/// The five layer normals used by default, ordered n1..n5.
const std::vector<Vec3>& default_normals();

/// Normal subset for N layer normals: N=1 is fronto-parallel only (MPI),
/// N=2 {n1, n5}, N=3 {n1, n3, n5}, N=4 {n1, n2, n4, n5}, N=5 all five.
std::vector<Vec3> normals_for_count(int n);

MhiConfig default_config(int width, int height, double near_depth = 1.0,
                         double far_depth = 100.0, int normal_count = 5,
                         int distances_per_normal = 32);

/// Same sampling with explicit reference intrinsics.
MhiConfig default_config(const Intrinsics& ref, double near_depth = 1.0,
                         double far_depth = 100.0, int normal_count = 5,
                         int distances_per_normal = 32);

/// One RGBA layer. Color is straight (not premultiplied) alpha.
struct MhiLayer {
  RgbaImage rgba;
  Plane plane = Plane::through_axis_depth(Vec3::UnitZ(), 1.0);
  int normal_index = 0;
  int distance_index = 0;

  float alpha(int x, int y) const { return rgba.at(x, y, 3); }
};

class Mhi {
 public:
  /// Layers with all-zero color and alpha.
  explicit Mhi(MhiConfig config);
  /// Takes ownership of `layers` (normal-major, j=0 nearest) and validates.
  Mhi(MhiConfig config, std::vector<MhiLayer> layers);

  const MhiConfig& config() const { return config_; }
  int normal_count() const { return config_.normal_count(); }
  int distance_count() const { return config_.distances_per_normal; }

  const MhiLayer& layer(int i, int j) const { return layers_[index(i, j)]; }
  MhiLayer& layer(int i, int j) { return layers_[index(i, j)]; }
  const std::vector<MhiLayer>& layers() const { return layers_; }
  /// Mutable access for estimators; planes and indices must be left intact.
  std::vector<MhiLayer>& layers_mut() { return layers_; }

  /// Re-checks every structural and value invariant.
  void validate() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * config_.distances_per_normal + j;
  }
  MhiConfig config_;
  std::vector<MhiLayer> layers_;
};

/// Writes `mhi.json` plus one RGBA PNG per layer (`layer_{i:02}_{j:03}.png`,
/// 1-based indices). bit_depth is 8 or 16.
void save_mhi(const Mhi& mhi, const std::filesystem::path& dir, int bit_depth = 8);

/// Loads and validates a directory written by save_mhi.
Mhi load_mhi(const std::filesystem::path& dir);

}  // namespace mhi

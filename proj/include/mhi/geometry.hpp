#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mhi/errors.hpp"

namespace mhi {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Pinhole intrinsics. Pixel (u, v) = (column, row); pixel centers sit on
/// integer coordinates. Camera frame is right-handed, z forward, x right, y down.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Square-pixel camera with the given horizontal field of view, principal
  /// point at the image center.
  static Intrinsics from_hfov(int width, int height, double hfov_deg);

  Mat3 as_matrix() const;
  Mat3 inverse_matrix() const;
  void validate() const;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// Rigid transform X_dst = rotation * X_src + translation.
///
/// Relative poses in this library always map the target (or second) camera
/// frame into the reference camera frame.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const;
  /// (a * b)(X) = a(b(X)).
  Pose operator*(const Pose& other) const;
  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  /// Throws NotARotation unless R is orthonormal with det 1 within `tol`.
  void validate(double tol = 1e-6) const;
};

/// Plane nᵀX + d = 0 in reference-camera coordinates.
class Plane {
 public:
  /// The plane with unit normal `normal` containing the optical-axis point
  /// (0, 0, axis_depth). The normal must not be perpendicular to the axis.
  static Plane through_axis_depth(const Vec3& normal, double axis_depth);

  /// Validating constructor for planes not defined by an axis crossing
  /// (e.g. quads parallel to the optical axis in synthetic scenes).
  static Plane from_normal_offset(const Vec3& normal, double offset);

  const Vec3& normal() const { return normal_; }
  double offset() const { return offset_; }

  /// Depth at which the plane crosses the reference optical axis.
  double axis_depth() const { return -offset_ / normal_.z(); }

  /// Signed distance of `x` from the plane (positive on the normal side).
  double signed_distance(const Vec3& x) const { return normal_.dot(x) + offset_; }

 private:
  Plane(const Vec3& n, double d) : normal_(n), offset_(d) {}
  Vec3 normal_;
  double offset_;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// H = K_r (R - t nᵀR / (d + nᵀt)) K_t⁻¹ mapping homogeneous target pixels to
/// reference pixels for points on `plane`.
Mat3 homography_target_to_reference(const Intrinsics& ref_cam, const Intrinsics& tgt_cam,
                                    const Pose& rel_pose, const Plane& plane);

/// Ray-casting equivalent of the homography: back-project u_t, intersect with
/// the plane, transform into the reference frame and project with K_r.
PixelCoord project_via_plane(const PixelCoord& u_t, const Intrinsics& tgt_cam,
                             const Intrinsics& ref_cam, const Pose& rel_pose,
                             const Plane& plane);

/// Maps a pixel through a 3x3 homography and dehomogenizes.
PixelCoord apply_homography(const Mat3& h, const PixelCoord& p);

/// θ = arccos((trace(R) − 1) / 2) in degrees.
double rotation_angle_deg(const Mat3& rotation);

/// Rᵀn: a reference-frame normal expressed in the target frame.
Vec3 rotate_normal(const Pose& rel_pose, const Vec3& normal);

Mat3 rotation_about_axis(const Vec3& axis, double angle_deg);

/// Intrinsic X-Y-Z Euler angles in degrees: R = Rx(rx) * Ry(ry) * Rz(rz).
Mat3 rotation_from_euler_xyz_deg(double rx, double ry, double rz);

/// Camera at `center` (in reference coordinates) looking at `target`, with the
/// image y axis aligned as closely as possible to `down`.
Pose look_at(const Vec3& center, const Vec3& target, const Vec3& down = Vec3(0, 1, 0));

}  // namespace mhi

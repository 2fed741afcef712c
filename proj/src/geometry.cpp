#include "mhi/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mhi {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

Intrinsics Intrinsics::from_hfov(int width, int height, double hfov_deg) {
  const double f = 0.5 * width / std::tan(0.5 * hfov_deg * kDegToRad);
  return {f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

Mat3 Intrinsics::as_matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 Intrinsics::inverse_matrix() const {
  if (!(std::abs(fx) > 0.0) || !(std::abs(fy) > 0.0))
    throw SingularIntrinsics("intrinsics have zero focal length");
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw SingularIntrinsics("focal lengths must be positive and finite");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw InvariantViolation("principal point must be finite");
  if (width < 1 || height < 1) throw InvariantViolation("image size must be at least 1x1");
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose Pose::operator*(const Pose& other) const {
  Pose out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

void Pose::validate(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw NotARotation("pose contains non-finite values");
  const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (ortho > tol || std::abs(det - 1.0) > tol) {
    std::ostringstream os;
    os << "matrix is not a rotation (|RRᵀ-I|=" << ortho << ", det=" << det << ")";
    throw NotARotation(os.str());
  }
}

Plane Plane::through_axis_depth(const Vec3& normal, double axis_depth) {
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-12)
    throw InvariantViolation("plane normal must be unit length");
  if (std::abs(normal.z()) < 1e-12)
    throw DegeneratePlane("plane normal is perpendicular to the optical axis");
  if (!(axis_depth > 0.0) || !std::isfinite(axis_depth))
    throw InvariantViolation("axis depth must be positive");
  return Plane(normal, -normal.z() * axis_depth);
}

Plane Plane::from_normal_offset(const Vec3& normal, double offset) {
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-12)
    throw InvariantViolation("plane normal must be unit length");
  if (!std::isfinite(offset)) throw InvariantViolation("plane offset must be finite");
  return Plane(normal, offset);
}

Mat3 homography_target_to_reference(const Intrinsics& ref_cam, const Intrinsics& tgt_cam,
                                    const Pose& rel_pose, const Plane& plane) {
  const Vec3& n = plane.normal();
  const Vec3& t = rel_pose.translation;
  const Mat3& r = rel_pose.rotation;
  const double denom = plane.offset() + n.dot(t);
  if (std::abs(denom) <= 1e-9)
    throw DegeneratePlane("camera center lies on the layer plane");
  const Mat3 core = r - (t * (n.transpose() * r)) / denom;
  return ref_cam.as_matrix() * core * tgt_cam.inverse_matrix();
}

PixelCoord project_via_plane(const PixelCoord& u_t, const Intrinsics& tgt_cam,
                             const Intrinsics& ref_cam, const Pose& rel_pose,
                             const Plane& plane) {
  // Ray through the pixel, in target coordinates, with unit z component.
  const Vec3 ray((u_t.u - tgt_cam.cx) / tgt_cam.fx, (u_t.v - tgt_cam.cy) / tgt_cam.fy, 1.0);
  // Plane in target coordinates: (Rᵀn)ᵀX_t + (d + nᵀt) = 0.
  const Vec3 n_t = rel_pose.rotation.transpose() * plane.normal();
  const double d_t = plane.offset() + plane.normal().dot(rel_pose.translation);
  const double denom = n_t.dot(ray);
  if (std::abs(denom) <= 1e-12) throw RayParallelToPlane("viewing ray is parallel to the plane");
  const double depth = -d_t / denom;
  if (!(depth > 0.0)) throw BehindCamera("plane intersection lies behind the target camera");
  const Vec3 x_r = rel_pose.apply(depth * ray);
  if (!(x_r.z() > 0.0)) throw BehindCamera("plane point lies behind the reference camera");
  return {ref_cam.fx * x_r.x() / x_r.z() + ref_cam.cx, ref_cam.fy * x_r.y() / x_r.z() + ref_cam.cy};
}

PixelCoord apply_homography(const Mat3& h, const PixelCoord& p) {
  const Vec3 q = h * Vec3(p.u, p.v, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

double rotation_angle_deg(const Mat3& rotation) {
  Pose{rotation, Vec3::Zero()}.validate(1e-6);
  const double c = 0.5 * (rotation.trace() - 1.0);
  if (c > 1.0 + 1e-6 || c < -1.0 - 1e-6)
    throw NotARotation("rotation trace out of range");
  return std::acos(std::clamp(c, -1.0, 1.0)) / kDegToRad;
}

Vec3 rotate_normal(const Pose& rel_pose, const Vec3& normal) {
  return rel_pose.rotation.transpose() * normal;
}

Mat3 rotation_about_axis(const Vec3& axis, double angle_deg) {
  return Eigen::AngleAxisd(angle_deg * kDegToRad, axis.normalized()).toRotationMatrix();
}

Mat3 rotation_from_euler_xyz_deg(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(rx * kDegToRad, Vec3::UnitX()) *
          Eigen::AngleAxisd(ry * kDegToRad, Vec3::UnitY()) *
          Eigen::AngleAxisd(rz * kDegToRad, Vec3::UnitZ()))
      .toRotationMatrix();
}

Pose look_at(const Vec3& center, const Vec3& target, const Vec3& down) {
  const Vec3 z = (target - center).normalized();
  Vec3 x = down.cross(z);
  if (x.norm() < 1e-12) x = Vec3::UnitY().cross(z);
  x.normalize();
  const Vec3 y = z.cross(x);
  Pose p;
  p.rotation.col(0) = x;
  p.rotation.col(1) = y;
  p.rotation.col(2) = z;
  p.translation = center;
  return p;
}

}  // namespace mhi

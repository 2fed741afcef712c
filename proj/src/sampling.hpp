#pragma once

// Internal helpers shared by the warping kernels of the renderer and the
// cost-volume builder.

#include <algorithm>
#include <cmath>
#include <limits>

#include "mhi/geometry.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace mhi::detail {

/// Bilinear footprint of a continuous coordinate. Valid only when the point
/// lies inside [0, w-1] x [0, h-1]; nothing is clamped.
struct BilinearTap {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  float wx = 0.0f, wy = 0.0f;
};

inline bool bilinear_tap(double x, double y, int w, int h, BilinearTap& tap) {
  if (!(x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1)) return false;
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > w - 2) x0 = std::max(w - 2, 0);
  if (y0 > h - 2) y0 = std::max(h - 2, 0);
  tap.x0 = x0;
  tap.y0 = y0;
  tap.x1 = std::min(x0 + 1, w - 1);
  tap.y1 = std::min(y0 + 1, h - 1);
  tap.wx = static_cast<float>(x - x0);
  tap.wy = static_cast<float>(y - y0);
  return true;
}

/// Interpolates C interleaved channels starting at channel offset `first`.
template <int Stride, int C>
inline void bilinear_fetch(const float* img, int w, const BilinearTap& t, float* out, int first = 0) {
  const float* p00 = img + (static_cast<std::size_t>(t.y0) * w + t.x0) * Stride + first;
  const float* p01 = img + (static_cast<std::size_t>(t.y0) * w + t.x1) * Stride + first;
  const float* p10 = img + (static_cast<std::size_t>(t.y1) * w + t.x0) * Stride + first;
  const float* p11 = img + (static_cast<std::size_t>(t.y1) * w + t.x1) * Stride + first;
  const float ax = 1.0f - t.wx;
  const float ay = 1.0f - t.wy;
  for (int c = 0; c < C; ++c) {
    const float top = ax * p00[c] + t.wx * p01[c];
    const float bottom = ax * p10[c] + t.wx * p11[c];
    out[c] = ay * top + t.wy * bottom;
  }
}

#if defined(__SSE2__)
/// RGBA fetch with the same per-channel operations as bilinear_fetch<4, 4>,
/// so results are bitwise identical.
inline __m128 bilinear_fetch_rgba(const float* img, int w, const BilinearTap& t) {
  const float* row0 = img + static_cast<std::size_t>(t.y0) * w * 4;
  const float* row1 = img + static_cast<std::size_t>(t.y1) * w * 4;
  const __m128 wx = _mm_set1_ps(t.wx);
  const __m128 wy = _mm_set1_ps(t.wy);
  const __m128 ax = _mm_set1_ps(1.0f - t.wx);
  const __m128 ay = _mm_set1_ps(1.0f - t.wy);
  const __m128 top = _mm_add_ps(_mm_mul_ps(ax, _mm_loadu_ps(row0 + 4 * t.x0)),
                                _mm_mul_ps(wx, _mm_loadu_ps(row0 + 4 * t.x1)));
  const __m128 bottom = _mm_add_ps(_mm_mul_ps(ax, _mm_loadu_ps(row1 + 4 * t.x0)),
                                   _mm_mul_ps(wx, _mm_loadu_ps(row1 + 4 * t.x1)));
  return _mm_add_ps(_mm_mul_ps(ay, top), _mm_mul_ps(wy, bottom));
}
#endif

/// Target-pixel → source-pixel mapping through a plane homography, rejecting
/// target rays that meet the plane behind the target camera.
struct PlaneMapping {
  double h[9];
  double ray_side[3];  // dot with (u, v, 1) must be > 0 for the ray to hit the plane

  PlaneMapping(const Mat3& homography, const Vec3& side) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h[3 * r + c] = homography(r, c);
    for (int i = 0; i < 3; ++i) ray_side[i] = side[i];
  }

  /// Maps (u, v); false when the ray misses the plane or the point is behind
  /// the source camera.
  bool map(double u, double v, double& x, double& y) const {
    const double s = ray_side[0] * u + ray_side[1] * v + ray_side[2];
    const double wz = h[6] * u + h[7] * v + h[8];
    if (!(s > 0.0) || !(wz > 0.0)) return false;
    x = (h[0] * u + h[1] * v + h[2]) / wz;
    y = (h[3] * u + h[4] * v + h[5]) / wz;
    return true;
  }

  /// map() for pixels 0..n-1 of row v. Pixels that miss get NaN
  /// coordinates, which bilinear_tap rejects.
  void map_row(double v, int n, double* xs, double* ys) const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int i = 0;
#if defined(__SSE2__)
    // Two pixels per step with the same per-lane operations as map().
    const __m128d zero = _mm_setzero_pd();
    const __m128d nans = _mm_set1_pd(nan);
    // c0 * u + c1 * v + c2 with the row term c1 * v hoisted; same rounding.
    struct Linear {
      __m128d c0, c1v, c2;
      Linear(const double* c, double v)
          : c0(_mm_set1_pd(c[0])), c1v(_mm_set1_pd(c[1] * v)), c2(_mm_set1_pd(c[2])) {}
      __m128d operator()(__m128d u) const { return _mm_add_pd(_mm_add_pd(_mm_mul_pd(c0, u), c1v), c2); }
    };
    const Linear side(ray_side, v), num_x(h, v), num_y(h + 3, v), den(h + 6, v);
    __m128d u = _mm_set_pd(1.0, 0.0);
    const __m128d two = _mm_set1_pd(2.0);
    for (; i + 1 < n; i += 2, u = _mm_add_pd(u, two)) {
      const __m128d wz = den(u);
      const __m128d hit = _mm_and_pd(_mm_cmpgt_pd(side(u), zero), _mm_cmpgt_pd(wz, zero));
      const __m128d x = _mm_div_pd(num_x(u), wz);
      const __m128d y = _mm_div_pd(num_y(u), wz);
      _mm_storeu_pd(xs + i, _mm_or_pd(_mm_and_pd(hit, x), _mm_andnot_pd(hit, nans)));
      _mm_storeu_pd(ys + i, _mm_or_pd(_mm_and_pd(hit, y), _mm_andnot_pd(hit, nans)));
    }
#endif
    for (; i < n; ++i)
      if (!map(i, v, xs[i], ys[i])) xs[i] = ys[i] = nan;
  }
};

/// Builds the mapping from `tgt` pixels to `ref` pixels for a reference-frame
/// plane, given the target-to-reference pose.
inline PlaneMapping make_plane_mapping(const Intrinsics& ref, const Intrinsics& tgt,
                                       const Pose& rel_pose, const Plane& plane) {
  const Mat3 h = homography_target_to_reference(ref, tgt, rel_pose, plane);
  // Ray parameter s = -(d + nᵀt) / (nᵀR K⁻¹u); s > 0 iff the sign-adjusted
  // linear form below is positive.
  const double dist = plane.offset() + plane.normal().dot(rel_pose.translation);
  const Vec3 side = -(plane.normal().transpose() * rel_pose.rotation * tgt.inverse_matrix()).transpose() *
                    (dist > 0.0 ? 1.0 : -1.0);
  return PlaneMapping(h, side);
}

}  // namespace mhi::detail

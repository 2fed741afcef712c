// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the code under test for the quantity it checks.
#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mhi/geometry.hpp"
#include "mhi/image.hpp"
#include "mhi/mhi.hpp"
#include "mhi/renderer.hpp"

namespace mhi::test {

inline constexpr double kPi = 3.14159265358979323846;

using Rng64 = std::mt19937_64;

inline double uniform(Rng64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_unit(Rng64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

// Rodrigues formula, written out independently of the library helpers.
inline Mat3 axis_angle(const Vec3& axis, double deg) {
  const Vec3 a = axis.normalized();
  const double th = deg * kPi / 180.0;
  Mat3 k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Mat3::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

inline Mat3 random_rotation(Rng64& rng, double max_deg) {
  return axis_angle(random_unit(rng), uniform(rng, 0.0, max_deg));
}

inline Intrinsics random_intrinsics(Rng64& rng, int w = 320, int h = 240) {
  Intrinsics k;
  k.fx = uniform(rng, 150.0, 600.0);
  k.fy = k.fx * uniform(rng, 0.9, 1.1);
  k.cx = (w - 1) / 2.0 + uniform(rng, -10.0, 10.0);
  k.cy = (h - 1) / 2.0 + uniform(rng, -10.0, 10.0);
  k.width = w;
  k.height = h;
  return k;
}

/// Ray–plane projection carried out in the reference frame: the target
/// camera center is t, the ray direction R·K_t⁻¹u, and the hit point solves
/// nᵀ(t + λ·dir) + d = 0. Returns false when the hit is not in front of both
/// cameras.
inline bool oracle_project(double u, double v, const Intrinsics& kt, const Intrinsics& kr,
                           const Pose& pose, const Vec3& n, double d, double& ur, double& vr) {
  const Vec3 ray_cam((u - kt.cx) / kt.fx, (v - kt.cy) / kt.fy, 1.0);
  const Vec3 dir = pose.rotation * ray_cam;
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-12) return false;
  const double lambda = -(n.dot(pose.translation) + d) / denom;
  if (!(lambda > 0.0)) return false;
  const Vec3 x = pose.translation + lambda * dir;
  if (!(x.z() > 0.0)) return false;
  ur = kr.fx * x.x() / x.z() + kr.cx;
  vr = kr.fy * x.y() / x.z() + kr.cy;
  return true;
}

/// Eq. 2 evaluated literally per pixel in double precision.
inline void oracle_composite(const std::vector<std::vector<double>>& colors,  // [layer][c]
                             const std::vector<double>& alphas, double out[3], double& acc) {
  out[0] = out[1] = out[2] = 0.0;
  acc = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    double trans = 1.0;
    for (std::size_t k = 0; k < j; ++k) trans *= (1.0 - alphas[k]);
    for (int c = 0; c < 3; ++c) out[c] += colors[j][c] * alphas[j] * trans;
    acc += alphas[j] * trans;
  }
}

/// Random RGBA values in every layer; alpha drawn with a mix of exact 0, exact
/// 1 and fractional values so all compositing branches are exercised.
inline Mhi random_mhi(const MhiConfig& cfg, Rng64& rng) {
  Mhi mhi(cfg);
  std::uniform_real_distribution<float> u01(0.0f, 1.0f);
  for (MhiLayer& layer : mhi.layers_mut()) {
    auto px = layer.rgba.data();
    for (std::size_t k = 0; k < px.size(); k += 4) {
      px[k] = u01(rng);
      px[k + 1] = u01(rng);
      px[k + 2] = u01(rng);
      const float r = u01(rng);
      px[k + 3] = r < 0.6f ? 0.0f : (r < 0.7f ? 1.0f : u01(rng));
    }
  }
  return mhi;
}

inline RgbImage random_rgb(int w, int h, Rng64& rng) {
  RgbImage img(w, h);
  std::uniform_real_distribution<float> u01(0.0f, 1.0f);
  for (float& v : img.data()) v = u01(rng);
  return img;
}

/// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mhi_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Masked mean squared error over all channels, accumulated in long double.
inline double oracle_mse(const RgbImage& a, const RgbImage& b, const Mask& m) {
  long double sum = 0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (m(x, y))
        for (int c = 0; c < 3; ++c) {
          const long double d = static_cast<long double>(a.at(x, y, c)) - b.at(x, y, c);
          sum += d * d;
          ++n;
        }
  return static_cast<double>(sum / n);
}

/// Direct windowed SSIM: 2-D Gaussian weights built here, moments about the
/// mean; 11x11 window, σ = 1.5, K1 = 0.01, K2 = 0.03, unit dynamic range.
inline double oracle_ssim(const RgbImage& a, const RgbImage& b, const Mask& m) {
  const int r = 5;
  const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double w[11][11], total = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) total += w[dy + r][dx + r] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
  for (auto& row : w)
    for (double& v : row) v /= total;
  double sum = 0;
  std::size_t n = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = r; y + r < a.height(); ++y)
      for (int x = r; x + r < a.width(); ++x) {
        if (!m(x, y)) continue;
        double ma = 0, mb = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            ma += w[dy + r][dx + r] * a.at(x + dx, y + dy, c);
            mb += w[dy + r][dx + r] * b.at(x + dx, y + dy, c);
          }
        double va = 0, vb = 0, cov = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const double da = a.at(x + dx, y + dy, c) - ma, db = b.at(x + dx, y + dy, c) - mb;
            va += w[dy + r][dx + r] * da * da;
            vb += w[dy + r][dx + r] * db * db;
            cov += w[dy + r][dx + r] * da * db;
          }
        sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++n;
      }
  return sum / n;
}

}  // namespace mhi::test

#include "mhi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sampling.hpp"

namespace mhi {

void StereoInput::validate() const {
  ref_cam.validate();
  sec_cam.validate();
  rel_pose_sec.validate(1e-6);
  if (!reference.same_size(ref_cam.width, ref_cam.height))
    throw DimensionMismatch("reference image is " + std::to_string(reference.width()) + "x" +
                            std::to_string(reference.height()) + " but its camera is " +
                            std::to_string(ref_cam.width) + "x" + std::to_string(ref_cam.height));
  if (!second.same_size(sec_cam.width, sec_cam.height))
    throw DimensionMismatch("second image is " + std::to_string(second.width()) + "x" +
                            std::to_string(second.height()) + " but its camera is " +
                            std::to_string(sec_cam.width) + "x" + std::to_string(sec_cam.height));
}

OrientedCostVolume::OrientedCostVolume(MhiConfig config)
    : config_(std::move(config)),
      cost_(static_cast<std::size_t>(config_.layer_count()) * config_.width * config_.height, 0.0f),
      valid_(cost_.size(), 0) {}

std::string_view to_string(EstimatorMode m) {
  return m == EstimatorMode::softmin ? "softmin" : "winner_take_all";
}

EstimatorMode parse_estimator_mode(std::string_view s) {
  if (s == "winner_take_all" || s == "wta") return EstimatorMode::winner_take_all;
  if (s == "softmin") return EstimatorMode::softmin;
  throw FormatError("unknown estimator mode '" + std::string(s) +
                    "' (expected winner_take_all or softmin)");
}

namespace {

// Raw per-pixel L1 cost of one layer; invalid pixels get NaN.
void raw_layer_cost(const StereoInput& input, const Plane& plane, std::vector<float>& raw) {
  const int w = input.ref_cam.width;
  const int h = input.ref_cam.height;
  // The layer plane seen from the second camera's frame.
  const Pose& p = input.rel_pose_sec;
  const Plane plane_in_second = Plane::from_normal_offset(
      (p.rotation.transpose() * plane.normal()).normalized(),
      plane.offset() + plane.normal().dot(p.translation));
  const detail::PlaneMapping mapping =
      detail::make_plane_mapping(input.sec_cam, input.ref_cam, p.inverse(), plane_in_second);

  const float* sec = input.second.data().data();
  const int sw = input.sec_cam.width;
  const int sh = input.sec_cam.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx, sy;
      detail::BilinearTap tap;
      float& out = raw[static_cast<std::size_t>(y) * w + x];
      if (!mapping.map(x, y, sx, sy) || !detail::bilinear_tap(sx, sy, sw, sh, tap)) {
        out = std::numeric_limits<float>::quiet_NaN();
        continue;
      }
      float s[3];
      detail::bilinear_fetch<3, 3>(sec, sw, tap, s);
      const float* r = input.reference.pixel(x, y);
      out = (std::abs(r[0] - s[0]) + std::abs(r[1] - s[1]) + std::abs(r[2] - s[2])) / 3.0f;
    }
  }
}

// 3x3 mean over valid samples; pixels whose own sample is invalid stay invalid.
void box_aggregate(const std::vector<float>& raw, int w, int h, std::span<float> cost,
                   std::span<std::uint8_t> valid) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (std::isnan(raw[idx])) {
        valid[idx] = 0;
        cost[idx] = 0.0f;
        continue;
      }
      float sum = 0.0f;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const float v = raw[static_cast<std::size_t>(yy) * w + xx];
          if (std::isnan(v)) continue;
          sum += v;
          ++n;
        }
      }
      cost[idx] = sum / static_cast<float>(n);
      valid[idx] = 1;
    }
  }
}

}  // namespace

OrientedCostVolume build_ocv(const StereoInput& input, const MhiConfig& config) {
  input.validate();
  config.validate();
  if (config.ref_intrinsics != input.ref_cam)
    throw DimensionMismatch("MHI reference intrinsics differ from the stereo reference camera");

  OrientedCostVolume ocv(config);
  const int w = config.width;
  const int h = config.height;
  const int layers = config.layer_count();
  const auto depths = config.depths();

#pragma omp parallel
  {
    std::vector<float> raw(static_cast<std::size_t>(w) * h);
#pragma omp for schedule(dynamic, 1)
    for (int l = 0; l < layers; ++l) {
      const int i = l / config.distances_per_normal;
      const int j = l % config.distances_per_normal;
      auto valid = ocv.valid_span(l);
      try {
        raw_layer_cost(input, Plane::through_axis_depth(config.normals[i], depths[j]), raw);
      } catch (const DegeneratePlane&) {
        std::fill(valid.begin(), valid.end(), 0);
        continue;
      }
      box_aggregate(raw, w, h, ocv.cost(l), valid);
    }
  }

  float sentinel = 0.0f;
  for (int l = 0; l < layers; ++l) {
    const auto c = ocv.cost(l);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (ocv.valid(l, static_cast<int>(k % w), static_cast<int>(k / w))) sentinel = std::max(sentinel, c[k]);
  }
  ocv.set_sentinel(sentinel);
  for (int l = 0; l < layers; ++l) {
    auto c = ocv.cost(l);
    const auto v = ocv.valid_span(l);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (!v[k]) c[k] = sentinel;
  }
  return ocv;
}

namespace {

// Max-filters every layer's alpha with a (2r+1)^2 window.
void dilate_alphas(Mhi& mhi, int radius) {
  if (radius <= 0) return;
  const int w = mhi.config().width;
  const int h = mhi.config().height;
  const int n = mhi.normal_count();
  const int d = mhi.distance_count();
#pragma omp parallel
  {
    std::vector<float> src(static_cast<std::size_t>(w) * h);
    std::vector<float> rowmax(src.size());
#pragma omp for schedule(dynamic, 1)
    for (int l = 0; l < n * d; ++l) {
      MhiLayer& layer = mhi.layer(l / d, l % d);
      bool any = false;
      for (std::size_t k = 0; k < src.size(); ++k) {
        src[k] = layer.rgba.data()[4 * k + 3];
        any = any || src[k] != 0.0f;
      }
      if (!any) continue;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          float m = 0.0f;
          for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx)
            m = std::max(m, src[static_cast<std::size_t>(y) * w + xx]);
          rowmax[static_cast<std::size_t>(y) * w + x] = m;
        }
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          float m = 0.0f;
          for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy)
            m = std::max(m, rowmax[static_cast<std::size_t>(yy) * w + x]);
          layer.rgba.at(x, y, 3) = m;
        }
    }
  }
}

}  // namespace

AlphaEstimate estimate_alphas(const OrientedCostVolume& ocv, const RgbImage& reference,
                              const EstimatorOptions& options) {
  const MhiConfig& cfg = ocv.config();
  if (!reference.same_size(cfg.width, cfg.height))
    throw DimensionMismatch("reference image does not match the cost volume");
  if (options.mode == EstimatorMode::softmin && !(options.tau > 0.0))
    throw InvariantViolation("softmin temperature must be positive");

  const int w = cfg.width;
  const int h = cfg.height;
  const int n = cfg.normal_count();
  const int d = cfg.distances_per_normal;
  const int layers = n * d;
  const std::size_t pixels = static_cast<std::size_t>(w) * h;

  Mhi mhi(cfg);
  for (MhiLayer& layer : mhi.layers_mut()) {
    auto dst = layer.rgba.data();
    const auto src = reference.data();
    for (std::size_t k = 0; k < pixels; ++k) {
      dst[4 * k + 0] = src[3 * k + 0];
      dst[4 * k + 1] = src[3 * k + 1];
      dst[4 * k + 2] = src[3 * k + 2];
    }
  }

  std::vector<int> labels(pixels, 0);
#pragma omp parallel
  {
    std::vector<double> prob(layers);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * w + x;
        int best = 0;
        float best_cost = ocv.cost(0)[k];
        for (int l = 1; l < layers; ++l) {
          const float c = ocv.cost(l)[k];
          if (c < best_cost) {
            best_cost = c;
            best = l;
          }
        }
        if (options.mode == EstimatorMode::winner_take_all) {
          labels[k] = best;
          mhi.layer(best / d, best % d).rgba.at(x, y, 3) = 1.0f;
          continue;
        }

        double total = 0.0;
        for (int l = 0; l < layers; ++l) {
          prob[l] = std::exp(-(static_cast<double>(ocv.cost(l)[k]) - best_cost) / options.tau);
          total += prob[l];
        }
        int label = 0;
        for (int l = 0; l < layers; ++l) {
          prob[l] /= total;
          if (prob[l] > prob[label]) label = l;
        }
        labels[k] = label;
        for (int i = 0; i < n; ++i) {
          double remaining = 1.0;
          for (int j = 0; j < d; ++j) {
            const double p = prob[i * d + j];
            const double a = remaining > 0.0 ? std::clamp(p / remaining, 0.0, 1.0) : 0.0;
            mhi.layer(i, j).rgba.at(x, y, 3) = static_cast<float>(a);
            remaining -= p;
          }
        }
      }
    }
  }

  dilate_alphas(mhi, options.dilation_radius);
  mhi.validate();
  return AlphaEstimate{std::move(mhi), std::move(labels)};
}

AlphaEstimate estimate_mhi(const StereoInput& input, const MhiConfig& config,
                           const EstimatorOptions& options) {
  return estimate_alphas(build_ocv(input, config), input.reference, options);
}

}  // namespace mhi

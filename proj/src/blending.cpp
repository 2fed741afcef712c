#include "mhi/blending.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mhi {

std::string_view to_string(BlendScheme s) {
  switch (s) {
    case BlendScheme::hard: return "hard";
    case BlendScheme::soft: return "soft";
    case BlendScheme::average: return "average";
  }
  return "average";
}

BlendScheme parse_blend_scheme(std::string_view s) {
  if (s == "hard") return BlendScheme::hard;
  if (s == "soft") return BlendScheme::soft;
  if (s == "average" || s == "avg") return BlendScheme::average;
  throw FormatError("unknown blend scheme '" + std::string(s) + "' (expected hard, soft or average)");
}

double angle_cost(const Vec3& normal, const PixelCoord& pixel, const Intrinsics& tgt_cam,
                  const Mat3& rel_rotation) {
  const Vec3 rotated = rel_rotation.transpose() * normal;
  const Vec3 ray = tgt_cam.inverse_matrix() * Vec3(pixel.u, pixel.v, 1.0);
  return std::abs(rotated.dot(ray)) / (rotated.norm() * ray.norm());
}

NormalStack angle_costs(std::span<const Vec3> normals, const Intrinsics& tgt_cam,
                        const Mat3& rel_rotation) {
  const int w = tgt_cam.width;
  const int h = tgt_cam.height;
  NormalStack costs(static_cast<int>(normals.size()), w, h);
  for (int i = 0; i < costs.normal_count(); ++i) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        costs.at(i, x, y) = angle_cost(normals[i], {double(x), double(y)}, tgt_cam, rel_rotation);
  }
  return costs;
}

BlendWeights hard_weights(const NormalStack& costs) {
  BlendWeights out{NormalStack(costs.normal_count(), costs.width(), costs.height()),
                   BlendScheme::hard};
  for (int y = 0; y < costs.height(); ++y) {
    for (int x = 0; x < costs.width(); ++x) {
      int best = 0;
      for (int i = 1; i < costs.normal_count(); ++i)
        if (costs.at(i, x, y) > costs.at(best, x, y)) best = i;
      out.weights.at(best, x, y) = 1.0;
    }
  }
  return out;
}

BlendWeights soft_weights(const NormalStack& costs, double sharpness) {
  BlendWeights out{NormalStack(costs.normal_count(), costs.width(), costs.height()),
                   BlendScheme::soft};
  for (int i = 0; i < costs.normal_count(); ++i) {
    auto src = costs.plane(i);
    auto dst = out.weights.plane(i);
    for (std::size_t k = 0; k < src.size(); ++k)
      dst[k] = std::exp(sharpness * (2.0 * src[k] - 1.0));
  }
  return out;
}

BlendWeights average_weights(int normals, int width, int height) {
  return {NormalStack(normals, width, height, 1.0), BlendScheme::average};
}

BlendWeights make_weights(BlendScheme scheme, const NormalStack& costs, double sharpness) {
  switch (scheme) {
    case BlendScheme::hard: return hard_weights(costs);
    case BlendScheme::soft: return soft_weights(costs, sharpness);
    case BlendScheme::average: break;
  }
  return average_weights(costs.normal_count(), costs.width(), costs.height());
}

BlendWeights coverage_hard_weights(const NormalStack& costs,
                                   std::span<const MultiNormalImage> multi_normal) {
  const int n = costs.normal_count();
  if (static_cast<int>(multi_normal.size()) != n)
    throw DimensionMismatch("weights and multi-normal images disagree on N");
  BlendWeights out{NormalStack(n, costs.width(), costs.height()), BlendScheme::hard};
  for (int y = 0; y < costs.height(); ++y) {
    for (int x = 0; x < costs.width(); ++x) {
      int best = -1;
      for (float threshold : {0.5f, 0.0f}) {
        for (int i = 0; i < n; ++i) {
          const float a = multi_normal[i].accumulated_alpha.at(x, y);
          const bool eligible = multi_normal[i].valid_mask(x, y) &&
                                (threshold > 0.0f ? a >= threshold : a > 0.0f);
          if (eligible && (best < 0 || costs.at(i, x, y) > costs.at(best, x, y))) best = i;
        }
        if (best >= 0) break;
      }
      if (best < 0) {
        best = 0;
        for (int i = 1; i < n; ++i)
          if (costs.at(i, x, y) > costs.at(best, x, y)) best = i;
      }
      out.weights.at(best, x, y) = 1.0;
    }
  }
  return out;
}

BlendResult blend(std::span<const MultiNormalImage> multi_normal, const BlendWeights& weights,
                  BlendNormalization normalization) {
  const int n = static_cast<int>(multi_normal.size());
  if (n == 0) throw DimensionMismatch("no multi-normal images to blend");
  const int w = multi_normal.front().color.width();
  const int h = multi_normal.front().color.height();
  if (weights.weights.normal_count() != n || weights.weights.width() != w ||
      weights.weights.height() != h)
    throw DimensionMismatch("blend weights do not match the multi-normal images");
  for (const auto& m : multi_normal)
    if (!m.color.same_size(w, h) || !m.accumulated_alpha.same_size(w, h) ||
        m.valid_mask.width() != w || m.valid_mask.height() != h)
      throw DimensionMismatch("multi-normal images must share dimensions");

  constexpr double kEps = 1e-12;
  BlendResult out{RgbImage(w, h), Mask(w, h)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double num[3] = {0.0, 0.0, 0.0};
      double den = 0.0;
      double raw_num[3] = {0.0, 0.0, 0.0};
      double raw_den = 0.0;
      for (int i = 0; i < n; ++i) {
        const double wi = weights.weights.at(i, x, y);
        const float* c = multi_normal[i].color.pixel(x, y);
        for (int k = 0; k < 3; ++k) raw_num[k] += wi * c[k];
        raw_den += wi;
        if (!multi_normal[i].valid_mask(x, y)) continue;
        const double scale = normalization == BlendNormalization::coverage
                                 ? wi * multi_normal[i].accumulated_alpha.at(x, y)
                                 : wi;
        for (int k = 0; k < 3; ++k) num[k] += wi * c[k];
        den += scale;
      }
      float* dst = out.image.pixel(x, y);
      if (den > 0.0) {
        for (int k = 0; k < 3; ++k) dst[k] = static_cast<float>(num[k] / std::max(den, kEps));
        if (normalization == BlendNormalization::coverage)
          for (int k = 0; k < 3; ++k) dst[k] = std::clamp(dst[k], 0.0f, 1.0f);
      } else {
        for (int k = 0; k < 3; ++k) dst[k] = static_cast<float>(raw_num[k] / std::max(raw_den, kEps));
        out.holes.set(x, y, true);
      }
    }
  }
  return out;
}

std::vector<GrayImage> normalized_weight_maps(const BlendWeights& weights) {
  const NormalStack& s = weights.weights;
  std::vector<GrayImage> maps(s.normal_count(), GrayImage(s.width(), s.height()));
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      double total = 0.0;
      for (int i = 0; i < s.normal_count(); ++i) total += s.at(i, x, y);
      for (int i = 0; i < s.normal_count(); ++i)
        maps[i].at(x, y) = total > 0.0 ? static_cast<float>(s.at(i, x, y) / total) : 0.0f;
    }
  }
  return maps;
}

}  // namespace mhi

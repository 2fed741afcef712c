#include "mhi/renderer.hpp"

#include <algorithm>
#include <cstdint>

#include <omp.h>

#include "sampling.hpp"

namespace mhi {

namespace {

// Bounding box of pixels with nonzero alpha; samples whose bilinear footprint
// misses it have alpha exactly 0 and can skip the texture fetch.
struct AlphaSupport {
  int x_min, y_min, x_max, y_max;
  bool touches(const detail::BilinearTap& t) const {
    return t.x1 >= x_min && t.x0 <= x_max && t.y1 >= y_min && t.y0 <= y_max;
  }
};

AlphaSupport alpha_support(const RgbaImage& rgba) {
  AlphaSupport s{rgba.width(), rgba.height(), -1, -1};
  const int w = rgba.width();
  for (int y = 0; y < rgba.height(); ++y) {
    const float* row = rgba.pixel(0, y);
    // Scan inward from both ends; dense rows stop after a few pixels.
    int first = 0;
    while (first < w && row[4 * first + 3] == 0.0f) ++first;
    if (first == w) continue;
    int last = w - 1;
    while (row[4 * last + 3] == 0.0f) --last;
    s.x_min = std::min(s.x_min, first);
    s.x_max = std::max(s.x_max, last);
    s.y_min = std::min(s.y_min, y);
    s.y_max = y;
  }
  return s;
}

// Adds one layer sample over transmittance t to acc (premultiplied RGB, then
// alpha) and returns the sample's alpha. Same operation order as
// composite_normal_group.
inline float accumulate(const float* src, int src_w, const detail::BilinearTap& tap, float t, float* acc) {
#if defined(__SSE2__)
  const __m128 rgba = detail::bilinear_fetch_rgba(src, src_w, tap);
  const float a = _mm_cvtss_f32(_mm_shuffle_ps(rgba, rgba, _MM_SHUFFLE(3, 3, 3, 3)));
  // Lane 3 becomes 1 so it accumulates the bare weight.
  const __m128 rgb_mask = _mm_castsi128_ps(_mm_set_epi32(0, -1, -1, -1));
  const __m128 rgb1 = _mm_or_ps(_mm_and_ps(rgba, rgb_mask), _mm_set_ps(1.0f, 0.0f, 0.0f, 0.0f));
  _mm_storeu_ps(acc, _mm_add_ps(_mm_loadu_ps(acc), _mm_mul_ps(rgb1, _mm_set1_ps(a * t))));
#else
  float rgba[4];
  detail::bilinear_fetch<4, 4>(src, src_w, tap, rgba);
  const float a = rgba[3];
  const float weight = a * t;
  acc[0] += rgba[0] * weight;
  acc[1] += rgba[1] * weight;
  acc[2] += rgba[2] * weight;
  acc[3] += weight;
#endif
  return a;
}

void check_request(const RenderRequest& req) {
  req.tgt_intrinsics.validate();
  req.rel_pose.validate(1e-6);
}

}  // namespace

WarpedLayer warp_layer(const MhiLayer& layer, const RenderRequest& req, const Intrinsics& ref_cam) {
  check_request(req);
  const int w = req.tgt_intrinsics.width;
  const int h = req.tgt_intrinsics.height;
  const int src_w = layer.rgba.width();
  const int src_h = layer.rgba.height();
  const detail::PlaneMapping mapping =
      detail::make_plane_mapping(ref_cam, req.tgt_intrinsics, req.rel_pose, layer.plane);

  WarpedLayer out{RgbImage(w, h), GrayImage(w, h), Mask(w, h)};
  const float* src = layer.rgba.data().data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx, sy;
      detail::BilinearTap tap;
      if (!mapping.map(x, y, sx, sy) || !detail::bilinear_tap(sx, sy, src_w, src_h, tap)) continue;
      float rgba[4];
      detail::bilinear_fetch<4, 4>(src, src_w, tap, rgba);
      float* c = out.color.pixel(x, y);
      c[0] = rgba[0];
      c[1] = rgba[1];
      c[2] = rgba[2];
      out.alpha.at(x, y) = rgba[3];
      out.in_bounds.set(x, y, true);
    }
  }
  return out;
}

MultiNormalImage composite_normal_group(std::span<const WarpedLayer> layers, int normal_index) {
  if (layers.empty()) throw DimensionMismatch("cannot composite an empty layer group");
  const int w = layers.front().color.width();
  const int h = layers.front().color.height();
  for (const WarpedLayer& l : layers)
    if (!l.color.same_size(w, h) || !l.alpha.same_size(w, h) || l.in_bounds.width() != w ||
        l.in_bounds.height() != h)
      throw DimensionMismatch("warped layers in a group must share dimensions");

  MultiNormalImage out{RgbImage(w, h), GrayImage(w, h), normal_index, Mask(w, h)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc[3] = {0.0f, 0.0f, 0.0f};
      float acc_alpha = 0.0f;
      float transmittance = 1.0f;
      bool valid = false;
      for (const WarpedLayer& l : layers) {
        valid = valid || l.in_bounds(x, y);
        const float a = l.alpha.at(x, y);
        const float weight = a * transmittance;
        const float* c = l.color.pixel(x, y);
        acc[0] += c[0] * weight;
        acc[1] += c[1] * weight;
        acc[2] += c[2] * weight;
        acc_alpha += weight;
        transmittance *= 1.0f - a;
      }
      float* dst = out.color.pixel(x, y);
      dst[0] = acc[0];
      dst[1] = acc[1];
      dst[2] = acc[2];
      out.accumulated_alpha.at(x, y) = acc_alpha;
      out.valid_mask.set(x, y, valid);
    }
  }
  return out;
}

std::vector<MultiNormalImage> render_multi_normal_images(const Mhi& mhi, const RenderRequest& req) {
  check_request(req);
  const MhiConfig& cfg = mhi.config();
  const int w = req.tgt_intrinsics.width;
  const int h = req.tgt_intrinsics.height;
  const int depth_count = cfg.distances_per_normal;

  std::vector<MultiNormalImage> out;
  out.reserve(cfg.normal_count());
  for (int i = 0; i < cfg.normal_count(); ++i) {
    std::vector<detail::PlaneMapping> mappings;
    std::vector<AlphaSupport> supports;
    mappings.reserve(depth_count);
    for (int j = 0; j < depth_count; ++j) {
      const MhiLayer& layer = mhi.layer(i, j);
      mappings.push_back(detail::make_plane_mapping(cfg.ref_intrinsics, req.tgt_intrinsics,
                                                    req.rel_pose, layer.plane));
      supports.push_back(alpha_support(layer.rgba));
    }

    MultiNormalImage mni{RgbImage(w, h), GrayImage(w, h), i, Mask(w, h)};
    const int band_rows = std::clamp(h / (4 * omp_get_max_threads()), 4, 64);
    const int bands = (h + band_rows - 1) / band_rows;
#pragma omp parallel
    {
      // Per-band scratch: transmittance, premultiplied RGB plus accumulated
      // alpha, and whether any layer footprint covered the pixel.
      const std::size_t n = static_cast<std::size_t>(band_rows) * w;
      std::vector<float> transmittance(n);
      std::vector<float> acc(4 * n);
      std::vector<std::uint8_t> valid(n);
      std::vector<double> xs(w), ys(w);
#pragma omp for schedule(static)
      for (int band = 0; band < bands; ++band) {
        const int y_begin = band * band_rows;
        const int y_end = std::min(y_begin + band_rows, h);
        std::fill(transmittance.begin(), transmittance.end(), 1.0f);
        std::fill(acc.begin(), acc.end(), 0.0f);
        std::fill(valid.begin(), valid.end(), 0);
        // Pixels that are still transparent or not yet valid.
        std::size_t unresolved = static_cast<std::size_t>(y_end - y_begin) * w;
        // Layer-major within the band keeps each layer's rows hot in cache.
        for (int j = 0; j < depth_count && unresolved > 0; ++j) {
          const float* src = mhi.layer(i, j).rgba.data().data();
          const AlphaSupport& support = supports[j];
          const detail::PlaneMapping& mapping = mappings[j];
          for (int y = y_begin; y < y_end; ++y) {
            const std::size_t row = static_cast<std::size_t>(y - y_begin) * w;
            mapping.map_row(y, w, xs.data(), ys.data());
            for (int x = 0; x < w; ++x) {
              const std::size_t k = row + x;
              const float t = transmittance[k];
              if (t == 0.0f && valid[k]) continue;
              detail::BilinearTap tap;
              if (!detail::bilinear_tap(xs[x], ys[x], cfg.width, cfg.height, tap)) continue;
              if (!valid[k]) {
                valid[k] = 1;
                if (t == 0.0f) --unresolved;
              }
              if (t == 0.0f || !support.touches(tap)) continue;
              const float a = accumulate(src, cfg.width, tap, t, &acc[4 * k]);
              transmittance[k] = t * (1.0f - a);
              if (transmittance[k] == 0.0f) --unresolved;
            }
          }
        }
        for (int y = y_begin; y < y_end; ++y) {
          float* color_row = mni.color.pixel(0, y);
          float* alpha_row = mni.accumulated_alpha.pixel(0, y);
          const std::size_t row = static_cast<std::size_t>(y - y_begin) * w;
          for (int x = 0; x < w; ++x) {
            const float* a = &acc[4 * (row + x)];
            color_row[3 * x] = a[0];
            color_row[3 * x + 1] = a[1];
            color_row[3 * x + 2] = a[2];
            alpha_row[x] = a[3];
            mni.valid_mask.set(x, y, valid[row + x] != 0);
          }
        }
      }
    }
    out.push_back(std::move(mni));
  }
  return out;
}

PixelOpacities pixel_opacities(std::span<const WarpedLayer> layers, int x, int y) {
  PixelOpacities p;
  for (const WarpedLayer& l : layers) {
    const float a = l.alpha.at(x, y);
    p.opacity.push_back(a * p.transmittance);
    p.transmittance *= 1.0f - a;
  }
  return p;
}

}  // namespace mhi

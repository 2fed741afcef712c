#include <gtest/gtest.h>

#include "mhi/renderer.hpp"
#include "support.hpp"

using namespace mhi;
using namespace mhi::test;

namespace {

WarpedLayer flat_layer(int w, int h, float r, float g, float b, float a) {
  WarpedLayer l{RgbImage(w, h), GrayImage(w, h, a), Mask(w, h, true)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      l.color.at(x, y, 0) = r;
      l.color.at(x, y, 1) = g;
      l.color.at(x, y, 2) = b;
    }
  return l;
}

std::vector<WarpedLayer> random_layers(int count, int w, int h, Rng64& rng) {
  std::vector<WarpedLayer> out;
  std::uniform_real_distribution<float> u01(0.0f, 1.0f);
  for (int j = 0; j < count; ++j) {
    WarpedLayer l{random_rgb(w, h, rng), GrayImage(w, h), Mask(w, h, true)};
    for (float& a : l.alpha.data()) {
      const float r = u01(rng);
      a = r < 0.2f ? 0.0f : (r < 0.3f ? 1.0f : u01(rng));
    }
    out.push_back(std::move(l));
  }
  return out;
}

Pose orbit_pose(double deg, double radius) {
  const Mat3 r = axis_angle(Vec3::UnitY(), deg);
  const Vec3 center(0, 0, radius);
  return Pose{r, center + r * Vec3(0, 0, -radius)};
}

// Bilinear lookup with the renderer's out-of-bounds rule (no clamping).
bool oracle_bilinear(const RgbaImage& img, double x, double y, double out[4]) {
  const int w = img.width(), h = img.height();
  if (x < 0 || y < 0 || x > w - 1 || y > h - 1) return false;
  const int x0 = std::min(static_cast<int>(std::floor(x)), w - 2);
  const int y0 = std::min(static_cast<int>(std::floor(y)), h - 2);
  const double fx = x - x0, fy = y - y0;
  for (int c = 0; c < 4; ++c)
    out[c] = (1 - fy) * ((1 - fx) * img.at(x0, y0, c) + fx * img.at(x0 + 1, y0, c)) +
             fy * ((1 - fx) * img.at(x0, y0 + 1, c) + fx * img.at(x0 + 1, y0 + 1, c));
  return true;
}

}  // namespace

TEST(Warp, IdentityPoseReproducesLayer) {
  // Rays that never meet a steep plane inside the field of view stay invalid.
  Rng64 rng(21);
  const Mhi m = random_mhi(default_config(40, 30, 1.0, 100.0, 5, 3), rng);
  const Intrinsics& k = m.config().ref_intrinsics;
  const RenderRequest req{k, Pose::identity()};
  for (const MhiLayer& layer : m.layers()) {
    const WarpedLayer w = warp_layer(layer, req, k);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        double ur, vr;
        const bool hits =
            oracle_project(x, y, k, k, Pose::identity(), layer.plane.normal(), layer.plane.offset(), ur, vr);
        ASSERT_EQ(w.in_bounds(x, y), hits) << x << "," << y;
        if (!hits) continue;
        for (int c = 0; c < 3; ++c) ASSERT_NEAR(w.color.at(x, y, c), layer.rgba.at(x, y, c), 1e-6);
        ASSERT_NEAR(w.alpha.at(x, y), layer.alpha(x, y), 1e-6);
      }
    if (layer.normal_index == 2) {
      EXPECT_EQ(w.in_bounds.count(), 40u * 30u);
    }
  }
}

TEST(Warp, ConstantFieldStaysConstant) {
  Rng64 rng(22);
  Mhi m(default_config(48, 32, 1.0, 100.0, 5, 4));
  for (MhiLayer& l : m.layers_mut())
    for (std::size_t k = 0; k < l.rgba.data().size(); k += 4) {
      l.rgba.data()[k] = 0.25f;
      l.rgba.data()[k + 1] = 0.5f;
      l.rgba.data()[k + 2] = 0.75f;
      l.rgba.data()[k + 3] = 0.4f;
    }
  for (int trial = 0; trial < 10; ++trial) {
    const RenderRequest req{m.config().ref_intrinsics,
                            Pose{random_rotation(rng, 5.0), random_unit(rng) * 0.2}};
    for (const MhiLayer& layer : m.layers()) {
      const WarpedLayer w = warp_layer(layer, req, m.config().ref_intrinsics);
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 48; ++x) {
          if (!w.in_bounds(x, y)) {
            EXPECT_EQ(w.alpha.at(x, y), 0.0f);
            EXPECT_EQ(w.color.at(x, y, 0), 0.0f);
            continue;
          }
          EXPECT_NEAR(w.color.at(x, y, 0), 0.25f, 1e-6);
          EXPECT_NEAR(w.color.at(x, y, 2), 0.75f, 1e-6);
          EXPECT_NEAR(w.alpha.at(x, y), 0.4f, 1e-6);
        }
    }
  }
}

TEST(Warp, FrontoParallelShiftMatchesParallax) {
  // fx = 256, plane at 5 m, 0.1 m sideways: 5.12 px.
  const int w = 256, h = 64;
  const Intrinsics k{256, 256, (w - 1) / 2.0, (h - 1) / 2.0, w, h};
  MhiConfig cfg = default_config(k, 5.0, 10.0, 1, 2);
  Mhi m(cfg);
  MhiLayer& layer = m.layer(0, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = 0.5 + 0.2 * std::sin(x * 0.21) + 0.15 * std::sin(x * 0.047 + 1.0) +
                       0.1 * std::cos(x * 0.5 + y * 0.01);
      for (int c = 0; c < 3; ++c) layer.rgba.at(x, y, c) = static_cast<float>(v);
      layer.rgba.at(x, y, 3) = 1.0f;
    }
  const RenderRequest req{k, Pose{Mat3::Identity(), Vec3(0.1, 0, 0)}};
  const WarpedLayer out = warp_layer(layer, req, k);
  // Target pixel u samples reference u + s; find s by exhaustive normalized
  // cross-correlation on a 0.01 px grid over one row.
  const int y = h / 2;
  double best_s = 0, best = -1e300;
  for (int step = 0; step <= 1000; ++step) {
    const double s = step * 0.01;
    double sum_ab = 0, sum_aa = 0, sum_bb = 0;
    for (int x = 20; x < w - 20; ++x) {
      const double xs = x + s;
      const int x0 = static_cast<int>(xs);
      const double f = xs - x0;
      const double ref = (1 - f) * layer.rgba.at(x0, y, 0) + f * layer.rgba.at(x0 + 1, y, 0);
      const double a = out.color.at(x, y, 0) - 0.5, b = ref - 0.5;
      sum_ab += a * b;
      sum_aa += a * a;
      sum_bb += b * b;
    }
    const double ncc = sum_ab / std::sqrt(sum_aa * sum_bb);
    if (ncc > best) {
      best = ncc;
      best_s = s;
    }
  }
  EXPECT_NEAR(best_s, 5.12, 0.25);
}

TEST(Composite, TwoLayerClosedForm) {
  const std::vector<WarpedLayer> layers{flat_layer(2, 2, 1, 0, 0, 0.6f), flat_layer(2, 2, 0, 1, 0, 0.4f)};
  const MultiNormalImage m = composite_normal_group(layers);
  EXPECT_NEAR(m.color.at(1, 1, 0), 0.6, 1e-7);
  EXPECT_NEAR(m.color.at(1, 1, 1), 0.16, 1e-7);
  EXPECT_EQ(m.color.at(1, 1, 2), 0.0f);
  EXPECT_NEAR(m.accumulated_alpha.at(1, 1), 0.76, 1e-7);
}

TEST(Composite, OpaqueBackLayerClosedForm) {
  const std::vector<WarpedLayer> layers{flat_layer(1, 1, 0.2f, 0.4f, 0.8f, 0.6f),
                                        flat_layer(1, 1, 1.0f, 0.5f, 0.0f, 1.0f)};
  const MultiNormalImage m = composite_normal_group(layers);
  EXPECT_NEAR(m.color.at(0, 0, 0), 0.6 * 0.2 + 0.4 * 1.0, 1e-7);
  EXPECT_NEAR(m.color.at(0, 0, 1), 0.6 * 0.4 + 0.4 * 0.5, 1e-7);
  EXPECT_NEAR(m.color.at(0, 0, 2), 0.6 * 0.8, 1e-7);
  EXPECT_NEAR(m.accumulated_alpha.at(0, 0), 1.0, 1e-7);
}

TEST(Composite, OpaqueFrontHidesBack) {
  const std::vector<WarpedLayer> layers{flat_layer(1, 1, 0.3f, 0.3f, 0.3f, 1.0f),
                                        flat_layer(1, 1, 1, 1, 1, 1.0f)};
  const MultiNormalImage m = composite_normal_group(layers);
  EXPECT_EQ(m.color.at(0, 0, 0), 0.3f);
  EXPECT_EQ(m.accumulated_alpha.at(0, 0), 1.0f);
}

TEST(Composite, MatchesScalarOracle) {
  Rng64 rng(23);
  for (int d : {1, 2, 7, 32}) {
    const auto layers = random_layers(d, 9, 7, rng);
    const MultiNormalImage m = composite_normal_group(layers);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        std::vector<std::vector<double>> colors;
        std::vector<double> alphas;
        for (const WarpedLayer& l : layers) {
          colors.push_back({l.color.at(x, y, 0), l.color.at(x, y, 1), l.color.at(x, y, 2)});
          alphas.push_back(l.alpha.at(x, y));
        }
        double out[3], acc;
        oracle_composite(colors, alphas, out, acc);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(m.color.at(x, y, c), out[c], 1e-6);
        EXPECT_NEAR(m.accumulated_alpha.at(x, y), acc, 1e-6);
      }
  }
}

TEST(Composite, TransmittanceIsConserved) {
  Rng64 rng(24);
  const auto layers = random_layers(32, 8, 8, rng);
  const MultiNormalImage m = composite_normal_group(layers);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const PixelOpacities p = pixel_opacities(layers, x, y);
      double sum = 0;
      for (float o : p.opacity) {
        EXPECT_GE(o, 0.0f);
        sum += o;
      }
      EXPECT_NEAR(sum + p.transmittance, 1.0, 1e-6);
      EXPECT_NEAR(m.accumulated_alpha.at(x, y), sum, 1e-6);
      EXPECT_LE(m.accumulated_alpha.at(x, y), 1.0f + 1e-6f);
    }
}

TEST(Composite, OrderMatters) {
  const std::vector<WarpedLayer> ab{flat_layer(1, 1, 1, 0, 0, 0.5f), flat_layer(1, 1, 0, 0, 1, 0.5f)};
  const std::vector<WarpedLayer> ba{ab[1], ab[0]};
  const MultiNormalImage m1 = composite_normal_group(ab);
  const MultiNormalImage m2 = composite_normal_group(ba);
  EXPECT_NE(m1.color.at(0, 0, 0), m2.color.at(0, 0, 0));
  EXPECT_NEAR(m1.accumulated_alpha.at(0, 0), m2.accumulated_alpha.at(0, 0), 1e-7);
}

TEST(Composite, DisjointSupportsCommute) {
  std::vector<WarpedLayer> ab{flat_layer(2, 1, 1, 0, 0, 0), flat_layer(2, 1, 0, 0, 1, 0)};
  ab[0].alpha.at(0, 0) = 1.0f;
  ab[1].alpha.at(1, 0) = 0.7f;
  const std::vector<WarpedLayer> ba{ab[1], ab[0]};
  const MultiNormalImage m1 = composite_normal_group(ab);
  const MultiNormalImage m2 = composite_normal_group(ba);
  EXPECT_TRUE(m1.color == m2.color);
  EXPECT_TRUE(m1.accumulated_alpha == m2.accumulated_alpha);
}

TEST(Composite, RaisingFrontAlphaNeverRaisesBackContribution) {
  Rng64 rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    auto layers = random_layers(6, 1, 1, rng);
    const int k = static_cast<int>(uniform(rng, 0, 5.999));
    const PixelOpacities before = pixel_opacities(layers, 0, 0);
    float& a = layers[k].alpha.at(0, 0);
    a = std::min(1.0f, a + static_cast<float>(uniform(rng, 0, 1)));
    const PixelOpacities after = pixel_opacities(layers, 0, 0);
    for (int j = k + 1; j < 6; ++j) EXPECT_LE(after.opacity[j], before.opacity[j] + 1e-7f);
  }
}

TEST(Composite, ValidMaskIsUnionOfInBounds) {
  std::vector<WarpedLayer> layers{flat_layer(3, 1, 0, 0, 0, 0), flat_layer(3, 1, 0, 0, 0, 0)};
  layers[0].in_bounds = Mask(3, 1);
  layers[1].in_bounds = Mask(3, 1);
  layers[0].in_bounds.set(0, 0, true);
  layers[1].in_bounds.set(1, 0, true);
  const MultiNormalImage m = composite_normal_group(layers);
  EXPECT_TRUE(m.valid_mask(0, 0));
  EXPECT_TRUE(m.valid_mask(1, 0));
  EXPECT_FALSE(m.valid_mask(2, 0));
}

TEST(Composite, RejectsMismatchedSizes) {
  const std::vector<WarpedLayer> layers{flat_layer(2, 2, 0, 0, 0, 0), flat_layer(3, 2, 0, 0, 0, 0)};
  EXPECT_THROW(composite_normal_group(layers), DimensionMismatch);
}

TEST(Render, FusedPathIsBitwiseEqualToWarpThenComposite) {
  Rng64 rng(26);
  const Mhi m = random_mhi(default_config(37, 29, 1.0, 100.0, 5, 6), rng);
  for (int trial = 0; trial < 6; ++trial) {
    Intrinsics tgt = m.config().ref_intrinsics;
    if (trial % 2) tgt = Intrinsics{40, 41, 15.5, 12, 31, 25};
    const RenderRequest req{tgt, Pose{random_rotation(rng, 6.0), random_unit(rng) * 0.3}};
    const auto fused = render_multi_normal_images(m, req);
    ASSERT_EQ(fused.size(), 5u);
    for (int i = 0; i < 5; ++i) {
      std::vector<WarpedLayer> warped;
      for (int j = 0; j < m.distance_count(); ++j)
        warped.push_back(warp_layer(m.layer(i, j), req, m.config().ref_intrinsics));
      const MultiNormalImage ref = composite_normal_group(warped, i);
      EXPECT_EQ(fused[i].normal_index, i);
      EXPECT_TRUE(fused[i].color == ref.color);
      EXPECT_TRUE(fused[i].accumulated_alpha == ref.accumulated_alpha);
      EXPECT_TRUE(fused[i].valid_mask == ref.valid_mask);
    }
  }
}

TEST(Render, SingleNormalMatchesMultiplaneReference) {
  // Independent MPI renderer: per target pixel, intersect the ray with each
  // fronto-parallel plane, bilinear-sample, composite in double.
  Rng64 rng(27);
  const Mhi m = random_mhi(default_config(32, 24, 1.0, 100.0, 1, 8), rng);
  const Intrinsics& k = m.config().ref_intrinsics;
  const auto depths = m.config().depths();
  for (int trial = 0; trial < 4; ++trial) {
    const Pose pose{random_rotation(rng, 4.0), random_unit(rng) * 0.2};
    const auto mni = render_multi_normal_images(m, RenderRequest{k, pose});
    ASSERT_EQ(mni.size(), 1u);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) {
        std::vector<std::vector<double>> colors;
        std::vector<double> alphas;
        bool any = false;
        for (int j = 0; j < 8; ++j) {
          double ur, vr, s[4] = {0, 0, 0, 0};
          if (oracle_project(x, y, k, k, pose, Vec3::UnitZ(), -depths[j], ur, vr) &&
              oracle_bilinear(m.layer(0, j).rgba, ur, vr, s))
            any = true;
          colors.push_back({s[0], s[1], s[2]});
          alphas.push_back(s[3]);
        }
        double out[3], acc;
        oracle_composite(colors, alphas, out, acc);
        EXPECT_EQ(mni[0].valid_mask(x, y), any) << x << "," << y;
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(mni[0].color.at(x, y, c), out[c], 1e-5);
        EXPECT_NEAR(mni[0].accumulated_alpha.at(x, y), acc, 1e-5);
      }
  }
}

TEST(Render, IdentityPoseEqualsInPlaceComposite) {
  Rng64 rng(29);
  const Mhi m = random_mhi(default_config(20, 16, 1.0, 100.0, 3, 5), rng);
  const auto mni = render_multi_normal_images(m, RenderRequest{m.config().ref_intrinsics, Pose::identity()});
  for (int i = 0; i < 3; ++i)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 20; ++x) {
        std::vector<std::vector<double>> colors;
        std::vector<double> alphas;
        for (int j = 0; j < 5; ++j) {
          const RgbaImage& l = m.layer(i, j).rgba;
          colors.push_back({l.at(x, y, 0), l.at(x, y, 1), l.at(x, y, 2)});
          alphas.push_back(l.at(x, y, 3));
        }
        double out[3], acc;
        oracle_composite(colors, alphas, out, acc);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(mni[i].color.at(x, y, c), out[c], 1e-5);
        EXPECT_NEAR(mni[i].accumulated_alpha.at(x, y), acc, 1e-5);
      }
}

TEST(Render, OpaqueNearestLayerHidesTheRest) {
  Rng64 rng(30);
  Mhi m = random_mhi(default_config(32, 24, 1.0, 100.0, 2, 6), rng);
  for (int i = 0; i < 2; ++i) {
    auto px = m.layer(i, 0).rgba.data();
    for (std::size_t k = 3; k < px.size(); k += 4) px[k] = 1.0f;
  }
  const RenderRequest req{m.config().ref_intrinsics, Pose{random_rotation(rng, 3.0), random_unit(rng) * 0.1}};
  const auto mni = render_multi_normal_images(m, req);
  for (int i = 0; i < 2; ++i) {
    const WarpedLayer front = warp_layer(m.layer(i, 0), req, m.config().ref_intrinsics);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) {
        if (!front.in_bounds(x, y)) continue;
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(mni[i].color.at(x, y, c), front.color.at(x, y, c), 1e-6);
        EXPECT_NEAR(mni[i].accumulated_alpha.at(x, y), 1.0, 1e-6);
      }
  }
}

TEST(Render, OrbitAtTwoDegreesCoversSuiteView) {
  // Suite camera, Fig. 8 style orbit of radius 2 m. Coverage counts pixels
  // that some normal group samples in bounds, i.e. pixels that are not holes.
  const Intrinsics k = Intrinsics::from_hfov(192, 128, 90.0);
  const Mhi m(default_config(k, 1.0, 100.0, 5, 32));
  for (double deg : {-2.0, 2.0}) {
    const auto mni = render_multi_normal_images(m, RenderRequest{k, orbit_pose(deg, 2.0)});
    std::size_t covered = 0;
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 192; ++x) {
        bool any = false;
        for (const MultiNormalImage& g : mni) {
          any = any || g.valid_mask(x, y);
          ASSERT_TRUE(std::isfinite(g.color.at(x, y, 0)));
        }
        covered += any;
      }
    EXPECT_GE(static_cast<double>(covered) / (192.0 * 128.0), 0.95);
    // The fronto-parallel group alone covers the view too.
    EXPECT_GE(static_cast<double>(mni[2].valid_mask.count()) / (192.0 * 128.0), 0.95);
  }
}

TEST(Render, RejectsInvalidPose) {
  const Mhi m(default_config(8, 8, 1.0, 100.0, 1, 2));
  Pose bad;
  bad.rotation(0, 0) = 2.0;
  EXPECT_THROW(render_multi_normal_images(m, RenderRequest{m.config().ref_intrinsics, bad}), NotARotation);
}

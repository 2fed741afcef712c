#include <gtest/gtest.h>

#include "mhi/estimation.hpp"
#include "mhi/metrics.hpp"
#include "mhi/pipeline.hpp"
#include "scenes.hpp"
#include "support.hpp"

using namespace mhi;
using namespace mhi::test;

namespace {

StereoInput same_view_input(const RgbImage& img) {
  const Intrinsics cam = Intrinsics::from_hfov(img.width(), img.height(), 90.0);
  return StereoInput{img, img, cam, cam, Pose::identity()};
}

// Cost volume with every layer valid and a caller-chosen cost per layer.
OrientedCostVolume manual_ocv(const MhiConfig& cfg, const std::vector<float>& per_layer) {
  OrientedCostVolume ocv(cfg);
  for (int l = 0; l < ocv.layer_count(); ++l) {
    for (float& c : ocv.cost(l)) c = per_layer[l];
    for (auto& v : ocv.valid_span(l)) v = 1;
  }
  return ocv;
}

int alpha_argmax_count(const Mhi& m, int x, int y, float value) {
  int count = 0;
  for (const MhiLayer& l : m.layers()) count += l.rgba.at(x, y, 3) == value;
  return count;
}

}  // namespace

TEST(Cost, SelfComparisonIsZeroOnTheIdentityLayer) {
  Rng64 rng(3);
  const RgbImage img = random_rgb(40, 30, rng);
  const StereoInput in = same_view_input(img);
  const MhiConfig cfg = default_config(in.ref_cam, 1.0, 100.0, 5, 8);
  const OrientedCostVolume ocv = build_ocv(in, cfg);
  // With no motion every plane induces the identity map.
  for (int l = 0; l < ocv.layer_count(); ++l)
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x)
        if (ocv.valid(l, x, y)) {
          EXPECT_LE(ocv.cost(l)[y * 40 + x], 1e-6f) << l;
        }
}

TEST(Cost, ConstantImagesTieAndPickLayerZero) {
  const RgbImage img(32, 24, 0.0f);  // black: every interpolated sample is exactly zero
  const StereoInput in{img, img, Intrinsics::from_hfov(32, 24, 90.0), Intrinsics::from_hfov(32, 24, 90.0),
                       Pose{Mat3::Identity(), Vec3(0.2, 0, 0)}};
  const MhiConfig cfg = default_config(in.ref_cam, 1.0, 100.0, 3, 6);
  const AlphaEstimate est = estimate_mhi(in, cfg, {EstimatorMode::winner_take_all, 0.05, 0});
  for (int label : est.labels) EXPECT_EQ(label, 0);
}

TEST(Cost, ValuesAreBoundedAndSentinelIsMaxValid) {
  PlaneStereoOptions o;
  o.size = 64;
  const PlaneStereo s = make_plane_stereo(2, 12, o);
  const OrientedCostVolume ocv = build_ocv(s.input, s.config);
  float max_valid = 0.0f;
  for (int l = 0; l < ocv.layer_count(); ++l)
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const float c = ocv.cost(l)[y * 64 + x];
        EXPECT_GE(c, 0.0f);
        EXPECT_LE(c, 1.0f);
        if (ocv.valid(l, x, y)) max_valid = std::max(max_valid, c);
      }
  EXPECT_EQ(ocv.sentinel(), max_valid);
}

TEST(Cost, RejectsMismatchedImages) {
  const Intrinsics cam = Intrinsics::from_hfov(32, 24, 90.0);
  const StereoInput in{RgbImage(32, 24), RgbImage(30, 24), cam, cam, Pose::identity()};
  EXPECT_THROW(build_ocv(in, default_config(cam)), DimensionMismatch);
  const OrientedCostVolume ocv(default_config(cam, 1.0, 100.0, 1, 4));
  EXPECT_THROW(estimate_alphas(ocv, RgbImage(16, 16)), DimensionMismatch);
}

TEST(WinnerTakeAll, TieGoesToLowestFlatIndex) {
  const MhiConfig cfg = default_config(Intrinsics::from_hfov(8, 6, 90.0), 1.0, 100.0, 3, 4);
  std::vector<float> costs(12, 0.5f);
  costs[7] = 0.1f;
  costs[9] = 0.1f;
  const AlphaEstimate est = estimate_alphas(manual_ocv(cfg, costs), RgbImage(8, 6), {EstimatorMode::winner_take_all, 0.05, 0});
  for (int label : est.labels) EXPECT_EQ(label, 7);
  const AlphaEstimate flat = estimate_alphas(manual_ocv(cfg, std::vector<float>(12, 0.3f)), RgbImage(8, 6));
  for (int label : flat.labels) EXPECT_EQ(label, 0);
}

TEST(WinnerTakeAll, ExactlyOneOpaqueLayerPerPixelWithoutDilation) {
  PlaneStereoOptions o;
  o.size = 64;
  const PlaneStereo s = make_plane_stereo(0, 9, o);
  const AlphaEstimate est = estimate_mhi(s.input, s.config, {EstimatorMode::winner_take_all, 0.05, 0});
  const int d = s.config.distances_per_normal;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      EXPECT_EQ(alpha_argmax_count(est.mhi, x, y, 1.0f), 1);
      EXPECT_EQ(alpha_argmax_count(est.mhi, x, y, 0.0f), static_cast<int>(est.mhi.layers().size()) - 1);
      const int l = est.labels[y * 64 + x];
      EXPECT_EQ(est.mhi.layer(l / d, l % d).rgba.at(x, y, 3), 1.0f);
    }
}

TEST(WinnerTakeAll, DilationGrowsSupportByOnePixel) {
  const MhiConfig cfg = default_config(Intrinsics::from_hfov(9, 9, 90.0), 1.0, 100.0, 1, 2);
  OrientedCostVolume ocv = manual_ocv(cfg, {0.5f, 0.1f});
  ocv.cost(0)[4 * 9 + 4] = 0.0f;  // single-pixel speckle on layer 0
  const AlphaEstimate est = estimate_alphas(ocv, RgbImage(9, 9));
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      const bool near = std::abs(x - 4) <= 1 && std::abs(y - 4) <= 1;
      EXPECT_EQ(est.mhi.layer(0, 0).rgba.at(x, y, 3), near ? 1.0f : 0.0f) << x << "," << y;
      EXPECT_EQ(est.mhi.layer(0, 1).rgba.at(x, y, 3), 1.0f);
    }
  EXPECT_EQ(est.labels[4 * 9 + 4], 0);
  EXPECT_EQ(est.labels[0], 1);
}

TEST(WinnerTakeAll, ColorsAreTheReferenceImage) {
  Rng64 rng(5);
  const RgbImage ref = random_rgb(12, 10, rng);
  const MhiConfig cfg = default_config(Intrinsics::from_hfov(12, 10, 90.0), 1.0, 100.0, 2, 3);
  const AlphaEstimate est = estimate_alphas(manual_ocv(cfg, std::vector<float>(6, 0.2f)), ref);
  for (const MhiLayer& l : est.mhi.layers())
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x)
        for (int c = 0; c < 3; ++c) EXPECT_EQ(l.rgba.at(x, y, c), ref.at(x, y, c));
}

TEST(Softmin, UniformCostsSplitMassEvenlyPerGroup) {
  const MhiConfig cfg = default_config(Intrinsics::from_hfov(6, 4, 90.0), 1.0, 100.0, 2, 4);
  const AlphaEstimate est =
      estimate_alphas(manual_ocv(cfg, std::vector<float>(8, 0.2f)), RgbImage(6, 4), {EstimatorMode::softmin, 0.05, 0});
  // p = 1/8 per layer; cumulative alphas 1/8, 1/7, 1/6, 1/5 give each layer opacity 1/8.
  for (int i = 0; i < 2; ++i) {
    double remaining = 1.0, acc = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double a = est.mhi.layer(i, j).rgba.at(2, 1, 3);
      EXPECT_NEAR(a, 1.0 / (8 - j), 1e-6);
      acc += remaining * a;
      remaining *= 1.0 - a;
    }
    EXPECT_NEAR(acc, 0.5, 1e-6);
  }
}

TEST(Softmin, GroupAccumulationNeverExceedsOne) {
  PlaneStereoOptions o;
  o.size = 64;
  const PlaneStereo s = make_plane_stereo(4, 14, o);
  const AlphaEstimate est = estimate_mhi(s.input, s.config, {EstimatorMode::softmin, 0.05, 0});
  const int d = s.config.distances_per_normal;
  for (int y = 0; y < 64; y += 3)
    for (int x = 0; x < 64; x += 3) {
      double total = 0.0;
      for (int i = 0; i < s.config.normal_count(); ++i) {
        double remaining = 1.0, acc = 0.0;
        for (int j = 0; j < d; ++j) {
          const double a = est.mhi.layer(i, j).rgba.at(x, y, 3);
          ASSERT_GE(a, 0.0);
          ASSERT_LE(a, 1.0);
          acc += remaining * a;
          remaining *= 1.0 - a;
        }
        EXPECT_LE(acc, 1.0 + 1e-6);
        total += acc;
      }
      EXPECT_NEAR(total, 1.0, 1e-4);
    }
}

TEST(Softmin, SmallTemperatureMatchesWinnerTakeAll) {
  const PlaneStereo s = make_plane_stereo(1, 12);
  const OrientedCostVolume ocv = build_ocv(s.input, s.config);
  const AlphaEstimate wta = estimate_alphas(ocv, s.input.reference);
  const AlphaEstimate soft = estimate_alphas(ocv, s.input.reference, {EstimatorMode::softmin, 1e-4, 1});
  std::size_t same = 0;
  for (std::size_t k = 0; k < wta.labels.size(); ++k) same += wta.labels[k] == soft.labels[k];
  EXPECT_GE(static_cast<double>(same) / wta.labels.size(), 0.999);
}

TEST(Softmin, RejectsNonPositiveTemperature) {
  const MhiConfig cfg = default_config(Intrinsics::from_hfov(4, 4, 90.0), 1.0, 100.0, 1, 2);
  EXPECT_THROW(estimate_alphas(manual_ocv(cfg, {0.1f, 0.2f}), RgbImage(4, 4), {EstimatorMode::softmin, 0.0, 1}),
               InvariantViolation);
}

TEST(Modes, ParseAndPrint) {
  EXPECT_EQ(parse_estimator_mode("winner_take_all"), EstimatorMode::winner_take_all);
  EXPECT_EQ(parse_estimator_mode("softmin"), EstimatorMode::softmin);
  EXPECT_EQ(to_string(EstimatorMode::softmin), "softmin");
  EXPECT_THROW(parse_estimator_mode("median"), FormatError);
}

// A textured plane on each tested layer, recovered from a stereo pair.
class PlaneRecovery : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(PlaneRecovery, ArgmaxLayerIsTheTruePlane) {
  const auto [i, j] = GetParam();
  const PlaneStereo s = make_plane_stereo(i, j);
  const OrientedCostVolume ocv = build_ocv(s.input, s.config);
  const AlphaEstimate est = estimate_alphas(ocv, s.input.reference);
  std::size_t counted = 0;
  const double rate = plane_recovery_rate(s, ocv, est.labels, &counted);
  EXPECT_GT(counted, 10000u);
  EXPECT_GE(rate, 0.99);
}

TEST_P(PlaneRecovery, RerenderMatchesSecondView) {
  const auto [i, j] = GetParam();
  const PlaneStereo s = make_plane_stereo(i, j);
  const AlphaEstimate est = estimate_mhi(s.input, s.config);
  const RenderedView view = render_view(est.mhi, RenderRequest{s.input.sec_cam, s.input.rel_pose_sec});
  const Mask visible =
      cross_visible_mask(s.sec_view, s.input.sec_cam, s.input.rel_pose_sec, s.ref_view, s.input.ref_cam);
  EXPECT_GT(visible.count(), 10000u);
  EXPECT_GE(psnr(view.image, s.input.second, visible).db, 40.0);
}

INSTANTIATE_TEST_SUITE_P(Layers, PlaneRecovery,
                         ::testing::Values(std::pair{2, 10}, std::pair{2, 20}, std::pair{0, 15}, std::pair{1, 12},
                                           std::pair{4, 20}, std::pair{3, 8}, std::pair{0, 25}, std::pair{4, 5}),
                         [](const auto& info) {
                           return "n" + std::to_string(info.param.first) + "_d" + std::to_string(info.param.second);
                         });

TEST(PlaneRecovery, SingleNormalIsMultiplaneSweep) {
  PlaneStereoOptions o;
  o.normals = 1;
  for (int j : {10, 20}) {
    const PlaneStereo s = make_plane_stereo(0, j, o);
    ASSERT_EQ(s.config.normals[0], Vec3(0, 0, 1));
    const OrientedCostVolume ocv = build_ocv(s.input, s.config);
    const AlphaEstimate est = estimate_alphas(ocv, s.input.reference);
    EXPECT_GE(plane_recovery_rate(s, ocv, est.labels), 0.99) << j;
    const RenderedView view = render_view(est.mhi, RenderRequest{s.input.sec_cam, s.input.rel_pose_sec});
    const Mask visible =
        cross_visible_mask(s.sec_view, s.input.sec_cam, s.input.rel_pose_sec, s.ref_view, s.input.ref_cam);
    EXPECT_GE(psnr(view.image, s.input.second, visible).db, 40.0) << j;
  }
}

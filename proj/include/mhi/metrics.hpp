#pragma once

#include "mhi/image.hpp"

namespace mhi {

struct PsnrResult {
  double db = 0.0;  // +inf when identical
  bool identical = false;
  double mse = 0.0;
};

/// 10·log10(1/MSE) over masked pixels and all channels; values in [0, 1].
PsnrResult psnr(const RgbImage& a, const RgbImage& b, const Mask& mask);

/// Mean absolute difference over masked pixels and channels.
double l1(const RgbImage& a, const RgbImage& b, const Mask& mask);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean local SSIM (Gaussian window) averaged over channels. A pixel
/// contributes when it is masked and its whole window lies inside the image.
double ssim(const RgbImage& a, const RgbImage& b, const Mask& mask, const SsimParams& params = {});

/// Normalized 1-D Gaussian taps of the SSIM window.
std::vector<double> gaussian_taps(int window, double sigma);

}  // namespace mhi

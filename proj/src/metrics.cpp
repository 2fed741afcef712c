#include "mhi/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mhi {

namespace {

void check_pair(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  if (!a.same_size(b) || mask.width() != a.width() || mask.height() != a.height())
    throw DimensionMismatch("metric inputs must share dimensions");
}

}  // namespace

PsnrResult psnr(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  check_pair(a, b, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
        sum += d * d;
      }
      n += 3;
    }
  if (n == 0) throw EmptyMask("PSNR mask selects no pixels");
  PsnrResult r;
  r.mse = sum / static_cast<double>(n);
  if (r.mse == 0.0) {
    r.identical = true;
    r.db = std::numeric_limits<double>::infinity();
  } else {
    r.db = 10.0 * std::log10(1.0 / r.mse);
  }
  return r;
}

double l1(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  check_pair(a, b, mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < 3; ++c) sum += std::abs(static_cast<double>(a.at(x, y, c)) - b.at(x, y, c));
      n += 3;
    }
  if (n == 0) throw EmptyMask("L1 mask selects no pixels");
  return sum / static_cast<double>(n);
}

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(window);
  const int r = window / 2;
  double total = 0.0;
  for (int k = 0; k < window; ++k) {
    const double d = k - r;
    taps[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += taps[k];
  }
  for (double& t : taps) t /= total;
  return taps;
}

namespace {

// Separable "valid" Gaussian filter: output (w - win + 1) x (h - win + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& taps) {
  const int win = static_cast<int>(taps.size());
  const int ow = w - win + 1;
  const int oh = h - win + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < win; ++k) s += taps[k] * img[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < win; ++k) s += taps[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const RgbImage& a, const RgbImage& b, const Mask& mask, const SsimParams& p) {
  check_pair(a, b, mask);
  const int w = a.width();
  const int h = a.height();
  const int r = p.window / 2;
  if (w < p.window || h < p.window) throw EmptyMask("image is smaller than the SSIM window");
  const auto taps = gaussian_taps(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const int ow = w - p.window + 1;
  const int oh = h - p.window + 1;

  std::size_t count = 0;
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) count += mask(x + r, y + r) ? 1 : 0;
  if (count == 0) throw EmptyMask("SSIM mask selects no full window");

  double total = 0.0;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> ca(n), cb(n), aa(n), bb(n), ab(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      ca[k] = a.data()[3 * k + c];
      cb[k] = b.data()[3 * k + c];
      aa[k] = ca[k] * ca[k];
      bb[k] = cb[k] * cb[k];
      ab[k] = ca[k] * cb[k];
    }
    const auto mu_a = filter_valid(ca, w, h, taps);
    const auto mu_b = filter_valid(cb, w, h, taps);
    const auto e_aa = filter_valid(aa, w, h, taps);
    const auto e_bb = filter_valid(bb, w, h, taps);
    const auto e_ab = filter_valid(ab, w, h, taps);
    double sum = 0.0;
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        if (!mask(x + r, y + r)) continue;
        const std::size_t k = static_cast<std::size_t>(y) * ow + x;
        const double va = e_aa[k] - mu_a[k] * mu_a[k];
        const double vb = e_bb[k] - mu_b[k] * mu_b[k];
        const double cov = e_ab[k] - mu_a[k] * mu_b[k];
        sum += ((2.0 * mu_a[k] * mu_b[k] + c1) * (2.0 * cov + c2)) /
               ((mu_a[k] * mu_a[k] + mu_b[k] * mu_b[k] + c1) * (va + vb + c2));
      }
    total += sum / static_cast<double>(count);
  }
  return total / 3.0;
}

}  // namespace mhi

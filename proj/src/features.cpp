#include "icondet/features.hpp"

#include <cmath>

namespace icondet {

namespace {

struct RunningStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double pop_std() const {
    if (!n) return 0.0;
    const double m = mean();
    const double var = sum_sq / static_cast<double>(n) - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace

std::array<double, kMcDim> mc_features(const RgbImage& img) {
  if (img.width < 3 || img.height < 3) {
    throw FeatureError("mc_features: image must be at least 3x3");
  }
  const int w = img.width;
  const int h = img.height;

  RunningStats overall, per_channel[3];
  RunningStats region[3][3];

  // Band index for coordinate y: largest r with floor(r*H/3) <= y,
  // which reduces to min(2, (3y+2)/H) in integer arithmetic.
  auto band = [](int coord, int extent) {
    const int r = (3 * coord + 2) / extent;
    return r > 2 ? 2 : r;
  };

  for (int y = 0; y < h; ++y) {
    const int ry = band(y, h);
    for (int x = 0; x < w; ++x) {
      const int rx = band(x, w);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double vals[3] = {img.r[i], img.g[i], img.b[i]};
      for (int c = 0; c < 3; ++c) {
        overall.add(vals[c]);
        per_channel[c].add(vals[c]);
        region[ry][rx].add(vals[c]);
      }
    }
  }

  std::array<double, kMcDim> out{};
  std::size_t k = 0;
  out[k++] = overall.mean();
  out[k++] = overall.pop_std();
  for (int c = 0; c < 3; ++c) {
    out[k++] = per_channel[c].mean();
    out[k++] = per_channel[c].pop_std();
  }
  for (int ry = 0; ry < 3; ++ry) {
    for (int rx = 0; rx < 3; ++rx) {
      out[k++] = region[ry][rx].mean();
      out[k++] = region[ry][rx].pop_std();
    }
  }
  return out;
}

GrayImage prepare_for_hog(const RgbImage& img) {
  return resize_bilinear(to_grayscale(img), kHogImageSize, kHogImageSize);
}

std::array<double, kHogDim> hog_features(const GrayImage& img) {
  if (img.width != kHogImageSize || img.height != kHogImageSize) {
    throw FeatureError("hog_features: input must be 24x24");
  }
  const int n = kHogImageSize;
  const auto& v = img.values;
  auto px = [&](int x, int y) {
    if (x < 0) x = 0;
    if (x >= n) x = n - 1;
    if (y < 0) y = 0;
    if (y >= n) y = n - 1;
    return v[static_cast<std::size_t>(y) * n + x];
  };

  std::array<double, kHogDim> out{};
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double gx = px(x + 1, y) - px(x - 1, y);
      const double gy = px(x, y + 1) - px(x, y - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx) * 180.0 / 3.141592653589793238462643383279502884;
      theta = std::fmod(theta + 360.0, 180.0);  // unsigned orientation in [0, 180)
      // vote split between the two nearest bin centers, circular over 180
      const double t = (theta - 10.0) / 20.0;
      const double f = std::floor(t);
      const double frac = t - f;
      int b0 = static_cast<int>(f);
      b0 = ((b0 % kHogBins) + kHogBins) % kHogBins;
      const int b1 = (b0 + 1) % kHogBins;
      const int cell = (y / kHogCellSize) * kHogCellsPerAxis + (x / kHogCellSize);
      out[cell * kHogBins + b0] += (1.0 - frac) * mag;
      out[cell * kHogBins + b1] += frac * mag;
    }
  }

  for (int cell = 0; cell < kHogCellsPerAxis * kHogCellsPerAxis; ++cell) {
    double sq = 0.0;
    for (int b = 0; b < kHogBins; ++b) {
      const double e = out[cell * kHogBins + b];
      sq += e * e;
    }
    const double norm = std::sqrt(sq);
    if (norm > 1e-12) {
      for (int b = 0; b < kHogBins; ++b) out[cell * kHogBins + b] /= norm;
    }
  }
  return out;
}

}  // namespace icondet

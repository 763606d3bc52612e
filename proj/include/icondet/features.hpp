#pragma once

#include <array>
#include <stdexcept>

#include "icondet/raster.hpp"

namespace icondet {

inline constexpr int kMcDim = 26;
inline constexpr int kHogDim = 576;
inline constexpr int kAeDim = 512;
inline constexpr int kIconFeatureDim = kMcDim + kHogDim + kAeDim;  // 1114

inline constexpr int kHogImageSize = 24;
inline constexpr int kHogCellSize = 3;   // 1/8 of each axis
inline constexpr int kHogCellsPerAxis = 8;
inline constexpr int kHogBins = 9;       // unsigned orientations, 20 deg wide

class FeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 26 summary statistics, computed on the original image size:
//   [overall_mean, overall_std,
//    r_mean, r_std, g_mean, g_std, b_mean, b_std,
//    then 9 grid regions row-major, (mean, std) each, pooled across channels]
// Region r spans rows [floor(r*H/3), floor((r+1)*H/3)), columns likewise.
// Stds are population stds. Requires width >= 3 and height >= 3.
std::array<double, kMcDim> mc_features(const RgbImage& img);

// Grayscale + bilinear resize to the 24x24 HOG input.
GrayImage prepare_for_hog(const RgbImage& img);

// 576 gradient-orientation features: central differences with edge
// replication, unsigned orientation folded into [0, 180), magnitude-weighted
// votes split linearly between the two nearest of 9 bin centers
// (10, 30, ..., 170 degrees, circular), accumulated per 3x3-pixel cell,
// each cell's 9-vector L2-normalized (cells with norm <= 1e-12 left as-is).
// Output is cell row-major, 9 bins per cell. Input must be exactly 24x24.
std::array<double, kHogDim> hog_features(const GrayImage& img);

}  // namespace icondet

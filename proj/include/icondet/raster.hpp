#pragma once

#include <cstdint>
#include <vector>

namespace icondet {

// Decoded icon image: row-major RGBA, 8 bits per channel.
struct IconRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 4

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

inline constexpr int kMinIconSide = 1;
inline constexpr int kMaxIconSide = 1024;

// Planar RGB image with values in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> r, g, b;  // each width * height, row-major
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // width * height, row-major
};

// Alpha-composite onto a constant gray background: out = a*fg + (1-a)*bg,
// channel values scaled to [0, 1].
RgbImage composite_to_rgb(const IconRaster& icon, double background = 1.0);

// Luma weights 0.299/0.587/0.114.
GrayImage to_grayscale(const RgbImage& img);

// Half-pixel-centered bilinear resample with edge clamping. Identity when
// the sizes already match.
RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h);
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

}  // namespace icondet

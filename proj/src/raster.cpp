#include "icondet/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icondet {

RgbImage composite_to_rgb(const IconRaster& icon, double background) {
  RgbImage out;
  out.width = icon.width;
  out.height = icon.height;
  const std::size_t n = icon.pixel_count();
  out.r.resize(n);
  out.g.resize(n);
  out.b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = icon.pixels[4 * i + 3] / 255.0;
    out.r[i] = a * (icon.pixels[4 * i + 0] / 255.0) + (1.0 - a) * background;
    out.g[i] = a * (icon.pixels[4 * i + 1] / 255.0) + (1.0 - a) * background;
    out.b[i] = a * (icon.pixels[4 * i + 2] / 255.0) + (1.0 - a) * background;
  }
  return out;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.values.resize(img.r.size());
  for (std::size_t i = 0; i < img.r.size(); ++i) {
    out.values[i] = 0.299 * img.r[i] + 0.587 * img.g[i] + 0.114 * img.b[i];
  }
  return out;
}

namespace {

// Resample one plane. Source coordinate for output index i is
// (i + 0.5) * src / out - 0.5, clamped to the valid range.
std::vector<double> resize_plane(const std::vector<double>& src, int src_w, int src_h,
                                 int out_w, int out_h) {
  std::vector<double> dst(static_cast<std::size_t>(out_w) * out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    double sy = (oy + 0.5) * static_cast<double>(src_h) / out_h - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(src_h - 1));
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double sx = (ox + 0.5) * static_cast<double>(src_w) / out_w - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(src_w - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - x0;
      const double top = src[y0 * src_w + x0] * (1.0 - fx) + src[y0 * src_w + x1] * fx;
      const double bot = src[y1 * src_w + x0] * (1.0 - fx) + src[y1 * src_w + x1] * fx;
      dst[static_cast<std::size_t>(oy) * out_w + ox] = top * (1.0 - fy) + bot * fy;
    }
  }
  return dst;
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize_bilinear: bad output size");
  if (out_w == img.width && out_h == img.height) return img;
  RgbImage out;
  out.width = out_w;
  out.height = out_h;
  out.r = resize_plane(img.r, img.width, img.height, out_w, out_h);
  out.g = resize_plane(img.g, img.width, img.height, out_w, out_h);
  out.b = resize_plane(img.b, img.width, img.height, out_w, out_h);
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize_bilinear: bad output size");
  if (out_w == img.width && out_h == img.height) return img;
  GrayImage out;
  out.width = out_w;
  out.height = out_h;
  out.values = resize_plane(img.values, img.width, img.height, out_w, out_h);
  return out;
}

}  // namespace icondet

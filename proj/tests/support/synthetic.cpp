#include "synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "icondet/rng.hpp"

namespace icondet::testing {

BlobData make_blobs(const std::vector<std::vector<double>>& centers, int per_blob, double sigma,
                    int noise_points, std::uint64_t seed, double noise_pad) {
  Rng rng(seed);
  const std::size_t dims = centers.front().size();
  BlobData data;
  data.points = Matrix(static_cast<std::size_t>(centers.size()) * per_blob + noise_points, dims);

  std::size_t row = 0;
  std::vector<double> lo(dims, 1e30), hi(dims, -1e30);
  for (std::size_t b = 0; b < centers.size(); ++b) {
    for (int i = 0; i < per_blob; ++i, ++row) {
      auto dst = data.points.row(row);
      for (std::size_t d = 0; d < dims; ++d) {
        dst[d] = centers[b][d] + sigma * rng.normal();
        lo[d] = std::min(lo[d], dst[d]);
        hi[d] = std::max(hi[d], dst[d]);
      }
      data.truth.push_back(static_cast<int>(b));
    }
  }
  for (int i = 0; i < noise_points; ++i, ++row) {
    auto dst = data.points.row(row);
    for (std::size_t d = 0; d < dims; ++d) {
      dst[d] = rng.uniform(lo[d] - noise_pad, hi[d] + noise_pad);
    }
    data.truth.push_back(-1);
  }
  return data;
}

namespace {

constexpr int kIconSide = 32;

void paint_template(IconRaster& icon, int which) {
  auto set = [&](int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* px = icon.pixels.data() + (static_cast<std::size_t>(y) * kIconSide + x) * 4;
    px[0] = r;
    px[1] = g;
    px[2] = b;
    px[3] = 255;
  };
  for (int y = 0; y < kIconSide; ++y) {
    for (int x = 0; x < kIconSide; ++x) {
      switch (which) {
        case 0:  // blue/yellow checkerboard
          if (((x / 4) + (y / 4)) % 2) set(x, y, 240, 220, 60);
          else set(x, y, 30, 60, 200);
          break;
        case 1: {  // red disc on white
          const double dx = x - 15.5, dy = y - 15.5;
          if (dx * dx + dy * dy < 130.0) set(x, y, 210, 40, 40);
          else set(x, y, 245, 245, 245);
          break;
        }
        case 2:  // green horizontal stripes
          if ((y / 4) % 2) set(x, y, 40, 160, 70);
          else set(x, y, 230, 240, 230);
          break;
        case 3:  // purple vertical gradient
          set(x, y, static_cast<std::uint8_t>(90 + 4 * y), 40,
              static_cast<std::uint8_t>(220 - 4 * y));
          break;
        default: {  // dark diagonal cross on light gray
          const bool on_cross = std::abs(x - y) < 3 || std::abs(x + y - 31) < 3;
          if (on_cross) set(x, y, 40, 40, 50);
          else set(x, y, 200, 205, 215);
          break;
        }
      }
    }
  }
}

void box_blur(IconRaster& icon) {
  IconRaster src = icon;
  for (int y = 0; y < kIconSide; ++y) {
    for (int x = 0; x < kIconSide; ++x) {
      for (int c = 0; c < 3; ++c) {
        int sum = 0, count = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= kIconSide || ny < 0 || ny >= kIconSide) continue;
            sum += src.pixels[(static_cast<std::size_t>(ny) * kIconSide + nx) * 4 + c];
            ++count;
          }
        }
        icon.pixels[(static_cast<std::size_t>(y) * kIconSide + x) * 4 + c] =
            static_cast<std::uint8_t>(sum / count);
      }
    }
  }
}

}  // namespace

SyntheticIconCorpus make_icon_corpus(int count, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticIconCorpus corpus;
  for (int i = 0; i < count; ++i) {
    const int which = static_cast<int>(rng.index(5));
    IconRaster icon;
    icon.width = kIconSide;
    icon.height = kIconSide;
    icon.pixels.resize(static_cast<std::size_t>(kIconSide) * kIconSide * 4);
    paint_template(icon, which);

    // the threat model: slight channel shifts, pixel noise, a bit of blur
    double shift[3] = {rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0),
                       rng.uniform(-12.0, 12.0)};
    for (std::size_t p = 0; p < icon.pixel_count(); ++p) {
      for (int c = 0; c < 3; ++c) {
        double v = icon.pixels[4 * p + c] + shift[c] + rng.uniform(-10.0, 10.0);
        icon.pixels[4 * p + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
    if (rng.uniform() < 0.3) box_blur(icon);

    corpus.icons.push_back(std::move(icon));
    corpus.template_ids.push_back(which);
  }
  return corpus;
}

}  // namespace icondet::testing

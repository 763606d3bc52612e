#include "icondet/png_codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <string>

#include "icondet/icons.hpp"

namespace icondet {

namespace {

const std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

[[noreturn]] void fail(const std::string& msg) {
  throw IconError(IconErrorKind::MalformedPng, "png: " + msg);
}

std::uint32_t read_u32be(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) |
         (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) | b[off + 3];
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

struct Chunk {
  std::uint32_t type;
  std::span<const std::uint8_t> data;
};

constexpr std::uint32_t fourcc(char a, char b, char c, char d) {
  return (static_cast<std::uint32_t>(static_cast<std::uint8_t>(a)) << 24) |
         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(b)) << 16) |
         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(c)) << 8) |
         static_cast<std::uint8_t>(d);
}

std::vector<std::uint8_t> inflate_exact(std::span<const std::uint8_t> in,
                                        std::size_t expected_size) {
  std::vector<std::uint8_t> out(expected_size);
  uLongf out_len = static_cast<uLongf>(expected_size);
  const int rc = uncompress(out.data(), &out_len, in.data(), static_cast<uLong>(in.size()));
  if (rc != Z_OK || out_len != expected_size) fail("IDAT inflate failed");
  return out;
}

}  // namespace

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

IconRaster decode_png(std::span<const std::uint8_t> bytes) {
  if (!looks_like_png(bytes)) fail("bad signature");

  std::vector<Chunk> chunks;
  std::size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = read_u32be(bytes, pos);
    if (pos + 12 + static_cast<std::uint64_t>(len) > bytes.size()) fail("chunk overruns file");
    const std::uint32_t type = read_u32be(bytes, pos + 4);
    const auto payload = bytes.subspan(pos + 8, len);
    const std::uint32_t stored_crc = read_u32be(bytes, pos + 8 + len);
    uLong crc = crc32(0L, bytes.data() + pos + 4, len + 4);
    if (static_cast<std::uint32_t>(crc) != stored_crc) fail("chunk crc mismatch");
    chunks.push_back({type, payload});
    pos += 12 + len;
    if (type == fourcc('I', 'E', 'N', 'D')) break;
  }
  if (chunks.empty() || chunks.front().type != fourcc('I', 'H', 'D', 'R')) {
    fail("missing IHDR");
  }

  const auto ihdr = chunks.front().data;
  if (ihdr.size() != 13) fail("bad IHDR length");
  const std::uint32_t width = read_u32be(ihdr, 0);
  const std::uint32_t height = read_u32be(ihdr, 4);
  const int bit_depth = ihdr[8];
  const int color_type = ihdr[9];
  if (ihdr[10] != 0 || ihdr[11] != 0) fail("unsupported compression/filter method");
  if (ihdr[12] != 0) fail("interlaced images unsupported");
  if (width < static_cast<std::uint32_t>(kMinIconSide) ||
      width > static_cast<std::uint32_t>(kMaxIconSide) ||
      height < static_cast<std::uint32_t>(kMinIconSide) ||
      height > static_cast<std::uint32_t>(kMaxIconSide)) {
    fail("dimensions out of icon range");
  }

  int channels;
  switch (color_type) {
    case 0: channels = 1; break;  // gray
    case 2: channels = 3; break;  // rgb
    case 3: channels = 1; break;  // palette
    case 4: channels = 2; break;  // gray+alpha
    case 6: channels = 4; break;  // rgba
    default: fail("unknown color type");
  }
  if (color_type == 3) {
    if (bit_depth != 1 && bit_depth != 2 && bit_depth != 4 && bit_depth != 8) {
      fail("unsupported palette bit depth");
    }
  } else if (bit_depth != 8) {
    fail("only 8-bit samples supported");
  }

  std::span<const std::uint8_t> palette;
  std::span<const std::uint8_t> trns;
  std::vector<std::uint8_t> idat;
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    if (chunks[i].type == fourcc('P', 'L', 'T', 'E')) palette = chunks[i].data;
    if (chunks[i].type == fourcc('t', 'R', 'N', 'S')) trns = chunks[i].data;
    if (chunks[i].type == fourcc('I', 'D', 'A', 'T')) {
      idat.insert(idat.end(), chunks[i].data.begin(), chunks[i].data.end());
    }
  }
  if (idat.empty()) fail("missing IDAT");
  if (color_type == 3 && (palette.empty() || palette.size() % 3 != 0)) fail("missing palette");

  const std::size_t bits_per_pixel = static_cast<std::size_t>(channels) * bit_depth;
  const std::size_t stride = (static_cast<std::size_t>(width) * bits_per_pixel + 7) / 8;
  const std::size_t raw_size = static_cast<std::size_t>(height) * (stride + 1);
  std::vector<std::uint8_t> raw = inflate_exact(idat, raw_size);

  // undo scanline filters in place (per-byte, bpp = filter unit)
  const std::size_t unit = std::max<std::size_t>(1, bits_per_pixel / 8);
  std::vector<std::uint8_t> prev(stride, 0);
  std::vector<std::uint8_t> line(stride);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(height) * stride);
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* src = raw.data() + y * (stride + 1);
    const int filter = src[0];
    std::memcpy(line.data(), src + 1, stride);
    for (std::size_t x = 0; x < stride; ++x) {
      const int a = x >= unit ? line[x - unit] : 0;
      const int b = prev[x];
      const int c = x >= unit ? prev[x - unit] : 0;
      switch (filter) {
        case 0: break;
        case 1: line[x] = static_cast<std::uint8_t>(line[x] + a); break;
        case 2: line[x] = static_cast<std::uint8_t>(line[x] + b); break;
        case 3: line[x] = static_cast<std::uint8_t>(line[x] + (a + b) / 2); break;
        case 4: line[x] = static_cast<std::uint8_t>(line[x] + paeth(a, b, c)); break;
        default: fail("unknown scanline filter");
      }
    }
    std::memcpy(pixels.data() + static_cast<std::size_t>(y) * stride, line.data(), stride);
    std::swap(prev, line);
  }

  IconRaster icon;
  icon.width = static_cast<int>(width);
  icon.height = static_cast<int>(height);
  icon.pixels.resize(static_cast<std::size_t>(width) * height * 4);

  auto emit = [&](std::size_t i, int r, int g, int b, int a) {
    icon.pixels[4 * i + 0] = static_cast<std::uint8_t>(r);
    icon.pixels[4 * i + 1] = static_cast<std::uint8_t>(g);
    icon.pixels[4 * i + 2] = static_cast<std::uint8_t>(b);
    icon.pixels[4 * i + 3] = static_cast<std::uint8_t>(a);
  };

  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * stride;
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      switch (color_type) {
        case 0: emit(i, row[x], row[x], row[x], 255); break;
        case 2: emit(i, row[3 * x], row[3 * x + 1], row[3 * x + 2], 255); break;
        case 3: {
          int index;
          if (bit_depth == 8) {
            index = row[x];
          } else {
            const std::size_t bit = static_cast<std::size_t>(x) * bit_depth;
            index = (row[bit / 8] >> (8 - bit_depth - bit % 8)) & ((1 << bit_depth) - 1);
          }
          if (static_cast<std::size_t>(index) * 3 + 2 >= palette.size()) fail("palette overrun");
          const int alpha =
              static_cast<std::size_t>(index) < trns.size() ? trns[index] : 255;
          emit(i, palette[3 * index], palette[3 * index + 1], palette[3 * index + 2], alpha);
          break;
        }
        case 4: emit(i, row[2 * x], row[2 * x], row[2 * x], row[2 * x + 1]); break;
        case 6:
          emit(i, row[4 * x], row[4 * x + 1], row[4 * x + 2], row[4 * x + 3]);
          break;
      }
    }
  }
  return icon;
}

std::vector<std::uint8_t> encode_png(const IconRaster& icon) {
  const std::size_t stride = static_cast<std::size_t>(icon.width) * 4;
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(icon.height) * (stride + 1));
  for (int y = 0; y < icon.height; ++y) {
    raw.push_back(0);  // filter: none
    const std::uint8_t* row = icon.pixels.data() + static_cast<std::size_t>(y) * stride;
    raw.insert(raw.end(), row, row + stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) !=
      Z_OK) {
    fail("deflate failed");
  }
  compressed.resize(bound);

  std::vector<std::uint8_t> out(kPngSignature, kPngSignature + 8);
  auto chunk = [&](const char* type, std::span<const std::uint8_t> data) {
    put_u32be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size()));
    put_u32be(out, static_cast<std::uint32_t>(crc));
  };

  std::vector<std::uint8_t> ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(icon.width));
  put_u32be(ihdr, static_cast<std::uint32_t>(icon.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(6);  // rgba
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  chunk("IHDR", ihdr);
  chunk("IDAT", compressed);
  chunk("IEND", {});
  return out;
}

}  // namespace icondet

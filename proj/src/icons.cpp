#include "icondet/icons.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include "icondet/png_codec.hpp"

namespace icondet {

namespace {

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::int32_t read_i32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::int32_t>(read_u32(b, off));
}

[[noreturn]] void dib_fail(const std::string& msg) {
  throw IconError(IconErrorKind::MalformedDib, "dib: " + msg);
}

constexpr std::size_t kDibHeaderSize = 40;

IconRaster decode_dib(std::span<const std::uint8_t> b) {
  if (b.size() < kDibHeaderSize) dib_fail("header truncated");
  if (read_u32(b, 0) != kDibHeaderSize) dib_fail("unexpected header size");
  const std::int32_t width = read_i32(b, 4);
  const std::int32_t double_height = read_i32(b, 8);
  const int bpp = read_u16(b, 14);
  const std::uint32_t compression = read_u32(b, 16);

  if (bpp != 1 && bpp != 4 && bpp != 8 && bpp != 24 && bpp != 32) {
    throw IconError(IconErrorKind::UnsupportedBpp,
                    "dib: " + std::to_string(bpp) + " bpp not supported");
  }
  if (compression != 0) dib_fail("compressed DIBs not supported");
  if (double_height <= 0 || double_height % 2 != 0) dib_fail("height field must be 2x image height");
  const std::int32_t height = double_height / 2;
  if (width < kMinIconSide || width > kMaxIconSide || height < kMinIconSide ||
      height > kMaxIconSide) {
    dib_fail("dimensions out of icon range");
  }

  // color table for indexed formats (RGBQUAD: B, G, R, reserved)
  std::size_t palette_entries = 0;
  if (bpp <= 8) {
    const std::uint32_t clr_used = read_u32(b, 32);
    palette_entries = clr_used ? clr_used : (1u << bpp);
    if (palette_entries > (1u << bpp)) dib_fail("palette larger than bpp allows");
  }
  const std::size_t palette_off = kDibHeaderSize;
  const std::size_t xor_off = palette_off + palette_entries * 4;

  const std::size_t xor_stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  const std::size_t and_stride = ((static_cast<std::size_t>(width) + 31) / 32) * 4;
  const std::size_t and_off = xor_off + xor_stride * static_cast<std::size_t>(height);

  if (and_off > b.size()) dib_fail("pixel data truncated");
  const bool want_and_mask = bpp < 32;
  if (want_and_mask && and_off + and_stride * static_cast<std::size_t>(height) > b.size()) {
    dib_fail("AND mask truncated");
  }

  IconRaster icon;
  icon.width = width;
  icon.height = height;
  icon.pixels.assign(static_cast<std::size_t>(width) * height * 4, 0);

  auto palette_color = [&](std::size_t index, std::uint8_t* rgb) {
    if (index >= palette_entries) dib_fail("palette index out of range");
    const std::size_t p = palette_off + index * 4;
    rgb[0] = b[p + 2];
    rgb[1] = b[p + 1];
    rgb[2] = b[p + 0];
  };

  for (std::int32_t y = 0; y < height; ++y) {
    // rows stored bottom-up
    const std::size_t row = xor_off + xor_stride * static_cast<std::size_t>(height - 1 - y);
    for (std::int32_t x = 0; x < width; ++x) {
      std::uint8_t* out = icon.pixels.data() + (static_cast<std::size_t>(y) * width + x) * 4;
      switch (bpp) {
        case 1: {
          const std::uint8_t byte = b[row + x / 8];
          palette_color((byte >> (7 - x % 8)) & 1, out);
          break;
        }
        case 4: {
          const std::uint8_t byte = b[row + x / 2];
          palette_color(x % 2 == 0 ? (byte >> 4) : (byte & 0xF), out);
          break;
        }
        case 8:
          palette_color(b[row + x], out);
          break;
        case 24:
          out[0] = b[row + 3 * x + 2];
          out[1] = b[row + 3 * x + 1];
          out[2] = b[row + 3 * x + 0];
          break;
        case 32:
          out[0] = b[row + 4 * x + 2];
          out[1] = b[row + 4 * x + 1];
          out[2] = b[row + 4 * x + 0];
          out[3] = b[row + 4 * x + 3];
          break;
      }
      if (bpp < 32) out[3] = 255;  // opacity comes from the AND mask below
    }
  }

  if (want_and_mask) {
    for (std::int32_t y = 0; y < height; ++y) {
      const std::size_t row = and_off + and_stride * static_cast<std::size_t>(height - 1 - y);
      for (std::int32_t x = 0; x < width; ++x) {
        const bool transparent = (b[row + x / 8] >> (7 - x % 8)) & 1;
        if (transparent) {
          icon.pixels[(static_cast<std::size_t>(y) * width + x) * 4 + 3] = 0;
        }
      }
    }
  }
  return icon;
}

struct ResourceLeaf {
  std::uint32_t id = 0;
  std::span<const std::uint8_t> data;
};

// Collects leaf payloads of one resource type (first language entry per id).
// Structural problems in the tree surface as an empty/partial result rather
// than an exception; the caller tallies what failed to decode.
std::vector<ResourceLeaf> collect_type(const PeSummary& pe, std::uint32_t type_id) {
  std::vector<ResourceLeaf> out;
  auto base = pe.map_rva(pe.resource_rva, pe.resource_size);
  if (!base) return out;
  const auto res = *base;

  auto dir_entries = [&](std::size_t dir_off)
      -> std::vector<std::pair<std::uint32_t, std::uint32_t>> {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;  // (id, offset field)
    if (dir_off + 16 > res.size()) return entries;
    const std::uint32_t named = read_u16(res, dir_off + 12);
    const std::uint32_t by_id = read_u16(res, dir_off + 14);
    const std::size_t first = dir_off + 16;
    for (std::uint32_t i = 0; i < named + by_id; ++i) {
      const std::size_t e = first + 8 * i;
      if (e + 8 > res.size()) break;
      entries.emplace_back(read_u32(res, e), read_u32(res, e + 4));
    }
    return entries;
  };

  auto leaf_data = [&](std::size_t entry_off) -> std::span<const std::uint8_t> {
    if (entry_off + 16 > res.size()) return {};
    const std::uint32_t data_rva = read_u32(res, entry_off);
    const std::uint32_t size = read_u32(res, entry_off + 4);
    auto mapped = pe.map_rva(data_rva, size);
    return mapped ? *mapped : std::span<const std::uint8_t>{};
  };

  for (const auto& [type, type_field] : dir_entries(0)) {
    if (type != type_id || !(type_field & 0x80000000u)) continue;
    for (const auto& [name_id, name_field] : dir_entries(type_field & 0x7FFFFFFFu)) {
      std::span<const std::uint8_t> data;
      if (name_field & 0x80000000u) {
        // language directory: take the first entry
        auto langs = dir_entries(name_field & 0x7FFFFFFFu);
        if (!langs.empty() && !(langs[0].second & 0x80000000u)) {
          data = leaf_data(langs[0].second);
        }
      } else {
        data = leaf_data(name_field);
      }
      if (!data.empty()) out.push_back({name_id, data});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ResourceLeaf& a, const ResourceLeaf& b) { return a.id < b.id; });
  return out;
}

constexpr std::uint32_t kRtIcon = 3;
constexpr std::uint32_t kRtGroupIcon = 14;

}  // namespace

IconRaster decode_icon_image(std::span<const std::uint8_t> payload) {
  if (looks_like_png(payload)) return decode_png(payload);
  return decode_dib(payload);
}

IconExtraction extract_icons(const PeSummary& pe) {
  IconExtraction out;
  if (!pe.has_resources()) return out;

  const auto groups = collect_type(pe, kRtGroupIcon);
  const auto icons = collect_type(pe, kRtIcon);
  std::map<std::uint32_t, std::span<const std::uint8_t>> icon_by_id;
  for (const auto& leaf : icons) icon_by_id.emplace(leaf.id, leaf.data);

  std::set<std::uint32_t> referenced;
  for (const auto& group : groups) {
    const auto dir = group.data;
    if (dir.size() < 6 || read_u16(dir, 2) != 1) {
      ++out.decode_failures;
      continue;
    }
    const std::uint16_t count = read_u16(dir, 4);
    for (std::uint16_t i = 0; i < count; ++i) {
      const std::size_t e = 6 + 14 * static_cast<std::size_t>(i);  // GRPICONDIRENTRY
      if (e + 14 > dir.size()) {
        ++out.decode_failures;
        break;
      }
      const std::uint16_t icon_id = read_u16(dir, e + 12);
      referenced.insert(icon_id);
      auto it = icon_by_id.find(icon_id);
      if (it == icon_by_id.end()) {
        ++out.decode_failures;
        continue;
      }
      try {
        out.icons.push_back(decode_icon_image(it->second));
      } catch (const IconError&) {
        ++out.decode_failures;
      }
    }
  }

  for (const auto& leaf : icons) {
    if (referenced.count(leaf.id)) continue;
    try {
      out.icons.push_back(decode_icon_image(leaf.data));
    } catch (const IconError&) {
      ++out.decode_failures;
    }
  }
  return out;
}

bool looks_like_ico(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 6 && read_u16(bytes, 0) == 0 && read_u16(bytes, 2) == 1 &&
         read_u16(bytes, 4) >= 1;
}

IconExtraction decode_ico_file(std::span<const std::uint8_t> bytes) {
  IconExtraction out;
  if (!looks_like_ico(bytes)) return out;
  const std::uint16_t count = read_u16(bytes, 4);
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::size_t e = 6 + 16 * static_cast<std::size_t>(i);  // ICONDIRENTRY
    if (e + 16 > bytes.size()) {
      ++out.decode_failures;
      break;
    }
    const std::uint32_t size = read_u32(bytes, e + 8);
    const std::uint32_t offset = read_u32(bytes, e + 12);
    if (static_cast<std::uint64_t>(offset) + size > bytes.size()) {
      ++out.decode_failures;
      continue;
    }
    try {
      out.icons.push_back(decode_icon_image(bytes.subspan(offset, size)));
    } catch (const IconError&) {
      ++out.decode_failures;
    }
  }
  return out;
}

const IconRaster& select_primary_icon(const std::vector<IconRaster>& icons) {
  if (icons.empty()) throw IconError(IconErrorKind::EmptyList, "no icons to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < icons.size(); ++i) {
    const auto area = [](const IconRaster& ic) {
      return static_cast<std::int64_t>(ic.width) * ic.height;
    };
    if (area(icons[i]) > area(icons[best])) best = i;
  }
  return icons[best];
}

std::vector<std::uint8_t> encode_pam(const IconRaster& icon) {
  std::ostringstream header;
  header << "P7\nWIDTH " << icon.width << "\nHEIGHT " << icon.height
         << "\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.insert(out.end(), icon.pixels.begin(), icon.pixels.end());
  return out;
}

IconRaster decode_pam(std::span<const std::uint8_t> bytes) {
  const std::string text(reinterpret_cast<const char*>(bytes.data()),
                         std::min<std::size_t>(bytes.size(), 512));
  if (text.rfind("P7\n", 0) != 0) {
    throw IconError(IconErrorKind::MalformedDib, "pam: bad magic");
  }
  IconRaster icon;
  std::size_t pos = 3;
  while (true) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) throw IconError(IconErrorKind::MalformedDib, "pam: bad header");
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line == "ENDHDR") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "WIDTH") ls >> icon.width;
    if (key == "HEIGHT") ls >> icon.height;
  }
  if (icon.width < kMinIconSide || icon.width > kMaxIconSide || icon.height < kMinIconSide ||
      icon.height > kMaxIconSide) {
    throw IconError(IconErrorKind::MalformedDib, "pam: bad dimensions");
  }
  const std::size_t need = static_cast<std::size_t>(icon.width) * icon.height * 4;
  if (bytes.size() < pos + need) throw IconError(IconErrorKind::MalformedDib, "pam: truncated");
  icon.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + need);
  return icon;
}

}  // namespace icondet

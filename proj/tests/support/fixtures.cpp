#include "fixtures.hpp"

#include <cstring>
#include <stdexcept>

namespace icondet::testing {

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void patch_u32(std::vector<std::uint8_t>& b, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t align_up(std::uint32_t v, std::uint32_t a) { return (v + a - 1) / a * a; }

constexpr std::uint32_t kFileAlign = 0x200;
constexpr std::uint32_t kSectionAlign = 0x1000;

// Resource blob: root -> {RT_ICON(3), RT_GROUP_ICON(14)} -> id dirs -> lang
// dirs -> data entries -> payloads. Offsets inside the blob are relative to
// its start; data-entry addresses are RVAs, hence the rsrc_rva parameter.
std::vector<std::uint8_t> build_resource_blob(std::uint32_t rsrc_rva,
                                              const std::vector<std::vector<std::uint8_t>>& icons) {
  const std::uint32_t n = static_cast<std::uint32_t>(icons.size());

  // group directory payload (GRPICONDIR + per-icon GRPICONDIRENTRY)
  std::vector<std::uint8_t> group;
  put_u16(group, 0);
  put_u16(group, 1);
  put_u16(group, static_cast<std::uint16_t>(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    group.push_back(32);  // nominal size hints; decoders use the DIB header
    group.push_back(32);
    group.push_back(0);
    group.push_back(0);
    put_u16(group, 1);
    put_u16(group, 32);
    put_u32(group, static_cast<std::uint32_t>(icons[i].size()));
    put_u16(group, static_cast<std::uint16_t>(i + 1));  // RT_ICON id
  }

  auto dir_size = [](std::uint32_t entries) { return 16 + 8 * entries; };

  const std::uint32_t root_off = 0;
  const std::uint32_t icon_dir_off = root_off + dir_size(2);
  const std::uint32_t group_dir_off = icon_dir_off + dir_size(n);
  std::uint32_t cursor = group_dir_off + dir_size(1);

  std::vector<std::uint32_t> icon_lang_offs(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    icon_lang_offs[i] = cursor;
    cursor += dir_size(1);
  }
  const std::uint32_t group_lang_off = cursor;
  cursor += dir_size(1);

  std::vector<std::uint32_t> icon_entry_offs(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    icon_entry_offs[i] = cursor;
    cursor += 16;
  }
  const std::uint32_t group_entry_off = cursor;
  cursor += 16;

  std::vector<std::uint32_t> payload_offs(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    payload_offs[i] = cursor;
    cursor += static_cast<std::uint32_t>(icons[i].size());
  }
  const std::uint32_t group_payload_off = cursor;
  cursor += static_cast<std::uint32_t>(group.size());

  std::vector<std::uint8_t> blob;
  blob.reserve(cursor);
  auto emit_dir = [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& entries) {
    put_u32(blob, 0);
    put_u32(blob, 0);
    put_u16(blob, 0);
    put_u16(blob, 0);
    put_u16(blob, 0);                                         // named entries
    put_u16(blob, static_cast<std::uint16_t>(entries.size()));  // id entries
    for (const auto& [id, off] : entries) {
      put_u32(blob, id);
      put_u32(blob, off);
    }
  };

  emit_dir({{3, icon_dir_off | 0x80000000u}, {14, group_dir_off | 0x80000000u}});
  {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    for (std::uint32_t i = 0; i < n; ++i) {
      entries.emplace_back(i + 1, icon_lang_offs[i] | 0x80000000u);
    }
    emit_dir(entries);
  }
  emit_dir({{1, group_lang_off | 0x80000000u}});
  for (std::uint32_t i = 0; i < n; ++i) emit_dir({{0x409, icon_entry_offs[i]}});
  emit_dir({{0x409, group_entry_off}});

  for (std::uint32_t i = 0; i < n; ++i) {
    put_u32(blob, rsrc_rva + payload_offs[i]);
    put_u32(blob, static_cast<std::uint32_t>(icons[i].size()));
    put_u32(blob, 0);
    put_u32(blob, 0);
  }
  put_u32(blob, rsrc_rva + group_payload_off);
  put_u32(blob, static_cast<std::uint32_t>(group.size()));
  put_u32(blob, 0);
  put_u32(blob, 0);

  for (std::uint32_t i = 0; i < n; ++i) {
    blob.insert(blob.end(), icons[i].begin(), icons[i].end());
  }
  blob.insert(blob.end(), group.begin(), group.end());
  return blob;
}

}  // namespace

std::vector<std::uint8_t> build_pe(const std::vector<FixtureSection>& sections,
                                   const std::vector<std::vector<std::uint8_t>>& icon_payloads,
                                   bool pe32_plus) {
  std::vector<FixtureSection> all = sections;

  // section RVAs are assigned before the resource blob is built because data
  // entries carry absolute RVAs
  std::vector<std::uint32_t> rvas;
  std::uint32_t rva = kSectionAlign;
  for (const auto& s : all) {
    rvas.push_back(rva);
    const std::uint32_t extent =
        std::max<std::uint32_t>(1, std::max<std::uint32_t>(
                                       static_cast<std::uint32_t>(s.data.size()),
                                       s.virtual_size));
    rva = align_up(rva + extent, kSectionAlign);
  }
  std::uint32_t rsrc_rva = 0;
  if (!icon_payloads.empty()) {
    rsrc_rva = rva;
    FixtureSection rsrc;
    rsrc.name = ".rsrc";
    rsrc.data = build_resource_blob(rsrc_rva, icon_payloads);
    all.push_back(rsrc);
    rvas.push_back(rsrc_rva);
    rva = align_up(rva + static_cast<std::uint32_t>(rsrc.data.size()), kSectionAlign);
  }

  const auto n_sections = static_cast<std::uint16_t>(all.size());
  const std::uint32_t kOptSize = pe32_plus ? 240 : 224;
  const std::uint32_t headers_size =
      0x40 + 4 + 20 + kOptSize + 40u * n_sections;
  const std::uint32_t size_of_headers = align_up(headers_size, kFileAlign);

  std::vector<std::uint8_t> pe;
  // DOS header
  pe.push_back('M');
  pe.push_back('Z');
  pe.resize(0x3C, 0);
  put_u32(pe, 0x40);  // e_lfanew
  // PE signature + COFF header
  pe.push_back('P');
  pe.push_back('E');
  pe.push_back(0);
  pe.push_back(0);
  put_u16(pe, pe32_plus ? 0x8664 : 0x014C);
  put_u16(pe, n_sections);
  put_u32(pe, 0);  // timestamp
  put_u32(pe, 0);
  put_u32(pe, 0);
  put_u16(pe, kOptSize);
  put_u16(pe, 0x0102);  // executable, 32-bit

  const std::size_t opt_start = pe.size();
  auto put_u64 = [&pe](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) pe.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put_u16(pe, pe32_plus ? 0x20B : 0x10B);
  pe.push_back(14);  // linker versions, cosmetic
  pe.push_back(0);
  put_u32(pe, 0);  // sizeof code
  put_u32(pe, 0);
  put_u32(pe, 0);
  put_u32(pe, rvas.empty() ? 0 : rvas[0]);  // entry point
  put_u32(pe, 0);
  if (pe32_plus) {
    put_u64(0x140000000ull);  // image base
  } else {
    put_u32(pe, 0);           // base of data
    put_u32(pe, 0x400000);    // image base
  }
  put_u32(pe, kSectionAlign);
  put_u32(pe, kFileAlign);
  put_u16(pe, 6);  // OS versions
  put_u16(pe, 0);
  put_u16(pe, 0);
  put_u16(pe, 0);
  put_u16(pe, 6);
  put_u16(pe, 0);
  put_u32(pe, 0);
  put_u32(pe, rva);  // size of image
  put_u32(pe, size_of_headers);
  put_u32(pe, 0);  // checksum
  put_u16(pe, 3);  // console subsystem
  put_u16(pe, 0);
  if (pe32_plus) {
    put_u64(0x100000);  // stack/heap reserves and commits
    put_u64(0x1000);
    put_u64(0x100000);
    put_u64(0x1000);
  } else {
    put_u32(pe, 0x100000);
    put_u32(pe, 0x1000);
    put_u32(pe, 0x100000);
    put_u32(pe, 0x1000);
  }
  put_u32(pe, 0);
  put_u32(pe, 16);  // NumberOfRvaAndSizes
  for (int d = 0; d < 16; ++d) {
    if (d == 2 && rsrc_rva != 0) {
      put_u32(pe, rsrc_rva);
      put_u32(pe, static_cast<std::uint32_t>(all.back().data.size()));
    } else {
      put_u32(pe, 0);
      put_u32(pe, 0);
    }
  }
  if (pe.size() - opt_start != kOptSize) throw std::logic_error("optional header size drifted");

  // section table; raw data offsets assigned on the fly
  std::uint32_t raw_ptr = size_of_headers;
  std::vector<std::uint32_t> raw_ptrs;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& s = all[i];
    char name[8] = {};
    std::memcpy(name, s.name.data(), std::min<std::size_t>(8, s.name.size()));
    pe.insert(pe.end(), name, name + 8);
    put_u32(pe, s.virtual_size ? s.virtual_size : static_cast<std::uint32_t>(s.data.size()));
    put_u32(pe, rvas[i]);
    put_u32(pe, static_cast<std::uint32_t>(s.data.size()));
    raw_ptrs.push_back(raw_ptr);
    put_u32(pe, raw_ptr);
    raw_ptr = align_up(raw_ptr + static_cast<std::uint32_t>(s.data.size()), kFileAlign);
    put_u32(pe, 0);
    put_u32(pe, 0);
    put_u16(pe, 0);
    put_u16(pe, 0);
    put_u32(pe, s.name == ".text" ? 0x60000020u : 0xC0000040u);
  }

  pe.resize(raw_ptr, 0);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::memcpy(pe.data() + raw_ptrs[i], all[i].data.data(), all[i].data.size());
  }
  return pe;
}

std::vector<std::uint8_t> encode_dib32(const IconRaster& icon) {
  std::vector<std::uint8_t> out;
  const std::uint32_t xor_stride = static_cast<std::uint32_t>(icon.width) * 4;
  const std::uint32_t and_stride = align_up(align_up(icon.width, 8) / 8, 4);
  put_u32(out, 40);
  put_u32(out, static_cast<std::uint32_t>(icon.width));
  put_u32(out, static_cast<std::uint32_t>(icon.height * 2));
  put_u16(out, 1);
  put_u16(out, 32);
  put_u32(out, 0);
  put_u32(out, (xor_stride + and_stride) * icon.height);
  put_u32(out, 0);
  put_u32(out, 0);
  put_u32(out, 0);
  put_u32(out, 0);
  for (int y = icon.height - 1; y >= 0; --y) {
    for (int x = 0; x < icon.width; ++x) {
      const std::uint8_t* px = icon.pixels.data() + (static_cast<std::size_t>(y) * icon.width + x) * 4;
      out.push_back(px[2]);
      out.push_back(px[1]);
      out.push_back(px[0]);
      out.push_back(px[3]);
    }
  }
  for (int y = icon.height - 1; y >= 0; --y) {
    for (std::uint32_t i = 0; i < and_stride; ++i) out.push_back(0);
  }
  return out;
}

std::vector<std::uint8_t> encode_dib24(const IconRaster& icon) {
  std::vector<std::uint8_t> out;
  const std::uint32_t xor_stride = align_up(static_cast<std::uint32_t>(icon.width) * 3, 4);
  const std::uint32_t and_stride = align_up(align_up(icon.width, 8) / 8, 4);
  put_u32(out, 40);
  put_u32(out, static_cast<std::uint32_t>(icon.width));
  put_u32(out, static_cast<std::uint32_t>(icon.height * 2));
  put_u16(out, 1);
  put_u16(out, 24);
  put_u32(out, 0);
  put_u32(out, (xor_stride + and_stride) * icon.height);
  put_u32(out, 0);
  put_u32(out, 0);
  put_u32(out, 0);
  put_u32(out, 0);
  for (int y = icon.height - 1; y >= 0; --y) {
    std::size_t row_start = out.size();
    for (int x = 0; x < icon.width; ++x) {
      const std::uint8_t* px = icon.pixels.data() + (static_cast<std::size_t>(y) * icon.width + x) * 4;
      out.push_back(px[2]);
      out.push_back(px[1]);
      out.push_back(px[0]);
    }
    while (out.size() - row_start < xor_stride) out.push_back(0);
  }
  for (int y = icon.height - 1; y >= 0; --y) {
    std::vector<std::uint8_t> row(and_stride, 0);
    for (int x = 0; x < icon.width; ++x) {
      const std::uint8_t alpha =
          icon.pixels[(static_cast<std::size_t>(y) * icon.width + x) * 4 + 3];
      if (alpha < 128) row[x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    }
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<std::uint8_t> build_ico(const std::vector<std::vector<std::uint8_t>>& payloads) {
  std::vector<std::uint8_t> out;
  put_u16(out, 0);
  put_u16(out, 1);
  put_u16(out, static_cast<std::uint16_t>(payloads.size()));
  std::uint32_t offset = 6 + 16 * static_cast<std::uint32_t>(payloads.size());
  for (const auto& p : payloads) {
    out.push_back(32);
    out.push_back(32);
    out.push_back(0);
    out.push_back(0);
    put_u16(out, 1);
    put_u16(out, 32);
    put_u32(out, static_cast<std::uint32_t>(p.size()));
    put_u32(out, offset);
    offset += static_cast<std::uint32_t>(p.size());
  }
  for (const auto& p : payloads) out.insert(out.end(), p.begin(), p.end());
  return out;
}

IconRaster solid_icon(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                      std::uint8_t a) {
  IconRaster icon;
  icon.width = width;
  icon.height = height;
  icon.pixels.resize(static_cast<std::size_t>(width) * height * 4);
  for (std::size_t i = 0; i < icon.pixel_count(); ++i) {
    icon.pixels[4 * i + 0] = r;
    icon.pixels[4 * i + 1] = g;
    icon.pixels[4 * i + 2] = b;
    icon.pixels[4 * i + 3] = a;
  }
  return icon;
}

}  // namespace icondet::testing

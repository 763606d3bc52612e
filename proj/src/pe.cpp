#include "icondet/pe.hpp"

#include <algorithm>
#include <cmath>

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

void require(bool ok, PeErrorKind kind, const char* msg) {
  if (!ok) throw PeError(kind, msg);
}

constexpr std::size_t kCoffHeaderSize = 20;
constexpr std::size_t kSectionHeaderSize = 40;

}  // namespace

const SectionRecord* PeSummary::find_section(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::optional<std::span<const std::uint8_t>> PeSummary::map_rva(std::uint32_t rva,
                                                                std::uint32_t length) const {
  for (const auto& s : sections) {
    const std::uint32_t span = std::max(s.misc_virtual_size, s.size_of_raw_data);
    if (rva >= s.virtual_address && rva - s.virtual_address < span) {
      const std::uint64_t off =
          static_cast<std::uint64_t>(s.pointer_to_raw_data) + (rva - s.virtual_address);
      if (off + length > image.size()) return std::nullopt;
      return std::span<const std::uint8_t>(image.data() + off, length);
    }
  }
  return std::nullopt;
}

PeSummary parse_pe(std::span<const std::uint8_t> bytes) {
  require(!bytes.empty(), PeErrorKind::NotPe, "empty input");
  require(bytes.size() >= 0x40, PeErrorKind::NotPe, "too short for a DOS header");
  require(bytes[0] == 'M' && bytes[1] == 'Z', PeErrorKind::NotPe, "missing MZ magic");

  const std::uint32_t e_lfanew = read_u32(bytes, 0x3C);
  require(static_cast<std::uint64_t>(e_lfanew) + 4 + kCoffHeaderSize <= bytes.size(),
          PeErrorKind::Truncated, "PE header extends past EOF");
  require(bytes[e_lfanew] == 'P' && bytes[e_lfanew + 1] == 'E' && bytes[e_lfanew + 2] == 0 &&
              bytes[e_lfanew + 3] == 0,
          PeErrorKind::NotPe, "missing PE signature");

  const std::size_t coff = e_lfanew + 4;
  const std::uint16_t num_sections = read_u16(bytes, coff + 2);
  const std::uint16_t opt_size = read_u16(bytes, coff + 16);
  const std::size_t opt = coff + kCoffHeaderSize;
  require(opt + opt_size <= bytes.size(), PeErrorKind::Truncated,
          "optional header extends past EOF");
  require(opt_size >= 2, PeErrorKind::MalformedHeader, "optional header too small");

  // Data directory index 2 (resources). Offsets differ for PE32 vs PE32+.
  const std::uint16_t magic = read_u16(bytes, opt);
  std::uint32_t resource_rva = 0, resource_size = 0;
  std::size_t dir_count_off, dir_table_off;
  if (magic == 0x10B) {
    dir_count_off = 92;
    dir_table_off = 96;
  } else if (magic == 0x20B) {
    dir_count_off = 108;
    dir_table_off = 112;
  } else {
    throw PeError(PeErrorKind::MalformedHeader, "unknown optional-header magic");
  }
  if (opt_size >= dir_count_off + 4) {
    const std::uint32_t num_dirs = read_u32(bytes, opt + dir_count_off);
    if (num_dirs > 2 && opt_size >= dir_table_off + 3 * 8) {
      resource_rva = read_u32(bytes, opt + dir_table_off + 2 * 8);
      resource_size = read_u32(bytes, opt + dir_table_off + 2 * 8 + 4);
    }
  }

  const std::size_t table = opt + opt_size;
  require(table + static_cast<std::size_t>(num_sections) * kSectionHeaderSize <= bytes.size(),
          PeErrorKind::Truncated, "section table extends past EOF");

  PeSummary pe;
  pe.is_valid_pe = true;
  pe.resource_rva = resource_rva;
  pe.resource_size = resource_size;
  pe.sections.reserve(num_sections);
  for (std::uint16_t i = 0; i < num_sections; ++i) {
    const std::size_t h = table + static_cast<std::size_t>(i) * kSectionHeaderSize;
    SectionRecord rec;
    const char* name_bytes = reinterpret_cast<const char*>(bytes.data() + h);
    std::size_t name_len = 0;
    while (name_len < 8 && name_bytes[name_len] != '\0') ++name_len;
    rec.name.assign(name_bytes, name_len);
    rec.misc_virtual_size = read_u32(bytes, h + 8);
    rec.virtual_address = read_u32(bytes, h + 12);
    rec.size_of_raw_data = read_u32(bytes, h + 16);
    rec.pointer_to_raw_data = read_u32(bytes, h + 20);
    require(static_cast<std::uint64_t>(rec.pointer_to_raw_data) + rec.size_of_raw_data <=
                bytes.size(),
            PeErrorKind::Truncated, "section data extends past EOF");
    rec.raw_bytes.assign(bytes.begin() + rec.pointer_to_raw_data,
                         bytes.begin() + rec.pointer_to_raw_data + rec.size_of_raw_data);
    pe.sections.push_back(std::move(rec));
  }
  pe.image.assign(bytes.begin(), bytes.end());
  return pe;
}

double section_entropy(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return 0.0;
  std::array<std::uint64_t, 256> counts{};
  for (std::uint8_t b : bytes) ++counts[b];
  const double inv = 1.0 / static_cast<double>(bytes.size());
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) * inv;
    h -= p * std::log2(p);
  }
  return h;
}

std::array<double, kPefileDim> pefile_features(const PeSummary& pe) {
  std::array<double, kPefileDim> out{};
  static const char* names[3] = {".text", ".data", ".rsrc"};
  for (int i = 0; i < 3; ++i) {
    const SectionRecord* s = pe.find_section(names[i]);
    if (!s) continue;  // missing section contributes (0, 0, 0)
    out[3 * i + 0] = section_entropy(s->raw_bytes);
    out[3 * i + 1] = static_cast<double>(s->misc_virtual_size);
    out[3 * i + 2] = static_cast<double>(s->size_of_raw_data);
  }
  return out;
}

}  // namespace icondet

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace icondet {

enum class PeErrorKind { NotPe, Truncated, MalformedHeader };

class PeError : public std::runtime_error {
 public:
  PeError(PeErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  PeErrorKind kind() const { return kind_; }

 private:
  PeErrorKind kind_;
};

struct SectionRecord {
  std::string name;  // raw 8-byte name, NUL-trimmed
  std::vector<std::uint8_t> raw_bytes;
  std::uint32_t misc_virtual_size = 0;
  std::uint32_t size_of_raw_data = 0;
  // header fields kept for RVA mapping into the resource tree
  std::uint32_t virtual_address = 0;
  std::uint32_t pointer_to_raw_data = 0;
};

struct PeSummary {
  bool is_valid_pe = false;
  std::vector<SectionRecord> sections;  // section-table order
  // raw resource-directory reference: RVA/size of data directory index 2,
  // plus the original image for resolving leaf-entry RVAs
  std::uint32_t resource_rva = 0;
  std::uint32_t resource_size = 0;
  std::vector<std::uint8_t> image;

  bool has_resources() const { return resource_rva != 0 && resource_size != 0; }
  const SectionRecord* find_section(const std::string& name) const;
  // maps an RVA+length span into the file image; nullopt if unmappable
  std::optional<std::span<const std::uint8_t>> map_rva(std::uint32_t rva,
                                                       std::uint32_t length) const;
};

// Parses headers and the section table; the resource directory is located
// via optional-header data directory index 2 but not walked here.
// Throws PeError{NotPe, Truncated, MalformedHeader}.
PeSummary parse_pe(std::span<const std::uint8_t> bytes);

// Shannon entropy over the byte histogram, base 2 (bits/byte, range [0, 8]).
// Empty input yields 0.
double section_entropy(std::span<const std::uint8_t> bytes);

// Nine values: (.text, .data, .rsrc) x (entropy, Misc_VirtualSize,
// SizeOfRawData). A missing section contributes (0, 0, 0).
inline constexpr int kPefileDim = 9;
std::array<double, kPefileDim> pefile_features(const PeSummary& pe);

inline const std::array<const char*, kPefileDim> kPefileColumns = {
    "text_entropy", "text_vsize", "text_rawsize",
    "data_entropy", "data_vsize", "data_rawsize",
    "rsrc_entropy", "rsrc_vsize", "rsrc_rawsize"};

}  // namespace icondet

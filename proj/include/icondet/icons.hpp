#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "icondet/pe.hpp"
#include "icondet/raster.hpp"

namespace icondet {

enum class IconErrorKind { UnsupportedBpp, MalformedDib, MalformedPng, EmptyList };

class IconError : public std::runtime_error {
 public:
  IconError(IconErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  IconErrorKind kind() const { return kind_; }

 private:
  IconErrorKind kind_;
};

// Decodes one icon payload: either a BMP DIB (BITMAPINFOHEADER, 1/4/8/24/32
// bpp, doubled-height XOR+AND masks per the ICO convention) or a PNG stream.
// Throws IconError{UnsupportedBpp, MalformedDib, MalformedPng}.
IconRaster decode_icon_image(std::span<const std::uint8_t> payload);

struct IconExtraction {
  std::vector<IconRaster> icons;
  int decode_failures = 0;  // payloads skipped because they failed to decode
};

// Walks RT_GROUP_ICON (14) / RT_ICON (3) resources, reassembles each group
// directory and decodes its members in (group id, entry index) order.
// RT_ICON entries referenced by no group are appended afterwards in id order.
// A PE without a resource directory yields an empty list.
IconExtraction extract_icons(const PeSummary& pe);

// Standalone .ico container (ICONDIR + ICONDIRENTRY table).
IconExtraction decode_ico_file(std::span<const std::uint8_t> bytes);

bool looks_like_ico(std::span<const std::uint8_t> bytes);

// Largest area wins; earliest list position breaks ties. Throws
// IconError{EmptyList} on an empty list.
const IconRaster& select_primary_icon(const std::vector<IconRaster>& icons);

// Lossless RGBA store format (Netpbm PAM, P7, TUPLTYPE RGB_ALPHA).
std::vector<std::uint8_t> encode_pam(const IconRaster& icon);
IconRaster decode_pam(std::span<const std::uint8_t> bytes);

}  // namespace icondet

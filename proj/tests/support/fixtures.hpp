#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icondet/raster.hpp"

// Binary fixture builders for the parser tests. These encoders are written
// against the PE/ICO/DIB layout docs, not against the production decoders,
// so round-trips through icondet count as real checks.
namespace icondet::testing {

struct FixtureSection {
  std::string name;
  std::vector<std::uint8_t> data;
  std::uint32_t virtual_size = 0;  // 0 = use data size
};

// Minimal PE image with the given sections; when icon payloads are supplied
// a .rsrc section with RT_GROUP_ICON/RT_ICON entries is appended. pe32_plus
// switches the optional header to the 64-bit layout.
std::vector<std::uint8_t> build_pe(const std::vector<FixtureSection>& sections,
                                   const std::vector<std::vector<std::uint8_t>>& icon_payloads = {},
                                   bool pe32_plus = false);

// ICO-style DIB payloads (doubled-height header, bottom-up rows, AND mask).
std::vector<std::uint8_t> encode_dib32(const IconRaster& icon);
std::vector<std::uint8_t> encode_dib24(const IconRaster& icon);  // AND mask from alpha < 128

// Standalone .ico container around raw payloads.
std::vector<std::uint8_t> build_ico(const std::vector<std::vector<std::uint8_t>>& payloads);

IconRaster solid_icon(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                      std::uint8_t a = 255);

}  // namespace icondet::testing

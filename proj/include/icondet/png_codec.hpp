#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icondet/raster.hpp"

namespace icondet {

bool looks_like_png(std::span<const std::uint8_t> bytes);

// Minimal PNG reader for icon payloads: 8-bit gray/RGB/palette/gray+alpha/RGBA
// (palette also at depths 1/2/4), all five scanline filters, no interlacing.
// CRCs are verified. Throws IconError{MalformedPng} on anything else.
IconRaster decode_png(std::span<const std::uint8_t> bytes);

// Writes 8-bit RGBA, filter 0 scanlines.
std::vector<std::uint8_t> encode_png(const IconRaster& icon);

}  // namespace icondet

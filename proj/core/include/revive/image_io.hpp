#pragma once

#include <filesystem>
#include <string>

#include "revive/tensor.hpp"

namespace revive::io {

/// Binary PPM (P6, maxval 255). Pixels load as byte / 255 into a (1, 3, H, W)
/// tensor. Saving clamps to [0, 1] and rounds to the nearest byte, so any
/// tensor of multiples of 1/255 survives a save/load roundtrip bit-exactly.
Tensor decode_ppm(const std::string& bytes);
std::string encode_ppm(const Tensor& image);

Tensor load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Tensor& image);

/// Rounds to the 8-bit grid in memory, as a save/load roundtrip would.
Tensor quantize8(const Tensor& image);

}  // namespace revive::io

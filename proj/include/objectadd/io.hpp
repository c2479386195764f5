// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "objectadd/backend.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

using Bytes = std::vector<std::uint8_t>;
using PixelGrid = Grid<std::uint8_t>;

/// [0, 1] image to 0-255 integers (round half away from zero, clamped).
PixelGrid to_255(const Image& image);
Image from_255(const PixelGrid& pixels);
/// 0 / 255 grayscale view of a mask.
PixelGrid mask_to_gray(const BinaryMask& mask);
/// Grayscale view of a real grid scaled so its maximum maps to 255.
PixelGrid heatmap_to_gray(const Grid<double>& values);

/// Lossless PNG codec. Grids with 1 channel are written as grayscale, 3 as RGB.
Bytes encode_png(const PixelGrid& pixels);
/// Decodes any PNG into 8-bit RGB. Throws Io on malformed input.
PixelGrid decode_png(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// Config keys are exactly the GuidanceConfig field names. Keys not present
/// keep the value from `base`; unknown keys and wrongly typed values throw
/// Config.
GuidanceConfig config_from_yaml(const std::string& text, const GuidanceConfig& base = {});
std::string config_to_yaml(const GuidanceConfig& config);
GuidanceConfig config_from_json(const nlohmann::json& overrides, const GuidanceConfig& base = {});
nlohmann::json config_to_json(const GuidanceConfig& config);

nlohmann::json descriptor_to_json(const BackendDescriptor& descriptor);

}  // namespace objectadd

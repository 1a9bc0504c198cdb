#pragma once

#include "hydrofuse/raster.hpp"

#include <filesystem>

namespace hydrofuse {

// Flat raster format: `<stem>.hdr` holds `key = value` lines (samples, lines,
// bands, data_type = float32le, interleave = bsq, pixel_size, ulx, uly,
// band_names, optional nodata); `<stem>.bin` holds little-endian float32
// samples, row-major within each band, bands in sequence.
//
// `path` may name the stem or either of the two files.

RasterGrid read_raster(const std::filesystem::path& path);
void write_raster(const RasterGrid& raster, const std::filesystem::path& path);

BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

std::filesystem::path header_path(const std::filesystem::path& path);
std::filesystem::path data_path(const std::filesystem::path& path);

}  // namespace hydrofuse

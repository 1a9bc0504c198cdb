#pragma once

#include "hydrofuse/raster.hpp"

#include <span>
#include <string>
#include <vector>

namespace hydrofuse {

/// Band labels compared by the time-series water index. NIR and coastal are
/// left out by default.
struct WaterIndexBands {
    std::vector<std::string> visible{"blue", "green", "red"};
    std::vector<std::string> swir{"swir1", "swir2"};
};

/// 1 when the brightest visible band exceeds the brightest SWIR band, else 0.
int water_index_flag(std::span<const float> visible, std::span<const float> swir);

/// Fraction of dates flagged as water, one band "p_water". All dates must
/// share a grid. A date whose bands are nodata at a pixel is skipped there;
/// pixels with no usable date become nodata.
RasterGrid landsat_water_index(std::span<const RasterGrid> stack, const WaterIndexBands& bands = {});

}  // namespace hydrofuse

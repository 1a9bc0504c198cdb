#pragma once

#include "hydrofuse/raster.hpp"
#include "hydrofuse/segmentation.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hydrofuse {

struct PostClassParams {
    double shadow_relabel_threshold = 0.85;
    int boundary_band_px = 4;
    int unmix_window_px = 33;
    double water_fraction_threshold = 0.5;

    void validate() const;
};

struct RelabelResult {
    std::vector<std::uint8_t> water;   ///< per segment
    std::vector<std::uint8_t> shadow;  ///< segments moved from water to shadow
};

/// Water segments with p_shadow above the threshold become shadow.
RelabelResult relabel_shadow_segments(std::span<const std::uint8_t> water, const SegmentMap& segmap,
                                      const PostClassParams& params);

/// Pixels whose centres lie within boundary_band_px of a water/land edge
/// (Chebyshev). Edge pixels are those with a 4-neighbour of the other label.
BinaryMask boundary_band(const BinaryMask& water, int band_px);

/// Least-squares water fraction of x between land endmember l and water
/// endmember wtr, clamped to [0, 1]. Returns -1 when the endmembers coincide.
double water_fraction(std::span<const double> x, std::span<const double> land, std::span<const double> wtr);

/// Two-endmember unmixing in the boundary band. Endmembers are the mean
/// spectra of water and land pixels outside the band within the centred
/// window; pixels lacking either endmember, or with nodata spectra, keep
/// their label. `ms` must be on the mask grid.
BinaryMask boundary_unmix(const BinaryMask& water, const RasterGrid& ms, const PostClassParams& params);

}  // namespace hydrofuse

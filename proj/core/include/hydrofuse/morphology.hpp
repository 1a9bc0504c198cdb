#pragma once

#include "hydrofuse/raster.hpp"

#include <string>
#include <vector>

namespace hydrofuse {

enum class SeShape { horizontal_line, vertical_line, square };

/// Flat rectangular structuring element. Lines are one pixel thick. For an
/// even size the anchor is the top-left pixel of the central 2x2 block, so a
/// length-4 line covers offsets -1..+2.
struct StructuringElement {
    SeShape shape = SeShape::square;
    int size = 4;

    struct Span {
        int lo = 0;
        int hi = 0;
    };
    Span rows() const;
    Span cols() const;
    std::string name() const;
};

// Single-band grayscale morphology with edge replication. Dilation uses the
// reflected element, so opening and closing are idempotent.
RasterGrid erode(const RasterGrid& image, const StructuringElement& se);
RasterGrid dilate(const RasterGrid& image, const StructuringElement& se);
RasterGrid opening(const RasterGrid& image, const StructuringElement& se);
RasterGrid closing(const RasterGrid& image, const StructuringElement& se);

/// The elements of the profile stack: line 4 (horizontal, vertical), square 4, 6, 8.
std::vector<StructuringElement> profile_elements();

/// Ten bands: opening then closing for each element of profile_elements().
RasterGrid morphological_profiles(const RasterGrid& pan);

}  // namespace hydrofuse

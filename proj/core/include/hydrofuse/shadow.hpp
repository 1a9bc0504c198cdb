#pragma once

#include "hydrofuse/raster.hpp"
#include "hydrofuse/segmentation.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace hydrofuse {

/// Sun and view angles in degrees. Azimuths are clockwise from north. Only
/// nadir viewing is modelled; the view angles are carried for completeness.
struct ShadowGeometry {
    double sun_elevation_deg = 50.0;
    double sun_azimuth_deg = 160.0;
    double view_elevation_deg = 90.0;
    double view_azimuth_deg = 0.0;

    void validate() const;
};

/// Shadow displacement per metre of object height, in pixel-size units:
/// a object pixel at (X, Y) casts onto (X + a*h/r, Y + b*h/r) with X the
/// column and Y the row.
struct OffsetCoefficients {
    double a = 0.0;
    double b = 0.0;
};
OffsetCoefficients shadow_offset_coefficients(const ShadowGeometry& geom);

struct HeightRange {
    double min = 3.0;
    double max = 50.0;
};

struct HeightRanges {
    HeightRange high_intensity_building{3.0, 300.0};
    HeightRange low_intensity_building{3.0, 50.0};
    HeightRange tree{3.0, 50.0};
    /// Metres of height between marks. 0 marks every pixel reached by some
    /// height in the range, which keeps the mask monotone in the range.
    double sweep_step = 0.0;

    void validate() const;
};

/// r*tan(elevation), capped so that consecutive marks are at most one pixel
/// apart. Explicit steps above the cap are rejected.
double default_sweep_step(const ShadowGeometry& geom, double r);

struct IntensityParams {
    int window = 101;
    double ratio_threshold = 0.30;

    void validate() const;
};

/// Per-segment labels after the vegetation refinement. The first four values
/// mirror LandCover.
enum class SegmentClass : std::uint8_t { vegetation = 0, soil, impervious, water, tree, grass, shadow };
std::string_view to_string(SegmentClass c);
SegmentClass from_land_cover(LandCover c);

/// Most-voted MS class per segment (ties to the earlier class). A segment
/// without votes is an error.
std::vector<SegmentClass> classify_segments_majority(const SegmentMap& segmap);

/// Otsu threshold over the mp_std of the vegetation segments, or nothing when
/// there are fewer than two distinct values.
std::optional<double> default_tree_threshold(const SegmentMap& segmap, const std::vector<SegmentClass>& labels);

/// Vegetation segments with mp_std > t_tree become tree, the rest grass.
std::vector<SegmentClass> tree_grass_split(const SegmentMap& segmap, std::vector<SegmentClass> labels,
                                           double t_tree);

/// 1 where the windowed share of impervious pixels exceeds the ratio threshold.
BinaryMask building_intensity_map(const BinaryMask& impervious, const IntensityParams& params);

enum class ObjectKind : std::uint8_t { none = 0, high_intensity_building, low_intensity_building, tree };

struct ObjectKindMap {
    GridGeometry geometry{};
    std::vector<ObjectKind> kinds;
};

/// Object kinds per pixel: impervious segments are buildings, split by the
/// intensity map; tree segments are trees.
ObjectKindMap object_kinds(const SegmentMap& segmap, const std::vector<SegmentClass>& labels,
                           const BinaryMask& high_intensity);

/// Union of shadow marks cast by every object pixel over its kind's height
/// range: pixel (round(col + a*h/r), round(row + b*h/r)) for each swept h.
/// Marks falling outside the image are dropped.
BinaryMask potential_shadow_mask(const BinaryMask& object_mask, const ObjectKindMap& kinds,
                                 const ShadowGeometry& geom, const HeightRanges& ranges, double r);

/// Sets p_shadow to the masked share of every segment.
SegmentMap segment_shadow_proportion(SegmentMap segmap, const BinaryMask& shadow_mask);

}  // namespace hydrofuse

#pragma once

#include "hydrofuse/raster.hpp"
#include "hydrofuse/segmentation.hpp"

#include <cstdint>
#include <vector>

namespace hydrofuse {

enum class State : std::uint8_t { non_water = 0, water = 1 };

struct FusionParams {
    int n1 = 2;
    int n2 = 1;
    double r_ms = 3.2;  ///< metres
    double r_l = 30.0;  ///< metres
    double decision_threshold = 0.5;

    void validate() const;
};

double sigmoid(double t);

/// P(PM = pm | PAN = pan, MS = ms) for a segment of size w. Agreement keeps
/// the shared state; on disagreement MS wins with weight
/// S((w / (n1 * r_ms) + p_shadow) / 2) and PAN with the complement.
double cpd_pm(State pm, State pan, State ms, double w, double p_shadow, const FusionParams& params);

/// P(W = w_state | PM = pm, LAN = lan). Landsat only gets a say once the
/// segment is at least n2 * r_l across.
double cpd_w(State w_state, State pm, State lan, double w, const FusionParams& params);

/// P(PM = water) with PAN and MS treated as independent binary parents.
double fuse_pm(double p_pan, double p_ms, double w, double p_shadow, const FusionParams& params);
/// P(W = water) with PM and LAN treated as independent binary parents.
double fuse_w(double p_pm, double p_lan, double w, const FusionParams& params);

/// Water iff p_w > decision_threshold.
bool decide(double p_w, const FusionParams& params);

struct FusionResult {
    std::vector<double> p_pm;
    std::vector<double> p_w;
    std::vector<std::uint8_t> water;  ///< per segment
    RasterGrid probability;           ///< band "p_water", constant within segments
    BinaryMask water_map;
};

/// fuse_pm then fuse_w for every segment.
FusionResult fuse_all_segments(const SegmentMap& segmap, const FusionParams& params);

/// Paints a per-segment value onto the segment grid.
RasterGrid paint_segments(const SegmentMap& segmap, const std::vector<double>& values, std::string band_name);
BinaryMask paint_segments(const SegmentMap& segmap, const std::vector<std::uint8_t>& flags);

}  // namespace hydrofuse

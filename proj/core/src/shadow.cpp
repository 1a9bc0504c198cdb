#include "hydrofuse/shadow.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/otsu.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hydrofuse {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

void check_range(const HeightRange& r, const char* what) {
    if (!(r.min > 0.0) || !(r.max >= r.min) || !std::isfinite(r.max)) {
        throw ConfigError(std::string("invalid height range for ") + what);
    }
}

}  // namespace

void ShadowGeometry::validate() const {
    if (!(sun_elevation_deg > 0.0 && sun_elevation_deg <= 90.0)) {
        throw ConfigError("sun elevation must be in (0, 90] degrees");
    }
    if (!std::isfinite(sun_azimuth_deg)) throw ConfigError("sun azimuth must be finite");
    if (!(view_elevation_deg > 0.0 && view_elevation_deg <= 90.0)) {
        throw ConfigError("view elevation must be in (0, 90] degrees");
    }
}

OffsetCoefficients shadow_offset_coefficients(const ShadowGeometry& geom) {
    geom.validate();
    if (geom.sun_elevation_deg == 90.0) return {0.0, 0.0};
    const double t = std::tan(radians(geom.sun_elevation_deg));
    const double az = radians(geom.sun_azimuth_deg);
    double a = -std::sin(az) / t;
    double b = std::cos(az) / t;
    // Keep exact zeros for the cardinal directions.
    if (std::abs(a) < 1e-15) a = 0.0;
    if (std::abs(b) < 1e-15) b = 0.0;
    return {a, b};
}

void HeightRanges::validate() const {
    check_range(high_intensity_building, "high-intensity buildings");
    check_range(low_intensity_building, "low-intensity buildings");
    check_range(tree, "trees");
    if (!(sweep_step >= 0.0) || !std::isfinite(sweep_step)) throw ConfigError("sweep step must be >= 0");
}

double default_sweep_step(const ShadowGeometry& geom, double r) {
    const auto [a, b] = shadow_offset_coefficients(geom);
    const double gap_free = r / std::max({std::abs(a), std::abs(b), 1.0});
    if (geom.sun_elevation_deg == 90.0) return gap_free;
    return std::min(r * std::tan(radians(geom.sun_elevation_deg)), gap_free);
}

void IntensityParams::validate() const {
    if (window < 1 || window % 2 == 0) throw ConfigError("intensity window must be odd and >= 1");
    if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) throw ConfigError("intensity ratio must be in (0, 1)");
}

std::string_view to_string(SegmentClass c) {
    switch (c) {
        case SegmentClass::vegetation: return "vegetation";
        case SegmentClass::soil: return "soil";
        case SegmentClass::impervious: return "impervious";
        case SegmentClass::water: return "water";
        case SegmentClass::tree: return "tree";
        case SegmentClass::grass: return "grass";
        case SegmentClass::shadow: return "shadow";
    }
    return "unknown";
}

SegmentClass from_land_cover(LandCover c) { return static_cast<SegmentClass>(static_cast<int>(c)); }

std::vector<SegmentClass> classify_segments_majority(const SegmentMap& segmap) {
    std::vector<SegmentClass> out;
    out.reserve(segmap.records.size());
    for (std::size_t s = 0; s < segmap.records.size(); ++s) {
        const auto& v = segmap.records[s].class_votes;
        std::size_t total = 0;
        for (auto n : v) total += n;
        if (total == 0) throw ComputeError("segment " + std::to_string(s) + " has no class votes");
        out.push_back(from_land_cover(majority_class(segmap.records[s])));
    }
    return out;
}

std::optional<double> default_tree_threshold(const SegmentMap& segmap, const std::vector<SegmentClass>& labels) {
    std::vector<double> stds;
    for (std::size_t s = 0; s < labels.size(); ++s) {
        if (labels[s] == SegmentClass::vegetation) stds.push_back(segmap.records[s].mp_std);
    }
    if (stds.size() < 2) return std::nullopt;
    const auto [lo, hi] = std::minmax_element(stds.begin(), stds.end());
    if (!(*hi > *lo)) return std::nullopt;
    return otsu_threshold(std::span<const double>(stds)).threshold;
}

std::vector<SegmentClass> tree_grass_split(const SegmentMap& segmap, std::vector<SegmentClass> labels,
                                           double t_tree) {
    if (labels.size() != segmap.records.size()) throw ComputeError("label count does not match the segment map");
    for (std::size_t s = 0; s < labels.size(); ++s) {
        if (labels[s] != SegmentClass::vegetation) continue;
        labels[s] = segmap.records[s].mp_std > t_tree ? SegmentClass::tree : SegmentClass::grass;
    }
    return labels;
}

BinaryMask building_intensity_map(const BinaryMask& impervious, const IntensityParams& params) {
    params.validate();
    const RasterGrid ratio = window_ratio(impervious, params.window);
    BinaryMask out(impervious.geometry);
    auto r = ratio.band(0);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = r[i] > params.ratio_threshold;
    return out;
}

ObjectKindMap object_kinds(const SegmentMap& segmap, const std::vector<SegmentClass>& labels,
                           const BinaryMask& high_intensity) {
    if (labels.size() != segmap.records.size()) throw ComputeError("label count does not match the segment map");
    if (!(high_intensity.geometry == segmap.geometry)) throw ComputeError("intensity map is not on the segment grid");
    ObjectKindMap out{segmap.geometry, std::vector<ObjectKind>(segmap.labels.size(), ObjectKind::none)};
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) {
        switch (labels[segmap.labels[p]]) {
            case SegmentClass::impervious:
                out.kinds[p] = high_intensity.bits[p] ? ObjectKind::high_intensity_building
                                                      : ObjectKind::low_intensity_building;
                break;
            case SegmentClass::tree: out.kinds[p] = ObjectKind::tree; break;
            default: break;
        }
    }
    return out;
}

BinaryMask potential_shadow_mask(const BinaryMask& object_mask, const ObjectKindMap& kinds,
                                 const ShadowGeometry& geom, const HeightRanges& ranges, double r) {
    ranges.validate();
    if (!(r > 0.0)) throw ComputeError("pixel size must be positive");
    const GridGeometry& g = object_mask.geometry;
    if (!(kinds.geometry == g) || kinds.kinds.size() != g.pixel_count()) {
        throw ComputeError("object kind map is not on the mask grid");
    }
    const auto [a, b] = shadow_offset_coefficients(geom);
    const double gap_free = r / std::max({std::abs(a), std::abs(b), 1.0});
    if (ranges.sweep_step > gap_free * (1.0 + 1e-12)) {
        throw ConfigError("sweep step leaves gaps between marks; use at most " + std::to_string(gap_free) + " m");
    }

    auto stepped = [&](const HeightRange& hr) {
        std::vector<double> hs;
        const double span = hr.max - hr.min;
        const long long n = span > 0.0 ? static_cast<long long>(std::ceil(span / ranges.sweep_step)) : 0;
        for (long long i = 0; i <= n; ++i) {
            hs.push_back(n ? hr.min + span * static_cast<double>(i) / static_cast<double>(n) : hr.min);
        }
        return hs;
    };
    // Every height where a rounded offset changes, plus one inside each piece
    // in between: the marks of the whole continuous range.
    auto exact = [&](const HeightRange& hr) {
        std::vector<double> cuts{hr.min, hr.max};
        for (double coef : {a, b}) {
            if (coef == 0.0) continue;
            const double lo = std::min(coef * hr.min, coef * hr.max) / r;
            const double hi = std::max(coef * hr.min, coef * hr.max) / r;
            for (auto m = static_cast<long long>(std::ceil(lo - 0.5)); m + 0.5 <= hi; ++m) {
                const double h = (static_cast<double>(m) + 0.5) * r / coef;
                if (h > hr.min && h < hr.max) cuts.push_back(h);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<double> hs;
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            hs.push_back(cuts[i]);
            if (i + 1 < cuts.size()) hs.push_back(0.5 * (cuts[i] + cuts[i + 1]));
        }
        return hs;
    };
    auto heights_for = [&](const HeightRange& hr) { return ranges.sweep_step > 0.0 ? stepped(hr) : exact(hr); };
    const std::vector<double> heights[4] = {{},
                                            heights_for(ranges.high_intensity_building),
                                            heights_for(ranges.low_intensity_building),
                                            heights_for(ranges.tree)};

    BinaryMask out(g);
    for (int row = 0; row < g.height; ++row) {
        for (int col = 0; col < g.width; ++col) {
            const std::size_t p = g.index(row, col);
            if (!object_mask.bits[p]) continue;
            const ObjectKind kind = kinds.kinds[p];
            if (kind == ObjectKind::none) throw ComputeError("object pixel without an object kind");
            for (double h : heights[static_cast<int>(kind)]) {
                const long long c = std::llround(col + a * h / r);
                const long long rr = std::llround(row + b * h / r);
                if (c < 0 || rr < 0 || c >= g.width || rr >= g.height) continue;
                out.bits[g.index(static_cast<int>(rr), static_cast<int>(c))] = 1;
            }
        }
    }
    return out;
}

SegmentMap segment_shadow_proportion(SegmentMap segmap, const BinaryMask& shadow_mask) {
    if (!(shadow_mask.geometry == segmap.geometry)) throw ComputeError("shadow mask is not on the segment grid");
    std::vector<std::size_t> hits(segmap.records.size(), 0);
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) hits[segmap.labels[p]] += shadow_mask.bits[p] != 0;
    for (std::size_t s = 0; s < hits.size(); ++s) {
        segmap.records[s].p_shadow =
            static_cast<double>(hits[s]) / static_cast<double>(segmap.records[s].pixel_count);
    }
    return segmap;
}

}  // namespace hydrofuse

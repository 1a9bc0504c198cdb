#pragma once

#include "hydrofuse/classifier.hpp"
#include "hydrofuse/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace hydrofuse {

struct KMeansOptions {
    int k = 8;
    int max_iterations = 100;
    double tolerance = 1e-6;  ///< on the largest centroid displacement
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<int> assignment;
    std::vector<std::vector<double>> centroids;
    /// Within-cluster sum of squares after every assignment step.
    std::vector<double> objective_history;
    int iterations = 0;
};

/// k-means++ (D^2-weighted) seeding. Returns fewer than k centres when the
/// data has fewer distinct points.
std::vector<std::vector<double>> kmeans_plus_plus_seeds(std::span<const double> points, int dims, int k,
                                                        std::uint64_t seed);

/// Lloyd iterations from the given centres. Empty clusters are moved to the
/// point farthest from its centre, or dropped when every point coincides with
/// a centre. Points are row-major, `dims` values each.
KMeansResult kmeans_from(std::span<const double> points, int dims, std::vector<std::vector<double>> centres,
                         const KMeansOptions& options);
KMeansResult kmeans(std::span<const double> points, int dims, const KMeansOptions& options);

/// PAN plus every profile band, each z-scored (constant features become 0).
/// Row-major, one row per pixel.
std::vector<double> standardized_features(const RasterGrid& pan, const RasterGrid& profiles);

/// 4-connected components of equal values. Ids follow raster-scan order of
/// each component's first pixel. Returns the component count.
int label_components(std::span<const int> values, int width, int height, std::vector<int>& labels);

struct SegmentRecord {
    std::size_t pixel_count = 0;
    double area_m2 = 0.0;
    std::size_t perimeter_px = 0;  ///< pixel edges shared with other segments or the image border
    double w = 0.0;                ///< hydraulic diameter 4 * area / perimeter, metres
    double p_pan = 0.0;
    double p_ms = 0.0;
    double p_lan = 0.0;
    double p_shadow = 0.0;
    std::array<std::size_t, kLandCoverCount> class_votes{};
    double mp_std = 0.0;
};

struct SegmentMap {
    GridGeometry geometry{};
    std::vector<int> labels;
    std::vector<SegmentRecord> records;

    int count() const { return static_cast<int>(records.size()); }
};

/// Pixel indices of every segment, grouped by id (CSR layout).
struct SegmentIndex {
    std::vector<std::size_t> offsets;  ///< count() + 1 entries
    std::vector<std::size_t> pixels;

    std::span<const std::size_t> of(int id) const {
        return {pixels.data() + offsets[id], offsets[id + 1] - offsets[id]};
    }
};
SegmentIndex build_segment_index(const SegmentMap& segmap);

/// Builds a segment map from per-pixel labels in [0, S) and fills the
/// geometric fields (pixel_count, area_m2, perimeter_px, w).
SegmentMap segments_from_labels(const GridGeometry& geometry, std::vector<int> labels);

SegmentMap kmeans_segment(const RasterGrid& pan, const RasterGrid& profiles, const KMeansOptions& options,
                          KMeansResult* clustering = nullptr);

/// Fills p_pan, p_ms, p_lan, class_votes and mp_std. Every raster must be on
/// the segment grid; probability fields are single-band water probabilities.
/// `t_pan` defaults to the Otsu threshold of the PAN image.
SegmentMap segment_stats(SegmentMap segmap, const RasterGrid& pan, const RasterGrid& profiles,
                         const RasterGrid& p_ms_field, const RasterGrid& p_lan_field,
                         const RasterGrid& ms_class_map, std::optional<double> t_pan = std::nullopt);

/// Share of a segment's pixels darker than t_pan.
double pan_water_probability(const SegmentMap& segmap, int segment, const RasterGrid& pan, double t_pan);
double default_pan_threshold(const RasterGrid& pan);

/// Majority MS class of a segment; ties go to the earlier class.
LandCover majority_class(const SegmentRecord& record);

/// `id, pixel_count, w, p_pan, p_ms, p_lan, p_shadow, majority_class`
void write_segment_table(const SegmentMap& segmap, const std::filesystem::path& path);

struct SegmentTableRow {
    int id = 0;
    std::size_t pixel_count = 0;
    double w = 0.0, p_pan = 0.0, p_ms = 0.0, p_lan = 0.0, p_shadow = 0.0;
    LandCover majority = LandCover::vegetation;
};
std::vector<SegmentTableRow> read_segment_table(const std::filesystem::path& path);

/// Segment labels as a float raster (exact for ids below 2^24).
RasterGrid labels_to_raster(const SegmentMap& segmap);
std::vector<int> labels_from_raster(const RasterGrid& raster);

}  // namespace hydrofuse

#pragma once

#include "hydrofuse/classifier.hpp"
#include "hydrofuse/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hydrofuse {

/// Requested samples per land-cover class, indexed by LandCover.
using StrataCounts = std::array<std::size_t, kLandCoverCount>;
inline constexpr StrataCounts kDefaultStrata{100, 100, 100, 300};

struct SamplePoint {
    int row = 0;
    int col = 0;
    LandCover stratum = LandCover::vegetation;
};

/// Draws the requested number of pixels per class of `class_map` (band 0
/// holds LandCover indices) without replacement. Strata are visited in class
/// order with one mt19937_64 stream; within a stratum a partial Fisher-Yates
/// shuffle over the raster-order pixel list picks the samples, which are then
/// listed in raster order.
std::vector<SamplePoint> stratified_sample(const RasterGrid& class_map, const StrataCounts& counts,
                                           std::uint64_t seed);

void write_samples(const std::vector<SamplePoint>& samples, const std::filesystem::path& path);
std::vector<SamplePoint> read_samples(const std::filesystem::path& path);

/// counts[predicted][reference], index 0 = non-water, 1 = water.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};

    std::uint64_t total() const;
    ConfusionMatrix transposed() const;
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const std::uint8_t> predicted_water,
                                 std::span<const std::uint8_t> reference_water);
/// Vegetation, soil and impervious all count as non-water.
ConfusionMatrix confusion_matrix(std::span<const LandCover> predicted, std::span<const LandCover> reference);

/// Percentages, unrounded.
struct AccuracyReport {
    double pa = 0.0;
    double ua = 0.0;
    double oa = 0.0;
};
AccuracyReport accuracy_metrics(const ConfusionMatrix& m);

/// 100 * num / den in tenths of a percent, rounded half up with integer
/// arithmetic so that printed values never depend on binary fractions.
std::int64_t percent_tenths(std::uint64_t num, std::uint64_t den);

struct RoundedReport {
    std::int64_t pa_tenths = 0;
    std::int64_t ua_tenths = 0;
    std::int64_t oa_tenths = 0;
};
RoundedReport rounded_metrics(const ConfusionMatrix& m);

std::string format_tenths(std::int64_t tenths);

/// Confusion table followed by a `pa=..,ua=..,oa=..` line.
std::string format_report(const ConfusionMatrix& m, const std::string& title);

}  // namespace hydrofuse

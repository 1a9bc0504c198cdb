#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace hydrofuse {

inline constexpr int kOtsuBins = 256;

struct OtsuResult {
    double threshold = 0.0;  ///< upper edge of the selected bin
    int bin = 0;             ///< last bin of the lower class
    double lo = 0.0;         ///< histogram range
    double hi = 0.0;
};

using OtsuHistogram = std::array<std::uint64_t, kOtsuBins>;

/// Bin that `v` falls in for a [lo, hi] histogram; hi maps to the last bin.
int otsu_bin(double v, double lo, double hi);

/// Maximises between-class variance over a 256-bin histogram of [min, max].
/// Non-finite values are ignored. Ties go to the smallest bin.
/// Throws ComputeError when fewer than two distinct values are present.
OtsuResult otsu_threshold(std::span<const double> values);
OtsuResult otsu_threshold(std::span<const float> values);
OtsuResult otsu_threshold(const OtsuHistogram& histogram, double lo, double hi);

}  // namespace hydrofuse

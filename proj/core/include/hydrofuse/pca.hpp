#pragma once

#include "hydrofuse/raster.hpp"

#include <span>
#include <vector>

namespace hydrofuse {

/// Principal axes of a multi-band raster. components[i] is a unit vector;
/// components are mutually orthogonal and sorted by decreasing variance.
struct PcaModel {
    std::vector<double> mean;
    std::vector<std::vector<double>> components;
    std::vector<double> explained_variance;

    int dimension() const { return static_cast<int>(mean.size()); }
    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> inverse(std::span<const double> scores) const;
};

/// Fits on every pixel whose bands are all valid. Each axis is signed so its
/// largest-magnitude coefficient is positive.
PcaModel pca_fit(const RasterGrid& raster);

/// Component-substitution pan-sharpening: MS is brought onto the PAN grid by
/// nearest neighbour, PC1 is replaced by PAN matched to PC1's mean and
/// standard deviation, and the result is transformed back.
/// When PC1 has zero variance only the mean is matched.
RasterGrid pca_fuse(const RasterGrid& ms, const RasterGrid& pan);

}  // namespace hydrofuse

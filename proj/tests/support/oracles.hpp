#pragma once

// Slow, direct reimplementations used only to cross-check the library.

#include "hydrofuse/raster.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace oracle {

/// Full joint table P(child, a, b) for a two-parent binary node whose CPD
/// gives the child `weight_b` of following parent b when the parents
/// disagree. Returns P(child = water).
double joint_table_marginal(double p_a, double p_b, double weight_b);

/// Independent evaluation of both fusion stages.
double fuse_pm(double p_pan, double p_ms, double w, double p_shadow, int n1, double r_ms);
double fuse_w(double p_pm, double p_lan, double w, int n2, double r_l);

/// Exhaustive nearest-centre search over all source pixels.
hydrofuse::RasterGrid nearest_resample(const hydrofuse::RasterGrid& src, const hydrofuse::GridGeometry& target);

/// Clipped-window mean by direct enumeration.
std::vector<double> window_mean(const hydrofuse::BinaryMask& mask, int window);

/// Between-class variance of every 256-bin split evaluated from raw values.
/// Returns the first maximising bin.
int otsu_best_bin(const std::vector<double>& values);

/// Grayscale erosion/dilation by direct neighbourhood loops. The element
/// covers rows r0..r1 and cols c0..c1 relative to the anchor.
std::vector<float> erode(const std::vector<float>& img, int w, int h, int r0, int r1, int c0, int c1);
std::vector<float> dilate(const std::vector<float>& img, int w, int h, int r0, int r1, int c0, int c1);

/// Exposed edge count of every label.
std::vector<std::size_t> perimeters(const std::vector<int>& labels, int w, int h, int count);

/// Union of shadow marks of every object pixel at the listed heights.
std::vector<std::uint8_t> shadow_marks(const std::vector<std::uint8_t>& objects, int w, int h, double a, double b,
                                       double r, const std::vector<double>& heights);

/// Eigenvalues of a symmetric row-major d*d matrix by cyclic Jacobi
/// rotations, sorted in decreasing order.
std::vector<double> symmetric_eigenvalues(std::vector<double> m, int d);

/// Posterior of class 0 for two isotropic Gaussians with a shared variance
/// and equal priors.
double isotropic_posterior(const std::vector<double>& x, const std::vector<double>& m0,
                           const std::vector<double>& m1, double variance);

}  // namespace oracle

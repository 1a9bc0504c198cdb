#include "hydrofuse/pca.hpp"

#include "hydrofuse/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hydrofuse {

namespace {

bool pixel_valid(const RasterGrid& r, std::size_t i) {
    if (!r.nodata()) return true;
    for (int b = 0; b < r.bands(); ++b) {
        if (r.is_nodata(r.band(b)[i])) return false;
    }
    return true;
}

}  // namespace

std::vector<double> PcaModel::forward(std::span<const double> x) const {
    const int d = dimension();
    std::vector<double> s(d, 0.0);
    for (int k = 0; k < d; ++k) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += components[k][j] * (x[j] - mean[j]);
        s[k] = acc;
    }
    return s;
}

std::vector<double> PcaModel::inverse(std::span<const double> scores) const {
    const int d = dimension();
    std::vector<double> x(mean);
    for (int k = 0; k < d; ++k) {
        for (int j = 0; j < d; ++j) x[j] += components[k][j] * scores[k];
    }
    return x;
}

PcaModel pca_fit(const RasterGrid& raster) {
    const int d = raster.bands();
    if (d < 2) throw ComputeError("PCA needs at least two bands");
    const std::size_t n_pix = raster.pixel_count();

    std::vector<double> mean(d, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_pix; ++i) {
        if (!pixel_valid(raster, i)) continue;
        for (int b = 0; b < d; ++b) mean[b] += raster.band(b)[i];
        ++n;
    }
    if (n < static_cast<std::size_t>(d)) throw ComputeError("PCA needs at least as many valid pixels as bands");
    for (auto& m : mean) m /= static_cast<double>(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> centred(d);
    for (std::size_t i = 0; i < n_pix; ++i) {
        if (!pixel_valid(raster, i)) continue;
        for (int b = 0; b < d; ++b) centred[b] = raster.band(b)[i] - mean[b];
        for (int a = 0; a < d; ++a) {
            for (int b = a; b < d; ++b) cov(a, b) += centred[a] * centred[b];
        }
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (int a = 0; a < d; ++a) {
        for (int b = a; b < d; ++b) {
            cov(a, b) /= denom;
            cov(b, a) = cov(a, b);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ComputeError("PCA eigendecomposition failed");

    PcaModel model;
    model.mean = mean;
    for (int k = d - 1; k >= 0; --k) {
        Eigen::VectorXd v = solver.eigenvectors().col(k);
        int lead = 0;
        for (int j = 1; j < d; ++j) {
            if (std::abs(v(j)) > std::abs(v(lead))) lead = j;
        }
        if (v(lead) < 0) v = -v;
        model.components.emplace_back(v.data(), v.data() + d);
        model.explained_variance.push_back(std::max(0.0, solver.eigenvalues()(k)));
    }
    return model;
}

RasterGrid pca_fuse(const RasterGrid& ms, const RasterGrid& pan) {
    if (pan.bands() != 1) throw ComputeError("PAN raster must have a single band");
    const RasterGrid up = resample_nearest(ms, pan.geometry());
    const PcaModel model = pca_fit(up);
    const int d = model.dimension();
    const auto& axis = model.components[0];
    const std::size_t n_pix = pan.pixel_count();

    std::vector<std::uint8_t> valid(n_pix, 0);
    std::vector<double> score(n_pix, 0.0);
    std::vector<double> x(d);
    double sum_s = 0.0, sum_p = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_pix; ++i) {
        if (!pixel_valid(up, i) || pan.is_nodata(pan.band(0)[i])) continue;
        valid[i] = 1;
        double s = 0.0;
        for (int b = 0; b < d; ++b) s += axis[b] * (up.band(b)[i] - model.mean[b]);
        score[i] = s;
        sum_s += s;
        sum_p += pan.band(0)[i];
        ++n;
    }
    if (n == 0) throw ComputeError("PCA fusion found no valid pixels");
    const double mean_s = sum_s / static_cast<double>(n);
    const double mean_p = sum_p / static_cast<double>(n);
    double var_s = 0.0, var_p = 0.0;
    for (std::size_t i = 0; i < n_pix; ++i) {
        if (!valid[i]) continue;
        var_s += (score[i] - mean_s) * (score[i] - mean_s);
        const double dp = pan.band(0)[i] - mean_p;
        var_p += dp * dp;
    }
    const double std_s = std::sqrt(var_s / static_cast<double>(n));
    const double std_p = std::sqrt(var_p / static_cast<double>(n));
    if (!(std_p > 0.0)) throw ComputeError("PAN has zero variance; cannot scale it to PC1");
    const double gain = std_s > 0.0 ? std_s / std_p : 1.0;

    const float nodata = up.nodata().value_or(kDefaultNodata);
    bool any_invalid = false;
    RasterGrid out(pan.geometry(), ms.band_names(), 0.0f);
    for (std::size_t i = 0; i < n_pix; ++i) {
        if (!valid[i]) {
            any_invalid = true;
            for (int b = 0; b < d; ++b) out.band(b)[i] = nodata;
            continue;
        }
        // Replacing PC1 and inverting with a full orthonormal basis equals
        // moving the pixel along the PC1 axis by the score change.
        const double replaced = (pan.band(0)[i] - mean_p) * gain + mean_s;
        const double delta = replaced - score[i];
        for (int b = 0; b < d; ++b) {
            out.band(b)[i] = static_cast<float>(up.band(b)[i] + delta * axis[b]);
        }
    }
    if (any_invalid) out.set_nodata(nodata);
    return out;
}

}  // namespace hydrofuse

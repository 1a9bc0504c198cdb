#include "hydrofuse/otsu.hpp"

#include "hydrofuse/errors.hpp"

#include <cmath>
#include <limits>

namespace hydrofuse {

int otsu_bin(double v, double lo, double hi) {
    const double f = (v - lo) / (hi - lo) * kOtsuBins;
    if (f <= 0.0) return 0;
    if (f >= kOtsuBins - 1) return kOtsuBins - 1;
    return static_cast<int>(f);
}

OtsuResult otsu_threshold(const OtsuHistogram& histogram, double lo, double hi) {
    if (!(hi > lo)) throw ComputeError("Otsu threshold needs at least two distinct values");
    double total = 0.0;
    double total_sum = 0.0;
    for (int i = 0; i < kOtsuBins; ++i) {
        total += static_cast<double>(histogram[i]);
        total_sum += static_cast<double>(histogram[i]) * i;
    }

    double best = -1.0;
    int best_bin = 0;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t < kOtsuBins - 1; ++t) {
        w0 += static_cast<double>(histogram[t]);
        sum0 += static_cast<double>(histogram[t]) * t;
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (total_sum - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_bin = t;
        }
    }
    if (best < 0.0) throw ComputeError("Otsu threshold needs at least two distinct values");

    OtsuResult r;
    r.bin = best_bin;
    r.lo = lo;
    r.hi = hi;
    r.threshold = lo + (best_bin + 1) * (hi - lo) / kOtsuBins;
    return r;
}

namespace {

template <class T>
OtsuResult otsu_impl(std::span<const T> values) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (T v : values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
    }
    if (!(hi > lo)) throw ComputeError("Otsu threshold needs at least two distinct values");
    OtsuHistogram h{};
    for (T v : values) {
        if (std::isfinite(v)) ++h[otsu_bin(v, lo, hi)];
    }
    return otsu_threshold(h, lo, hi);
}

}  // namespace

OtsuResult otsu_threshold(std::span<const double> values) { return otsu_impl(values); }
OtsuResult otsu_threshold(std::span<const float> values) { return otsu_impl(values); }

}  // namespace hydrofuse

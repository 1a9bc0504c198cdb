#include "hydrofuse/postclass.hpp"

#include "hydrofuse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hydrofuse {

namespace {

// Summed-area table with a zero first row and column.
template <typename T>
class Integral {
public:
    Integral(int w, int h) : w_(w), h_(h), s_(static_cast<std::size_t>(w + 1) * (h + 1), T{}) {}

    T& cell(int r, int c) { return s_[static_cast<std::size_t>(r) * (w_ + 1) + c]; }
    T cell(int r, int c) const { return s_[static_cast<std::size_t>(r) * (w_ + 1) + c]; }

    template <typename F>
    void build(F value) {
        for (int r = 0; r < h_; ++r) {
            T row{};
            for (int c = 0; c < w_; ++c) {
                row += value(r, c);
                cell(r + 1, c + 1) = cell(r, c + 1) + row;
            }
        }
    }

    // Inclusive rectangle clipped to the image.
    T sum(int r0, int c0, int r1, int c1) const {
        r0 = std::max(r0, 0);
        c0 = std::max(c0, 0);
        r1 = std::min(r1, h_ - 1);
        c1 = std::min(c1, w_ - 1);
        return cell(r1 + 1, c1 + 1) - cell(r0, c1 + 1) - cell(r1 + 1, c0) + cell(r0, c0);
    }

private:
    int w_, h_;
    std::vector<T> s_;
};

}  // namespace

void PostClassParams::validate() const {
    if (!(shadow_relabel_threshold > 0.0 && shadow_relabel_threshold < 1.0)) {
        throw ConfigError("shadow_relabel_threshold must be in (0, 1)");
    }
    if (!(water_fraction_threshold > 0.0 && water_fraction_threshold < 1.0)) {
        throw ConfigError("water_fraction_threshold must be in (0, 1)");
    }
    if (boundary_band_px < 1) throw ConfigError("boundary_band_px must be >= 1");
    if (unmix_window_px < 1 || unmix_window_px % 2 == 0) throw ConfigError("unmix_window_px must be odd and >= 1");
}

RelabelResult relabel_shadow_segments(std::span<const std::uint8_t> water, const SegmentMap& segmap,
                                      const PostClassParams& params) {
    params.validate();
    if (water.size() != segmap.records.size()) throw ComputeError("one water flag per segment expected");
    RelabelResult out{std::vector<std::uint8_t>(water.begin(), water.end()),
                      std::vector<std::uint8_t>(water.size(), 0)};
    for (std::size_t s = 0; s < water.size(); ++s) {
        if (water[s] && segmap.records[s].p_shadow > params.shadow_relabel_threshold) {
            out.water[s] = 0;
            out.shadow[s] = 1;
        }
    }
    return out;
}

BinaryMask boundary_band(const BinaryMask& water, int band_px) {
    if (band_px < 1) throw ComputeError("band width must be >= 1");
    const GridGeometry& g = water.geometry;
    Integral<std::int64_t> edges(g.width, g.height);
    edges.build([&](int r, int c) -> std::int64_t {
        const std::uint8_t v = water.at(r, c);
        return (r > 0 && water.at(r - 1, c) != v) || (r + 1 < g.height && water.at(r + 1, c) != v) ||
               (c > 0 && water.at(r, c - 1) != v) || (c + 1 < g.width && water.at(r, c + 1) != v);
    });
    // An edge pixel's centre is half a pixel from the edge itself.
    const int reach = band_px - 1;
    BinaryMask out(g);
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            out.at(r, c) = edges.sum(r - reach, c - reach, r + reach, c + reach) > 0;
        }
    }
    return out;
}

double water_fraction(std::span<const double> x, std::span<const double> land, std::span<const double> wtr) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = wtr[j] - land[j];
        num += (x[j] - land[j]) * d;
        den += d * d;
    }
    if (!(den > 0.0)) return -1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

BinaryMask boundary_unmix(const BinaryMask& water, const RasterGrid& ms, const PostClassParams& params) {
    params.validate();
    const GridGeometry& g = water.geometry;
    if (!(ms.geometry() == g)) throw ComputeError("MS raster is not on the water mask grid");
    const int nb = ms.bands();

    const BinaryMask band = boundary_band(water, params.boundary_band_px);
    std::vector<std::uint8_t> valid(g.pixel_count(), 1);
    for (int b = 0; b < nb; ++b) {
        auto d = ms.band(b);
        for (std::size_t p = 0; p < valid.size(); ++p) valid[p] &= !ms.is_nodata(d[p]);
    }
    auto interior = [&](int r, int c, std::uint8_t label) {
        const std::size_t p = g.index(r, c);
        return !band.bits[p] && valid[p] && water.bits[p] == label;
    };

    Integral<std::int64_t> n_water(g.width, g.height), n_land(g.width, g.height);
    n_water.build([&](int r, int c) -> std::int64_t { return interior(r, c, 1); });
    n_land.build([&](int r, int c) -> std::int64_t { return interior(r, c, 0); });
    std::vector<Integral<double>> s_water, s_land;
    for (int b = 0; b < nb; ++b) {
        s_water.emplace_back(g.width, g.height);
        s_land.emplace_back(g.width, g.height);
        s_water.back().build([&](int r, int c) { return interior(r, c, 1) ? double(ms.at(b, r, c)) : 0.0; });
        s_land.back().build([&](int r, int c) { return interior(r, c, 0) ? double(ms.at(b, r, c)) : 0.0; });
    }

    const int half = params.unmix_window_px / 2;
    BinaryMask out = water;
    std::vector<double> x(nb), wm(nb), lm(nb);
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            const std::size_t p = g.index(r, c);
            if (!band.bits[p] || !valid[p]) continue;
            const int r0 = r - half, c0 = c - half, r1 = r + half, c1 = c + half;
            const auto nw = n_water.sum(r0, c0, r1, c1);
            const auto nl = n_land.sum(r0, c0, r1, c1);
            if (nw == 0 || nl == 0) continue;
            for (int b = 0; b < nb; ++b) {
                x[b] = ms.at(b, r, c);
                wm[b] = s_water[b].sum(r0, c0, r1, c1) / static_cast<double>(nw);
                lm[b] = s_land[b].sum(r0, c0, r1, c1) / static_cast<double>(nl);
            }
            const double f = water_fraction(x, lm, wm);
            if (f < 0.0) continue;
            out.bits[p] = f > params.water_fraction_threshold;
        }
    }
    return out;
}

}  // namespace hydrofuse

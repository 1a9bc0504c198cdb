#include "hydrofuse/water_index.hpp"

#include "hydrofuse/errors.hpp"

#include <algorithm>

namespace hydrofuse {

int water_index_flag(std::span<const float> visible, std::span<const float> swir) {
    if (visible.empty() || swir.empty()) throw ComputeError("water index needs visible and SWIR bands");
    const float vis = *std::max_element(visible.begin(), visible.end());
    const float sw = *std::max_element(swir.begin(), swir.end());
    return vis > sw ? 1 : 0;
}

RasterGrid landsat_water_index(std::span<const RasterGrid> stack, const WaterIndexBands& bands) {
    if (stack.empty()) throw ComputeError("water index needs at least one date");
    if (bands.visible.empty() || bands.swir.empty()) throw ComputeError("water index needs visible and SWIR bands");
    const GridGeometry& g = stack.front().geometry();

    struct DateBands {
        std::vector<int> vis, sw;
    };
    std::vector<DateBands> idx;
    for (const auto& r : stack) {
        if (!(r.geometry() == g)) throw ComputeError("water index dates must share one grid");
        DateBands db;
        for (const auto& n : bands.visible) db.vis.push_back(r.band_index(n));
        for (const auto& n : bands.swir) db.sw.push_back(r.band_index(n));
        idx.push_back(std::move(db));
    }

    RasterGrid out(g, {"p_water"}, 0.0f);
    std::vector<float> vis, sw;
    bool any_nodata = false;
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
        int flagged = 0;
        int dates = 0;
        for (std::size_t t = 0; t < stack.size(); ++t) {
            const RasterGrid& r = stack[t];
            vis.clear();
            sw.clear();
            bool ok = true;
            for (int b : idx[t].vis) {
                vis.push_back(r.band(b)[i]);
                ok &= !r.is_nodata(vis.back());
            }
            for (int b : idx[t].sw) {
                sw.push_back(r.band(b)[i]);
                ok &= !r.is_nodata(sw.back());
            }
            if (!ok) continue;
            flagged += water_index_flag(vis, sw);
            ++dates;
        }
        if (dates == 0) {
            any_nodata = true;
            out.band(0)[i] = kDefaultNodata;
        } else {
            out.band(0)[i] = static_cast<float>(static_cast<double>(flagged) / dates);
        }
    }
    if (any_nodata) out.set_nodata(kDefaultNodata);
    return out;
}

}  // namespace hydrofuse

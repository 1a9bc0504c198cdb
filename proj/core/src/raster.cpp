#include "hydrofuse/raster.hpp"

#include "hydrofuse/errors.hpp"

#include <cmath>

namespace hydrofuse {

void GridGeometry::validate() const {
    if (width < 1 || height < 1) {
        throw ComputeError("grid must be at least 1x1, got " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) {
        throw ComputeError("pixel size must be positive and finite");
    }
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
        throw ComputeError("grid origin must be finite");
    }
}

RasterGrid::RasterGrid(GridGeometry geometry, std::vector<std::string> band_names, float fill,
                       std::optional<float> nodata)
    : geometry_(geometry), band_names_(std::move(band_names)), nodata_(nodata) {
    geometry_.validate();
    if (band_names_.empty()) throw ComputeError("raster needs at least one band");
    data_.assign(geometry_.pixel_count() * band_names_.size(), fill);
}

void RasterGrid::set_band_names(std::vector<std::string> names) {
    if (names.size() != band_names_.size()) throw ComputeError("band name count mismatch");
    band_names_ = std::move(names);
}

int RasterGrid::find_band(std::string_view name) const {
    for (std::size_t i = 0; i < band_names_.size(); ++i) {
        if (band_names_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int RasterGrid::band_index(std::string_view name) const {
    const int i = find_band(name);
    if (i < 0) throw ComputeError("raster has no band named '" + std::string(name) + "'");
    return i;
}

bool RasterGrid::is_nodata(float v) const {
    if (!nodata_) return false;
    if (std::isnan(*nodata_)) return std::isnan(v);
    return v == *nodata_;
}

void RasterGrid::validate() const {
    geometry_.validate();
    if (band_names_.empty()) throw ComputeError("raster needs at least one band");
    if (data_.size() != pixel_count() * band_names_.size()) {
        throw ComputeError("raster data length does not match width*height*bands");
    }
    for (float v : data_) {
        if (!std::isfinite(v) && !is_nodata(v)) {
            throw ComputeError("raster contains a non-finite sample that is not nodata");
        }
    }
}

RasterGrid RasterGrid::select_bands(std::span<const int> indices) const {
    std::vector<std::string> names;
    for (int i : indices) {
        if (i < 0 || i >= bands()) throw ComputeError("band index out of range");
        names.push_back(band_names_[i]);
    }
    RasterGrid out(geometry_, names, 0.0f, nodata_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        auto src = band(indices[k]);
        auto dst = out.band(static_cast<int>(k));
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

RasterGrid mask_to_raster(const BinaryMask& mask, std::string band_name) {
    RasterGrid out(mask.geometry, {std::move(band_name)});
    auto d = out.band(0);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) d[i] = mask.bits[i] ? 1.0f : 0.0f;
    return out;
}

BinaryMask raster_to_mask(const RasterGrid& raster, int band) {
    BinaryMask mask(raster.geometry());
    auto d = raster.band(band);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 1.0f) {
            mask.bits[i] = 1;
        } else if (d[i] != 0.0f) {
            throw ComputeError("mask raster holds a value other than 0 or 1");
        }
    }
    return mask;
}

RasterGrid resample_nearest(const RasterGrid& src, const GridGeometry& target) {
    target.validate();
    const GridGeometry& sg = src.geometry();

    std::vector<int> src_col(target.width);
    std::vector<int> src_row(target.height);
    bool any_outside = false;
    for (int c = 0; c < target.width; ++c) {
        const double fc = sg.col_of(target.center_x(c));
        src_col[c] = (fc >= 0.0 && fc < sg.width) ? static_cast<int>(std::floor(fc)) : -1;
        any_outside |= src_col[c] < 0;
    }
    for (int r = 0; r < target.height; ++r) {
        const double fr = sg.row_of(target.center_y(r));
        src_row[r] = (fr >= 0.0 && fr < sg.height) ? static_cast<int>(std::floor(fr)) : -1;
        any_outside |= src_row[r] < 0;
    }

    std::optional<float> nodata = src.nodata();
    if (any_outside && !nodata) nodata = kDefaultNodata;

    RasterGrid out(target, src.band_names(), 0.0f, nodata);
    for (int b = 0; b < src.bands(); ++b) {
        for (int r = 0; r < target.height; ++r) {
            for (int c = 0; c < target.width; ++c) {
                out.at(b, r, c) = (src_row[r] < 0 || src_col[c] < 0)
                                      ? *nodata
                                      : src.at(b, src_row[r], src_col[c]);
            }
        }
    }
    return out;
}

namespace {

// (h+1) x (w+1) summed-area table.
std::vector<std::int64_t> integral(const GridGeometry& g, const std::vector<std::uint8_t>& v) {
    const int w = g.width;
    const int h = g.height;
    std::vector<std::int64_t> s(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int r = 0; r < h; ++r) {
        std::int64_t row_sum = 0;
        for (int c = 0; c < w; ++c) {
            row_sum += v[g.index(r, c)];
            s[static_cast<std::size_t>(r + 1) * (w + 1) + c + 1] =
                s[static_cast<std::size_t>(r) * (w + 1) + c + 1] + row_sum;
        }
    }
    return s;
}

std::int64_t box_sum(const std::vector<std::int64_t>& s, int w, int r0, int c0, int r1, int c1) {
    const auto W = static_cast<std::size_t>(w + 1);
    return s[(r1 + 1) * W + c1 + 1] - s[r0 * W + c1 + 1] - s[(r1 + 1) * W + c0] + s[r0 * W + c0];
}

}  // namespace

RasterGrid window_ratio(const BinaryMask& mask, int window, const BinaryMask* valid) {
    if (window < 1 || window % 2 == 0) throw ComputeError("window must be odd and >= 1");
    const GridGeometry& g = mask.geometry;
    if (valid && !(valid->geometry == g)) throw ComputeError("validity mask grid mismatch");

    std::vector<std::uint8_t> numer = mask.bits;
    if (valid) {
        for (std::size_t i = 0; i < numer.size(); ++i) numer[i] = numer[i] && valid->bits[i];
    }
    const auto sn = integral(g, numer);
    const auto sd = valid ? integral(g, valid->bits) : std::vector<std::int64_t>{};

    const int half = window / 2;
    RasterGrid out(g, {"ratio"}, 0.0f, valid ? std::optional<float>(kDefaultNodata) : std::nullopt);
    auto d = out.band(0);
    for (int r = 0; r < g.height; ++r) {
        const int r0 = std::max(0, r - half);
        const int r1 = std::min(g.height - 1, r + half);
        for (int c = 0; c < g.width; ++c) {
            const int c0 = std::max(0, c - half);
            const int c1 = std::min(g.width - 1, c + half);
            const std::int64_t n = box_sum(sn, g.width, r0, c0, r1, c1);
            const std::int64_t den = valid ? box_sum(sd, g.width, r0, c0, r1, c1)
                                           : static_cast<std::int64_t>(r1 - r0 + 1) * (c1 - c0 + 1);
            d[g.index(r, c)] =
                den > 0 ? static_cast<float>(static_cast<double>(n) / static_cast<double>(den)) : kDefaultNodata;
        }
    }
    return out;
}

}  // namespace hydrofuse

#include "hydrofuse/morphology.hpp"

#include "hydrofuse/errors.hpp"

#include <algorithm>

namespace hydrofuse {

namespace {

StructuringElement::Span axis_span(int size) { return {-((size - 1) / 2), size / 2}; }

void check_single_band(const RasterGrid& image) {
    if (image.bands() != 1) throw ComputeError("morphology expects a single-band image");
}

void check_se(const StructuringElement& se) {
    if (se.size < 2) throw ComputeError("structuring element size must be >= 2");
}

// Applies min (erode) or max (dilate) over [lo, hi] along rows then columns.
template <class Op>
std::vector<float> rect_filter(std::span<const float> src, int w, int h, StructuringElement::Span rs,
                               StructuringElement::Span cs, Op op) {
    std::vector<float> tmp(src.size());
    for (int r = 0; r < h; ++r) {
        const float* row = src.data() + static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) {
            float v = row[std::clamp(c + cs.lo, 0, w - 1)];
            for (int d = cs.lo + 1; d <= cs.hi; ++d) v = op(v, row[std::clamp(c + d, 0, w - 1)]);
            tmp[static_cast<std::size_t>(r) * w + c] = v;
        }
    }
    std::vector<float> out(src.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            float v = tmp[static_cast<std::size_t>(std::clamp(r + rs.lo, 0, h - 1)) * w + c];
            for (int d = rs.lo + 1; d <= rs.hi; ++d) {
                v = op(v, tmp[static_cast<std::size_t>(std::clamp(r + d, 0, h - 1)) * w + c]);
            }
            out[static_cast<std::size_t>(r) * w + c] = v;
        }
    }
    return out;
}

RasterGrid wrap(const RasterGrid& like, std::vector<float> values) {
    RasterGrid out(like.geometry(), like.band_names(), 0.0f, like.nodata());
    std::copy(values.begin(), values.end(), out.band(0).begin());
    return out;
}

std::vector<float> erode_values(std::span<const float> f, int w, int h, const StructuringElement& se) {
    return rect_filter(f, w, h, se.rows(), se.cols(), [](float a, float b) { return std::min(a, b); });
}

std::vector<float> dilate_values(std::span<const float> f, int w, int h, const StructuringElement& se) {
    const auto rs = se.rows();
    const auto cs = se.cols();
    return rect_filter(f, w, h, {-rs.hi, -rs.lo}, {-cs.hi, -cs.lo}, [](float a, float b) { return std::max(a, b); });
}

}  // namespace

StructuringElement::Span StructuringElement::rows() const {
    return shape == SeShape::horizontal_line ? Span{0, 0} : axis_span(size);
}

StructuringElement::Span StructuringElement::cols() const {
    return shape == SeShape::vertical_line ? Span{0, 0} : axis_span(size);
}

std::string StructuringElement::name() const {
    switch (shape) {
        case SeShape::horizontal_line: return "hline" + std::to_string(size);
        case SeShape::vertical_line: return "vline" + std::to_string(size);
        case SeShape::square: return "square" + std::to_string(size);
    }
    return "se";
}

RasterGrid erode(const RasterGrid& image, const StructuringElement& se) {
    check_single_band(image);
    check_se(se);
    return wrap(image, erode_values(image.band(0), image.width(), image.height(), se));
}

RasterGrid dilate(const RasterGrid& image, const StructuringElement& se) {
    check_single_band(image);
    check_se(se);
    return wrap(image, dilate_values(image.band(0), image.width(), image.height(), se));
}

RasterGrid opening(const RasterGrid& image, const StructuringElement& se) {
    check_single_band(image);
    check_se(se);
    const int w = image.width(), h = image.height();
    return wrap(image, dilate_values(erode_values(image.band(0), w, h, se), w, h, se));
}

RasterGrid closing(const RasterGrid& image, const StructuringElement& se) {
    check_single_band(image);
    check_se(se);
    const int w = image.width(), h = image.height();
    return wrap(image, erode_values(dilate_values(image.band(0), w, h, se), w, h, se));
}

std::vector<StructuringElement> profile_elements() {
    return {{SeShape::horizontal_line, 4},
            {SeShape::vertical_line, 4},
            {SeShape::square, 4},
            {SeShape::square, 6},
            {SeShape::square, 8}};
}

RasterGrid morphological_profiles(const RasterGrid& pan) {
    check_single_band(pan);
    const auto elements = profile_elements();
    std::vector<std::string> names;
    for (const auto& se : elements) {
        names.push_back("open_" + se.name());
        names.push_back("close_" + se.name());
    }
    RasterGrid out(pan.geometry(), names, 0.0f);
    const int w = pan.width(), h = pan.height();
    int band = 0;
    for (const auto& se : elements) {
        const auto open = dilate_values(erode_values(pan.band(0), w, h, se), w, h, se);
        const auto close = erode_values(dilate_values(pan.band(0), w, h, se), w, h, se);
        std::copy(open.begin(), open.end(), out.band(band++).begin());
        std::copy(close.begin(), close.end(), out.band(band++).begin());
    }
    return out;
}

}  // namespace hydrofuse

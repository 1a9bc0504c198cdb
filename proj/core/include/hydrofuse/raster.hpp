#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hydrofuse {

/// North-up grid with square pixels. Columns grow eastward (+x), rows grow
/// southward (-y); (origin_x, origin_y) is the upper-left corner of pixel (0, 0).
struct GridGeometry {
    int width = 0;
    int height = 0;
    double pixel_size = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;

    void validate() const;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
    bool contains(int row, int col) const { return row >= 0 && row < height && col >= 0 && col < width; }

    double center_x(int col) const { return origin_x + (col + 0.5) * pixel_size; }
    double center_y(int row) const { return origin_y - (row + 0.5) * pixel_size; }

    // Fractional pixel coordinates: pixel (r, c) spans [c, c+1) x [r, r+1).
    double col_of(double x) const { return (x - origin_x) / pixel_size; }
    double row_of(double y) const { return (origin_y - y) / pixel_size; }

    double extent_x() const { return width * pixel_size; }
    double extent_y() const { return height * pixel_size; }

    bool operator==(const GridGeometry&) const = default;
};

/// Band-sequential, row-major float32 raster.
class RasterGrid {
public:
    RasterGrid() = default;
    RasterGrid(GridGeometry geometry, std::vector<std::string> band_names, float fill = 0.0f,
               std::optional<float> nodata = std::nullopt);

    const GridGeometry& geometry() const { return geometry_; }
    int width() const { return geometry_.width; }
    int height() const { return geometry_.height; }
    int bands() const { return static_cast<int>(band_names_.size()); }
    std::size_t pixel_count() const { return geometry_.pixel_count(); }

    const std::vector<std::string>& band_names() const { return band_names_; }
    void set_band_names(std::vector<std::string> names);
    /// Index of the named band, or -1.
    int find_band(std::string_view name) const;
    /// Index of the named band; throws ComputeError when absent.
    int band_index(std::string_view name) const;

    std::optional<float> nodata() const { return nodata_; }
    void set_nodata(std::optional<float> nodata) { nodata_ = nodata; }
    bool is_nodata(float v) const;

    float at(int band, int row, int col) const { return data_[offset(band, row, col)]; }
    float& at(int band, int row, int col) { return data_[offset(band, row, col)]; }

    std::span<const float> band(int b) const { return {data_.data() + b * pixel_count(), pixel_count()}; }
    std::span<float> band(int b) { return {data_.data() + b * pixel_count(), pixel_count()}; }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    /// Checks geometry, data length and sample finiteness.
    void validate() const;

    /// Copies the listed bands into a new raster.
    RasterGrid select_bands(std::span<const int> indices) const;

private:
    std::size_t offset(int band, int row, int col) const {
        return static_cast<std::size_t>(band) * pixel_count() + geometry_.index(row, col);
    }

    GridGeometry geometry_{};
    std::vector<std::string> band_names_;
    std::optional<float> nodata_;
    std::vector<float> data_;
};

struct BinaryMask {
    GridGeometry geometry{};
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    explicit BinaryMask(GridGeometry g, std::uint8_t fill = 0) : geometry(g), bits(g.pixel_count(), fill) {}

    std::uint8_t at(int row, int col) const { return bits[geometry.index(row, col)]; }
    std::uint8_t& at(int row, int col) { return bits[geometry.index(row, col)]; }
    std::size_t count() const;
};

RasterGrid mask_to_raster(const BinaryMask& mask, std::string band_name = "mask");
/// Accepts only 0.0/1.0 samples.
BinaryMask raster_to_mask(const RasterGrid& raster, int band = 0);

/// Nearest-centre resampling onto `target`; target pixels outside the source
/// extent receive nodata (the source's, or kDefaultNodata when it has none).
RasterGrid resample_nearest(const RasterGrid& src, const GridGeometry& target);

inline constexpr float kDefaultNodata = -9999.0f;

/// Mean of mask values over a centred odd window clipped at the borders.
/// Pixels with valid == 0 are excluded from numerator and denominator; a
/// window without any valid pixel yields nodata.
RasterGrid window_ratio(const BinaryMask& mask, int window, const BinaryMask* valid = nullptr);

}  // namespace hydrofuse

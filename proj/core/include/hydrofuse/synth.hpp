#pragma once

#include "hydrofuse/classifier.hpp"
#include "hydrofuse/raster.hpp"
#include "hydrofuse/shadow.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hydrofuse {

/// Surface classes rendered by the generator.
enum class SceneClass : std::uint8_t { grass = 0, tree, soil, impervious, building, water, dark_field };
inline constexpr int kSceneClassCount = 7;
std::string_view to_string(SceneClass c);
std::optional<SceneClass> parse_scene_class(std::string_view s);
bool is_elevated(SceneClass c);
/// Training class of a surface, or nothing for the dark film.
std::optional<LandCover> land_cover_of(SceneClass c);

struct BandSpectrum {
    std::vector<double> mean;
    std::vector<double> sigma;
};

struct ClassSpectra {
    BandSpectrum pan;      ///< 1 band
    BandSpectrum ms;       ///< blue, green, red, nir
    BandSpectrum landsat;  ///< coastal, blue, green, red, nir, swir1, swir2
};

using SpectralLibrary = std::array<ClassSpectra, kSceneClassCount>;
SpectralLibrary default_spectral_library();

inline const std::vector<std::string> kMsBands{"blue", "green", "red", "nir"};
inline const std::vector<std::string> kLandsatBands{"coastal", "blue", "green", "red", "nir", "swir1", "swir2"};

struct Point2 {
    double x = 0.0;  ///< metres east of the scene's left edge
    double y = 0.0;  ///< metres south of the scene's top edge
};

enum class FeatureKind { cover, lake, river, building, tree, dark_field };

/// One drawn feature. Later features paint over earlier ones.
struct Feature {
    FeatureKind kind = FeatureKind::cover;
    SceneClass cover_class = SceneClass::grass;  ///< cover only
    std::vector<Point2> points;  ///< polygon, polyline, rectangle corners, or the disk centre
    double width = 0.0;          ///< river only
    double height = 0.0;         ///< building and tree
    double radius = 0.0;         ///< tree only
};

struct SceneSpec {
    double extent_x = 480.0;
    double extent_y = 480.0;
    double origin_x = 0.0;  ///< map coordinates of the upper-left corner
    double origin_y = 480.0;
    double pan_pixel = 0.8;
    double ms_pixel = 3.2;
    double landsat_pixel = 30.0;
    double supersample = 0.1;
    double shadow_factor = 0.35;
    SceneClass background = SceneClass::grass;
    ShadowGeometry sun{};
    std::vector<int> landsat_doy{106, 122, 138, 186, 234, 250, 266};
    std::size_t training_per_class = 40;
    std::uint64_t seed = 1;
    SpectralLibrary library = default_spectral_library();
    std::vector<Feature> features;

    /// Throws ConfigError on any inconsistency.
    void validate() const;

    GridGeometry pan_grid() const;
    GridGeometry ms_grid() const;
    GridGeometry landsat_grid() const;
};

/// Scene description text. Blank lines and lines starting with '#' are
/// ignored. Settings are `key = value`; every other line is a statement:
///
///   cover <grass|soil|impervious> x1 y1 x2 y2 x3 y3 ...   polygon
///   lake x1 y1 x2 y2 x3 y3 ...                              polygon
///   dark_field x1 y1 x2 y2 x3 y3 ...                        polygon
///   river <width> x1 y1 x2 y2 ...                           polyline of butt-ended runs
///   building <height> x0 y0 x1 y1                           axis-aligned rectangle
///   tree <height> cx cy radius                              disk
///   spectrum <class> <pan|ms|landsat> m1 .. mn sigma s1 .. sn
///
/// Coordinates are metres from the upper-left corner, x to the east and y
/// to the south.
SceneSpec parse_scene_spec(std::string_view text, const std::string& origin = "<scene>");
SceneSpec read_scene_spec(const std::filesystem::path& path);

struct TrainingPoint {
    LandCover label = LandCover::vegetation;
    double x = 0.0;  ///< map coordinates
    double y = 0.0;
};

struct SceneBundle {
    RasterGrid pan;
    RasterGrid ms;
    std::vector<RasterGrid> landsat;
    std::vector<int> landsat_doy;
    BinaryMask truth;         ///< water by supersample majority, PAN grid
    RasterGrid class_truth;   ///< majority SceneClass, PAN grid
    BinaryMask shadow_truth;  ///< majority-shadowed PAN pixels
    RasterGrid ms_water_fraction;  ///< exact supersample water share per MS pixel
    std::vector<TrainingPoint> training;
};

SceneBundle generate_scene(const SceneSpec& spec);

/// PAN pixels touched by the centre line of each river.
BinaryMask river_axis_mask(const SceneSpec& spec, const GridGeometry& grid);

void write_training_points(const std::vector<TrainingPoint>& points, const std::filesystem::path& path);
std::vector<TrainingPoint> read_training_points(const std::filesystem::path& path);

/// Writes pan, ms, landsat_<doy>, truth_water, truth_class, truth_shadow,
/// training_points.txt and landsat_dates.txt into `dir`.
void write_bundle(const SceneBundle& bundle, const std::filesystem::path& dir);

}  // namespace hydrofuse

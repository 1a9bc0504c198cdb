#pragma once

#include "hydrofuse/eval.hpp"
#include "hydrofuse/pgm.hpp"
#include "hydrofuse/postclass.hpp"
#include "hydrofuse/shadow.hpp"
#include "hydrofuse/water_index.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hydrofuse {

/// Every tunable of the pipeline. Relative paths are resolved against the
/// directory of the configuration file.
struct PipelineConfig {
    std::filesystem::path scene_spec;
    /// Where the input bundle lives; empty means the output directory.
    std::filesystem::path input_dir;
    std::uint64_t seed = 1;

    WaterIndexBands water_bands{};
    double covariance_regularization = kCovarianceRegularization;

    int kmeans_k = 8;
    int kmeans_max_iterations = 100;
    double kmeans_tolerance = 1e-6;
    std::optional<double> t_pan;  ///< Otsu when unset

    ShadowGeometry sun{};
    HeightRanges heights{};
    IntensityParams intensity{};
    std::optional<double> t_tree;  ///< Otsu when unset

    FusionParams fusion{};
    PostClassParams postclass{};

    StrataCounts strata = kDefaultStrata;
    std::string strata_map = "pca_class";
    std::vector<std::string> predictions{"pca_water", "pan_water", "ms_water", "landsat_water", "pgm_water",
                                         "post_water"};

    void validate() const;
};

/// Parses `key = value` text; unknown or repeated keys are rejected.
PipelineConfig parse_config(std::string_view text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// The configuration written back in canonical form.
std::string format_config(const PipelineConfig& cfg);

}  // namespace hydrofuse

#include "hydrofuse/config.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace hydrofuse {

namespace {

std::string auto_or(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
}

}  // namespace

void PipelineConfig::validate() const {
    if (water_bands.visible.empty() || water_bands.swir.empty()) {
        throw ConfigError("visible_bands and swir_bands must not be empty");
    }
    if (!(covariance_regularization > 0.0)) throw ConfigError("covariance_regularization must be positive");
    if (kmeans_k < 1) throw ConfigError("kmeans_k must be >= 1");
    if (kmeans_max_iterations < 1) throw ConfigError("kmeans_max_iterations must be >= 1");
    if (!(kmeans_tolerance >= 0.0)) throw ConfigError("kmeans_tolerance must be >= 0");
    sun.validate();
    heights.validate();
    intensity.validate();
    fusion.validate();
    postclass.validate();
    if (strata_map.empty()) throw ConfigError("strata_map must name a class raster");
    if (predictions.empty()) throw ConfigError("predictions must list at least one water mask");
}

PipelineConfig parse_config(std::string_view text, const std::string& origin, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    auto path_of = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    auto num = [](const std::string& key) {
        return [key](const std::string& v) { return parse_double(v, key); };
    };
    auto integer = [](const std::string& key) {
        return [key](const std::string& v) { return parse_int(v, key); };
    };
    auto optional_num = [](const std::string& key) {
        return [key](const std::string& v) -> std::optional<double> {
            if (v == "auto") return std::nullopt;
            return parse_double(v, key);
        };
    };
    auto count = [](const std::string& key) {
        return [key](const std::string& v) {
            const long long n = parse_int(v, key);
            if (n < 0) throw ConfigError(key + " must be >= 0");
            return static_cast<std::size_t>(n);
        };
    };

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"scene_spec", [&](const std::string& v) { cfg.scene_spec = path_of(v); }},
        {"input_dir", [&](const std::string& v) { cfg.input_dir = path_of(v); }},
        {"seed",
         [&](const std::string& v) {
             const long long s = parse_int(v, "seed");
             if (s < 0) throw ConfigError("seed must be non-negative");
             cfg.seed = static_cast<std::uint64_t>(s);
         }},
        {"visible_bands", [&](const std::string& v) { cfg.water_bands.visible = split(v, ','); }},
        {"swir_bands", [&](const std::string& v) { cfg.water_bands.swir = split(v, ','); }},
        {"covariance_regularization", [&](const std::string& v) { cfg.covariance_regularization = num("covariance_regularization")(v); }},
        {"kmeans_k", [&](const std::string& v) { cfg.kmeans_k = static_cast<int>(integer("kmeans_k")(v)); }},
        {"kmeans_max_iterations",
         [&](const std::string& v) { cfg.kmeans_max_iterations = static_cast<int>(integer("kmeans_max_iterations")(v)); }},
        {"kmeans_tolerance", [&](const std::string& v) { cfg.kmeans_tolerance = num("kmeans_tolerance")(v); }},
        {"t_pan", [&](const std::string& v) { cfg.t_pan = optional_num("t_pan")(v); }},
        {"sun_elevation_deg", [&](const std::string& v) { cfg.sun.sun_elevation_deg = num("sun_elevation_deg")(v); }},
        {"sun_azimuth_deg", [&](const std::string& v) { cfg.sun.sun_azimuth_deg = num("sun_azimuth_deg")(v); }},
        {"view_elevation_deg", [&](const std::string& v) { cfg.sun.view_elevation_deg = num("view_elevation_deg")(v); }},
        {"view_azimuth_deg", [&](const std::string& v) { cfg.sun.view_azimuth_deg = num("view_azimuth_deg")(v); }},
        {"sweep_step_m",
         [&](const std::string& v) {
             const auto s = optional_num("sweep_step_m")(v);
             cfg.heights.sweep_step = s ? *s : 0.0;
             if (s && !(*s > 0.0)) throw ConfigError("sweep_step_m must be positive or auto");
         }},
        {"high_building_height_min_m", [&](const std::string& v) { cfg.heights.high_intensity_building.min = num("high_building_height_min_m")(v); }},
        {"high_building_height_max_m", [&](const std::string& v) { cfg.heights.high_intensity_building.max = num("high_building_height_max_m")(v); }},
        {"low_building_height_min_m", [&](const std::string& v) { cfg.heights.low_intensity_building.min = num("low_building_height_min_m")(v); }},
        {"low_building_height_max_m", [&](const std::string& v) { cfg.heights.low_intensity_building.max = num("low_building_height_max_m")(v); }},
        {"tree_height_min_m", [&](const std::string& v) { cfg.heights.tree.min = num("tree_height_min_m")(v); }},
        {"tree_height_max_m", [&](const std::string& v) { cfg.heights.tree.max = num("tree_height_max_m")(v); }},
        {"intensity_window", [&](const std::string& v) { cfg.intensity.window = static_cast<int>(integer("intensity_window")(v)); }},
        {"intensity_ratio", [&](const std::string& v) { cfg.intensity.ratio_threshold = num("intensity_ratio")(v); }},
        {"t_tree", [&](const std::string& v) { cfg.t_tree = optional_num("t_tree")(v); }},
        {"n1", [&](const std::string& v) { cfg.fusion.n1 = static_cast<int>(integer("n1")(v)); }},
        {"n2", [&](const std::string& v) { cfg.fusion.n2 = static_cast<int>(integer("n2")(v)); }},
        {"r_ms", [&](const std::string& v) { cfg.fusion.r_ms = num("r_ms")(v); }},
        {"r_l", [&](const std::string& v) { cfg.fusion.r_l = num("r_l")(v); }},
        {"decision_threshold", [&](const std::string& v) { cfg.fusion.decision_threshold = num("decision_threshold")(v); }},
        {"shadow_relabel_threshold", [&](const std::string& v) { cfg.postclass.shadow_relabel_threshold = num("shadow_relabel_threshold")(v); }},
        {"boundary_band_px", [&](const std::string& v) { cfg.postclass.boundary_band_px = static_cast<int>(integer("boundary_band_px")(v)); }},
        {"unmix_window_px", [&](const std::string& v) { cfg.postclass.unmix_window_px = static_cast<int>(integer("unmix_window_px")(v)); }},
        {"water_fraction_threshold", [&](const std::string& v) { cfg.postclass.water_fraction_threshold = num("water_fraction_threshold")(v); }},
        {"samples_vegetation", [&](const std::string& v) { cfg.strata[0] = count("samples_vegetation")(v); }},
        {"samples_soil", [&](const std::string& v) { cfg.strata[1] = count("samples_soil")(v); }},
        {"samples_impervious", [&](const std::string& v) { cfg.strata[2] = count("samples_impervious")(v); }},
        {"samples_water", [&](const std::string& v) { cfg.strata[3] = count("samples_water")(v); }},
        {"strata_map", [&](const std::string& v) { cfg.strata_map = v; }},
        {"predictions", [&](const std::string& v) { cfg.predictions = split(v, ','); }},
    };

    // Check every key before applying any value.
    const KeyValueList entries = parse_key_values(text, origin);
    std::set<std::string> seen;
    for (const auto& [key, value] : entries) {
        if (!setters.count(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(origin + ": key '" + key + "' given twice");
    }
    for (const auto& [key, value] : entries) {
        try {
            setters.at(key)(value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path());
}

std::string format_config(const PipelineConfig& c) {
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
    auto d = [](double v) { return format_double(v); };
    kv("scene_spec", c.scene_spec.string());
    kv("input_dir", c.input_dir.string());
    kv("seed", std::to_string(c.seed));
    kv("visible_bands", join(c.water_bands.visible));
    kv("swir_bands", join(c.water_bands.swir));
    kv("covariance_regularization", d(c.covariance_regularization));
    kv("kmeans_k", std::to_string(c.kmeans_k));
    kv("kmeans_max_iterations", std::to_string(c.kmeans_max_iterations));
    kv("kmeans_tolerance", d(c.kmeans_tolerance));
    kv("t_pan", auto_or(c.t_pan));
    kv("sun_elevation_deg", d(c.sun.sun_elevation_deg));
    kv("sun_azimuth_deg", d(c.sun.sun_azimuth_deg));
    kv("view_elevation_deg", d(c.sun.view_elevation_deg));
    kv("view_azimuth_deg", d(c.sun.view_azimuth_deg));
    kv("sweep_step_m", c.heights.sweep_step > 0.0 ? d(c.heights.sweep_step) : "auto");
    kv("high_building_height_min_m", d(c.heights.high_intensity_building.min));
    kv("high_building_height_max_m", d(c.heights.high_intensity_building.max));
    kv("low_building_height_min_m", d(c.heights.low_intensity_building.min));
    kv("low_building_height_max_m", d(c.heights.low_intensity_building.max));
    kv("tree_height_min_m", d(c.heights.tree.min));
    kv("tree_height_max_m", d(c.heights.tree.max));
    kv("intensity_window", std::to_string(c.intensity.window));
    kv("intensity_ratio", d(c.intensity.ratio_threshold));
    kv("t_tree", auto_or(c.t_tree));
    kv("n1", std::to_string(c.fusion.n1));
    kv("n2", std::to_string(c.fusion.n2));
    kv("r_ms", d(c.fusion.r_ms));
    kv("r_l", d(c.fusion.r_l));
    kv("decision_threshold", d(c.fusion.decision_threshold));
    kv("shadow_relabel_threshold", d(c.postclass.shadow_relabel_threshold));
    kv("boundary_band_px", std::to_string(c.postclass.boundary_band_px));
    kv("unmix_window_px", std::to_string(c.postclass.unmix_window_px));
    kv("water_fraction_threshold", d(c.postclass.water_fraction_threshold));
    kv("samples_vegetation", std::to_string(c.strata[0]));
    kv("samples_soil", std::to_string(c.strata[1]));
    kv("samples_impervious", std::to_string(c.strata[2]));
    kv("samples_water", std::to_string(c.strata[3]));
    kv("strata_map", c.strata_map);
    kv("predictions", join(c.predictions));
    return os.str();
}

}  // namespace hydrofuse

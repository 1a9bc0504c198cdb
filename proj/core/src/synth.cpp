#include "hydrofuse/synth.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"
#include "hydrofuse/raster_io.hpp"
#include "hydrofuse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hydrofuse {

namespace {

constexpr std::string_view kClassNames[kSceneClassCount] = {"grass",      "tree",  "soil",      "impervious",
                                                            "building",   "water", "dark_field"};

ClassSpectra spectra(double pan, double pan_sigma, std::vector<double> ms, std::vector<double> ms_sigma,
                     std::vector<double> landsat, double landsat_sigma) {
    return {{{pan}, {pan_sigma}},
            {std::move(ms), std::move(ms_sigma)},
            {std::move(landsat), std::vector<double>(7, landsat_sigma)}};
}

// Number of `cell`-sized steps in `length`, which must be whole.
int whole_multiple(double length, double cell, const std::string& what) {
    if (!(cell > 0.0) || !(length > 0.0)) throw ConfigError(what + " must be positive");
    const double q = length / cell;
    const double n = std::round(q);
    if (n < 1.0 || std::abs(q - n) > 1e-9 * std::max(1.0, q)) {
        throw ConfigError(what + " is not a whole multiple of " + format_double(cell) + " m");
    }
    return static_cast<int>(n);
}

std::vector<std::string> tokens(std::string_view line) {
    std::istringstream is{std::string(line)};
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

std::vector<Point2> points_from(const std::vector<std::string>& tok, std::size_t first, const std::string& where) {
    if ((tok.size() - first) % 2 != 0) throw ConfigError(where + ": coordinates must come in x y pairs");
    std::vector<Point2> pts;
    for (std::size_t i = first; i + 1 < tok.size(); i += 2) {
        pts.push_back({parse_double(tok[i], where + " x"), parse_double(tok[i + 1], where + " y")});
    }
    return pts;
}

bool inside_polygon(const std::vector<Point2>& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
            const double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x < xc) in = !in;
        }
    }
    return in;
}

struct Box {
    double x0, y0, x1, y1;
};

Box bounds(const std::vector<Point2>& pts, double pad = 0.0) {
    Box b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const auto& p : pts) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    return {b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad};
}

// Geometric membership of a cell centre in a feature footprint.
bool covers(const Feature& f, double x, double y) {
    switch (f.kind) {
        case FeatureKind::cover:
        case FeatureKind::lake:
        case FeatureKind::dark_field: return inside_polygon(f.points, x, y);
        case FeatureKind::building:
            return x >= std::min(f.points[0].x, f.points[1].x) && x < std::max(f.points[0].x, f.points[1].x) &&
                   y >= std::min(f.points[0].y, f.points[1].y) && y < std::max(f.points[0].y, f.points[1].y);
        case FeatureKind::tree: {
            const double dx = x - f.points[0].x, dy = y - f.points[0].y;
            return dx * dx + dy * dy <= f.radius * f.radius;
        }
        case FeatureKind::river: {
            const double hw = f.width / 2.0;
            for (std::size_t i = 0; i + 1 < f.points.size(); ++i) {
                const Point2 p = f.points[i], q = f.points[i + 1];
                const double len = std::hypot(q.x - p.x, q.y - p.y);
                if (len == 0.0) continue;
                const double ux = (q.x - p.x) / len, uy = (q.y - p.y) / len;
                const double along = (x - p.x) * ux + (y - p.y) * uy;
                const double across = -(x - p.x) * uy + (y - p.y) * ux;
                if (along >= 0.0 && along <= len && std::abs(across) <= hw) return true;
            }
            return false;
        }
    }
    return false;
}

Box feature_box(const Feature& f) {
    switch (f.kind) {
        case FeatureKind::river: return bounds(f.points, f.width / 2.0);
        case FeatureKind::tree: return bounds(f.points, f.radius);
        default: return bounds(f.points);
    }
}

SceneClass paint_class(const Feature& f) {
    switch (f.kind) {
        case FeatureKind::cover: return f.cover_class;
        case FeatureKind::lake:
        case FeatureKind::river: return SceneClass::water;
        case FeatureKind::building: return SceneClass::building;
        case FeatureKind::tree: return SceneClass::tree;
        case FeatureKind::dark_field: return SceneClass::dark_field;
    }
    return SceneClass::grass;
}

constexpr int kBins = kSceneClassCount * 2;  // class x shadowed

template <typename Count>
void render_pixel(const Count* counts, const std::vector<const BandSpectrum*>& lib, double shadow_factor,
                  std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel, std::span<double> out) {
    double total = 0.0;
    for (int k = 0; k < kBins; ++k) total += static_cast<double>(counts[k]);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double value = 0.0, var = 0.0;
        for (int k = 0; k < kBins; ++k) {
            if (counts[k] == 0) continue;
            const double frac = static_cast<double>(counts[k]) / total;
            const BandSpectrum& s = *lib[k / 2];
            value += frac * s.mean[j] * ((k % 2) ? shadow_factor : 1.0);
            var += frac * s.sigma[j] * s.sigma[j];
        }
        if (var > 0.0) value += std::sqrt(var) * counter_normal(seed, stream, pixel, j);
        out[j] = value;
    }
}

}  // namespace

std::string_view to_string(SceneClass c) { return kClassNames[static_cast<int>(c)]; }

std::optional<SceneClass> parse_scene_class(std::string_view s) {
    for (int i = 0; i < kSceneClassCount; ++i) {
        if (kClassNames[i] == s) return static_cast<SceneClass>(i);
    }
    return std::nullopt;
}

bool is_elevated(SceneClass c) { return c == SceneClass::building || c == SceneClass::tree; }

std::optional<LandCover> land_cover_of(SceneClass c) {
    switch (c) {
        case SceneClass::grass:
        case SceneClass::tree: return LandCover::vegetation;
        case SceneClass::soil: return LandCover::soil;
        case SceneClass::impervious:
        case SceneClass::building: return LandCover::impervious;
        case SceneClass::water: return LandCover::water;
        case SceneClass::dark_field: return std::nullopt;
    }
    return std::nullopt;
}

SpectralLibrary default_spectral_library() {
    SpectralLibrary lib;
    auto set = [&](SceneClass c, ClassSpectra s) { lib[static_cast<int>(c)] = std::move(s); };
    set(SceneClass::grass, spectra(0.14, 0.006, {0.04, 0.08, 0.05, 0.40}, {0.004, 0.006, 0.005, 0.04},
                                   {0.05, 0.04, 0.08, 0.05, 0.40, 0.22, 0.12}, 0.004));
    set(SceneClass::tree, spectra(0.11, 0.035, {0.03, 0.06, 0.04, 0.32}, {0.006, 0.01, 0.008, 0.06},
                                  {0.04, 0.03, 0.06, 0.04, 0.32, 0.18, 0.09}, 0.004));
    set(SceneClass::soil, spectra(0.19, 0.006, {0.12, 0.16, 0.20, 0.28}, {0.01, 0.01, 0.01, 0.01},
                                  {0.10, 0.12, 0.16, 0.20, 0.28, 0.35, 0.30}, 0.004));
    set(SceneClass::impervious, spectra(0.21, 0.008, {0.18, 0.20, 0.22, 0.25}, {0.012, 0.012, 0.012, 0.012},
                                        {0.16, 0.18, 0.20, 0.22, 0.25, 0.28, 0.25}, 0.004));
    set(SceneClass::building, spectra(0.23, 0.010, {0.20, 0.22, 0.24, 0.26}, {0.012, 0.012, 0.012, 0.012},
                                      {0.18, 0.20, 0.22, 0.24, 0.26, 0.28, 0.26}, 0.004));
    set(SceneClass::water, spectra(0.05, 0.004, {0.08, 0.07, 0.05, 0.02}, {0.006, 0.006, 0.006, 0.02},
                                   {0.09, 0.08, 0.07, 0.05, 0.02, 0.01, 0.005}, 0.004));
    set(SceneClass::dark_field, spectra(0.05, 0.003, {0.05, 0.05, 0.05, 0.05}, {0.004, 0.004, 0.004, 0.004},
                                        {0.05, 0.05, 0.05, 0.05, 0.05, 0.15, 0.10}, 0.004));
    return lib;
}

void SceneSpec::validate() const {
    const int cells_x = whole_multiple(extent_x, supersample, "extent_x");
    const int cells_y = whole_multiple(extent_y, supersample, "extent_y");
    (void)cells_x;
    (void)cells_y;
    for (double px : {pan_pixel, ms_pixel, landsat_pixel}) {
        whole_multiple(px, supersample, "sensor pixel size " + format_double(px));
        whole_multiple(extent_x, px, "extent_x");
        whole_multiple(extent_y, px, "extent_y");
    }
    if (!(shadow_factor > 0.0 && shadow_factor < 1.0)) throw ConfigError("shadow_factor must be in (0, 1)");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw ConfigError("origin must be finite");
    sun.validate();
    if (landsat_doy.empty()) throw ConfigError("at least one Landsat date is required");
    if (is_elevated(background) || background == SceneClass::water) {
        throw ConfigError("background must be a ground class");
    }
    for (int c = 0; c < kSceneClassCount; ++c) {
        const auto& s = library[c];
        const std::pair<const BandSpectrum*, std::size_t> sensors[] = {{&s.pan, 1}, {&s.ms, 4}, {&s.landsat, 7}};
        for (const auto& [b, n] : sensors) {
            if (b->mean.size() != n || b->sigma.size() != n) {
                throw ConfigError("spectrum of " + std::string(kClassNames[c]) + " has the wrong band count");
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!std::isfinite(b->mean[j]) || !(b->sigma[j] >= 0.0) || !std::isfinite(b->sigma[j])) {
                    throw ConfigError("spectrum of " + std::string(kClassNames[c]) + " has an invalid value");
                }
            }
        }
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        const Feature& f = features[i];
        const std::string where = "feature " + std::to_string(i + 1);
        for (const auto& p : f.points) {
            if (!(p.x >= 0.0 && p.x <= extent_x && p.y >= 0.0 && p.y <= extent_y)) {
                throw ConfigError(where + " lies outside the extent");
            }
        }
        switch (f.kind) {
            case FeatureKind::cover:
                if (f.cover_class != SceneClass::grass && f.cover_class != SceneClass::soil &&
                    f.cover_class != SceneClass::impervious) {
                    throw ConfigError(where + ": cover must be grass, soil or impervious");
                }
                [[fallthrough]];
            case FeatureKind::lake:
            case FeatureKind::dark_field:
                if (f.points.size() < 3) throw ConfigError(where + ": a polygon needs at least 3 vertices");
                break;
            case FeatureKind::river:
                if (f.points.size() < 2) throw ConfigError(where + ": a river needs at least 2 vertices");
                if (!(f.width > 0.0)) throw ConfigError(where + ": river width must be positive");
                break;
            case FeatureKind::building:
                if (f.points.size() != 2) throw ConfigError(where + ": a building needs two corners");
                if (!(f.height > 0.0)) throw ConfigError(where + ": building height must be positive");
                break;
            case FeatureKind::tree:
                if (f.points.size() != 1) throw ConfigError(where + ": a tree needs one centre");
                if (!(f.height > 0.0) || !(f.radius > 0.0)) throw ConfigError(where + ": tree size must be positive");
                if (f.points[0].x - f.radius < 0.0 || f.points[0].x + f.radius > extent_x ||
                    f.points[0].y - f.radius < 0.0 || f.points[0].y + f.radius > extent_y) {
                    throw ConfigError(where + " lies outside the extent");
                }
                break;
        }
    }
}

GridGeometry SceneSpec::pan_grid() const {
    return {whole_multiple(extent_x, pan_pixel, "extent_x"), whole_multiple(extent_y, pan_pixel, "extent_y"),
            pan_pixel, origin_x, origin_y};
}

GridGeometry SceneSpec::ms_grid() const {
    return {whole_multiple(extent_x, ms_pixel, "extent_x"), whole_multiple(extent_y, ms_pixel, "extent_y"), ms_pixel,
            origin_x, origin_y};
}

GridGeometry SceneSpec::landsat_grid() const {
    return {whole_multiple(extent_x, landsat_pixel, "extent_x"), whole_multiple(extent_y, landsat_pixel, "extent_y"),
            landsat_pixel, origin_x, origin_y};
}

SceneSpec parse_scene_spec(std::string_view text, const std::string& origin) {
    SceneSpec spec;
    bool origin_set = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::string where = origin + ":" + std::to_string(line_no);

        if (const auto eq = line.find('='); eq != std::string::npos) {
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            const auto vals = tokens(value);
            auto one = [&]() {
                if (vals.size() != 1) throw ConfigError(where + ": " + key + " takes one value");
                return parse_double(vals[0], where + " " + key);
            };
            auto two = [&](double& a, double& b) {
                if (vals.size() != 2) throw ConfigError(where + ": " + key + " takes two values");
                a = parse_double(vals[0], where + " " + key);
                b = parse_double(vals[1], where + " " + key);
            };
            if (key == "extent") two(spec.extent_x, spec.extent_y);
            else if (key == "origin") {
                two(spec.origin_x, spec.origin_y);
                origin_set = true;
            } else if (key == "pan_pixel_m") spec.pan_pixel = one();
            else if (key == "ms_pixel_m") spec.ms_pixel = one();
            else if (key == "landsat_pixel_m") spec.landsat_pixel = one();
            else if (key == "supersample_m") spec.supersample = one();
            else if (key == "shadow_factor") spec.shadow_factor = one();
            else if (key == "sun_elevation_deg") spec.sun.sun_elevation_deg = one();
            else if (key == "sun_azimuth_deg") spec.sun.sun_azimuth_deg = one();
            else if (key == "seed") {
                if (vals.size() != 1) throw ConfigError(where + ": seed takes one value");
                const long long s = parse_int(vals[0], where + " seed");
                if (s < 0) throw ConfigError(where + ": seed must be non-negative");
                spec.seed = static_cast<std::uint64_t>(s);
            } else if (key == "training_per_class") {
                if (vals.size() != 1) throw ConfigError(where + ": training_per_class takes one value");
                const long long n = parse_int(vals[0], where + " training_per_class");
                if (n < 2) throw ConfigError(where + ": training_per_class must be >= 2");
                spec.training_per_class = static_cast<std::size_t>(n);
            } else if (key == "background") {
                const auto c = parse_scene_class(value);
                if (!c) throw ConfigError(where + ": unknown class '" + value + "'");
                spec.background = *c;
            } else if (key == "landsat_doy") {
                spec.landsat_doy.clear();
                for (const auto& v : vals) spec.landsat_doy.push_back(static_cast<int>(parse_int(v, where + " doy")));
            } else {
                throw ConfigError(where + ": unknown key '" + key + "'");
            }
            continue;
        }

        const auto tok = tokens(line);
        const std::string& kw = tok[0];
        Feature f;
        if (kw == "cover") {
            if (tok.size() < 2) throw ConfigError(where + ": cover needs a class");
            const auto c = parse_scene_class(tok[1]);
            if (!c) throw ConfigError(where + ": unknown class '" + tok[1] + "'");
            f.kind = FeatureKind::cover;
            f.cover_class = *c;
            f.points = points_from(tok, 2, where);
        } else if (kw == "lake" || kw == "dark_field") {
            f.kind = kw == "lake" ? FeatureKind::lake : FeatureKind::dark_field;
            f.points = points_from(tok, 1, where);
        } else if (kw == "river") {
            if (tok.size() < 2) throw ConfigError(where + ": river needs a width");
            f.kind = FeatureKind::river;
            f.width = parse_double(tok[1], where + " width");
            f.points = points_from(tok, 2, where);
        } else if (kw == "building") {
            if (tok.size() != 6) throw ConfigError(where + ": building takes height x0 y0 x1 y1");
            f.kind = FeatureKind::building;
            f.height = parse_double(tok[1], where + " height");
            f.points = points_from(tok, 2, where);
        } else if (kw == "tree") {
            if (tok.size() != 5) throw ConfigError(where + ": tree takes height cx cy radius");
            f.kind = FeatureKind::tree;
            f.height = parse_double(tok[1], where + " height");
            f.points = {{parse_double(tok[2], where + " cx"), parse_double(tok[3], where + " cy")}};
            f.radius = parse_double(tok[4], where + " radius");
        } else if (kw == "spectrum") {
            if (tok.size() < 3) throw ConfigError(where + ": spectrum takes class, sensor and values");
            const auto c = parse_scene_class(tok[1]);
            if (!c) throw ConfigError(where + ": unknown class '" + tok[1] + "'");
            auto& s = spec.library[static_cast<int>(*c)];
            BandSpectrum* target = tok[2] == "pan" ? &s.pan : tok[2] == "ms" ? &s.ms : tok[2] == "landsat" ? &s.landsat
                                                                                                          : nullptr;
            if (!target) throw ConfigError(where + ": unknown sensor '" + tok[2] + "'");
            const auto sig = std::find(tok.begin(), tok.end(), "sigma");
            if (sig == tok.end()) throw ConfigError(where + ": spectrum needs a sigma list");
            BandSpectrum b;
            for (auto it = tok.begin() + 3; it != sig; ++it) b.mean.push_back(parse_double(*it, where + " mean"));
            for (auto it = sig + 1; it != tok.end(); ++it) b.sigma.push_back(parse_double(*it, where + " sigma"));
            *target = std::move(b);
            continue;
        } else {
            throw ConfigError(where + ": unknown statement '" + kw + "'");
        }
        spec.features.push_back(std::move(f));
    }
    if (!origin_set) spec.origin_y = spec.extent_y;
    spec.validate();
    return spec;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene spec " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene_spec(ss.str(), path.string());
}

SceneBundle generate_scene(const SceneSpec& spec) {
    spec.validate();
    const double s = spec.supersample;
    const int cw = whole_multiple(spec.extent_x, s, "extent_x");
    const int ch = whole_multiple(spec.extent_y, s, "extent_y");
    const std::size_t ncells = static_cast<std::size_t>(cw) * ch;

    std::vector<std::uint8_t> cls(ncells, static_cast<std::uint8_t>(spec.background));
    auto cell_range = [&](const Box& b, int& c0, int& c1, int& r0, int& r1) {
        c0 = std::max(0, static_cast<int>(std::floor(b.x0 / s)) - 1);
        c1 = std::min(cw - 1, static_cast<int>(std::ceil(b.x1 / s)) + 1);
        r0 = std::max(0, static_cast<int>(std::floor(b.y0 / s)) - 1);
        r1 = std::min(ch - 1, static_cast<int>(std::ceil(b.y1 / s)) + 1);
    };
    for (const Feature& f : spec.features) {
        int c0, c1, r0, r1;
        cell_range(feature_box(f), c0, c1, r0, r1);
        const auto v = static_cast<std::uint8_t>(paint_class(f));
        for (int r = r0; r <= r1; ++r) {
            const double y = (r + 0.5) * s;
            for (int c = c0; c <= c1; ++c) {
                if (covers(f, (c + 0.5) * s, y)) cls[static_cast<std::size_t>(r) * cw + c] = v;
            }
        }
    }

    // Shadows: march each object's outline through its height. The outline
    // swept along the shadow direction covers the whole prism shadow.
    std::vector<std::uint8_t> shadow(ncells, 0);
    const auto [a, b] = shadow_offset_coefficients(spec.sun);
    const double reach = std::max(std::abs(a), std::abs(b));
    if (reach > 0.0) {
        const double step = s / reach;
        for (const Feature& f : spec.features) {
            if (f.kind != FeatureKind::building && f.kind != FeatureKind::tree) continue;
            int c0, c1, r0, r1;
            cell_range(feature_box(f), c0, c1, r0, r1);
            auto in = [&](int r, int c) {
                return r >= 0 && c >= 0 && r < ch && c < cw && covers(f, (c + 0.5) * s, (r + 0.5) * s);
            };
            const long long n = static_cast<long long>(std::ceil(f.height / step));
            for (int r = r0; r <= r1; ++r) {
                for (int c = c0; c <= c1; ++c) {
                    if (!in(r, c) || (in(r - 1, c) && in(r + 1, c) && in(r, c - 1) && in(r, c + 1))) continue;
                    for (long long i = 1; i <= n; ++i) {
                        const double h = f.height * static_cast<double>(i) / static_cast<double>(n);
                        const long long cc = std::llround(c + a * h / s);
                        const long long rr = std::llround(r + b * h / s);
                        if (cc < 0 || rr < 0 || cc >= cw || rr >= ch) continue;
                        const std::size_t q = static_cast<std::size_t>(rr) * cw + cc;
                        if (!is_elevated(static_cast<SceneClass>(cls[q]))) shadow[q] = 1;
                    }
                }
            }
        }
    }

    const GridGeometry pg = spec.pan_grid(), mg = spec.ms_grid(), lg = spec.landsat_grid();
    const int kp = whole_multiple(spec.pan_pixel, s, "pan pixel");
    const int km = whole_multiple(spec.ms_pixel, s, "ms pixel");
    const int kl = whole_multiple(spec.landsat_pixel, s, "landsat pixel");
    std::vector<std::uint16_t> pan_counts(pg.pixel_count() * kBins, 0);
    std::vector<std::uint32_t> ms_counts(mg.pixel_count() * kBins, 0);
    std::vector<std::uint32_t> ls_counts(lg.pixel_count() * kBins, 0);
    for (int r = 0; r < ch; ++r) {
        for (int c = 0; c < cw; ++c) {
            const std::size_t q = static_cast<std::size_t>(r) * cw + c;
            const int bin = cls[q] * 2 + shadow[q];
            ++pan_counts[pg.index(r / kp, c / kp) * kBins + bin];
            ++ms_counts[mg.index(r / km, c / km) * kBins + bin];
            ++ls_counts[lg.index(r / kl, c / kl) * kBins + bin];
        }
    }

    SceneBundle out;
    auto library_for = [&](BandSpectrum ClassSpectra::*sensor) {
        std::vector<const BandSpectrum*> v;
        for (const auto& cs : spec.library) v.push_back(&(cs.*sensor));
        return v;
    };
    auto render = [&](const auto& counts, const GridGeometry& g, std::vector<std::string> names,
                      BandSpectrum ClassSpectra::*sensor, std::uint64_t stream) {
        RasterGrid r(g, names);
        const auto lib = library_for(sensor);
        std::vector<double> px(names.size());
        for (std::size_t p = 0; p < g.pixel_count(); ++p) {
            render_pixel(&counts[p * kBins], lib, spec.shadow_factor, spec.seed, stream, p, px);
            for (std::size_t j = 0; j < px.size(); ++j) r.band(static_cast<int>(j))[p] = static_cast<float>(px[j]);
        }
        return r;
    };
    out.pan = render(pan_counts, pg, {"pan"}, &ClassSpectra::pan, 1);
    out.ms = render(ms_counts, mg, kMsBands, &ClassSpectra::ms, 2);
    for (std::size_t d = 0; d < spec.landsat_doy.size(); ++d) {
        out.landsat.push_back(render(ls_counts, lg, kLandsatBands, &ClassSpectra::landsat, 100 + d));
    }
    out.landsat_doy = spec.landsat_doy;

    const int water_bin = static_cast<int>(SceneClass::water) * 2;
    const std::uint32_t half = static_cast<std::uint32_t>(kp * kp) / 2;
    out.truth = BinaryMask(pg);
    out.shadow_truth = BinaryMask(pg);
    out.class_truth = RasterGrid(pg, {"class"});
    for (std::size_t p = 0; p < pg.pixel_count(); ++p) {
        const auto* cnt = &pan_counts[p * kBins];
        out.truth.bits[p] = static_cast<std::uint32_t>(cnt[water_bin] + cnt[water_bin + 1]) > half;
        std::uint32_t shaded = 0;
        int best = 0;
        std::uint32_t best_n = 0;
        for (int k = 0; k < kSceneClassCount; ++k) {
            shaded += cnt[2 * k + 1];
            const std::uint32_t n = cnt[2 * k] + cnt[2 * k + 1];
            if (n > best_n) {
                best_n = n;
                best = k;
            }
        }
        out.shadow_truth.bits[p] = shaded > half;
        out.class_truth.band(0)[p] = static_cast<float>(best);
    }
    out.ms_water_fraction = RasterGrid(mg, {"water_fraction"});
    for (std::size_t p = 0; p < mg.pixel_count(); ++p) {
        const auto* cnt = &ms_counts[p * kBins];
        out.ms_water_fraction.band(0)[p] =
            static_cast<float>(static_cast<double>(cnt[water_bin] + cnt[water_bin + 1]) / (km * km));
    }

    // Training points: unshadowed MS pixels made of a single training class.
    std::array<std::vector<std::size_t>, kLandCoverCount> pure;
    for (std::size_t p = 0; p < mg.pixel_count(); ++p) {
        const auto* cnt = &ms_counts[p * kBins];
        std::optional<LandCover> label;
        bool ok = true;
        for (int k = 0; k < kSceneClassCount && ok; ++k) {
            if (cnt[2 * k + 1]) ok = false;
            if (!cnt[2 * k]) continue;
            const auto lc = land_cover_of(static_cast<SceneClass>(k));
            if (!lc || (label && *label != *lc)) ok = false;
            label = lc;
        }
        if (ok && label) pure[static_cast<int>(*label)].push_back(p);
    }
    Rng rng(splitmix64(spec.seed ^ 0x747261696e696e67ULL));
    for (int c = 0; c < kLandCoverCount; ++c) {
        auto& pool = pure[c];
        if (pool.size() < spec.training_per_class) {
            throw ConfigError("scene has " + std::to_string(pool.size()) + " pure " +
                              std::string(to_string(kAllLandCovers[c])) + " MS pixels, " +
                              std::to_string(spec.training_per_class) + " training points requested");
        }
        for (std::size_t i = 0; i < spec.training_per_class; ++i) {
            std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        }
        std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.training_per_class));
        for (std::size_t i = 0; i < spec.training_per_class; ++i) {
            const int row = static_cast<int>(pool[i] / mg.width), col = static_cast<int>(pool[i] % mg.width);
            out.training.push_back({kAllLandCovers[c], mg.center_x(col), mg.center_y(row)});
        }
    }
    return out;
}

BinaryMask river_axis_mask(const SceneSpec& spec, const GridGeometry& grid) {
    BinaryMask out(grid);
    const double step = grid.pixel_size / 8.0;
    for (const Feature& f : spec.features) {
        if (f.kind != FeatureKind::river) continue;
        for (std::size_t i = 0; i + 1 < f.points.size(); ++i) {
            const Point2 p = f.points[i], q = f.points[i + 1];
            const double len = std::hypot(q.x - p.x, q.y - p.y);
            const long long n = std::max(1LL, static_cast<long long>(std::ceil(len / step)));
            // Sub-step centres, so an end on a pixel edge stays in its own pixel.
            for (long long k = 0; k < n; ++k) {
                const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
                const double x = spec.origin_x + p.x + t * (q.x - p.x);
                const double y = spec.origin_y - (p.y + t * (q.y - p.y));
                const int col = static_cast<int>(std::floor(grid.col_of(x)));
                const int row = static_cast<int>(std::floor(grid.row_of(y)));
                if (grid.contains(row, col)) out.at(row, col) = 1;
            }
        }
    }
    return out;
}

void write_training_points(const std::vector<TrainingPoint>& points, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# class, x, y\n";
    for (const auto& p : points) out << to_string(p.label) << ", " << format_double(p.x) << ", " << format_double(p.y) << '\n';
    if (!out) throw IoError("write failed on " + path.string());
}

std::vector<TrainingPoint> read_training_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open training points " + path.string());
    std::vector<TrainingPoint> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = split(t, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 3) throw IoError(where + ": expected class, x, y");
        const auto c = parse_land_cover(f[0]);
        if (!c) throw IoError(where + ": unknown class '" + f[0] + "'");
        try {
            out.push_back({*c, parse_double(f[1], "x"), parse_double(f[2], "y")});
        } catch (const ConfigError& e) {
            throw IoError(where + ": " + e.what());
        }
    }
    return out;
}

void write_bundle(const SceneBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_raster(bundle.pan, dir / "pan");
    write_raster(bundle.ms, dir / "ms");
    std::ofstream dates(dir / "landsat_dates.txt", std::ios::binary | std::ios::trunc);
    if (!dates) throw IoError("cannot write " + (dir / "landsat_dates.txt").string());
    for (std::size_t d = 0; d < bundle.landsat.size(); ++d) {
        const std::string stem = "landsat_doy" + std::to_string(bundle.landsat_doy[d]);
        write_raster(bundle.landsat[d], dir / stem);
        dates << stem << '\n';
    }
    write_mask(bundle.truth, dir / "truth_water");
    write_raster(bundle.class_truth, dir / "truth_class");
    write_mask(bundle.shadow_truth, dir / "truth_shadow");
    write_training_points(bundle.training, dir / "training_points.txt");
}

}  // namespace hydrofuse

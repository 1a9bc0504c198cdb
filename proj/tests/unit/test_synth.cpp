#include "doctest.h"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/raster_io.hpp"
#include "hydrofuse/synth.hpp"
#include "hydrofuse/water_index.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

using namespace hydrofuse;

namespace {

const char* kSmallScene = R"(
extent = 96 96
landsat_pixel_m = 32
seed = 5
training_per_class = 4
# an axis-aligned river, a lake, a house and a tree
cover soil 0 0 30 0 30 20 0 20
cover impervious 60 0 96 0 96 20 60 20
river 2.4 4 60.4 88 60.4
lake 40 30.4 70.4 30.4 70.4 49.6 40 49.6
dark_field 4 70 28 70 28 92 4 92
building 8 70 4 80 12
tree 10 20 36 4
)";

SceneSpec small_spec() { return parse_scene_spec(kSmallScene); }

SceneSpec noiseless(SceneSpec spec) {
    for (auto& c : spec.library) {
        for (auto* b : {&c.pan, &c.ms, &c.landsat}) std::fill(b->sigma.begin(), b->sigma.end(), 0.0);
    }
    return spec;
}

bool same_bits(const RasterGrid& a, const RasterGrid& b) {
    return a.geometry() == b.geometry() && a.data().size() == b.data().size() &&
           std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(float)) == 0;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("scene text parses into features and settings") {
    const SceneSpec s = small_spec();
    CHECK(s.extent_x == 96.0);
    CHECK(s.landsat_pixel == 32.0);
    CHECK(s.seed == 5);
    REQUIRE(s.features.size() == 7);
    CHECK(s.features[2].kind == FeatureKind::river);
    CHECK(s.features[2].width == 2.4);
    CHECK(s.features[5].kind == FeatureKind::building);
    CHECK(s.features[5].height == 8.0);
    CHECK(s.pan_grid().width == 120);
    CHECK(s.ms_grid().width == 30);
    CHECK(s.landsat_grid().width == 3);
}

TEST_CASE("bad scene text is a configuration error") {
    CHECK_THROWS_AS(parse_scene_spec("extent = 100 96\nlandsat_pixel_m = 32\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("lake 1 2 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("volcano 1 2 3 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("landsat_pixel_m = 32\nextent = 96 96\nbuilding -3 1 1 5 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_scene_spec("spectrum water ms 0.1 0.1 sigma 0 0\n"), ConfigError);
}

TEST_CASE("a 2.4 m river renders three PAN pixels wide") {
    const SceneBundle b = generate_scene(small_spec());
    // The river spans y 59.2..61.6, i.e. PAN rows 74..76.
    for (int col = 10; col < 100; col += 7) {
        int wet = 0;
        for (int row = 64; row < 86; ++row) wet += b.truth.at(row, col);
        CHECK(wet == 3);
        CHECK(b.truth.at(74, col) == 1);
        CHECK(b.truth.at(76, col) == 1);
    }
    const BinaryMask axis = river_axis_mask(small_spec(), b.truth.geometry);
    CHECK(axis.count() > 0);
    for (std::size_t i = 0; i < axis.bits.size(); ++i) {
        if (axis.bits[i]) CHECK(b.truth.bits[i] == 1);
    }
}

TEST_CASE("same spec and seed give identical bundles") {
    const SceneBundle a = generate_scene(small_spec());
    const SceneBundle b = generate_scene(small_spec());
    CHECK(same_bits(a.pan, b.pan));
    CHECK(same_bits(a.ms, b.ms));
    for (std::size_t d = 0; d < a.landsat.size(); ++d) CHECK(same_bits(a.landsat[d], b.landsat[d]));
    CHECK(a.truth.bits == b.truth.bits);
    CHECK(a.shadow_truth.bits == b.shadow_truth.bits);
    REQUIRE(a.training.size() == b.training.size());
    for (std::size_t i = 0; i < a.training.size(); ++i) {
        CHECK(a.training[i].x == b.training[i].x);
        CHECK(a.training[i].y == b.training[i].y);
    }
    SceneSpec other = small_spec();
    other.seed = 6;
    CHECK_FALSE(same_bits(a.pan, generate_scene(other).pan));
}

TEST_CASE("noiseless lake pixels carry the library water spectrum") {
    const SceneSpec spec = noiseless(small_spec());
    const SceneBundle b = generate_scene(spec);
    const auto& water = spec.library[static_cast<int>(SceneClass::water)];
    // MS pixel (row 12, col 16) covers x 51.2..54.4, y 38.4..41.6: inside the lake.
    for (int band = 0; band < 4; ++band) CHECK(b.ms.at(band, 12, 16) == static_cast<float>(water.ms.mean[band]));
    CHECK(b.pan.at(0, 50, 65) == static_cast<float>(water.pan.mean[0]));
}

TEST_CASE("MS water fraction agrees with the PAN truth on aligned edges") {
    const SceneBundle b = generate_scene(small_spec());
    const auto& ms = b.ms_water_fraction;
    // The lake edges lie on PAN pixel boundaries, so PAN truth is exact there.
    for (int r = 8; r < 17; ++r) {
        for (int c = 11; c < 23; ++c) {
            double wet = 0.0;
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) wet += b.truth.at(4 * r + i, 4 * c + j);
            }
            CHECK(ms.at(0, r, c) == doctest::Approx(wet / 16.0));
        }
    }
}

TEST_CASE("shadowed pixels are darker in every band") {
    // A tall block on open grass leaves whole MS pixels in shadow.
    const SceneSpec spec = noiseless(parse_scene_spec(std::string(kSmallScene) + "building 12 40 80 56 88\n"));
    const SceneBundle b = generate_scene(spec);
    REQUIRE(b.shadow_truth.count() > 0);
    const auto& grass = spec.library[static_cast<int>(SceneClass::grass)];
    int checked = 0;
    const auto& g = b.pan.geometry();
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            if (!b.shadow_truth.at(r, c)) continue;
            if (b.class_truth.at(0, r, c) != static_cast<float>(static_cast<int>(SceneClass::grass))) continue;
            CHECK(b.pan.at(0, r, c) < static_cast<float>(grass.pan.mean[0]));
            ++checked;
        }
    }
    CHECK(checked > 0);
    // Fully shadowed, fully grass MS pixels sit at the shadow factor in each band.
    for (int band = 0; band < 4; ++band) {
        const float lit = static_cast<float>(grass.ms.mean[band]);
        bool found = false;
        for (int r = 0; r < b.ms.height() && !found; ++r) {
            for (int c = 0; c < b.ms.width() && !found; ++c) {
                const float v = b.ms.at(band, r, c);
                if (std::abs(v - grass.ms.mean[band] * spec.shadow_factor) < 1e-6) {
                    found = true;
                    CHECK(v < lit);
                }
            }
        }
        CHECK(found);
    }
}

TEST_CASE("noiseless Landsat water passes the index and dark film fails it") {
    const SpectralLibrary lib = default_spectral_library();
    const WaterIndexBands bands;
    auto flag = [&](SceneClass c) {
        const auto& m = lib[static_cast<int>(c)].landsat.mean;
        // coastal, blue, green, red, nir, swir1, swir2
        const std::vector<float> vis{float(m[1]), float(m[2]), float(m[3])}, swir{float(m[5]), float(m[6])};
        return water_index_flag(vis, swir);
    };
    CHECK(flag(SceneClass::water) == 1);
    CHECK(flag(SceneClass::dark_field) == 0);
    for (SceneClass c : {SceneClass::grass, SceneClass::tree, SceneClass::soil, SceneClass::impervious,
                         SceneClass::building}) {
        CHECK(flag(c) == 0);
    }
}

TEST_CASE("bundle files load back with the sensor grids") {
    testutil::TempDir dir("bundle");
    const SceneSpec spec = small_spec();
    const SceneBundle b = generate_scene(spec);
    write_bundle(b, dir.path());
    CHECK(read_raster(dir / "pan").geometry() == spec.pan_grid());
    CHECK(read_raster(dir / "ms").band_names() == kMsBands);
    CHECK(read_mask(dir / "truth_water").bits == b.truth.bits);
    CHECK(b.landsat.size() == 7);
    for (std::size_t d = 0; d < b.landsat.size(); ++d) {
        const RasterGrid l = read_raster(dir / ("landsat_doy" + std::to_string(b.landsat_doy[d])));
        CHECK(l.geometry() == spec.landsat_grid());
        CHECK(l.band_names() == kLandsatBands);
    }
    const auto pts = read_training_points(dir / "training_points.txt");
    CHECK(pts.size() == b.training.size());
}

TEST_CASE("training points lie on pure unshadowed pixels of their class") {
    const SceneSpec spec = small_spec();
    const SceneBundle b = generate_scene(spec);
    REQUIRE_FALSE(b.training.empty());
    const auto& g = spec.pan_grid();
    for (const auto& p : b.training) {
        const int col = static_cast<int>(g.col_of(p.x)), row = static_cast<int>(g.row_of(p.y));
        REQUIRE(g.contains(row, col));
        const auto cls = static_cast<SceneClass>(static_cast<int>(b.class_truth.at(0, row, col)));
        CHECK(land_cover_of(cls) == p.label);
        CHECK(b.shadow_truth.at(row, col) == 0);
    }
}

}  // TEST_SUITE

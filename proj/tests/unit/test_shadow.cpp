#include "doctest.h"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/rng.hpp"
#include "hydrofuse/shadow.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace hydrofuse;
using testutil::grid;

namespace {

ShadowGeometry sun(double elev, double az) {
    ShadowGeometry g;
    g.sun_elevation_deg = elev;
    g.sun_azimuth_deg = az;
    return g;
}

HeightRanges uniform_ranges(double lo, double hi, double step = 0.0) {
    HeightRanges r;
    r.high_intensity_building = {lo, hi};
    r.low_intensity_building = {lo, hi};
    r.tree = {lo, hi};
    r.sweep_step = step;
    return r;
}

ObjectKindMap all_kind(const BinaryMask& m, ObjectKind kind) {
    ObjectKindMap k{m.geometry, std::vector<ObjectKind>(m.bits.size(), ObjectKind::none)};
    for (std::size_t i = 0; i < m.bits.size(); ++i) {
        if (m.bits[i]) k.kinds[i] = kind;
    }
    return k;
}

SegmentMap voted_segments(std::vector<std::array<std::size_t, 4>> votes, std::vector<double> mp_std = {}) {
    const int n = static_cast<int>(votes.size());
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i;
    SegmentMap s = segments_from_labels(grid(n, 1), labels);
    for (int i = 0; i < n; ++i) {
        s.records[i].class_votes = votes[i];
        if (!mp_std.empty()) s.records[i].mp_std = mp_std[i];
    }
    return s;
}

}  // namespace

TEST_SUITE("shadow-geom") {

TEST_CASE("offset coefficients for the three analytic suns") {
    const auto zenith = shadow_offset_coefficients(sun(90, 123));
    CHECK(zenith.a == 0.0);
    CHECK(zenith.b == 0.0);
    const auto south = shadow_offset_coefficients(sun(45, 180));
    CHECK(south.a == doctest::Approx(0.0));
    CHECK(south.b == doctest::Approx(-1.0));
    const auto east = shadow_offset_coefficients(sun(45, 90));
    CHECK(east.a == doctest::Approx(-1.0));
    CHECK(east.b == doctest::Approx(0.0));
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(sun(0, 10).validate(), ConfigError);
    CHECK_THROWS_AS(sun(91, 10).validate(), ConfigError);
    CHECK_NOTHROW(sun(50, 160).validate());
    CHECK_THROWS_AS(uniform_ranges(5, 3).validate(), ConfigError);
    CHECK_THROWS_AS((IntensityParams{100, 0.3}.validate()), ConfigError);
}

TEST_CASE("majority voting with tie-break") {
    const SegmentMap s = voted_segments({{10, 0, 0, 2}, {5, 5, 0, 0}, {0, 0, 7, 0}});
    const auto labels = classify_segments_majority(s);
    CHECK(labels[0] == SegmentClass::vegetation);
    CHECK(labels[1] == SegmentClass::vegetation);
    CHECK(labels[2] == SegmentClass::impervious);
    CHECK_THROWS_AS(classify_segments_majority(voted_segments({{0, 0, 0, 0}})), ComputeError);
}

TEST_CASE("tree split uses a strict threshold and only touches vegetation") {
    const SegmentMap s = voted_segments({{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}}, {2.0, std::nextafter(2.0, 3.0), 99.0});
    const auto out = tree_grass_split(s, classify_segments_majority(s), 2.0);
    CHECK(out[0] == SegmentClass::grass);
    CHECK(out[1] == SegmentClass::tree);
    CHECK(out[2] == SegmentClass::impervious);
}

TEST_CASE("default tree threshold needs two distinct vegetation values") {
    const SegmentMap one = voted_segments({{1, 0, 0, 0}, {0, 1, 0, 0}}, {1.0, 5.0});
    CHECK_FALSE(default_tree_threshold(one, classify_segments_majority(one)).has_value());
    const SegmentMap two = voted_segments({{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}}, {1.0, 1.1, 5.0});
    const auto t = default_tree_threshold(two, classify_segments_majority(two));
    REQUIRE(t.has_value());
    CHECK(*t > 1.1);
    CHECK(*t < 5.0);
}

TEST_CASE("intensity map of constant masks") {
    CHECK(building_intensity_map(BinaryMask(grid(30, 20), 1), {}).count() == 600);
    CHECK(building_intensity_map(BinaryMask(grid(30, 20), 0), {}).count() == 0);
}

TEST_CASE("intensity map of a half plane follows the clipped window ratio") {
    BinaryMask m(grid(300, 5));
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 150; ++c) m.at(r, c) = 1;
    }
    const IntensityParams params{101, 0.30};
    const BinaryMask out = building_intensity_map(m, params);
    const auto ratio = oracle::window_mean(m, 101);
    int transitions = 0;
    for (int c = 0; c < 300; ++c) {
        CHECK(out.at(2, c) == (ratio[m.geometry.index(2, c)] > 0.30));
        if (c > 0 && out.at(2, c) != out.at(2, c - 1)) ++transitions;
    }
    CHECK(transitions == 1);
}

TEST_CASE("zenith sun casts shadows only onto the objects") {
    Rng rng(81);
    BinaryMask obj(grid(20, 20, 0.8));
    for (auto& b : obj.bits) b = rng.uniform() < 0.2;
    const BinaryMask out = potential_shadow_mask(obj, all_kind(obj, ObjectKind::tree), sun(90, 0), uniform_ranges(3, 50), 0.8);
    CHECK(out.bits == obj.bits);
}

TEST_CASE("a single height projects onto one rounded pixel") {
    BinaryMask obj(grid(200, 200, 0.8));
    obj.at(100, 100) = 1;
    const BinaryMask out = potential_shadow_mask(obj, all_kind(obj, ObjectKind::low_intensity_building), sun(45, 180),
                                                 uniform_ranges(3, 3), 0.8);
    CHECK(out.count() == 1);
    CHECK(out.at(96, 100) == 1);
}

TEST_CASE("a height range marks a gap-free run") {
    BinaryMask obj(grid(200, 200, 0.8));
    obj.at(100, 100) = 1;
    const auto kinds = all_kind(obj, ObjectKind::tree);
    for (double step : {0.0, 0.8, 0.3}) {
        const BinaryMask out = potential_shadow_mask(obj, kinds, sun(45, 180), uniform_ranges(3, 6, step), 0.8);
        CHECK(out.count() == 4);
        for (int r = 93; r <= 96; ++r) CHECK(out.at(r, 100) == 1);
    }
}

TEST_CASE("steps wider than one pixel are rejected") {
    BinaryMask obj(grid(10, 10, 0.8));
    obj.at(5, 5) = 1;
    CHECK_THROWS_AS(potential_shadow_mask(obj, all_kind(obj, ObjectKind::tree), sun(45, 180), uniform_ranges(3, 6, 0.9), 0.8),
                    ConfigError);
}

TEST_CASE("object pixels must have a kind") {
    BinaryMask obj(grid(10, 10, 0.8));
    obj.at(5, 5) = 1;
    const ObjectKindMap none{obj.geometry, std::vector<ObjectKind>(100, ObjectKind::none)};
    CHECK_THROWS_AS(potential_shadow_mask(obj, none, sun(50, 160), uniform_ranges(3, 6), 0.8), ComputeError);
}

TEST_CASE("stepped sweep agrees with an independent mark enumeration") {
    Rng rng(83);
    for (int trial = 0; trial < 20; ++trial) {
        const ShadowGeometry g = sun(20 + 60 * rng.uniform(), 360 * rng.uniform());
        const double r = 0.8;
        const auto [a, b] = shadow_offset_coefficients(g);
        const double step = default_sweep_step(g, r);
        const double lo = 3.0, hi = 3.0 + 20.0 * rng.uniform();
        BinaryMask obj(grid(60, 60, r));
        for (auto& bit : obj.bits) bit = rng.uniform() < 0.02;
        const BinaryMask out = potential_shadow_mask(obj, all_kind(obj, ObjectKind::tree), g, uniform_ranges(lo, hi, step), r);
        const int n = static_cast<int>(std::ceil((hi - lo) / step));
        std::vector<double> hs;
        for (int i = 0; i <= n; ++i) hs.push_back(lo + (hi - lo) * i / n);
        CHECK(out.bits == oracle::shadow_marks(obj.bits, 60, 60, a, b, r, hs));
    }
}

TEST_CASE("exact sweep covers a dense sampling of the height range") {
    Rng rng(87);
    for (int trial = 0; trial < 20; ++trial) {
        const ShadowGeometry g = sun(20 + 60 * rng.uniform(), 360 * rng.uniform());
        const double r = 0.8;
        const auto [a, b] = shadow_offset_coefficients(g);
        const double lo = 3.0, hi = 3.0 + 20.0 * rng.uniform();
        BinaryMask obj(grid(60, 60, r));
        for (auto& bit : obj.bits) bit = rng.uniform() < 0.02;
        const BinaryMask out = potential_shadow_mask(obj, all_kind(obj, ObjectKind::tree), g, uniform_ranges(lo, hi), r);
        std::vector<double> dense;
        for (double h = lo; h < hi; h += r / 512.0) dense.push_back(h);
        dense.push_back(hi);
        const auto fine = oracle::shadow_marks(obj.bits, 60, 60, a, b, r, dense);
        for (std::size_t i = 0; i < fine.size(); ++i) {
            if (fine[i]) CHECK(out.bits[i] == 1);
        }
    }
}

TEST_CASE("enlarging a height range never unmarks a pixel") {
    Rng rng(89);
    for (int trial = 0; trial < 200; ++trial) {
        const ShadowGeometry g = sun(15 + 70 * rng.uniform(), 360 * rng.uniform());
        BinaryMask obj(grid(50, 50, 0.8));
        for (auto& bit : obj.bits) bit = rng.uniform() < 0.01;
        const auto kinds = all_kind(obj, ObjectKind::high_intensity_building);
        const double lo = 3.0 + 5.0 * rng.uniform(), hi = lo + 15.0 * rng.uniform();
        const double lo2 = lo - 2.0 * rng.uniform(), hi2 = hi + 10.0 * rng.uniform();
        const BinaryMask small = potential_shadow_mask(obj, kinds, g, uniform_ranges(lo, hi), 0.8);
        const BinaryMask big = potential_shadow_mask(obj, kinds, g, uniform_ranges(lo2, hi2), 0.8);
        for (std::size_t i = 0; i < small.bits.size(); ++i) {
            if (small.bits[i]) CHECK(big.bits[i] == 1);
        }
    }
}

TEST_CASE("shadow displacement has the expected length and direction") {
    Rng rng(97);
    const double r = 0.8;
    for (int trial = 0; trial < 100; ++trial) {
        const double elev = 20 + 65 * rng.uniform(), az = 360 * rng.uniform(), h = 3 + 20 * rng.uniform();
        BinaryMask obj(grid(201, 201, r));
        obj.at(100, 100) = 1;
        const BinaryMask out =
            potential_shadow_mask(obj, all_kind(obj, ObjectKind::tree), sun(elev, az), uniform_ranges(h, h), r);
        REQUIRE(out.count() == 1);
        int mr = 0, mc = 0;
        for (int row = 0; row < 201; ++row) {
            for (int col = 0; col < 201; ++col) {
                if (out.at(row, col)) {
                    mr = row;
                    mc = col;
                }
            }
        }
        const double len = h / std::tan(elev * std::numbers::pi / 180.0) / r;
        const double east = -len * std::sin(az * std::numbers::pi / 180.0);
        const double south = len * std::cos(az * std::numbers::pi / 180.0);
        CHECK(std::abs((mc - 100) - east) <= 0.5 + 1e-9);
        CHECK(std::abs((mr - 100) - south) <= 0.5 + 1e-9);
        CHECK(std::abs(std::hypot(mc - 100, mr - 100) - len) <= std::sqrt(0.5) + 1e-9);
    }
}

TEST_CASE("object kinds follow segment classes and intensity") {
    SegmentMap s = segments_from_labels(grid(3, 1), {0, 1, 2});
    BinaryMask hi(grid(3, 1));
    hi.at(0, 0) = 1;
    const auto kinds = object_kinds(s, {SegmentClass::impervious, SegmentClass::tree, SegmentClass::grass}, hi);
    CHECK(kinds.kinds[0] == ObjectKind::high_intensity_building);
    CHECK(kinds.kinds[1] == ObjectKind::tree);
    CHECK(kinds.kinds[2] == ObjectKind::none);
    hi.at(0, 0) = 0;
    CHECK(object_kinds(s, {SegmentClass::impervious, SegmentClass::tree, SegmentClass::grass}, hi).kinds[0] ==
          ObjectKind::low_intensity_building);
}

TEST_CASE("shadow proportion per segment") {
    std::vector<int> labels(300, 0);
    for (int i = 100; i < 200; ++i) labels[i] = 1;
    for (int i = 200; i < 300; ++i) labels[i] = 2;
    SegmentMap s = segments_from_labels(grid(100, 3), labels);
    BinaryMask m(grid(100, 3));
    for (int i = 0; i < 100; ++i) m.bits[i] = 1;
    for (int i = 100; i < 140; ++i) m.bits[i] = 1;
    s = segment_shadow_proportion(std::move(s), m);
    CHECK(s.records[0].p_shadow == 1.0);
    CHECK(s.records[1].p_shadow == doctest::Approx(0.4));
    CHECK(s.records[2].p_shadow == 0.0);
}

TEST_CASE("shadow proportion grows with the mask and stays a probability") {
    Rng rng(101);
    std::vector<int> values(40 * 30);
    for (auto& v : values) v = static_cast<int>(rng.below(4));
    std::vector<int> labels;
    label_components(values, 40, 30, labels);
    const SegmentMap s = segments_from_labels(grid(40, 30), labels);
    BinaryMask m(grid(40, 30));
    std::vector<double> prev(s.count(), 0.0);
    for (int round = 0; round < 10; ++round) {
        for (auto& b : m.bits) b = b || rng.uniform() < 0.1;
        const SegmentMap out = segment_shadow_proportion(s, m);
        for (int i = 0; i < s.count(); ++i) {
            CHECK(out.records[i].p_shadow >= prev[i]);
            CHECK(out.records[i].p_shadow <= 1.0);
            prev[i] = out.records[i].p_shadow;
        }
    }
}

}  // TEST_SUITE

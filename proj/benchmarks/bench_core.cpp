#include "hydrofuse/morphology.hpp"
#include "hydrofuse/pgm.hpp"
#include "hydrofuse/rng.hpp"
#include "hydrofuse/segmentation.hpp"
#include "hydrofuse/shadow.hpp"

#include <benchmark/benchmark.h>

using namespace hydrofuse;

namespace {

GridGeometry square_grid(int n) {
    GridGeometry g;
    g.width = g.height = n;
    g.pixel_size = 0.8;
    g.origin_y = n * 0.8;
    return g;
}

RasterGrid noise_image(int n) {
    RasterGrid img(square_grid(n), {"pan"});
    Rng rng(3);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    return img;
}

void BM_Profiles(benchmark::State& state) {
    const RasterGrid img = noise_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(morphological_profiles(img));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.pixel_count()));
}
BENCHMARK(BM_Profiles)->Arg(128)->Arg(512);

void BM_KMeansSegment(benchmark::State& state) {
    const RasterGrid img = noise_image(static_cast<int>(state.range(0)));
    const RasterGrid mp = morphological_profiles(img);
    KMeansOptions opts;
    opts.k = 8;
    opts.max_iterations = 20;
    for (auto _ : state) benchmark::DoNotOptimize(kmeans_segment(img, mp, opts, nullptr));
}
BENCHMARK(BM_KMeansSegment)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ShadowMask(benchmark::State& state) {
    const int n = 512;
    const GridGeometry g = square_grid(n);
    BinaryMask objects(g);
    ObjectKindMap kinds{g, std::vector<ObjectKind>(g.pixel_count(), ObjectKind::none)};
    Rng rng(5);
    for (int k = 0; k < 40; ++k) {
        const int r0 = static_cast<int>(rng.below(n - 20)), c0 = static_cast<int>(rng.below(n - 20));
        for (int r = r0; r < r0 + 15; ++r) {
            for (int c = c0; c < c0 + 15; ++c) {
                objects.at(r, c) = 1;
                kinds.kinds[g.index(r, c)] = ObjectKind::low_intensity_building;
            }
        }
    }
    ShadowGeometry sun;
    sun.sun_elevation_deg = 50;
    sun.sun_azimuth_deg = 160;
    HeightRanges ranges;
    ranges.low_intensity_building = {3.0, static_cast<double>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(potential_shadow_mask(objects, kinds, sun, ranges, 0.8));
}
BENCHMARK(BM_ShadowMask)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_FuseSegment(benchmark::State& state) {
    const FusionParams p{};
    Rng rng(7);
    double acc = 0.0;
    for (auto _ : state) {
        const double w = 0.1 + 500.0 * rng.uniform();
        acc += fuse_w(fuse_pm(rng.uniform(), rng.uniform(), w, rng.uniform(), p), rng.uniform(), w, p);
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_FuseSegment);

}  // namespace

BENCHMARK_MAIN();

#include "doctest.h"

#include "hydrofuse/config.hpp"
#include "hydrofuse/errors.hpp"
#include "hydrofuse/pipeline.hpp"
#include "hydrofuse/raster_io.hpp"
#include "test_util.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

using namespace hydrofuse;
namespace fs = std::filesystem;

namespace {

const char* kScene = R"(
extent = 96 96
landsat_pixel_m = 32
seed = 3
training_per_class = 6
cover soil 0 0 30 0 30 20 0 20
cover impervious 60 0 96 0 96 24 60 24
building 9 70 4 82 14
lake 36 30 76 30 76 62 36 62
river 2.4 4 80.4 92 80.4
tree 12 18 40 4
)";

const char* kConfig = R"(
scene_spec = scene.txt
seed = 4
kmeans_k = 6
samples_vegetation = 20
samples_soil = 20
samples_impervious = 20
samples_water = 40
)";

PipelineContext small_context(const testutil::TempDir& dir, const std::string& out) {
    testutil::spit(dir / "scene.txt", kScene);
    testutil::spit(dir / "run.cfg", kConfig);
    PipelineContext ctx;
    ctx.config = load_config(dir / "run.cfg");
    ctx.out = dir / out;
    return ctx;
}

std::vector<std::pair<std::string, std::string>> tree_of(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), root).string(), testutil::slurp(e.path()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

#ifdef HYDROFUSE_CLI
int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + HYDROFUSE_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("configuration defaults and overrides") {
    const PipelineConfig d = parse_config("");
    CHECK(d.kmeans_k == 8);
    CHECK(d.fusion.n1 == 2);
    CHECK(d.postclass.shadow_relabel_threshold == 0.85);
    CHECK(d.intensity.window == 101);
    CHECK(d.heights.high_intensity_building.max == 300.0);
    CHECK(d.strata == kDefaultStrata);
    CHECK_FALSE(d.t_pan.has_value());

    const PipelineConfig c = parse_config("n1 = 3\nt_pan = 0.12\nt_tree = auto\nvisible_bands = green, red\n");
    CHECK(c.fusion.n1 == 3);
    CHECK(c.t_pan == 0.12);
    CHECK_FALSE(c.t_tree.has_value());
    CHECK(c.water_bands.visible == std::vector<std::string>{"green", "red"});
}

TEST_CASE("unknown, repeated and invalid keys are rejected") {
    CHECK_THROWS_AS(parse_config("n3 = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n1 = 1\nn1 = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n1 = zero\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("intensity_window = 100\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("decision_threshold = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST_CASE("formatted configuration parses back to itself") {
    const PipelineConfig c = parse_config("n2 = 2\nsweep_step_m = 0.5\nsamples_water = 12\nt_tree = 3.5\n");
    const std::string text = format_config(c);
    CHECK(format_config(parse_config(text)) == text);
}

TEST_CASE("unknown subcommands are configuration errors") {
    PipelineContext ctx;
    CHECK_THROWS_AS(run_subcommand("paint", ctx), ConfigError);
    CHECK(subcommand_names().back() == "run-all");
}

TEST_CASE("run-all equals the individual steps and is repeatable") {
    testutil::TempDir dir("pipeline");
    const PipelineContext all = small_context(dir, "all");
    run_all(all);
    for (const char* stem : {"pgm_water", "pgm_prob", "post_water", "pca_water", "pan_water", "landsat_water"}) {
        CHECK_MESSAGE(fs::exists(all.out / (std::string(stem) + ".hdr")), stem);
    }
    CHECK(fs::exists(all.out / "report.txt"));
    CHECK(testutil::slurp(all.out / "metrics.txt").find("pgm_water pa=") != std::string::npos);

    const PipelineContext steps = small_context(dir, "steps");
    for (const auto& name : subcommand_names()) {
        if (name != "run-all") run_subcommand(name, steps);
    }
    CHECK(tree_of(all.out) == tree_of(steps.out));

    const PipelineContext again = small_context(dir, "again");
    run_all(again);
    CHECK(tree_of(all.out) == tree_of(again.out));

    // Re-running one step over its own outputs changes nothing.
    run_fuse(all);
    CHECK(tree_of(all.out) == tree_of(again.out));
}

TEST_CASE("evaluating the truth against itself is perfect") {
    testutil::TempDir dir("eval_truth");
    PipelineContext ctx = small_context(dir, "out");
    run_all(ctx);
    ctx.config.predictions = {"truth_water"};
    const auto results = evaluate_predictions(ctx);
    REQUIRE(results.size() == 1);
    const AccuracyReport r = accuracy_metrics(results[0].second);
    CHECK(r.oa == 100.0);
    CHECK(r.pa == 100.0);
    CHECK(r.ua == 100.0);
}

TEST_CASE("missing inputs are i/o errors") {
    testutil::TempDir dir("missing");
    PipelineContext ctx;
    ctx.out = dir / "out";
    CHECK_THROWS_AS(run_fuse(ctx), IoError);
    CHECK_THROWS_AS(run_train(ctx), IoError);
}

#ifdef HYDROFUSE_CLI
TEST_CASE("exit codes follow the failure class") {
    testutil::TempDir dir("exit");
    testutil::spit(dir / "bad.cfg", "kmeans_k = 4\nno_such_key = 1\n");
    CHECK(run_cli("segment --config \"" + (dir / "bad.cfg").string() + "\" --out \"" + (dir / "o").string() + "\"") == 2);
    CHECK_FALSE(fs::exists(dir / "o"));
    CHECK(run_cli("fuse --out \"" + (dir / "empty").string() + "\"") == 3);

    // A Landsat date without SWIR bands cannot be indexed.
    const fs::path in = dir / "in";
    fs::create_directories(in);
    write_raster(RasterGrid(testutil::grid(2, 2, 30.0), {"blue", "green", "red"}, 0.1f), in / "d1");
    testutil::spit(in / "landsat_dates.txt", "d1\n");
    CHECK(run_cli("water-index --out \"" + in.string() + "\"") == 4);

    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("evaluate --seed -3") == 2);
}
#endif

}  // TEST_SUITE

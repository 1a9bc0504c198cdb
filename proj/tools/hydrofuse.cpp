#include "hydrofuse/config.hpp"
#include "hydrofuse/errors.hpp"
#include "hydrofuse/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    long long seed = -1;
};

const std::map<std::string, std::string> kHelp{
    {"synth", "Render the synthetic scene bundle"},
    {"train", "Fit the MS classifier from the training points"},
    {"classify-ms", "Per-pixel class probabilities of the MS image"},
    {"water-index", "Landsat time-series water probability"},
    {"pca-fuse", "PCA pan-sharpening baseline and its classification"},
    {"segment", "Morphological profiles and K-Means segmentation of PAN"},
    {"shadow", "Segment classes, building intensity and potential shadows"},
    {"fuse", "Graphical-model fusion plus single-source comparison maps"},
    {"postclass", "Shadow relabelling and boundary unmixing"},
    {"evaluate", "Stratified sampling and accuracy report"},
    {"run-all", "Every step in order"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-resolution surface-water mapping"};
    app.require_subcommand(1);
    Flags flags;
    std::string chosen;
    for (const auto& name : hydrofuse::subcommand_names()) {
        auto* sub = app.add_subcommand(name, kHelp.at(name));
        sub->add_option("--config", flags.config, "Pipeline configuration file");
        sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", flags.seed, "Seed overriding the configuration")->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        hydrofuse::PipelineContext ctx;
        if (!flags.config.empty()) ctx.config = hydrofuse::load_config(flags.config);
        ctx.out = flags.out;
        if (flags.seed >= 0) ctx.seed_override = static_cast<std::uint64_t>(flags.seed);
        ctx.log = &std::cerr;
        hydrofuse::run_subcommand(chosen, ctx);
    } catch (const std::exception& e) {
        const int code = hydrofuse::exit_code_for(e);
        const char* kind = code == 2 ? "config error" : code == 3 ? "i/o error" : "computation error";
        std::cerr << "hydrofuse " << chosen << ": " << kind << ": " << e.what() << '\n';
        return code;
    }
    return 0;
}

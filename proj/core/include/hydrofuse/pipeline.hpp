#pragma once

#include "hydrofuse/config.hpp"
#include "hydrofuse/eval.hpp"
#include "hydrofuse/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hydrofuse {

struct PipelineContext {
    PipelineConfig config;
    std::filesystem::path out;
    /// Replaces the configured seed (and the scene seed for `synth`).
    std::optional<std::uint64_t> seed_override;
    std::ostream* log = nullptr;

    std::uint64_t seed() const { return seed_override.value_or(config.seed); }
    std::filesystem::path input_dir() const { return config.input_dir.empty() ? out : config.input_dir; }
};

/// Subcommand names in pipeline order, run-all last.
const std::vector<std::string>& subcommand_names();

/// Runs one subcommand. Throws ConfigError, IoError or ComputeError.
void run_subcommand(std::string_view name, const PipelineContext& ctx);

void run_synth(const PipelineContext& ctx);
void run_train(const PipelineContext& ctx);
void run_classify_ms(const PipelineContext& ctx);
void run_water_index(const PipelineContext& ctx);
void run_pca_fuse(const PipelineContext& ctx);
void run_segment(const PipelineContext& ctx);
void run_shadow(const PipelineContext& ctx);
void run_fuse(const PipelineContext& ctx);
void run_postclass(const PipelineContext& ctx);
void run_evaluate(const PipelineContext& ctx);
/// synth (when a scene is configured; the bundle then feeds the run), train, classify-ms, water-index,
/// pca-fuse, segment, shadow, fuse, postclass, evaluate.
void run_all(const PipelineContext& ctx);

/// Segment map rebuilt from the artifacts in the output directory, with all
/// statistics filled. p_shadow is set only when `with_shadow` is true.
SegmentMap load_segment_map(const PipelineContext& ctx, bool with_shadow);

/// Confusion matrix of every configured prediction at the stratified samples.
std::vector<std::pair<std::string, ConfusionMatrix>> evaluate_predictions(const PipelineContext& ctx);

}  // namespace hydrofuse

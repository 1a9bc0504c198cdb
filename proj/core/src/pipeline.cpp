#include "hydrofuse/pipeline.hpp"

#include "hydrofuse/classifier.hpp"
#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"
#include "hydrofuse/morphology.hpp"
#include "hydrofuse/pca.hpp"
#include "hydrofuse/pgm.hpp"
#include "hydrofuse/postclass.hpp"
#include "hydrofuse/raster_io.hpp"
#include "hydrofuse/shadow.hpp"
#include "hydrofuse/synth.hpp"
#include "hydrofuse/water_index.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace hydrofuse {

namespace fs = std::filesystem;

namespace {

void note(const PipelineContext& ctx, const std::string& msg) {
    if (ctx.log) *ctx.log << msg << '\n';
}

fs::path in_path(const PipelineContext& ctx, const std::string& stem) { return ctx.input_dir() / stem; }
fs::path out_path(const PipelineContext& ctx, const std::string& stem) { return ctx.out / stem; }

void ensure_out(const PipelineContext& ctx) {
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw IoError("cannot create " + ctx.out.string() + ": " + ec.message());
}

// Derived artifacts are looked up in the output directory first.
fs::path find_artifact(const PipelineContext& ctx, const std::string& stem) {
    if (fs::exists(header_path(out_path(ctx, stem)))) return out_path(ctx, stem);
    return in_path(ctx, stem);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed on " + path.string());
}

TrainingSamples sample_spectra(const RasterGrid& image, const std::vector<TrainingPoint>& points) {
    TrainingSamples out;
    const GridGeometry& g = image.geometry();
    for (const auto& p : points) {
        const int col = static_cast<int>(std::floor(g.col_of(p.x)));
        const int row = static_cast<int>(std::floor(g.row_of(p.y)));
        if (!g.contains(row, col)) throw ComputeError("training point outside the image");
        TrainingSample s;
        s.label = p.label;
        for (int b = 0; b < image.bands(); ++b) {
            const float v = image.at(b, row, col);
            if (image.is_nodata(v)) throw ComputeError("training point on a nodata pixel");
            s.spectrum.push_back(v);
        }
        out.push_back(std::move(s));
    }
    return out;
}

RasterGrid water_band(const RasterGrid& probabilities) {
    const int idx[] = {probabilities.band_index(to_string(LandCover::water))};
    return probabilities.select_bands(idx);
}

BinaryMask class_mask(const RasterGrid& class_map, LandCover c) {
    BinaryMask m(class_map.geometry());
    auto d = class_map.band(0);
    for (std::size_t p = 0; p < m.bits.size(); ++p) {
        m.bits[p] = !class_map.is_nodata(d[p]) && static_cast<int>(d[p]) == static_cast<int>(c);
    }
    return m;
}

std::vector<RasterGrid> read_landsat_stack(const PipelineContext& ctx) {
    const fs::path list = in_path(ctx, "landsat_dates.txt");
    std::ifstream in(list);
    if (!in) throw IoError("cannot open " + list.string());
    std::vector<RasterGrid> stack;
    std::string line;
    while (std::getline(in, line)) {
        const std::string stem = trim(line);
        if (stem.empty() || stem.front() == '#') continue;
        stack.push_back(read_raster(in_path(ctx, stem)));
    }
    if (stack.empty()) throw IoError(list.string() + " lists no dates");
    return stack;
}

double pan_threshold(const PipelineContext& ctx, const RasterGrid& pan) {
    return ctx.config.t_pan ? *ctx.config.t_pan : default_pan_threshold(pan);
}

void write_segment_details(const SegmentMap& segmap, const std::vector<SegmentClass>* classes,
                           const FusionResult* fusion, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# id, pixel_count, perimeter_px, w, p_pan, p_ms, p_lan, p_shadow, mp_std, class";
    if (fusion) out << ", p_pm, p_w, water";
    out << '\n';
    for (int s = 0; s < segmap.count(); ++s) {
        const auto& r = segmap.records[s];
        out << s << ", " << r.pixel_count << ", " << r.perimeter_px << ", " << format_double(r.w) << ", "
            << format_double(r.p_pan) << ", " << format_double(r.p_ms) << ", " << format_double(r.p_lan) << ", "
            << format_double(r.p_shadow) << ", " << format_double(r.mp_std) << ", "
            << (classes ? to_string((*classes)[s]) : to_string(majority_class(r)));
        if (fusion) {
            out << ", " << format_double(fusion->p_pm[s]) << ", " << format_double(fusion->p_w[s]) << ", "
                << int(fusion->water[s]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"synth",   "train",  "classify-ms", "water-index",
                                                "pca-fuse", "segment", "shadow",     "fuse",
                                                "postclass", "evaluate", "run-all"};
    return names;
}

void run_subcommand(std::string_view name, const PipelineContext& ctx) {
    if (name == "synth") run_synth(ctx);
    else if (name == "train") run_train(ctx);
    else if (name == "classify-ms") run_classify_ms(ctx);
    else if (name == "water-index") run_water_index(ctx);
    else if (name == "pca-fuse") run_pca_fuse(ctx);
    else if (name == "segment") run_segment(ctx);
    else if (name == "shadow") run_shadow(ctx);
    else if (name == "fuse") run_fuse(ctx);
    else if (name == "postclass") run_postclass(ctx);
    else if (name == "evaluate") run_evaluate(ctx);
    else if (name == "run-all") run_all(ctx);
    else throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

void run_synth(const PipelineContext& ctx) {
    if (ctx.config.scene_spec.empty()) throw ConfigError("scene_spec is not set");
    SceneSpec spec = read_scene_spec(ctx.config.scene_spec);
    if (ctx.seed_override) spec.seed = *ctx.seed_override;
    ensure_out(ctx);
    note(ctx, "synth: rendering " + ctx.config.scene_spec.string());
    write_bundle(generate_scene(spec), ctx.out);
}

void run_train(const PipelineContext& ctx) {
    const RasterGrid ms = read_raster(in_path(ctx, "ms"));
    const auto points = read_training_points(in_path(ctx, "training_points.txt"));
    const TrainingSamples samples = sample_spectra(ms, points);
    ensure_out(ctx);
    write_training_samples(samples, out_path(ctx, "training_samples.txt"));
    write_classifier_model(fit_classifier(samples, ctx.config.covariance_regularization),
                           out_path(ctx, "classifier.txt"));
    note(ctx, "train: " + std::to_string(samples.size()) + " samples");
}

void run_classify_ms(const PipelineContext& ctx) {
    const GaussianClassifier clf(read_classifier_model(out_path(ctx, "classifier.txt")));
    const RasterGrid ms = read_raster(in_path(ctx, "ms"));
    const RasterGrid prob = classify_probabilities(clf, ms);
    ensure_out(ctx);
    write_raster(prob, out_path(ctx, "ms_prob"));
    write_raster(argmax_class_map(prob), out_path(ctx, "ms_class"));
    note(ctx, "classify-ms: done");
}

void run_water_index(const PipelineContext& ctx) {
    const auto stack = read_landsat_stack(ctx);
    ensure_out(ctx);
    write_raster(landsat_water_index(stack, ctx.config.water_bands), out_path(ctx, "landsat_p"));
    note(ctx, "water-index: " + std::to_string(stack.size()) + " dates");
}

void run_pca_fuse(const PipelineContext& ctx) {
    const RasterGrid ms = read_raster(in_path(ctx, "ms"));
    const RasterGrid pan = read_raster(in_path(ctx, "pan"));
    const RasterGrid fused = pca_fuse(ms, pan);
    const auto points = read_training_points(in_path(ctx, "training_points.txt"));
    const ClassifierModel model = fit_classifier(sample_spectra(fused, points), ctx.config.covariance_regularization);
    const RasterGrid prob = classify_probabilities(GaussianClassifier(model), fused);
    const RasterGrid cls = argmax_class_map(prob);
    ensure_out(ctx);
    write_raster(fused, out_path(ctx, "pca_fused"));
    write_classifier_model(model, out_path(ctx, "pca_classifier.txt"));
    write_raster(prob, out_path(ctx, "pca_prob"));
    write_raster(cls, out_path(ctx, "pca_class"));
    write_mask(class_mask(cls, LandCover::water), out_path(ctx, "pca_water"));
    note(ctx, "pca-fuse: done");
}

SegmentMap load_segment_map(const PipelineContext& ctx, bool with_shadow) {
    const RasterGrid pan = read_raster(in_path(ctx, "pan"));
    const RasterGrid profiles = read_raster(out_path(ctx, "profiles"));
    SegmentMap segmap =
        segments_from_labels(pan.geometry(), labels_from_raster(read_raster(out_path(ctx, "segments"))));
    const GridGeometry& g = pan.geometry();
    const RasterGrid p_ms = resample_nearest(water_band(read_raster(out_path(ctx, "ms_prob"))), g);
    const RasterGrid p_lan = resample_nearest(read_raster(out_path(ctx, "landsat_p")), g);
    const RasterGrid ms_class = resample_nearest(read_raster(out_path(ctx, "ms_class")), g);
    segmap = segment_stats(std::move(segmap), pan, profiles, p_ms, p_lan, ms_class, ctx.config.t_pan);
    if (with_shadow) segmap = segment_shadow_proportion(std::move(segmap), read_mask(out_path(ctx, "shadow_mask")));
    return segmap;
}

void run_segment(const PipelineContext& ctx) {
    const RasterGrid pan = read_raster(in_path(ctx, "pan"));
    const RasterGrid profiles = morphological_profiles(pan);
    KMeansOptions opts;
    opts.k = ctx.config.kmeans_k;
    opts.max_iterations = ctx.config.kmeans_max_iterations;
    opts.tolerance = ctx.config.kmeans_tolerance;
    opts.seed = ctx.seed();
    KMeansResult km;
    const SegmentMap segmap = kmeans_segment(pan, profiles, opts, &km);
    ensure_out(ctx);
    write_raster(profiles, out_path(ctx, "profiles"));
    write_raster(labels_to_raster(segmap), out_path(ctx, "segments"));

    std::string hist = "# iteration, within-cluster sum of squares\n";
    for (std::size_t i = 0; i < km.objective_history.size(); ++i) {
        hist += std::to_string(i) + ", " + format_double(km.objective_history[i]) + "\n";
    }
    write_text(out_path(ctx, "kmeans_objective.txt"), hist);

    const SegmentMap full = load_segment_map(ctx, false);
    write_segment_table(full, out_path(ctx, "segments.txt"));
    note(ctx, "segment: " + std::to_string(segmap.count()) + " segments from " +
                  std::to_string(km.centroids.size()) + " clusters");
}

void run_shadow(const PipelineContext& ctx) {
    const PipelineConfig& cfg = ctx.config;
    SegmentMap segmap = load_segment_map(ctx, false);
    std::vector<SegmentClass> labels = classify_segments_majority(segmap);
    const auto t_tree = cfg.t_tree ? cfg.t_tree : default_tree_threshold(segmap, labels);
    labels = tree_grass_split(segmap, std::move(labels), t_tree ? *t_tree : std::numeric_limits<double>::infinity());

    BinaryMask impervious(segmap.geometry);
    for (std::size_t p = 0; p < impervious.bits.size(); ++p) {
        impervious.bits[p] = labels[segmap.labels[p]] == SegmentClass::impervious;
    }
    const BinaryMask intensity = building_intensity_map(impervious, cfg.intensity);
    const ObjectKindMap kinds = object_kinds(segmap, labels, intensity);
    BinaryMask objects(segmap.geometry);
    for (std::size_t p = 0; p < objects.bits.size(); ++p) objects.bits[p] = kinds.kinds[p] != ObjectKind::none;
    const BinaryMask shadow =
        potential_shadow_mask(objects, kinds, cfg.sun, cfg.heights, segmap.geometry.pixel_size);
    segmap = segment_shadow_proportion(std::move(segmap), shadow);

    RasterGrid cls(segmap.geometry, {"segment_class"});
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) {
        cls.band(0)[p] = static_cast<float>(static_cast<int>(labels[segmap.labels[p]]));
    }
    ensure_out(ctx);
    write_mask(shadow, out_path(ctx, "shadow_mask"));
    write_mask(intensity, out_path(ctx, "intensity_map"));
    write_raster(cls, out_path(ctx, "segment_class"));
    write_segment_table(segmap, out_path(ctx, "segments.txt"));
    write_segment_details(segmap, &labels, nullptr, out_path(ctx, "segment_details.txt"));
    note(ctx, "shadow: " + std::to_string(shadow.count()) + " potential shadow pixels, t_tree " +
                  (t_tree ? format_double(*t_tree) : std::string("none")));
}

void run_fuse(const PipelineContext& ctx) {
    const PipelineConfig& cfg = ctx.config;
    const SegmentMap segmap = load_segment_map(ctx, true);
    const FusionResult res = fuse_all_segments(segmap, cfg.fusion);
    const GridGeometry& g = segmap.geometry;

    // Single-source comparison maps on the PAN grid.
    const RasterGrid pan = read_raster(in_path(ctx, "pan"));
    const double t = pan_threshold(ctx, pan);
    BinaryMask pan_water(g);
    for (std::size_t p = 0; p < pan_water.bits.size(); ++p) pan_water.bits[p] = pan.band(0)[p] < t;
    const BinaryMask ms_water = class_mask(resample_nearest(read_raster(out_path(ctx, "ms_class")), g), LandCover::water);
    const RasterGrid p_lan = resample_nearest(read_raster(out_path(ctx, "landsat_p")), g);
    BinaryMask landsat_water(g);
    for (std::size_t p = 0; p < landsat_water.bits.size(); ++p) {
        const float v = p_lan.band(0)[p];
        landsat_water.bits[p] = !p_lan.is_nodata(v) && v > cfg.fusion.decision_threshold;
    }

    ensure_out(ctx);
    write_raster(res.probability, out_path(ctx, "pgm_prob"));
    write_mask(res.water_map, out_path(ctx, "pgm_water"));
    write_mask(pan_water, out_path(ctx, "pan_water"));
    write_mask(ms_water, out_path(ctx, "ms_water"));
    write_mask(landsat_water, out_path(ctx, "landsat_water"));
    write_segment_details(segmap, nullptr, &res, out_path(ctx, "pgm_segments.txt"));
    std::size_t n_water = 0;
    for (auto w : res.water) n_water += w;
    note(ctx, "fuse: " + std::to_string(n_water) + " of " + std::to_string(segmap.count()) +
                  " segments water, T_PAN " + format_double(t));
}

void run_postclass(const PipelineContext& ctx) {
    const PipelineConfig& cfg = ctx.config;
    const SegmentMap segmap = load_segment_map(ctx, true);
    const BinaryMask pgm = read_mask(out_path(ctx, "pgm_water"));
    if (!(pgm.geometry == segmap.geometry)) throw IoError("pgm_water is not on the segment grid");
    std::vector<std::uint8_t> water(segmap.records.size(), 0);
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) water[segmap.labels[p]] |= pgm.bits[p];

    const RelabelResult rel = relabel_shadow_segments(water, segmap, cfg.postclass);
    const BinaryMask relabeled = paint_segments(segmap, rel.water);
    const RasterGrid ms_fine = resample_nearest(read_raster(in_path(ctx, "ms")), segmap.geometry);
    const BinaryMask post = boundary_unmix(relabeled, ms_fine, cfg.postclass);
    ensure_out(ctx);
    write_mask(paint_segments(segmap, rel.shadow), out_path(ctx, "post_shadow"));
    write_mask(post, out_path(ctx, "post_water"));
    std::size_t n_shadow = 0;
    for (auto s : rel.shadow) n_shadow += s;
    note(ctx, "postclass: " + std::to_string(n_shadow) + " segments relabelled as shadow");
}

std::vector<std::pair<std::string, ConfusionMatrix>> evaluate_predictions(const PipelineContext& ctx) {
    const RasterGrid strata = read_raster(find_artifact(ctx, ctx.config.strata_map));
    const auto samples = stratified_sample(strata, ctx.config.strata, ctx.seed());
    const BinaryMask truth = read_mask(in_path(ctx, "truth_water"));
    if (!(truth.geometry == strata.geometry())) throw IoError("strata map and truth are on different grids");
    std::vector<std::uint8_t> ref;
    for (const auto& s : samples) ref.push_back(truth.at(s.row, s.col));

    std::vector<std::pair<std::string, ConfusionMatrix>> out;
    for (const auto& name : ctx.config.predictions) {
        const BinaryMask pred = read_mask(find_artifact(ctx, name));
        if (!(pred.geometry == truth.geometry)) throw IoError(name + " is not on the truth grid");
        std::vector<std::uint8_t> p;
        for (const auto& s : samples) p.push_back(pred.at(s.row, s.col));
        out.emplace_back(name, confusion_matrix(p, ref));
    }
    return out;
}

void run_evaluate(const PipelineContext& ctx) {
    const auto results = evaluate_predictions(ctx);
    const RasterGrid strata = read_raster(find_artifact(ctx, ctx.config.strata_map));
    ensure_out(ctx);
    write_samples(stratified_sample(strata, ctx.config.strata, ctx.seed()), out_path(ctx, "samples.txt"));
    std::string report, metrics;
    for (const auto& [name, m] : results) {
        report += format_report(m, name) + "\n";
        const RoundedReport r = rounded_metrics(m);
        metrics += name + " pa=" + format_tenths(r.pa_tenths) + ",ua=" + format_tenths(r.ua_tenths) +
                   ",oa=" + format_tenths(r.oa_tenths) + "\n";
    }
    write_text(out_path(ctx, "report.txt"), report);
    write_text(out_path(ctx, "metrics.txt"), metrics);
    if (ctx.log) *ctx.log << report;
}

void run_all(const PipelineContext& base) {
    PipelineContext ctx = base;
    if (!ctx.config.scene_spec.empty()) {
        run_synth(ctx);
        ctx.config.input_dir.clear();
    }
    run_train(ctx);
    run_classify_ms(ctx);
    run_water_index(ctx);
    run_pca_fuse(ctx);
    run_segment(ctx);
    run_shadow(ctx);
    run_fuse(ctx);
    run_postclass(ctx);
    run_evaluate(ctx);
}

}  // namespace hydrofuse

#pragma once

#include "hydrofuse/raster.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hydrofuse {

/// Land-cover classes of the MS classification, in tie-break order.
enum class LandCover : int { vegetation = 0, soil = 1, impervious = 2, water = 3 };
inline constexpr int kLandCoverCount = 4;
inline constexpr std::array<LandCover, kLandCoverCount> kAllLandCovers{
    LandCover::vegetation, LandCover::soil, LandCover::impervious, LandCover::water};

std::string_view to_string(LandCover c);
std::optional<LandCover> parse_land_cover(std::string_view s);

struct TrainingSample {
    std::vector<double> spectrum;
    LandCover label = LandCover::vegetation;
};
using TrainingSamples = std::vector<TrainingSample>;

/// Text format: one `class_label, v1, v2, ...` per line; '#' starts a comment line.
TrainingSamples read_training_samples(const std::filesystem::path& path);
void write_training_samples(const TrainingSamples& samples, const std::filesystem::path& path);

/// Anything that turns a spectrum into a distribution over land-cover classes.
class ProbabilisticClassifier {
public:
    virtual ~ProbabilisticClassifier() = default;
    virtual int dimension() const = 0;
    virtual const std::vector<LandCover>& classes() const = 0;
    /// Writes one probability per entry of classes(); the values sum to 1.
    virtual void posteriors(std::span<const double> spectrum, std::span<double> out) const = 0;
};

/// Per-class Gaussian parameters. Covariances are row-major d*d and already
/// include the diagonal regularisation.
struct ClassifierModel {
    std::vector<LandCover> classes;
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> covariances;
    std::vector<double> priors;
    double regularization = 1e-4;

    int dimension() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

inline constexpr double kCovarianceRegularization = 1e-4;
/// Lower bound on the diagonal loading, reached when a class has no scatter.
inline constexpr double kCovarianceFloor = 1e-10;

/// Gaussian maximum-likelihood fit: sample mean and unbiased covariance per
/// class, loaded with max(eps * trace / d, kCovarianceFloor) on the diagonal.
/// Samples are put in a canonical order first, so the result does not depend
/// on input order. Priors default to uniform.
ClassifierModel fit_classifier(const TrainingSamples& samples, double eps = kCovarianceRegularization);

class GaussianClassifier final : public ProbabilisticClassifier {
public:
    explicit GaussianClassifier(ClassifierModel model);

    int dimension() const override { return model_.dimension(); }
    const std::vector<LandCover>& classes() const override { return model_.classes; }
    void posteriors(std::span<const double> spectrum, std::span<double> out) const override;

    const ClassifierModel& model() const { return model_; }

private:
    ClassifierModel model_;
    std::vector<std::vector<double>> cholesky_;  // lower factors, row-major
    std::vector<double> log_det_;
};

ClassifierModel read_classifier_model(const std::filesystem::path& path);
void write_classifier_model(const ClassifierModel& model, const std::filesystem::path& path);

/// One probability band per class (band names are the class labels).
/// Pixels with any nodata band come out as nodata.
RasterGrid classify_probabilities(const ProbabilisticClassifier& classifier, const RasterGrid& raster);

/// Single band "class" holding the LandCover index of the most probable band;
/// ties go to the earlier class.
RasterGrid argmax_class_map(const RasterGrid& probabilities);

}  // namespace hydrofuse

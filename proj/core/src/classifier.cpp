#include "hydrofuse/classifier.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hydrofuse {

std::string_view to_string(LandCover c) {
    switch (c) {
        case LandCover::vegetation: return "vegetation";
        case LandCover::soil: return "soil";
        case LandCover::impervious: return "impervious";
        case LandCover::water: return "water";
    }
    return "unknown";
}

std::optional<LandCover> parse_land_cover(std::string_view s) {
    for (LandCover c : kAllLandCovers) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

TrainingSamples read_training_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open training samples " + path.string());
    TrainingSamples out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split(t, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() < 2) throw IoError(where + ": expected 'class, v1, v2, ...'");
        auto label = parse_land_cover(fields[0]);
        if (!label) throw IoError(where + ": unknown class '" + fields[0] + "'");
        TrainingSample s;
        s.label = *label;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            try {
                v = parse_double(fields[i], "spectrum value");
            } catch (const ConfigError& e) {
                throw IoError(where + ": " + e.what());
            }
            if (!std::isfinite(v)) throw IoError(where + ": non-finite spectrum value");
            s.spectrum.push_back(v);
        }
        if (dim == 0) dim = s.spectrum.size();
        if (s.spectrum.size() != dim) throw IoError(where + ": inconsistent spectrum length");
        out.push_back(std::move(s));
    }
    return out;
}

void write_training_samples(const TrainingSamples& samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& s : samples) {
        out << to_string(s.label);
        for (double v : s.spectrum) out << ", " << format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("write failed on " + path.string());
}

ClassifierModel fit_classifier(const TrainingSamples& samples, double eps) {
    if (samples.empty()) throw ComputeError("no training samples");
    const std::size_t d = samples.front().spectrum.size();
    if (d == 0) throw ComputeError("training spectra are empty");

    std::vector<const TrainingSample*> sorted;
    for (const auto& s : samples) {
        if (s.spectrum.size() != d) throw ComputeError("training spectra have different lengths");
        for (double v : s.spectrum) {
            if (!std::isfinite(v)) throw ComputeError("training spectrum is not finite");
        }
        sorted.push_back(&s);
    }
    std::sort(sorted.begin(), sorted.end(), [](const TrainingSample* a, const TrainingSample* b) {
        if (a->label != b->label) return a->label < b->label;
        return a->spectrum < b->spectrum;
    });

    ClassifierModel model;
    model.regularization = eps;
    std::size_t begin = 0;
    while (begin < sorted.size()) {
        std::size_t end = begin;
        while (end < sorted.size() && sorted[end]->label == sorted[begin]->label) ++end;
        const std::size_t n = end - begin;
        const LandCover label = sorted[begin]->label;
        if (n < 2) {
            throw ComputeError("class '" + std::string(to_string(label)) + "' needs at least 2 training samples");
        }
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < d; ++j) mean[j] += sorted[i]->spectrum[j];
        }
        for (auto& m : mean) m /= static_cast<double>(n);
        std::vector<double> cov(d * d, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t a = 0; a < d; ++a) {
                const double da = sorted[i]->spectrum[a] - mean[a];
                for (std::size_t b = a; b < d; ++b) cov[a * d + b] += da * (sorted[i]->spectrum[b] - mean[b]);
            }
        }
        double trace = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = a; b < d; ++b) {
                cov[a * d + b] /= static_cast<double>(n - 1);
                cov[b * d + a] = cov[a * d + b];
            }
            trace += cov[a * d + a];
        }
        const double loading = std::max(eps * trace / static_cast<double>(d), kCovarianceFloor);
        for (std::size_t a = 0; a < d; ++a) cov[a * d + a] += loading;

        model.classes.push_back(label);
        model.means.push_back(std::move(mean));
        model.covariances.push_back(std::move(cov));
        begin = end;
    }
    model.priors.assign(model.classes.size(), 1.0 / static_cast<double>(model.classes.size()));
    return model;
}

GaussianClassifier::GaussianClassifier(ClassifierModel model) : model_(std::move(model)) {
    const std::size_t k = model_.classes.size();
    if (k == 0) throw ComputeError("classifier has no classes");
    if (model_.means.size() != k || model_.covariances.size() != k || model_.priors.size() != k) {
        throw ComputeError("classifier model arrays disagree in length");
    }
    const auto d = static_cast<std::size_t>(model_.dimension());
    for (std::size_t c = 0; c < k; ++c) {
        if (model_.means[c].size() != d || model_.covariances[c].size() != d * d) {
            throw ComputeError("classifier model has inconsistent dimensions");
        }
        if (!(model_.priors[c] > 0.0)) throw ComputeError("class priors must be positive");
        // Cholesky decomposition of a small symmetric matrix.
        const auto& cov = model_.covariances[c];
        std::vector<double> L(d * d, 0.0);
        double log_det = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = cov[i * d + j];
                for (std::size_t p = 0; p < j; ++p) s -= L[i * d + p] * L[j * d + p];
                if (i == j) {
                    if (!(s > 0.0)) throw ComputeError("class covariance is not positive definite");
                    L[i * d + i] = std::sqrt(s);
                    log_det += 2.0 * std::log(L[i * d + i]);
                } else {
                    L[i * d + j] = s / L[j * d + j];
                }
            }
        }
        cholesky_.push_back(std::move(L));
        log_det_.push_back(log_det);
    }
}

void GaussianClassifier::posteriors(std::span<const double> x, std::span<double> out) const {
    const auto d = static_cast<std::size_t>(dimension());
    const std::size_t k = model_.classes.size();
    double y[64];
    if (d > 64) throw ComputeError("spectrum dimension too large");
    double best = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
        const auto& L = cholesky_[c];
        const auto& mu = model_.means[c];
        double maha = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double s = x[i] - mu[i];
            for (std::size_t p = 0; p < i; ++p) s -= L[i * d + p] * y[p];
            y[i] = s / L[i * d + i];
            maha += y[i] * y[i];
        }
        out[c] = std::log(model_.priors[c]) - 0.5 * (maha + log_det_[c]);
        best = std::max(best, out[c]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        out[c] = std::exp(out[c] - best);
        total += out[c];
    }
    for (std::size_t c = 0; c < k; ++c) out[c] /= total;
}

ClassifierModel read_classifier_model(const std::filesystem::path& path) {
    KeyValueList kv;
    try {
        kv = read_key_value_file(path);
    } catch (const ConfigError& e) {
        throw IoError(e.what());
    }
    auto numbers = [&](const std::string& v, const std::string& key) {
        std::vector<double> out;
        for (const auto& f : split(v, ',')) {
            try {
                out.push_back(parse_double(f, key));
            } catch (const ConfigError& e) {
                throw IoError(path.string() + ": " + e.what());
            }
        }
        return out;
    };
    ClassifierModel m;
    for (const auto& [key, value] : kv) {
        if (key == "regularization") {
            m.regularization = numbers(value, key).at(0);
        } else if (key == "class") {
            auto c = parse_land_cover(value);
            if (!c) throw IoError(path.string() + ": unknown class '" + value + "'");
            m.classes.push_back(*c);
        } else if (key == "prior") {
            m.priors.push_back(numbers(value, key).at(0));
        } else if (key == "mean") {
            m.means.push_back(numbers(value, key));
        } else if (key == "covariance") {
            m.covariances.push_back(numbers(value, key));
        } else {
            throw IoError(path.string() + ": unknown key '" + key + "'");
        }
    }
    try {
        GaussianClassifier check(m);
    } catch (const ComputeError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return m;
}

void write_classifier_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    auto join = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += format_double(v[i]);
        }
        return s;
    };
    out << "regularization = " << format_double(model.regularization) << '\n';
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        out << "class = " << to_string(model.classes[c]) << '\n'
            << "prior = " << format_double(model.priors[c]) << '\n'
            << "mean = " << join(model.means[c]) << '\n'
            << "covariance = " << join(model.covariances[c]) << '\n';
    }
    if (!out) throw IoError("write failed on " + path.string());
}

RasterGrid classify_probabilities(const ProbabilisticClassifier& classifier, const RasterGrid& raster) {
    const int d = classifier.dimension();
    if (raster.bands() != d) {
        throw ComputeError("raster has " + std::to_string(raster.bands()) + " bands, classifier expects " +
                           std::to_string(d));
    }
    const auto& classes = classifier.classes();
    std::vector<std::string> names;
    for (LandCover c : classes) names.emplace_back(to_string(c));

    RasterGrid out(raster.geometry(), names, 0.0f);
    std::vector<double> x(d);
    std::vector<double> p(classes.size());
    bool any_nodata = false;
    for (std::size_t i = 0; i < raster.pixel_count(); ++i) {
        bool valid = true;
        for (int b = 0; b < d; ++b) {
            const float v = raster.band(b)[i];
            valid &= !raster.is_nodata(v);
            x[b] = v;
        }
        if (!valid) {
            any_nodata = true;
            for (std::size_t c = 0; c < classes.size(); ++c) out.band(static_cast<int>(c))[i] = kDefaultNodata;
            continue;
        }
        classifier.posteriors(x, p);
        for (std::size_t c = 0; c < classes.size(); ++c) out.band(static_cast<int>(c))[i] = static_cast<float>(p[c]);
    }
    if (any_nodata) out.set_nodata(kDefaultNodata);
    return out;
}

RasterGrid argmax_class_map(const RasterGrid& probabilities) {
    std::vector<int> class_of_band;
    for (const auto& name : probabilities.band_names()) {
        auto c = parse_land_cover(name);
        if (!c) throw ComputeError("probability band '" + name + "' is not a land-cover class");
        class_of_band.push_back(static_cast<int>(*c));
    }
    RasterGrid out(probabilities.geometry(), {"class"}, 0.0f, probabilities.nodata());
    for (std::size_t i = 0; i < probabilities.pixel_count(); ++i) {
        int best = -1;
        float best_p = 0.0f;
        for (int b = 0; b < probabilities.bands(); ++b) {
            const float v = probabilities.band(b)[i];
            if (probabilities.is_nodata(v)) {
                best = -1;
                break;
            }
            if (best < 0 || v > best_p || (v == best_p && class_of_band[b] < class_of_band[best])) {
                best = b;
                best_p = v;
            }
        }
        out.band(0)[i] = best < 0 ? *probabilities.nodata() : static_cast<float>(class_of_band[best]);
    }
    return out;
}

}  // namespace hydrofuse

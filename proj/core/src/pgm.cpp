#include "hydrofuse/pgm.hpp"

#include "hydrofuse/errors.hpp"

#include <cmath>
#include <string>

namespace hydrofuse {

namespace {

void check_state(State s) {
    if (s != State::water && s != State::non_water) throw ComputeError("invalid node state");
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ComputeError(std::string(what) + " must be a probability in [0, 1]");
}

void check_size(double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ComputeError("segment size must be positive and finite");
}

double prob_of(State s, double p_water) { return s == State::water ? p_water : 1.0 - p_water; }

constexpr State kStates[2] = {State::non_water, State::water};

}  // namespace

void FusionParams::validate() const {
    if (n1 < 1 || n2 < 1) throw ConfigError("n1 and n2 must be positive integers");
    if (!(r_ms > 0.0) || !(r_l > 0.0)) throw ConfigError("r_ms and r_l must be positive");
    if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
        throw ConfigError("decision_threshold must be in (0, 1)");
    }
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double cpd_pm(State pm, State pan, State ms, double w, double p_shadow, const FusionParams& params) {
    check_state(pm);
    check_state(pan);
    check_state(ms);
    check_size(w);
    check_probability(p_shadow, "p_shadow");
    if (pm == pan && pm == ms) return 1.0;
    const double s = sigmoid((w / (params.n1 * params.r_ms) + p_shadow) / 2.0);
    if (pm == pan) return 1.0 - s;
    if (pm == ms) return s;
    return 0.0;
}

double cpd_w(State w_state, State pm, State lan, double w, const FusionParams& params) {
    check_state(w_state);
    check_state(pm);
    check_state(lan);
    check_size(w);
    if (w_state == pm && w_state == lan) return 1.0;
    const double scale = params.n2 * params.r_l;
    const double weight = w - scale >= 0.0 ? sigmoid(w / scale) : 0.0;
    if (w_state == pm) return 1.0 - weight;
    if (w_state == lan) return weight;
    return 0.0;
}

double fuse_pm(double p_pan, double p_ms, double w, double p_shadow, const FusionParams& params) {
    check_probability(p_pan, "p_pan");
    check_probability(p_ms, "p_ms");
    double p = 0.0;
    for (State pan : kStates) {
        for (State ms : kStates) {
            p += cpd_pm(State::water, pan, ms, w, p_shadow, params) * prob_of(pan, p_pan) * prob_of(ms, p_ms);
        }
    }
    return p;
}

double fuse_w(double p_pm, double p_lan, double w, const FusionParams& params) {
    check_probability(p_pm, "p_pm");
    check_probability(p_lan, "p_lan");
    double p = 0.0;
    for (State pm : kStates) {
        for (State lan : kStates) {
            p += cpd_w(State::water, pm, lan, w, params) * prob_of(pm, p_pm) * prob_of(lan, p_lan);
        }
    }
    return p;
}

bool decide(double p_w, const FusionParams& params) {
    check_probability(p_w, "p_w");
    return p_w > params.decision_threshold;
}

FusionResult fuse_all_segments(const SegmentMap& segmap, const FusionParams& params) {
    params.validate();
    FusionResult out;
    const std::size_t n = segmap.records.size();
    out.p_pm.resize(n);
    out.p_w.resize(n);
    out.water.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& r = segmap.records[s];
        try {
            out.p_pm[s] = fuse_pm(r.p_pan, r.p_ms, r.w, r.p_shadow, params);
            out.p_w[s] = fuse_w(out.p_pm[s], r.p_lan, r.w, params);
        } catch (const ComputeError& e) {
            throw ComputeError("segment " + std::to_string(s) + ": " + e.what());
        }
        out.water[s] = decide(out.p_w[s], params);
    }
    out.probability = paint_segments(segmap, out.p_w, "p_water");
    out.water_map = paint_segments(segmap, out.water);
    return out;
}

RasterGrid paint_segments(const SegmentMap& segmap, const std::vector<double>& values, std::string band_name) {
    if (values.size() != segmap.records.size()) throw ComputeError("one value per segment expected");
    RasterGrid out(segmap.geometry, {std::move(band_name)});
    auto d = out.band(0);
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) d[p] = static_cast<float>(values[segmap.labels[p]]);
    return out;
}

BinaryMask paint_segments(const SegmentMap& segmap, const std::vector<std::uint8_t>& flags) {
    if (flags.size() != segmap.records.size()) throw ComputeError("one flag per segment expected");
    BinaryMask out(segmap.geometry);
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) out.bits[p] = flags[segmap.labels[p]] != 0;
    return out;
}

}  // namespace hydrofuse

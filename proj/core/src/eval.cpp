#include "hydrofuse/eval.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"
#include "hydrofuse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hydrofuse {

std::vector<SamplePoint> stratified_sample(const RasterGrid& class_map, const StrataCounts& counts,
                                           std::uint64_t seed) {
    std::array<std::vector<std::size_t>, kLandCoverCount> pools;
    auto d = class_map.band(0);
    for (std::size_t p = 0; p < d.size(); ++p) {
        if (class_map.is_nodata(d[p])) continue;
        const int c = static_cast<int>(d[p]);
        if (c < 0 || c >= kLandCoverCount || static_cast<float>(c) != d[p]) {
            throw ComputeError("class map holds an invalid class value");
        }
        pools[c].push_back(p);
    }

    Rng rng(seed);
    std::vector<SamplePoint> out;
    const int w = class_map.width();
    for (int c = 0; c < kLandCoverCount; ++c) {
        auto& pool = pools[c];
        const std::size_t k = counts[c];
        if (k > pool.size()) {
            throw ComputeError("stratum " + std::string(to_string(kAllLandCovers[c])) + " has " +
                               std::to_string(pool.size()) + " pixels, " + std::to_string(k) + " requested");
        }
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.below(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        for (std::size_t i = 0; i < k; ++i) {
            out.push_back({static_cast<int>(pool[i] / w), static_cast<int>(pool[i] % w), kAllLandCovers[c]});
        }
    }
    return out;
}

void write_samples(const std::vector<SamplePoint>& samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# row, col, stratum\n";
    for (const auto& s : samples) out << s.row << ", " << s.col << ", " << to_string(s.stratum) << '\n';
    if (!out) throw IoError("write failed on " + path.string());
}

std::vector<SamplePoint> read_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample list " + path.string());
    std::vector<SamplePoint> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = split(t, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 3) throw IoError(where + ": expected row, col, stratum");
        SamplePoint s;
        try {
            s.row = static_cast<int>(parse_int(f[0], "row"));
            s.col = static_cast<int>(parse_int(f[1], "col"));
        } catch (const ConfigError& e) {
            throw IoError(where + ": " + e.what());
        }
        const auto c = parse_land_cover(f[2]);
        if (!c) throw IoError(where + ": unknown class '" + f[2] + "'");
        s.stratum = *c;
        out.push_back(s);
    }
    return out;
}

std::uint64_t ConfusionMatrix::total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix t;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) t.counts[i][j] = counts[j][i];
    }
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::uint8_t> predicted_water,
                                 std::span<const std::uint8_t> reference_water) {
    if (predicted_water.size() != reference_water.size()) {
        throw ComputeError("predicted and reference label lists differ in length");
    }
    ConfusionMatrix m;
    for (std::size_t i = 0; i < predicted_water.size(); ++i) {
        ++m.counts[predicted_water[i] ? 1 : 0][reference_water[i] ? 1 : 0];
    }
    return m;
}

ConfusionMatrix confusion_matrix(std::span<const LandCover> predicted, std::span<const LandCover> reference) {
    if (predicted.size() != reference.size()) throw ComputeError("predicted and reference label lists differ in length");
    std::vector<std::uint8_t> p(predicted.size()), r(reference.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = predicted[i] == LandCover::water;
        r[i] = reference[i] == LandCover::water;
    }
    return confusion_matrix(p, r);
}

namespace {

struct Ratios {
    std::uint64_t pa_num, pa_den, ua_num, ua_den, oa_num, oa_den;
};

Ratios ratios(const ConfusionMatrix& m) {
    const auto& c = m.counts;
    Ratios r{c[1][1], c[0][1] + c[1][1], c[1][1], c[1][0] + c[1][1], c[0][0] + c[1][1], m.total()};
    if (r.pa_den == 0) throw ComputeError("no reference water samples: PA undefined");
    if (r.ua_den == 0) throw ComputeError("no predicted water samples: UA undefined");
    return r;
}

}  // namespace

AccuracyReport accuracy_metrics(const ConfusionMatrix& m) {
    const Ratios r = ratios(m);
    auto pct = [](std::uint64_t n, std::uint64_t d) { return 100.0 * static_cast<double>(n) / static_cast<double>(d); };
    return {pct(r.pa_num, r.pa_den), pct(r.ua_num, r.ua_den), pct(r.oa_num, r.oa_den)};
}

std::int64_t percent_tenths(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw ComputeError("zero denominator");
    if (num > den) throw ComputeError("ratio above one");
    return static_cast<std::int64_t>((2000 * num + den) / (2 * den));
}

RoundedReport rounded_metrics(const ConfusionMatrix& m) {
    const Ratios r = ratios(m);
    return {percent_tenths(r.pa_num, r.pa_den), percent_tenths(r.ua_num, r.ua_den),
            percent_tenths(r.oa_num, r.oa_den)};
}

std::string format_tenths(std::int64_t tenths) {
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string format_report(const ConfusionMatrix& m, const std::string& title) {
    const RoundedReport r = rounded_metrics(m);
    const auto& c = m.counts;
    std::ostringstream os;
    os << title << '\n';
    os << "predicted \\ reference  non-water  water\n";
    os << "non-water              " << c[0][0] << "  " << c[0][1] << '\n';
    os << "water                  " << c[1][0] << "  " << c[1][1] << '\n';
    os << "pa=" << format_tenths(r.pa_tenths) << ",ua=" << format_tenths(r.ua_tenths)
       << ",oa=" << format_tenths(r.oa_tenths) << '\n';
    return os.str();
}

}  // namespace hydrofuse

#include "hydrofuse/segmentation.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"
#include "hydrofuse/otsu.hpp"
#include "hydrofuse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace hydrofuse {

namespace {

double sq_dist(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

void require_grid(const RasterGrid& r, const GridGeometry& g, const char* what) {
    if (!(r.geometry() == g)) throw ComputeError(std::string(what) + " is not on the segment grid");
}

}  // namespace

std::vector<std::vector<double>> kmeans_plus_plus_seeds(std::span<const double> points, int dims, int k,
                                                        std::uint64_t seed) {
    if (dims < 1 || points.size() % static_cast<std::size_t>(dims) != 0) {
        throw ComputeError("point array is not a multiple of the dimension");
    }
    if (k < 1) throw ComputeError("k must be >= 1");
    const std::size_t n = points.size() / dims;
    if (n == 0) throw ComputeError("k-means needs at least one point");

    Rng rng(seed);
    std::vector<std::vector<double>> centres;
    auto point = [&](std::size_t i) { return points.data() + i * dims; };

    std::size_t first = rng.below(n);
    centres.emplace_back(point(first), point(first) + dims);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(point(i), centres[0].data(), dims);

    while (static_cast<int>(centres.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (!(total > 0.0)) break;
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        centres.emplace_back(point(pick), point(pick) + dims);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(point(i), centres.back().data(), dims));
    }
    return centres;
}

KMeansResult kmeans_from(std::span<const double> points, int dims, std::vector<std::vector<double>> centres,
                         const KMeansOptions& options) {
    if (dims < 1 || points.size() % static_cast<std::size_t>(dims) != 0) {
        throw ComputeError("point array is not a multiple of the dimension");
    }
    if (centres.empty()) throw ComputeError("k-means needs at least one centre");
    const std::size_t n = points.size() / dims;
    auto point = [&](std::size_t i) { return points.data() + i * dims; };

    KMeansResult res;
    res.assignment.assign(n, 0);
    std::vector<double> dist(n, 0.0);

    auto assign = [&]() {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(point(i), centres[0].data(), dims);
            for (std::size_t c = 1; c < centres.size(); ++c) {
                const double dd = sq_dist(point(i), centres[c].data(), dims);
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(c);
                }
            }
            res.assignment[i] = best;
            dist[i] = best_d;
            sse += best_d;
        }
        res.objective_history.push_back(sse);
    };

    assign();
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        res.iterations = iter + 1;
        const std::size_t k = centres.size();
        std::vector<std::vector<double>> sums(k, std::vector<double>(dims, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[res.assignment[i]];
            const double* p = point(i);
            for (int j = 0; j < dims; ++j) s[j] += p[j];
            ++counts[res.assignment[i]];
        }

        double moved = 0.0;
        std::vector<std::vector<double>> next;
        std::vector<std::size_t> empty;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                empty.push_back(next.size());
                next.push_back(centres[c]);
                continue;
            }
            std::vector<double> m(dims);
            for (int j = 0; j < dims; ++j) m[j] = sums[c][j] / static_cast<double>(counts[c]);
            moved = std::max(moved, std::sqrt(sq_dist(m.data(), centres[c].data(), dims)));
            next.push_back(std::move(m));
        }

        // Empty clusters jump to the point worst served by the live centres.
        std::vector<char> live(next.size(), 1), drop(next.size(), 0);
        for (std::size_t e : empty) live[e] = 0;
        for (std::size_t e : empty) {
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < next.size(); ++c) {
                    if (live[c]) best = std::min(best, sq_dist(point(i), next[c].data(), dims));
                }
                if (best > far_d) {
                    far_d = best;
                    far = i;
                }
            }
            if (far_d > 0.0) {
                next[e].assign(point(far), point(far) + dims);
                live[e] = 1;
                moved = std::numeric_limits<double>::infinity();
            } else {
                drop[e] = 1;
            }
        }
        std::vector<std::vector<double>> kept;
        for (std::size_t c = 0; c < next.size(); ++c) {
            if (!drop[c]) kept.push_back(std::move(next[c]));
        }
        centres = std::move(kept);

        assign();
        if (moved < options.tolerance) break;
    }
    res.centroids = std::move(centres);
    return res;
}

KMeansResult kmeans(std::span<const double> points, int dims, const KMeansOptions& options) {
    return kmeans_from(points, dims, kmeans_plus_plus_seeds(points, dims, options.k, options.seed), options);
}

std::vector<double> standardized_features(const RasterGrid& pan, const RasterGrid& profiles) {
    if (pan.bands() != 1) throw ComputeError("PAN raster must have a single band");
    require_grid(profiles, pan.geometry(), "profile stack");
    const std::size_t n = pan.pixel_count();
    const int d = 1 + profiles.bands();
    std::vector<double> f(n * d);
    for (int j = 0; j < d; ++j) {
        auto band = j == 0 ? pan.band(0) : profiles.band(j - 1);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pan.is_nodata(band[i]) || (j > 0 && profiles.is_nodata(band[i]))) {
                throw ComputeError("segmentation inputs must not contain nodata");
            }
            sum += band[i];
        }
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (band[i] - mean) * (band[i] - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) f[i * d + j] = sd > 0.0 ? (band[i] - mean) / sd : 0.0;
    }
    return f;
}

int label_components(std::span<const int> values, int width, int height, std::vector<int>& labels) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (values.size() != n) throw ComputeError("label array does not match the grid");
    labels.assign(n, -1);
    std::vector<std::size_t> stack;
    int next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (labels[seed] >= 0) continue;
        const int v = values[seed];
        labels[seed] = next;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const int r = static_cast<int>(p / width);
            const int c = static_cast<int>(p % width);
            auto visit = [&](int rr, int cc) {
                if (rr < 0 || rr >= height || cc < 0 || cc >= width) return;
                const std::size_t q = static_cast<std::size_t>(rr) * width + cc;
                if (labels[q] < 0 && values[q] == v) {
                    labels[q] = next;
                    stack.push_back(q);
                }
            };
            visit(r - 1, c);
            visit(r + 1, c);
            visit(r, c - 1);
            visit(r, c + 1);
        }
        ++next;
    }
    return next;
}

SegmentIndex build_segment_index(const SegmentMap& segmap) {
    SegmentIndex idx;
    const int s = segmap.count();
    idx.offsets.assign(s + 1, 0);
    for (int l : segmap.labels) ++idx.offsets[l + 1];
    for (int i = 0; i < s; ++i) idx.offsets[i + 1] += idx.offsets[i];
    idx.pixels.resize(segmap.labels.size());
    std::vector<std::size_t> fill(idx.offsets.begin(), idx.offsets.end() - 1);
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) idx.pixels[fill[segmap.labels[p]]++] = p;
    return idx;
}

SegmentMap segments_from_labels(const GridGeometry& g, std::vector<int> labels) {
    if (labels.size() != g.pixel_count()) throw ComputeError("label array does not match the grid");
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw ComputeError("segment labels must be non-negative");
        max_label = std::max(max_label, l);
    }
    SegmentMap m;
    m.geometry = g;
    m.labels = std::move(labels);
    m.records.resize(static_cast<std::size_t>(max_label + 1));
    const int w = g.width, h = g.height;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int l = m.labels[g.index(r, c)];
            auto& rec = m.records[l];
            ++rec.pixel_count;
            rec.perimeter_px += (r == 0 || m.labels[g.index(r - 1, c)] != l);
            rec.perimeter_px += (r == h - 1 || m.labels[g.index(r + 1, c)] != l);
            rec.perimeter_px += (c == 0 || m.labels[g.index(r, c - 1)] != l);
            rec.perimeter_px += (c == w - 1 || m.labels[g.index(r, c + 1)] != l);
        }
    }
    const double px_area = g.pixel_size * g.pixel_size;
    for (auto& rec : m.records) {
        if (rec.pixel_count == 0) throw ComputeError("segment labels must be contiguous from 0");
        rec.area_m2 = static_cast<double>(rec.pixel_count) * px_area;
        rec.w = 4.0 * rec.area_m2 / (static_cast<double>(rec.perimeter_px) * g.pixel_size);
    }
    return m;
}

SegmentMap kmeans_segment(const RasterGrid& pan, const RasterGrid& profiles, const KMeansOptions& options,
                          KMeansResult* clustering) {
    if (options.k < 1) throw ComputeError("k must be >= 1");
    const auto features = standardized_features(pan, profiles);
    const int d = 1 + profiles.bands();
    KMeansResult km = kmeans(features, d, options);
    std::vector<int> labels;
    label_components(km.assignment, pan.width(), pan.height(), labels);
    if (clustering) *clustering = std::move(km);
    return segments_from_labels(pan.geometry(), std::move(labels));
}

double default_pan_threshold(const RasterGrid& pan) { return otsu_threshold(pan.band(0)).threshold; }

double pan_water_probability(const SegmentMap& segmap, int segment, const RasterGrid& pan, double t_pan) {
    if (!std::isfinite(t_pan)) throw ComputeError("PAN threshold must be finite");
    require_grid(pan, segmap.geometry, "PAN raster");
    std::size_t n = 0, below = 0;
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) {
        if (segmap.labels[p] != segment) continue;
        ++n;
        below += pan.band(0)[p] < t_pan;
    }
    if (n == 0) throw ComputeError("segment " + std::to_string(segment) + " is empty");
    return static_cast<double>(below) / static_cast<double>(n);
}

SegmentMap segment_stats(SegmentMap segmap, const RasterGrid& pan, const RasterGrid& profiles,
                         const RasterGrid& p_ms_field, const RasterGrid& p_lan_field,
                         const RasterGrid& ms_class_map, std::optional<double> t_pan) {
    const GridGeometry& g = segmap.geometry;
    require_grid(pan, g, "PAN raster");
    require_grid(profiles, g, "profile stack");
    require_grid(p_ms_field, g, "MS water probability");
    require_grid(p_lan_field, g, "Landsat water probability");
    require_grid(ms_class_map, g, "MS class map");
    const double threshold = t_pan ? *t_pan : default_pan_threshold(pan);
    if (!std::isfinite(threshold)) throw ComputeError("PAN threshold must be finite");

    const int s = segmap.count();
    std::vector<std::size_t> below(s, 0), ms_n(s, 0), lan_n(s, 0);
    std::vector<double> ms_sum(s, 0.0), lan_sum(s, 0.0), std_sum(s, 0.0);
    for (auto& rec : segmap.records) rec.class_votes.fill(0);

    const int nb = profiles.bands();
    for (std::size_t p = 0; p < segmap.labels.size(); ++p) {
        const int l = segmap.labels[p];
        auto& rec = segmap.records[l];
        below[l] += pan.band(0)[p] < threshold;

        const float pm = p_ms_field.band(0)[p];
        if (!p_ms_field.is_nodata(pm)) {
            ms_sum[l] += pm;
            ++ms_n[l];
        }
        const float pl = p_lan_field.band(0)[p];
        if (!p_lan_field.is_nodata(pl)) {
            lan_sum[l] += pl;
            ++lan_n[l];
        }
        const float cls = ms_class_map.band(0)[p];
        if (!ms_class_map.is_nodata(cls)) {
            const int ci = static_cast<int>(cls);
            if (ci < 0 || ci >= kLandCoverCount || ci != cls) throw ComputeError("MS class map holds an invalid class");
            ++rec.class_votes[ci];
        }
        double m = 0.0;
        for (int b = 0; b < nb; ++b) m += profiles.band(b)[p];
        m /= nb;
        double v = 0.0;
        for (int b = 0; b < nb; ++b) v += (profiles.band(b)[p] - m) * (profiles.band(b)[p] - m);
        std_sum[l] += std::sqrt(v / nb);
    }
    for (int l = 0; l < s; ++l) {
        auto& rec = segmap.records[l];
        const double n = static_cast<double>(rec.pixel_count);
        rec.p_pan = static_cast<double>(below[l]) / n;
        rec.p_ms = ms_n[l] ? ms_sum[l] / static_cast<double>(ms_n[l]) : 0.0;
        rec.p_lan = lan_n[l] ? lan_sum[l] / static_cast<double>(lan_n[l]) : 0.0;
        rec.mp_std = std_sum[l] / n;
    }
    return segmap;
}

LandCover majority_class(const SegmentRecord& record) {
    int best = 0;
    for (int c = 1; c < kLandCoverCount; ++c) {
        if (record.class_votes[c] > record.class_votes[best]) best = c;
    }
    return static_cast<LandCover>(best);
}

void write_segment_table(const SegmentMap& segmap, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# id, pixel_count, w, p_pan, p_ms, p_lan, p_shadow, majority_class\n";
    for (int i = 0; i < segmap.count(); ++i) {
        const auto& r = segmap.records[i];
        out << i << ", " << r.pixel_count << ", " << format_double(r.w) << ", " << format_double(r.p_pan) << ", "
            << format_double(r.p_ms) << ", " << format_double(r.p_lan) << ", " << format_double(r.p_shadow) << ", "
            << to_string(majority_class(r)) << '\n';
    }
    if (!out) throw IoError("write failed on " + path.string());
}

std::vector<SegmentTableRow> read_segment_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open segment table " + path.string());
    std::vector<SegmentTableRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = split(t, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 8) throw IoError(where + ": expected 8 fields");
        SegmentTableRow row;
        try {
            row.id = static_cast<int>(parse_int(f[0], "id"));
            row.pixel_count = static_cast<std::size_t>(parse_int(f[1], "pixel_count"));
            row.w = parse_double(f[2], "w");
            row.p_pan = parse_double(f[3], "p_pan");
            row.p_ms = parse_double(f[4], "p_ms");
            row.p_lan = parse_double(f[5], "p_lan");
            row.p_shadow = parse_double(f[6], "p_shadow");
        } catch (const ConfigError& e) {
            throw IoError(where + ": " + e.what());
        }
        auto c = parse_land_cover(f[7]);
        if (!c) throw IoError(where + ": unknown class '" + f[7] + "'");
        row.majority = *c;
        rows.push_back(row);
    }
    return rows;
}

RasterGrid labels_to_raster(const SegmentMap& segmap) {
    if (segmap.count() > (1 << 24)) throw ComputeError("too many segments for a float32 label raster");
    RasterGrid out(segmap.geometry, {"segment"});
    auto d = out.band(0);
    for (std::size_t i = 0; i < segmap.labels.size(); ++i) d[i] = static_cast<float>(segmap.labels[i]);
    return out;
}

std::vector<int> labels_from_raster(const RasterGrid& raster) {
    std::vector<int> labels(raster.pixel_count());
    auto d = raster.band(0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const float v = d[i];
        if (!(v >= 0.0f) || v != std::floor(v)) throw ComputeError("segment raster holds a non-integer label");
        labels[i] = static_cast<int>(v);
    }
    return labels;
}

}  // namespace hydrofuse

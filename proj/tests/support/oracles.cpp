#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double joint_table_marginal(double p_a, double p_b, double weight_b) {
    // table[child][a][b], index 1 = water
    double table[2][2][2];
    const double pa[2] = {1.0 - p_a, p_a};
    const double pb[2] = {1.0 - p_b, p_b};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int child = 0; child < 2; ++child) {
                double cpd;
                if (a == b) cpd = child == a ? 1.0 : 0.0;
                else if (child == b) cpd = weight_b;
                else cpd = 1.0 - weight_b;
                table[child][a][b] = cpd * pa[a] * pb[b];
            }
        }
    }
    double water = 0.0, total = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            water += table[1][a][b];
            total += table[0][a][b] + table[1][a][b];
        }
    }
    (void)total;
    return water;
}

double fuse_pm(double p_pan, double p_ms, double w, double p_shadow, int n1, double r_ms) {
    const double t = (w / (n1 * r_ms) + p_shadow) / 2.0;
    return joint_table_marginal(p_pan, p_ms, 1.0 / (1.0 + std::exp(-t)));
}

double fuse_w(double p_pm, double p_lan, double w, int n2, double r_l) {
    const double scale = n2 * r_l;
    const double weight = w >= scale ? 1.0 / (1.0 + std::exp(-w / scale)) : 0.0;
    return joint_table_marginal(p_pm, p_lan, weight);
}

hydrofuse::RasterGrid nearest_resample(const hydrofuse::RasterGrid& src, const hydrofuse::GridGeometry& target) {
    const auto& sg = src.geometry();
    hydrofuse::RasterGrid out(target, src.band_names(), 0.0f, src.nodata());
    for (int r = 0; r < target.height; ++r) {
        for (int c = 0; c < target.width; ++c) {
            const double x = target.center_x(c), y = target.center_y(r);
            double best = std::numeric_limits<double>::infinity();
            int br = -1, bc = -1;
            for (int sr = 0; sr < sg.height; ++sr) {
                for (int sc = 0; sc < sg.width; ++sc) {
                    const double d = std::hypot(sg.center_x(sc) - x, sg.center_y(sr) - y);
                    if (d < best) {
                        best = d;
                        br = sr;
                        bc = sc;
                    }
                }
            }
            for (int b = 0; b < src.bands(); ++b) out.at(b, r, c) = src.at(b, br, bc);
        }
    }
    return out;
}

std::vector<double> window_mean(const hydrofuse::BinaryMask& mask, int window) {
    const auto& g = mask.geometry;
    const int half = window / 2;
    std::vector<double> out(g.pixel_count());
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            double sum = 0.0, n = 0.0;
            for (int rr = r - half; rr <= r + half; ++rr) {
                for (int cc = c - half; cc <= c + half; ++cc) {
                    if (!g.contains(rr, cc)) continue;
                    sum += mask.at(rr, cc);
                    n += 1.0;
                }
            }
            out[g.index(r, c)] = sum / n;
        }
    }
    return out;
}

int otsu_best_bin(const std::vector<double>& values) {
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    std::vector<int> bins;
    for (double v : values) bins.push_back(std::min(255, static_cast<int>(std::floor((v - lo) / (hi - lo) * 256.0))));
    int best_bin = 0;
    double best = -1.0;
    for (int t = 0; t < 256; ++t) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (int b : bins) {
            if (b <= t) {
                n0 += 1;
                s0 += b;
            } else {
                n1 += 1;
                s1 += b;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        const double n = n0 + n1;
        const double between = (n0 / n) * (n1 / n) * std::pow(s0 / n0 - s1 / n1, 2);
        if (between > best * (1.0 + 1e-12)) {
            best = between;
            best_bin = t;
        }
    }
    return best_bin;
}

namespace {

std::vector<float> extremum(const std::vector<float>& img, int w, int h, int r0, int r1, int c0, int c1, bool take_min,
                            bool reflect) {
    std::vector<float> out(img.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            float v = take_min ? std::numeric_limits<float>::infinity() : -std::numeric_limits<float>::infinity();
            for (int dr = r0; dr <= r1; ++dr) {
                for (int dc = c0; dc <= c1; ++dc) {
                    const int rr = std::clamp(r + (reflect ? -dr : dr), 0, h - 1);
                    const int cc = std::clamp(c + (reflect ? -dc : dc), 0, w - 1);
                    const float s = img[static_cast<std::size_t>(rr) * w + cc];
                    v = take_min ? std::min(v, s) : std::max(v, s);
                }
            }
            out[static_cast<std::size_t>(r) * w + c] = v;
        }
    }
    return out;
}

}  // namespace

std::vector<float> erode(const std::vector<float>& img, int w, int h, int r0, int r1, int c0, int c1) {
    return extremum(img, w, h, r0, r1, c0, c1, true, false);
}

std::vector<float> dilate(const std::vector<float>& img, int w, int h, int r0, int r1, int c0, int c1) {
    return extremum(img, w, h, r0, r1, c0, c1, false, true);
}

std::vector<std::size_t> perimeters(const std::vector<int>& labels, int w, int h, int count) {
    std::vector<std::size_t> out(count, 0);
    const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int l = labels[static_cast<std::size_t>(r) * w + c];
            for (int k = 0; k < 4; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || cc < 0 || rr >= h || cc >= w || labels[static_cast<std::size_t>(rr) * w + cc] != l) {
                    ++out[l];
                }
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> shadow_marks(const std::vector<std::uint8_t>& objects, int w, int h, double a, double b,
                                       double r, const std::vector<double>& heights) {
    std::vector<std::uint8_t> out(objects.size(), 0);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            if (!objects[static_cast<std::size_t>(row) * w + col]) continue;
            for (double z : heights) {
                const long long c = std::llround(col + a * z / r);
                const long long rr = std::llround(row + b * z / r);
                if (c >= 0 && rr >= 0 && c < w && rr < h) out[static_cast<std::size_t>(rr) * w + c] = 1;
            }
        }
    }
    return out;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> m, int d) {
    auto at = [&](int i, int j) -> double& { return m[static_cast<std::size_t>(i) * d + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) off += at(i, j) * at(i, j);
        }
        if (off < 1e-30) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                if (at(p, q) == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double kp = at(k, p), kq = at(k, q);
                    at(k, p) = c * kp - s * kq;
                    at(k, q) = s * kp + c * kq;
                }
                for (int k = 0; k < d; ++k) {
                    const double pk = at(p, k), qk = at(q, k);
                    at(p, k) = c * pk - s * qk;
                    at(q, k) = s * pk + c * qk;
                }
            }
        }
    }
    std::vector<double> ev;
    for (int i = 0; i < d; ++i) ev.push_back(at(i, i));
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

double isotropic_posterior(const std::vector<double>& x, const std::vector<double>& m0,
                           const std::vector<double>& m1, double variance) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d0 += (x[i] - m0[i]) * (x[i] - m0[i]);
        d1 += (x[i] - m1[i]) * (x[i] - m1[i]);
    }
    return 1.0 / (1.0 + std::exp((d0 - d1) / (2.0 * variance)));
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "geontd/encoding.hpp"
#include "geontd/errors.hpp"
#include "geontd/ntd.hpp"
#include "geontd/patterns.hpp"

namespace geontd {

// ---- synthetic data ----------------------------------------------------------------------

struct LabeledPoints {
    std::size_t dims = 0;
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
    std::vector<char> is_noise;
};

struct GaussianPatternSpec {
    std::vector<std::vector<double>> means;  // one target mean per pattern
    std::vector<std::size_t> counts;         // samples per target
    std::vector<double> noise;               // share of each target's samples replaced by noise
    double sigma = 1.0;
    double inflate_sigmas = 3.0;  // noise box = bounding box of clean samples grown by this many sigma
};

inline LabeledPoints sample_gaussian_patterns(const GaussianPatternSpec& spec, std::uint64_t seed) {
    const std::size_t t = spec.means.size();
    if (t == 0) throw InputError("gaussian generator: no targets");
    if (spec.counts.size() != t || spec.noise.size() != t)
        throw InputError("gaussian generator: counts and noise must have one entry per target");
    if (!(spec.sigma > 0.0)) throw InputError("gaussian generator: sigma must be positive");
    const std::size_t d = spec.means.front().size();
    for (const auto& m : spec.means)
        if (m.size() != d) throw InputError("gaussian generator: targets differ in dimension");
    for (double f : spec.noise)
        if (f < 0.0 || f > 1.0) throw InputError("gaussian generator: noise share outside [0, 1]");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, spec.sigma);
    LabeledPoints out;
    out.dims = d;
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < spec.counts[i]; ++c) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = spec.means[i][k] + normal(rng);
            out.points.push_back(std::move(p));
            out.labels.push_back(static_cast<int>(i));
            out.is_noise.push_back(0);
        }
    if (out.points.empty()) return out;
    std::vector<double> lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& p : out.points)
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    for (std::size_t k = 0; k < d; ++k) {
        lo[k] -= spec.inflate_sigmas * spec.sigma;
        hi[k] += spec.inflate_sigmas * spec.sigma;
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < t; ++i) {
        const std::size_t c = spec.counts[i];
        const auto replace = static_cast<std::size_t>(std::llround(spec.noise[i] * static_cast<double>(c)));
        std::vector<std::size_t> order(c);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::sort(order.begin(), order.begin() + replace);
        for (std::size_t r = 0; r < replace; ++r) {
            auto& p = out.points[offset + order[r]];
            for (std::size_t k = 0; k < d; ++k) p[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
            out.is_noise[offset + order[r]] = 1;
        }
        offset += c;
    }
    return out;
}

struct Box {
    std::size_t count = 0;
    std::vector<std::pair<double, double>> ranges;
};

struct BoxClusterSpec {
    std::vector<Box> boxes;
};

// Ten axis-aligned clusters in six attributes, five large and five small.
inline BoxClusterSpec box_benchmark_spec() {
    using R = std::pair<double, double>;
    BoxClusterSpec s;
    s.boxes = {
        {500, {R{1, 10}, R{1, 5}, R{1, 30000}, R{1, 50}, R{1, 60}, R{1, 7}}},
        {600, {R{11, 20}, R{6, 10}, R{31000, 60000}, R{51, 70}, R{61, 90}, R{8, 11}}},
        {700, {R{21, 30}, R{11, 15}, R{61000, 80000}, R{71, 90}, R{91, 120}, R{12, 16}}},
        {800, {R{31, 40}, R{16, 21}, R{81000, 100000}, R{91, 120}, R{121, 150}, R{17, 21}}},
        {900, {R{41, 50}, R{22, 30}, R{101000, 130000}, R{121, 150}, R{151, 180}, R{22, 27}}},
        {10, {R{51, 60}, R{1, 5}, R{61000, 80000}, R{91, 120}, R{121, 150}, R{22, 27}}},
        {10, {R{21, 30}, R{31, 40}, R{1, 30000}, R{71, 90}, R{151, 180}, R{17, 21}}},
        {10, {R{31, 40}, R{11, 15}, R{131000, 150000}, R{121, 150}, R{91, 120}, R{12, 16}}},
        {10, {R{41, 50}, R{1, 5}, R{101000, 130000}, R{151, 180}, R{61, 90}, R{17, 21}}},
        {15, {R{1, 10}, R{6, 10}, R{61000, 80000}, R{91, 120}, R{121, 150}, R{22, 27}}},
    };
    return s;
}

inline LabeledPoints generate_box_clusters(const BoxClusterSpec& spec, std::uint64_t seed) {
    if (spec.boxes.empty()) throw InputError("box generator: no boxes");
    const std::size_t d = spec.boxes.front().ranges.size();
    std::mt19937_64 rng(seed);
    LabeledPoints out;
    out.dims = d;
    for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
        const Box& box = spec.boxes[b];
        if (box.ranges.size() != d) throw InputError("box generator: boxes differ in dimension");
        for (auto [lo, hi] : box.ranges)
            if (!(lo <= hi)) throw InputError("box generator: empty range");
        for (std::size_t c = 0; c < box.count; ++c) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k)
                p[k] = std::uniform_real_distribution<double>(box.ranges[k].first, box.ranges[k].second)(rng);
            out.points.push_back(std::move(p));
            out.labels.push_back(static_cast<int>(b));
            out.is_noise.push_back(0);
        }
    }
    return out;
}

// ---- clustering scores -------------------------------------------------------------------

struct ScoreReport {
    double fmi = 0.0;
    double ari = 0.0;
    double v_measure = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double mutual_info = 0.0;      // nats
    double normalized_mi = 0.0;   // MI / sqrt(H(true) H(pred))
};

namespace detail {
struct Contingency {
    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> rows, cols;
    double n = 0.0;
};
inline Contingency contingency(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size()) throw InputError("scores: label vectors differ in length");
    Contingency c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        c.cells[{truth[i], pred[i]}] += 1.0;
        c.rows[truth[i]] += 1.0;
        c.cols[pred[i]] += 1.0;
    }
    c.n = static_cast<double>(truth.size());
    return c;
}
inline double comb2(double x) { return x * (x - 1.0) / 2.0; }
inline double entropy(const std::map<int, double>& counts, double n) {
    double h = 0.0;
    for (const auto& [_, c] : counts)
        if (c > 0) h -= c / n * std::log(c / n);
    return h;
}
}  // namespace detail

inline ScoreReport clustering_scores(const std::vector<int>& truth, const std::vector<int>& pred) {
    auto c = detail::contingency(truth, pred);
    ScoreReport s;
    if (c.n == 0) throw InputError("scores: empty labelings");

    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [_, v] : c.cells) sum_cells += detail::comb2(v);
    for (const auto& [_, v] : c.rows) sum_rows += detail::comb2(v);
    for (const auto& [_, v] : c.cols) sum_cols += detail::comb2(v);
    const double total = detail::comb2(c.n);

    const double expected = total > 0 ? sum_rows * sum_cols / total : 0.0;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    s.ari = (max_index == expected) ? 1.0 : (sum_cells - expected) / (max_index - expected);

    // pair counts: tp = same/same, tp+fp = same in pred, tp+fn = same in truth
    s.fmi = (sum_cells == 0.0) ? 0.0 : sum_cells / std::sqrt(sum_rows * sum_cols);

    double mi = 0.0;
    for (const auto& [key, v] : c.cells)
        mi += v / c.n * std::log(c.n * v / (c.rows[key.first] * c.cols[key.second]));
    const double h_true = detail::entropy(c.rows, c.n), h_pred = detail::entropy(c.cols, c.n);
    s.mutual_info = std::max(mi, 0.0);
    if (c.rows.size() == 1 && c.cols.size() == 1)
        s.normalized_mi = 1.0;
    else if (h_true == 0.0 || h_pred == 0.0)
        s.normalized_mi = 0.0;
    else
        s.normalized_mi = s.mutual_info / std::sqrt(h_true * h_pred);

    // H(C|K) = H(C) - MI
    s.homogeneity = h_true == 0.0 ? 1.0 : 1.0 - (h_true - s.mutual_info) / h_true;
    s.completeness = h_pred == 0.0 ? 1.0 : 1.0 - (h_pred - s.mutual_info) / h_pred;
    s.v_measure = (s.homogeneity + s.completeness == 0.0)
                      ? 0.0
                      : 2.0 * s.homogeneity * s.completeness / (s.homogeneity + s.completeness);
    return s;
}

// ---- assignment --------------------------------------------------------------------------

// Minimum-cost assignment of rows to distinct columns (rows <= cols). Returns column per row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost.front().size();
    if (m < n) throw InputError("hungarian: more rows than columns");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Per-target EMD to its matched recovered pattern under a minimum-total-cost one-to-one
// matching. Targets left without a partner get +infinity.
inline std::vector<double> recovery_error(const std::vector<std::vector<int>>& targets,
                                          const std::vector<std::vector<int>>& recovered) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> err(targets.size(), inf);
    if (targets.empty() || recovered.empty()) return err;
    std::vector<std::vector<double>> c(targets.size(), std::vector<double>(recovered.size()));
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t j = 0; j < recovered.size(); ++j) c[i][j] = emd(targets[i], recovered[j]);
    if (targets.size() <= recovered.size()) {
        auto match = hungarian(c);
        for (std::size_t i = 0; i < targets.size(); ++i) err[i] = c[i][match[i]];
    } else {
        std::vector<std::vector<double>> ct(recovered.size(), std::vector<double>(targets.size()));
        for (std::size_t i = 0; i < targets.size(); ++i)
            for (std::size_t j = 0; j < recovered.size(); ++j) ct[j][i] = c[i][j];
        auto match = hungarian(ct);
        for (std::size_t j = 0; j < recovered.size(); ++j) err[match[j]] = c[match[j]][j];
    }
    return err;
}

// ---- regression --------------------------------------------------------------------------

struct OLSFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline OLSFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InputError("ols: x and y differ in length");
    if (x.size() < 2) throw InputError("ols: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InputError("ols: x is constant");
    OLSFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy == 0.0) {
        f.r2 = 0.0;
    } else {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            sse += r * r;
        }
        f.r2 = 1.0 - sse / syy;
    }
    return f;
}

// ---- baselines ---------------------------------------------------------------------------

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// Lloyd iterations from k-means++ seeds; best of `restarts` by inertia.
inline std::vector<int> kmeans(const std::vector<std::vector<double>>& pts, std::size_t k, std::uint64_t seed,
                               std::size_t restarts = 10, std::size_t max_iters = 300) {
    const std::size_t n = pts.size();
    if (k == 0 || k > n) throw InputError("kmeans: k must be in [1, number of points]");
    std::mt19937_64 rng(seed);
    std::vector<int> best_labels;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        std::vector<std::vector<double>> centers;
        centers.push_back(pts[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
        std::vector<double> d2(n);
        while (centers.size() < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) best = std::min(best, sq_dist(pts[i], c));
                d2[i] = best;
                total += best;
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                double target = std::uniform_real_distribution<double>(0.0, total)(rng);
                for (pick = 0; pick + 1 < n && target >= d2[pick]; ++pick) target -= d2[pick];
            } else {
                pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            }
            centers.push_back(pts[pick]);
        }
        std::vector<int> labels(n, -1);
        double inertia = 0.0;
        for (std::size_t it = 0; it < max_iters; ++it) {
            bool changed = false;
            inertia = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                int best_c = 0;
                double best = sq_dist(pts[i], centers[0]);
                for (std::size_t c = 1; c < k; ++c) {
                    const double dd = sq_dist(pts[i], centers[c]);
                    if (dd < best) {
                        best = dd;
                        best_c = static_cast<int>(c);
                    }
                }
                inertia += best;
                if (labels[i] != best_c) {
                    labels[i] = best_c;
                    changed = true;
                }
            }
            if (!changed) break;
            std::vector<std::vector<double>> sums(k, std::vector<double>(pts[0].size(), 0.0));
            std::vector<std::size_t> sizes(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++sizes[labels[i]];
                for (std::size_t d = 0; d < pts[i].size(); ++d) sums[labels[i]][d] += pts[i][d];
            }
            for (std::size_t c = 0; c < k; ++c)
                if (sizes[c])
                    for (std::size_t d = 0; d < sums[c].size(); ++d) centers[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
        }
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

// Ward agglomeration on Euclidean distance via the nearest-neighbour chain, cut at k clusters.
inline std::vector<int> ward_clustering(const std::vector<std::vector<double>>& pts, std::size_t k) {
    const std::size_t n = pts.size();
    if (k == 0 || k > n) throw InputError("ward: k must be in [1, number of points]");
    // condensed squared distances, Lance-Williams on the Ward criterion
    auto idx = [n](std::size_t i, std::size_t j) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i + 1) / 2 + (j - i - 1);
    };
    std::vector<double> d(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[idx(i, j)] = sq_dist(pts[i], pts[j]);
    std::vector<double> size(n, 1.0);
    std::vector<char> active(n, 1);
    struct Merge {
        std::size_t a, b;
        double h;
    };
    std::vector<Merge> merges;
    std::vector<std::size_t> chain;
    std::size_t remaining = n;
    while (remaining > 1) {
        if (chain.empty()) {
            for (std::size_t i = 0; i < n; ++i)
                if (active[i]) {
                    chain.push_back(i);
                    break;
                }
        }
        while (true) {
            const std::size_t a = chain.back();
            std::size_t best = n;
            double bd = std::numeric_limits<double>::infinity();
            if (chain.size() > 1) {
                best = chain[chain.size() - 2];
                bd = d[idx(a, best)];
            }
            for (std::size_t x = 0; x < n; ++x)
                if (active[x] && x != a && d[idx(a, x)] < bd) {
                    bd = d[idx(a, x)];
                    best = x;
                }
            if (chain.size() > 1 && best == chain[chain.size() - 2]) break;
            chain.push_back(best);
        }
        const std::size_t b = chain.back();
        chain.pop_back();
        const std::size_t a = chain.back();
        chain.pop_back();
        const double h = d[idx(a, b)];
        const std::size_t keep = std::min(a, b), drop = std::max(a, b);
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a || x == b) continue;
            const double t = size[a] + size[b] + size[x];
            d[idx(keep, x)] = ((size[a] + size[x]) * d[idx(a, x)] + (size[b] + size[x]) * d[idx(b, x)] - size[x] * h) / t;
        }
        size[keep] = size[a] + size[b];
        active[drop] = 0;
        merges.push_back({keep, drop, h});
        --remaining;
    }
    // replay the cheapest n-k merges with union-find
    std::vector<std::size_t> order(merges.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return merges[x].h < merges[y].h; });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < n - k; ++m) {
        const auto& mg = merges[order[m]];
        parent[find(mg.b)] = find(mg.a);
    }
    std::map<std::size_t, int> ids;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = find(i);
        auto it = ids.find(r);
        if (it == ids.end()) it = ids.emplace(r, static_cast<int>(ids.size())).first;
        labels[i] = it->second;
    }
    return labels;
}

// ---- pattern pipeline on point sets ------------------------------------------------------

struct PointPipelineConfig {
    std::size_t bins = 4;
    std::size_t rank = 3;
    std::size_t clusters = 3;
    std::size_t top_k = 512;
    double threshold = 1e-6;
    std::uint64_t seed = 0;
    std::size_t max_iters = 500;
    double tol = 1e-6;
};

struct PointPipelineResult {
    TensorDataset dataset;
    NTDModel model;
    PatternSet patterns;
    std::vector<int> labels;  // pattern index per input point
};

inline TensorDataset tensorize_points(const LabeledPoints& pts, std::size_t bins) {
    std::vector<FeatureRow> rows;
    rows.reserve(pts.points.size());
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        FeatureRow r{"p" + std::to_string(i), {}};
        for (double v : pts.points[i]) r.values.emplace_back(v);
        rows.push_back(std::move(r));
    }
    std::vector<ModeSpec> specs;
    for (std::size_t d = 0; d < pts.dims; ++d) specs.push_back({"x" + std::to_string(d + 1), ModeKind::BinnedCount, bins, {}, {}});
    return build_tensor(rows, specs);
}

inline PointPipelineResult run_point_pipeline(const LabeledPoints& pts, const PointPipelineConfig& cfg) {
    PointPipelineResult r;
    r.dataset = tensorize_points(pts, cfg.bins);
    NTDConfig nc;
    for (std::size_t s : r.dataset.shape()) nc.ranks.push_back(std::min(cfg.rank, s));
    nc.seed = cfg.seed;
    nc.max_iters = cfg.max_iters;
    nc.tol = cfg.tol;
    r.model = fit_ntd(r.dataset.tensor, nc);
    r.patterns = extract_patterns(r.model, r.dataset, {cfg.clusters, cfg.top_k, cfg.threshold});
    for (std::size_t p : r.patterns.site_pattern) r.labels.push_back(static_cast<int>(p));
    return r;
}

// Semantic ids of a point under the dataset's bin edges.
inline std::vector<int> signature_of_point(const TensorDataset& ds, const std::vector<double>& p) {
    std::vector<int> ids;
    for (std::size_t k = 0; k < ds.modes.size(); ++k) ids.push_back(ds.modes[k].id_of(bin_of(ds.modes[k].edges, p[k])));
    return ids;
}

struct RankSweepRow {
    std::size_t rank = 0;
    std::vector<double> target_errors;
    double mean_error = 0.0;
    std::size_t iterations = 0;
    double relative_error = 0.0;
};

inline RankSweepRow recovery_at_rank(const LabeledPoints& pts, const std::vector<std::vector<double>>& targets,
                                     PointPipelineConfig cfg, std::size_t rank) {
    cfg.rank = rank;
    auto res = run_point_pipeline(pts, cfg);
    std::vector<std::vector<int>> tsig, rsig;
    for (const auto& t : targets) tsig.push_back(signature_of_point(res.dataset, t));
    for (const auto& m : res.patterns.medoids) rsig.push_back(m.ids);
    RankSweepRow row;
    row.rank = rank;
    row.target_errors = recovery_error(tsig, rsig);
    row.mean_error = std::accumulate(row.target_errors.begin(), row.target_errors.end(), 0.0) /
                     static_cast<double>(std::max<std::size_t>(row.target_errors.size(), 1));
    row.iterations = res.model.iterations;
    row.relative_error = res.model.relative_error();
    return row;
}

inline std::vector<RankSweepRow> run_rank_sweep(const LabeledPoints& pts, const std::vector<std::vector<double>>& targets,
                                                const std::vector<std::size_t>& ranks, const PointPipelineConfig& cfg) {
    std::vector<RankSweepRow> rows;
    for (std::size_t j : ranks) rows.push_back(recovery_at_rank(pts, targets, cfg, j));
    return rows;
}

}  // namespace geontd

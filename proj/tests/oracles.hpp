#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>

// Reference implementations that share no code with the library.
namespace oracle {

struct PairScores {
    double ari, fmi;
};

// Counts over the n(n-1)/2 point pairs.
inline PairScores pair_counting(const std::vector<int>& t, const std::vector<int>& p) {
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const bool st = t[i] == t[j], sp = p[i] == p[j];
            if (st && sp) ++a;
            else if (st) ++b;
            else if (sp) ++c;
            else ++d;
        }
    const double den = (a + b) * (b + d) + (a + c) * (c + d);
    PairScores s;
    s.ari = den == 0 ? 1.0 : 2.0 * (a * d - b * c) / den;
    s.fmi = a == 0 ? 0.0 : a / std::sqrt((a + b) * (a + c));
    return s;
}

struct InfoScores {
    double mi, homogeneity, completeness, v_measure;
};

inline InfoScores information(const std::vector<int>& t, const std::vector<int>& p) {
    const double n = static_cast<double>(t.size());
    std::set<int> tl(t.begin(), t.end()), pl(p.begin(), p.end());
    auto count = [&](int ct, int cp, bool use_t, bool use_p) {
        double k = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            if ((!use_t || t[i] == ct) && (!use_p || p[i] == cp)) ++k;
        return k;
    };
    double mi = 0, h_t = 0, h_p = 0, h_t_given_p = 0, h_p_given_t = 0;
    for (int a : tl) {
        const double na = count(a, 0, true, false);
        h_t -= na / n * std::log(na / n);
    }
    for (int b : pl) {
        const double nb = count(0, b, false, true);
        h_p -= nb / n * std::log(nb / n);
    }
    for (int a : tl)
        for (int b : pl) {
            const double nab = count(a, b, true, true);
            if (nab == 0) continue;
            const double na = count(a, 0, true, false), nb = count(0, b, false, true);
            mi += nab / n * std::log((nab / n) / ((na / n) * (nb / n)));
            h_t_given_p -= nab / n * std::log(nab / nb);
            h_p_given_t -= nab / n * std::log(nab / na);
        }
    InfoScores s;
    s.mi = mi;
    s.homogeneity = h_t == 0 ? 1.0 : 1.0 - h_t_given_p / h_t;
    s.completeness = h_p == 0 ? 1.0 : 1.0 - h_p_given_t / h_p;
    s.v_measure = s.homogeneity + s.completeness == 0 ? 0.0
                                                      : 2 * s.homogeneity * s.completeness / (s.homogeneity + s.completeness);
    return s;
}

// Optimal transport between two equal-mass integer histograms with ground cost |i - j|,
// solved as a min-cost flow by successive shortest paths (Bellman-Ford).
inline long long transport_cost(const std::vector<int>& a, const std::vector<int>& b) {
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    const int src = n + m, snk = n + m + 1, v = n + m + 2;
    struct Edge {
        int to;
        long long cap, cost;
        int rev;
    };
    std::vector<std::vector<Edge>> g(v);
    auto add = [&](int x, int y, long long cap, long long cost) {
        g[x].push_back({y, cap, cost, static_cast<int>(g[y].size())});
        g[y].push_back({x, 0, -cost, static_cast<int>(g[x].size()) - 1});
    };
    long long need = 0;
    for (int i = 0; i < n; ++i) {
        add(src, i, a[i], 0);
        need += a[i];
    }
    for (int j = 0; j < m; ++j) add(n + j, snk, b[j], 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) add(i, n + j, std::numeric_limits<int>::max(), std::abs(i - j));
    long long flow = 0, cost = 0;
    const long long inf = std::numeric_limits<long long>::max() / 4;
    while (flow < need) {
        std::vector<long long> dist(v, inf);
        std::vector<int> pv(v, -1), pe(v, -1);
        dist[src] = 0;
        for (int it = 0; it < v; ++it) {
            bool changed = false;
            for (int x = 0; x < v; ++x) {
                if (dist[x] == inf) continue;
                for (int e = 0; e < static_cast<int>(g[x].size()); ++e) {
                    const Edge& ed = g[x][e];
                    if (ed.cap > 0 && dist[x] + ed.cost < dist[ed.to]) {
                        dist[ed.to] = dist[x] + ed.cost;
                        pv[ed.to] = x;
                        pe[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[snk] == inf) break;
        long long push = need - flow;
        for (int x = snk; x != src; x = pv[x]) push = std::min(push, g[pv[x]][pe[x]].cap);
        for (int x = snk; x != src; x = pv[x]) {
            Edge& ed = g[pv[x]][pe[x]];
            ed.cap -= push;
            g[x][ed.rev].cap += push;
        }
        flow += push;
        cost += push * dist[snk];
    }
    return cost;
}

struct Line {
    double slope, intercept;
};

// Solves [n, Sx; Sx, Sxx] [b; m] = [Sy; Sxy] with a pivoted LU.
inline Line normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) {
        a(0, 0) += 1;
        a(0, 1) += x[i];
        a(1, 1) += x[i] * x[i];
        rhs(0) += y[i];
        rhs(1) += x[i] * y[i];
    }
    a(1, 0) = a(0, 1);
    Eigen::Vector2d sol = a.fullPivLu().solve(rhs);
    return {sol(1), sol(0)};
}

// Greedy Ward agglomeration recomputing every merge cost from cluster centroids.
inline std::vector<std::set<std::size_t>> naive_ward(const std::vector<std::vector<double>>& pts, std::size_t k) {
    std::vector<std::set<std::size_t>> cl;
    for (std::size_t i = 0; i < pts.size(); ++i) cl.push_back({i});
    auto centroid = [&](const std::set<std::size_t>& c) {
        std::vector<double> m(pts[0].size(), 0.0);
        for (std::size_t i : c)
            for (std::size_t d = 0; d < m.size(); ++d) m[d] += pts[i][d];
        for (double& v : m) v /= static_cast<double>(c.size());
        return m;
    };
    while (cl.size() > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < cl.size(); ++i)
            for (std::size_t j = i + 1; j < cl.size(); ++j) {
                auto ci = centroid(cl[i]), cj = centroid(cl[j]);
                double d2 = 0;
                for (std::size_t d = 0; d < ci.size(); ++d) d2 += (ci[d] - cj[d]) * (ci[d] - cj[d]);
                const double ni = static_cast<double>(cl[i].size()), nj = static_cast<double>(cl[j].size());
                const double cost = ni * nj / (ni + nj) * d2;
                if (cost < best) {
                    best = cost;
                    bi = i;
                    bj = j;
                }
            }
        cl[bi].insert(cl[bj].begin(), cl[bj].end());
        cl.erase(cl.begin() + static_cast<long>(bj));
    }
    return cl;
}

// Average linkage from member lists. Clusters are identified by their smallest member;
// ties go to the lexicographically smallest pair of identifiers.
template <class Dist>
std::vector<std::vector<std::size_t>> naive_average_linkage(std::size_t n, std::size_t m, Dist dist) {
    std::vector<std::vector<std::size_t>> cl;
    for (std::size_t i = 0; i < n; ++i) cl.push_back({i});
    while (cl.size() > m) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < cl.size(); ++i)
            for (std::size_t j = i + 1; j < cl.size(); ++j) {
                double s = 0;
                for (std::size_t a : cl[i])
                    for (std::size_t b : cl[j]) s += dist(a, b);
                s /= static_cast<double>(cl[i].size() * cl[j].size());
                if (s < best) {
                    best = s;
                    bi = i;
                    bj = j;
                }
            }
        cl[bi].insert(cl[bi].end(), cl[bj].begin(), cl[bj].end());
        std::sort(cl[bi].begin(), cl[bi].end());
        cl.erase(cl.begin() + static_cast<long>(bj));
    }
    return cl;
}

inline std::set<std::set<std::size_t>> partition_of(const std::vector<int>& labels) {
    std::map<int, std::set<std::size_t>> by;
    for (std::size_t i = 0; i < labels.size(); ++i) by[labels[i]].insert(i);
    std::set<std::set<std::size_t>> out;
    for (auto& [_, s] : by) out.insert(s);
    return out;
}

}  // namespace oracle

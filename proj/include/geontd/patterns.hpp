#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "geontd/encoding.hpp"
#include "geontd/errors.hpp"
#include "geontd/ntd.hpp"

namespace geontd {

struct Signature {
    std::vector<int> ids;  // semantic id per mode
    double weight = 0.0;
    Cell position;  // core index for core signatures, tensor cell for site signatures
};

// Sum over prefixes of |sum_{j<=i} (a_j - b_j)|: the 1-D transport cost between two
// equal-length id vectors read as histograms over their positions.
template <class T>
double emd(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size())
        throw InputError("emd: vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    double carry = 0.0, total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        carry += static_cast<double>(a[i]) - static_cast<double>(b[i]);
        total += std::abs(carry);
    }
    return total;
}

inline double emd(const Signature& a, const Signature& b) { return emd(a.ids, b.ids); }

// Position of the largest entry in each factor column; the smallest position wins ties.
inline std::vector<std::vector<std::size_t>> factor_argmax(const NTDModel& model) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& f : model.factors) {
        std::vector<std::size_t> col(f.cols(), 0);
        for (std::size_t j = 0; j < f.cols(); ++j)
            for (std::size_t i = 1; i < f.rows(); ++i)
                if (f(i, j) > f(col[j], j)) col[j] = i;
        out.push_back(std::move(col));
    }
    return out;
}

inline std::vector<Signature> core_signatures(const NTDModel& model, const std::vector<ModeEncoding>& modes,
                                              std::size_t top_k = 512, double threshold = 1e-6) {
    if (modes.size() != model.factors.size()) throw InputError("core_signatures: mode count mismatch");
    for (std::size_t k = 0; k < modes.size(); ++k)
        if (modes[k].size() != model.factors[k].rows())
            throw InputError("core_signatures: encoding of mode " + modes[k].name + " does not match factor rows");
    const auto argmax = factor_argmax(model);
    const double gmax = model.core.size() ? model.core.max_value() : 0.0;
    std::vector<std::size_t> picked;
    if (gmax > 0.0)
        for (std::size_t f = 0; f < model.core.size(); ++f)
            if (model.core[f] > threshold * gmax) picked.push_back(f);
    std::stable_sort(picked.begin(), picked.end(),
                     [&](std::size_t a, std::size_t b) { return model.core[a] > model.core[b]; });
    if (picked.size() > top_k) picked.resize(top_k);
    std::vector<Signature> out;
    out.reserve(picked.size());
    for (std::size_t f : picked) {
        Signature s;
        s.weight = model.core[f];
        auto idx = model.core.unravel(f);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            s.position.push_back(static_cast<std::uint32_t>(idx[k]));
            s.ids.push_back(modes[k].id_of(argmax[k][idx[k]]));
        }
        out.push_back(std::move(s));
    }
    return out;
}

struct SignatureClusters {
    std::vector<std::vector<std::size_t>> clusters;  // member indices, ascending; ordered by first member
    std::vector<std::string> diagnostics;
};

// Average-linkage agglomeration on pairwise EMD, stopped at `m` clusters. Each step merges the
// closest pair; equal distances go to the pair with the smallest (i, j) slot indices, where a
// merged cluster keeps the smaller slot.
inline SignatureClusters cluster_signatures(const std::vector<Signature>& sigs, std::size_t m) {
    if (m == 0) throw InputError("cluster_signatures: cluster count must be at least 1");
    SignatureClusters out;
    const std::size_t n = sigs.size();
    if (n == 0) {
        out.diagnostics.push_back("no signatures to cluster");
        return out;
    }
    if (m >= n) {
        if (m > n)
            out.diagnostics.push_back("requested " + std::to_string(m) + " clusters from " + std::to_string(n) +
                                      " signatures; returning singletons");
        for (std::size_t i = 0; i < n; ++i) out.clusters.push_back({i});
        return out;
    }
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = emd(sigs[i], sigs[j]);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::vector<char> active(n, 1);
    std::size_t remaining = n;
    while (remaining > m) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            const double* row = d.data() + i * n;
            for (std::size_t j = i + 1; j < n; ++j)
                if (active[j] && row[j] < best) {
                    best = row[j];
                    bi = i;
                    bj = j;
                }
        }
        const double ni = static_cast<double>(members[bi].size()), nj = static_cast<double>(members[bj].size());
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == bi || x == bj) continue;
            const double v = (ni * d[bi * n + x] + nj * d[bj * n + x]) / (ni + nj);
            d[bi * n + x] = d[x * n + bi] = v;
        }
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        active[bj] = 0;
        --remaining;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
            std::sort(members[i].begin(), members[i].end());
            out.clusters.push_back(std::move(members[i]));
        }
    return out;
}

// Member with the smallest total EMD to the rest of its cluster. Ties: heavier weight, then
// lexicographically smaller ids.
inline std::size_t medoid(const std::vector<Signature>& sigs, const std::vector<std::size_t>& members) {
    if (members.empty()) throw InputError("medoid: empty cluster");
    std::size_t best = members.front();
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t a : members) {
        double cost = 0.0;
        for (std::size_t b : members) cost += emd(sigs[a], sigs[b]);
        bool better = cost < best_cost;
        if (cost == best_cost) {
            if (sigs[a].weight != sigs[best].weight)
                better = sigs[a].weight > sigs[best].weight;
            else
                better = sigs[a].ids < sigs[best].ids;
        }
        if (better) {
            best = a;
            best_cost = cost;
        }
    }
    return best;
}

// One signature per non-empty tensor cell, weighted by its count, in cell order.
inline std::vector<Signature> site_signatures(const TensorDataset& ds) {
    std::vector<Signature> out;
    for (std::size_t e = 0; e < ds.tensor.nnz(); ++e) {
        Signature s;
        const std::uint32_t* ix = ds.tensor.index(e);
        s.position.assign(ix, ix + ds.tensor.order());
        for (std::size_t k = 0; k < ds.tensor.order(); ++k) s.ids.push_back(ds.modes[k].id_of(ix[k]));
        s.weight = ds.tensor.value(e);
        out.push_back(std::move(s));
    }
    return out;
}

// Index of the nearest medoid under EMD; lowest index on ties.
inline std::size_t nearest(const Signature& s, const std::vector<Signature>& medoids) {
    if (medoids.empty()) throw InputError("assign: no patterns to assign to");
    std::size_t best = 0;
    double best_d = emd(s, medoids[0]);
    for (std::size_t i = 1; i < medoids.size(); ++i) {
        const double dd = emd(s, medoids[i]);
        if (dd < best_d) {
            best = i;
            best_d = dd;
        }
    }
    return best;
}

inline std::vector<std::size_t> assign(const std::vector<Signature>& sigs, const std::vector<Signature>& medoids) {
    std::vector<std::size_t> out;
    out.reserve(sigs.size());
    for (const auto& s : sigs) out.push_back(nearest(s, medoids));
    return out;
}

struct PatternSet {
    std::vector<Signature> core_signatures;
    std::vector<std::vector<std::size_t>> clusters;  // indices into core_signatures
    std::vector<Signature> medoids;                  // one per cluster, same order
    std::vector<std::size_t> site_pattern;           // parallel to TensorDataset::site_ids
    std::vector<std::string> diagnostics;
};

struct PatternConfig {
    std::size_t clusters = 3;
    std::size_t top_k = 512;
    double threshold = 1e-6;
};

inline PatternSet extract_patterns(const NTDModel& model, const TensorDataset& ds, const PatternConfig& cfg) {
    PatternSet ps;
    ps.core_signatures = core_signatures(model, ds.modes, cfg.top_k, cfg.threshold);
    auto cl = cluster_signatures(ps.core_signatures, cfg.clusters);
    ps.clusters = std::move(cl.clusters);
    ps.diagnostics = std::move(cl.diagnostics);
    for (const auto& members : ps.clusters) ps.medoids.push_back(ps.core_signatures[medoid(ps.core_signatures, members)]);
    if (ps.medoids.empty()) return ps;
    for (const auto& cell : ds.site_cells) {
        Signature s;
        for (std::size_t k = 0; k < cell.size(); ++k) s.ids.push_back(ds.modes[k].id_of(cell[k]));
        ps.site_pattern.push_back(nearest(s, ps.medoids));
    }
    return ps;
}

}  // namespace geontd

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geontd/errors.hpp"
#include "geontd/tensor.hpp"

namespace geontd {

enum class NTDInit { NonnegHosvd, UniformRandom };
enum class NTDAlgorithm { Multiplicative, Hals };

struct NTDConfig {
    std::vector<std::size_t> ranks;
    std::size_t max_iters = 500;
    double tol = 1e-6;
    NTDInit init = NTDInit::NonnegHosvd;
    NTDAlgorithm algorithm = NTDAlgorithm::Multiplicative;
    std::uint64_t seed = 0;
    double epsilon = 1e-12;
    // HALS sweeps used to refine each per-mode starting point
    std::size_t init_sweeps = 200;
    // repeated block updates per iteration; each repeat reuses the same data contraction
    std::size_t inner_sweeps = 10;
};

struct NTDModel {
    DenseTensor core;
    std::vector<DenseMatrix> factors;  // factors[k] is I_k x J_k, columns sum to 1
    std::vector<double> objective_trace;  // 0.5 * ||X - Xhat||^2 after each accepted iteration
    std::size_t iterations = 0;
    bool converged = false;
    double data_norm = 0.0;

    DenseTensor reconstruct() const { return geontd::reconstruct(core, factors); }

    double relative_error() const {
        if (data_norm == 0.0) return 0.0;
        double obj = objective_trace.empty() ? 0.0 : objective_trace.back();
        return std::sqrt(std::max(0.0, 2.0 * obj)) / data_norm;
    }
};

inline double reconstruction_error(const DenseTensor& x, const NTDModel& m) {
    const double nx = frobenius_norm(x);
    if (nx == 0.0) return 0.0;
    DenseTensor r = m.reconstruct();
    if (r.shape() != x.shape()) throw InputError("reconstruction_error: model shape differs from data");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - r[i]) * (x[i] - r[i]);
    return std::sqrt(acc) / nx;
}

namespace detail {

inline DenseMatrix pinv(const DenseMatrix& f) {
    Eigen::MatrixXd e(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j) e(i, j) = f(i, j);
    Eigen::MatrixXd p = e.completeOrthogonalDecomposition().pseudoInverse();
    DenseMatrix out(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) out(i, j) = p(i, j);
    return out;
}

// X x_m A_m for all m. Sparse contraction over the back half, dense over the front half.
inline DenseTensor project_all(const SparseTensor& x, const std::vector<DenseMatrix>& a, std::size_t split) {
    std::vector<const DenseMatrix*> mats(x.order(), nullptr);
    for (std::size_t m = split; m < x.order(); ++m) mats[m] = &a[m];
    DenseTensor t = contract_sparse(x, mats);
    for (std::size_t m = 0; m < split; ++m) t = mode_product(t, a[m], m);
    return t;
}

// The mode-k unfolding of X restricted to its nonzero columns.
inline Eigen::MatrixXd compressed_unfolding(const SparseTensor& x, std::size_t k) {
    const std::size_t n = x.order();
    std::vector<std::pair<std::vector<std::uint32_t>, std::size_t>> keys;
    keys.reserve(x.nnz());
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const std::uint32_t* ix = x.index(e);
        std::vector<std::uint32_t> key;
        key.reserve(n - 1);
        for (std::size_t m = 0; m < n; ++m)
            if (m != k) key.push_back(ix[m]);
        keys.emplace_back(std::move(key), e);
    }
    std::sort(keys.begin(), keys.end());
    std::size_t cols = 0;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (i == 0 || keys[i].first != keys[i - 1].first) ++cols;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x.shape()[k], std::max<std::size_t>(cols, 1));
    std::size_t c = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i > 0 && keys[i].first != keys[i - 1].first) ++c;
        const std::size_t e = keys[i].second;
        a(x.index(e)[k], c) += x.value(e);
    }
    return a;
}

// Nonnegative rank-r approximation A ~ W H: NNDSVD start, then HALS sweeps. Returns W.
inline Eigen::MatrixXd nmf_left(const Eigen::MatrixXd& a, std::size_t r, std::size_t sweeps, double eps,
                                std::mt19937_64& rng) {
    const Eigen::Index rows = a.rows(), cols = a.cols();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a * a.transpose());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, r);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(r, cols);
    const Eigen::Index avail = es.eigenvalues().size();
    for (std::size_t j = 0; j < r; ++j) {
        const Eigen::Index src = avail - 1 - static_cast<Eigen::Index>(j);
        if (src < 0) break;
        const double s = std::sqrt(std::max(0.0, es.eigenvalues()(src)));
        if (s <= 1e-14 * std::sqrt(std::max(es.eigenvalues()(avail - 1), 0.0))) continue;
        Eigen::VectorXd u = es.eigenvectors().col(src);
        Eigen::VectorXd v = a.transpose() * u / s;
        Eigen::VectorXd up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
        Eigen::VectorXd vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
        const double mp = up.norm() * vp.norm(), mn = un.norm() * vn.norm();
        const bool pos = mp >= mn;
        const double m = pos ? mp : mn;
        if (m <= 0.0) continue;
        const Eigen::VectorXd& uu = pos ? up : un;
        const Eigen::VectorXd& vv = pos ? vp : vn;
        w.col(j) = std::sqrt(s * m) * uu / uu.norm();
        h.row(j) = std::sqrt(s * m) * vv.transpose() / vv.norm();
    }
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    const double wmax = std::max(w.maxCoeff(), 1e-300), hmax = std::max(h.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] += 1e-6 * wmax * jitter(rng);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] += 1e-6 * hmax * jitter(rng);

    for (std::size_t it = 0; it < sweeps; ++it) {
        Eigen::MatrixXd aht = a * h.transpose();
        Eigen::MatrixXd hht = h * h.transpose();
        for (std::size_t j = 0; j < r; ++j) {
            const double d = std::max(hht(j, j), eps);
            w.col(j) = (w.col(j) + (aht.col(j) - w * hht.col(j)) / d).cwiseMax(eps);
        }
        Eigen::MatrixXd wta = w.transpose() * a;
        Eigen::MatrixXd wtw = w.transpose() * w;
        for (std::size_t j = 0; j < r; ++j) {
            const double d = std::max(wtw(j, j), eps);
            h.row(j) = (h.row(j) + (wta.row(j) - wtw.row(j) * h) / d).cwiseMax(eps);
        }
    }
    return w;
}

// Rescale factor columns to unit l1 norm and move the scale into the core. Xhat is unchanged.
inline void normalize_columns(DenseTensor& core, std::vector<DenseMatrix>& factors) {
    for (std::size_t k = 0; k < factors.size(); ++k) {
        DenseMatrix& f = factors[k];
        DenseMatrix scale(f.cols(), f.cols());
        for (std::size_t j = 0; j < f.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < f.rows(); ++i) s += f(i, j);
            if (s <= 0.0) s = 1.0;
            for (std::size_t i = 0; i < f.rows(); ++i) f(i, j) /= s;
            scale(j, j) = s;
        }
        core = mode_product(core, scale, k);
    }
}

struct SolverState {
    DenseTensor core;
    std::vector<DenseMatrix> factors;
};

inline void validate(const Shape& shape, const NTDConfig& cfg) {
    if (cfg.ranks.size() != shape.size())
        throw InputError("ntd: " + std::to_string(cfg.ranks.size()) + " ranks given for an order-" +
                         std::to_string(shape.size()) + " tensor");
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (cfg.ranks[k] == 0) throw InputError("ntd: rank of mode " + std::to_string(k) + " is zero");
        if (cfg.ranks[k] > shape[k])
            throw InputError("ntd: rank " + std::to_string(cfg.ranks[k]) + " exceeds size " +
                             std::to_string(shape[k]) + " of mode " + std::to_string(k));
    }
    if (!(cfg.tol > 0.0)) throw InputError("ntd: tol must be positive");
    if (cfg.max_iters == 0) throw InputError("ntd: max_iters must be at least 1");
    if (!(cfg.epsilon > 0.0)) throw InputError("ntd: epsilon must be positive");
}

}  // namespace detail

class NTDSolver {
public:
    explicit NTDSolver(NTDConfig cfg) : cfg_(std::move(cfg)) {}

    NTDModel fit(const DenseTensor& x) const { return fit(SparseTensor::from_dense(x)); }

    NTDModel fit(const SparseTensor& x) const {
        detail::validate(x.shape(), cfg_);
        for (double v : x.values())
            if (v < 0.0 || !std::isfinite(v)) throw InputError("ntd: data tensor has a negative or non-finite entry");

        const std::size_t n = x.order();
        const double xx = x.squared_norm();
        NTDModel model;
        model.data_norm = std::sqrt(xx);

        if (xx == 0.0) {
            Shape core_shape(cfg_.ranks.begin(), cfg_.ranks.end());
            model.core = DenseTensor(core_shape);
            for (std::size_t k = 0; k < n; ++k)
                model.factors.emplace_back(x.shape()[k], cfg_.ranks[k], 1.0 / static_cast<double>(x.shape()[k]));
            model.objective_trace = {0.0};
            model.converged = true;
            return model;
        }

        std::mt19937_64 rng(cfg_.seed);
        detail::SolverState st = initialize(x, rng);

        double prev = objective_of(x, st, xx);
        for (std::size_t it = 1; it <= cfg_.max_iters; ++it) {
            detail::SolverState next = st;
            const double obj = iterate(x, next, xx);
            if (!(obj <= prev)) {
                // numerical noise at the optimum; keep the last accepted state
                model.converged = true;
                break;
            }
            st = std::move(next);
            model.objective_trace.push_back(obj);
            model.iterations = it;
            const double change = (prev - obj) / std::max(prev, std::numeric_limits<double>::min());
            prev = obj;
            if (obj == 0.0 || change < cfg_.tol) {
                model.converged = true;
                break;
            }
        }
        if (model.objective_trace.empty()) model.objective_trace.push_back(prev);
        model.core = std::move(st.core);
        model.factors = std::move(st.factors);
        return model;
    }

private:
    detail::SolverState initialize(const SparseTensor& x, std::mt19937_64& rng) const {
        const std::size_t n = x.order();
        detail::SolverState st;
        if (cfg_.init == NTDInit::NonnegHosvd) {
            for (std::size_t k = 0; k < n; ++k) {
                if (cfg_.ranks[k] == x.shape()[k]) {
                    // full rank: the identity is an exact nonnegative basis for this mode
                    DenseMatrix f(x.shape()[k], cfg_.ranks[k]);
                    for (std::size_t i = 0; i < f.rows(); ++i) f(i, i) = 1.0;
                    st.factors.push_back(std::move(f));
                    continue;
                }
                Eigen::MatrixXd w = detail::nmf_left(detail::compressed_unfolding(x, k), cfg_.ranks[k],
                                                     cfg_.init_sweeps, cfg_.epsilon, rng);
                DenseMatrix f(w.rows(), w.cols());
                for (Eigen::Index i = 0; i < w.rows(); ++i)
                    for (Eigen::Index j = 0; j < w.cols(); ++j) f(i, j) = w(i, j);
                st.factors.push_back(std::move(f));
            }
            Shape core_shape(cfg_.ranks.begin(), cfg_.ranks.end());
            st.core = DenseTensor(core_shape, 1.0);
            detail::normalize_columns(st.core, st.factors);
            std::vector<DenseMatrix> pinvs;
            for (const auto& f : st.factors) pinvs.push_back(detail::pinv(f));
            st.core = detail::project_all(x, pinvs, split_of(n));
            const double gmax = std::max(st.core.max_value(), 0.0);
            std::uniform_real_distribution<double> jitter(0.5, 1.0);
            for (double& g : st.core.values()) g = std::max(g, 0.0) + 1e-6 * gmax * jitter(rng);
            if (gmax == 0.0) fit_scale(x, st);
        } else {
            std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), 1.0);
            for (std::size_t k = 0; k < n; ++k) {
                DenseMatrix f(x.shape()[k], cfg_.ranks[k]);
                for (double& v : f.values()) v = u(rng);
                st.factors.push_back(std::move(f));
            }
            Shape core_shape(cfg_.ranks.begin(), cfg_.ranks.end());
            st.core = DenseTensor(core_shape);
            for (double& v : st.core.values()) v = u(rng);
            detail::normalize_columns(st.core, st.factors);
            fit_scale(x, st);
        }
        return st;
    }

    // Rescales the core by the least-squares optimal scalar.
    void fit_scale(const SparseTensor& x, detail::SolverState& st) const {
        std::vector<DenseMatrix> ft;
        for (const auto& f : st.factors) ft.push_back(f.transpose());
        DenseTensor z = detail::project_all(x, ft, split_of(x.order()));
        DenseTensor gs = st.core;
        for (std::size_t m = 0; m < st.factors.size(); ++m) gs = mode_product(gs, gram(st.factors[m]), m);
        const double num = inner_product(z, st.core), den = inner_product(gs, st.core);
        if (num > 0.0 && den > 0.0)
            for (double& v : st.core.values()) v *= num / den;
    }

    double objective_of(const SparseTensor& x, const detail::SolverState& st, double xx) const {
        std::vector<DenseMatrix> ft;
        for (const auto& f : st.factors) ft.push_back(f.transpose());
        DenseTensor z = detail::project_all(x, ft, split_of(x.order()));
        DenseTensor gs = st.core;
        for (std::size_t m = 0; m < st.factors.size(); ++m) gs = mode_product(gs, gram(st.factors[m]), m);
        return std::max(0.0, 0.5 * (xx - 2.0 * inner_product(z, st.core) + inner_product(gs, st.core)));
    }

    void update_factor(DenseMatrix& f, const DenseMatrix& num, const DenseMatrix& q) const {
        const double eps = cfg_.epsilon;
        if (cfg_.algorithm == NTDAlgorithm::Multiplicative) {
            DenseMatrix den = matmul(f, q);
            for (std::size_t i = 0; i < f.rows(); ++i)
                for (std::size_t j = 0; j < f.cols(); ++j)
                    f(i, j) = std::max(f(i, j) * num(i, j) / std::max(den(i, j), eps), eps);
        } else {
            for (std::size_t j = 0; j < f.cols(); ++j) {
                const double d = std::max(q(j, j), eps);
                for (std::size_t i = 0; i < f.rows(); ++i) {
                    double fq = 0.0;
                    for (std::size_t l = 0; l < f.cols(); ++l) fq += f(i, l) * q(l, j);
                    f(i, j) = std::max(eps, f(i, j) + (num(i, j) - fq) / d);
                }
            }
        }
    }

    // Updates every factor of one half given the data already contracted over the other half.
    void update_group(detail::SolverState& st, std::vector<DenseMatrix>& ft, std::vector<DenseMatrix>& grams,
                      const DenseTensor& contracted, std::size_t lo, std::size_t hi) const {
        const std::size_t n = st.factors.size();
        for (std::size_t k = lo; k < hi; ++k) {
            DenseTensor w = contracted;
            for (std::size_t m = lo; m < hi; ++m)
                if (m != k) w = mode_product(w, ft[m], m);
            DenseMatrix num = mode_gram(w, st.core, k);
            DenseTensor h = st.core;
            for (std::size_t m = 0; m < n; ++m)
                if (m != k) h = mode_product(h, grams[m], m);
            DenseMatrix q = mode_gram(h, st.core, k);
            for (std::size_t r = 0; r < std::max<std::size_t>(cfg_.inner_sweeps, 1); ++r)
                update_factor(st.factors[k], num, q);
            ft[k] = st.factors[k].transpose();
            grams[k] = gram(st.factors[k]);
        }
    }

    double iterate(const SparseTensor& x, detail::SolverState& st, double xx) const {
        const std::size_t n = x.order();
        std::vector<DenseMatrix> ft, grams;
        for (const auto& f : st.factors) {
            ft.push_back(f.transpose());
            grams.push_back(gram(f));
        }
        const std::size_t half = split_of(n);
        std::vector<const DenseMatrix*> mats(n, nullptr);

        for (std::size_t m = half; m < n; ++m) mats[m] = &ft[m];
        DenseTensor t_right = contract_sparse(x, mats);
        update_group(st, ft, grams, t_right, 0, half);

        std::fill(mats.begin(), mats.end(), nullptr);
        for (std::size_t m = 0; m < half; ++m) mats[m] = &ft[m];
        DenseTensor t_left = contract_sparse(x, mats);
        update_group(st, ft, grams, t_left, half, n);

        DenseTensor z = std::move(t_left);
        for (std::size_t m = half; m < n; ++m) z = mode_product(z, ft[m], m);
        for (std::size_t r = 0; r < std::max<std::size_t>(cfg_.inner_sweeps, 1); ++r) {
            DenseTensor den = st.core;
            for (std::size_t m = 0; m < n; ++m) den = mode_product(den, grams[m], m);
            for (std::size_t i = 0; i < st.core.size(); ++i)
                st.core[i] = std::max(st.core[i] * z[i] / std::max(den[i], cfg_.epsilon), 0.0);
        }

        DenseTensor gs = st.core;
        for (std::size_t m = 0; m < n; ++m) gs = mode_product(gs, grams[m], m);
        const double obj = 0.5 * (xx - 2.0 * inner_product(z, st.core) + inner_product(gs, st.core));
        detail::normalize_columns(st.core, st.factors);
        return std::max(obj, 0.0);
    }

    static std::size_t split_of(std::size_t n) { return (n + 1) / 2; }

    NTDConfig cfg_;
};

inline NTDModel fit_ntd(const SparseTensor& x, const NTDConfig& cfg) { return NTDSolver(cfg).fit(x); }
inline NTDModel fit_ntd(const DenseTensor& x, const NTDConfig& cfg) { return NTDSolver(cfg).fit(x); }

}  // namespace geontd

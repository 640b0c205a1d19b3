#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "geontd/errors.hpp"

namespace geontd {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
        : rows_(rows), cols_(cols), data_(values) {
        if (data_.size() != rows * cols) throw InputError("DenseMatrix: initializer size mismatch");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw InputError("matmul: inner dimensions differ");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * b.cols();
            double* orow = out.data() + i * out.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    return out;
}

// A^T A
inline DenseMatrix gram(const DenseMatrix& a) {
    DenseMatrix g(a.cols(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* row = a.data() + r * a.cols();
        for (std::size_t i = 0; i < a.cols(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) g(i, j) += row[i] * row[j];
    }
    return g;
}

// Dense n-mode tensor, row-major (last mode varies fastest).
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
        for (std::size_t s : shape_)
            if (s == 0) throw InputError("DenseTensor: zero-length mode in shape " + shape_string(shape_));
        data_.assign(shape_volume(shape_), fill);
        compute_strides();
    }
    DenseTensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
        if (data_.size() != shape_volume(shape_))
            throw InputError("DenseTensor: " + std::to_string(data_.size()) + " values for shape " +
                             shape_string(shape_));
        compute_strides();
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t k) const { return shape_.at(k); }
    std::size_t size() const noexcept { return data_.size(); }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    template <class Index>
    std::size_t offset(const Index& idx) const {
        std::size_t off = 0;
        std::size_t k = 0;
        for (auto i : idx) off += static_cast<std::size_t>(i) * strides_[k++];
        return off;
    }
    double& at(const std::vector<std::size_t>& idx) { return data_[checked_offset(idx)]; }
    double at(const std::vector<std::size_t>& idx) const { return data_[checked_offset(idx)]; }

    std::vector<std::size_t> unravel(std::size_t flat) const {
        std::vector<std::size_t> idx(shape_.size());
        for (std::size_t k = shape_.size(); k-- > 0;) {
            idx[k] = flat % shape_[k];
            flat /= shape_[k];
        }
        return idx;
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double max_value() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }
    double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

private:
    void compute_strides() {
        strides_.assign(shape_.size(), 1);
        for (std::size_t k = shape_.size(); k-- > 1;) strides_[k - 1] = strides_[k] * shape_[k];
    }
    std::size_t checked_offset(const std::vector<std::size_t>& idx) const {
        if (idx.size() != shape_.size()) throw InputError("DenseTensor::at: index order mismatch");
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (idx[k] >= shape_[k]) throw InputError("DenseTensor::at: index out of range");
        return offset(idx);
    }

    Shape shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> data_;
};

namespace detail {
// Views a tensor as (outer, I_k, inner) around mode k.
inline void split_around(const Shape& s, std::size_t k, std::size_t& outer, std::size_t& inner) {
    outer = 1;
    inner = 1;
    for (std::size_t m = 0; m < k; ++m) outer *= s[m];
    for (std::size_t m = k + 1; m < s.size(); ++m) inner *= s[m];
}
}  // namespace detail

inline double frobenius_norm(const DenseTensor& t) {
    double acc = 0.0;
    for (double v : t.values()) acc += v * v;
    return std::sqrt(acc);
}

inline double inner_product(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw InputError("inner_product: shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// T x_k A where A is J x I_k. Result has I_k replaced by J.
inline DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& a, std::size_t k) {
    if (k >= t.order()) throw InputError("mode_product: mode " + std::to_string(k) + " out of range");
    if (a.cols() != t.dim(k))
        throw InputError("mode_product: matrix has " + std::to_string(a.cols()) + " columns, mode " +
                         std::to_string(k) + " has size " + std::to_string(t.dim(k)));
    std::size_t outer, inner;
    detail::split_around(t.shape(), k, outer, inner);
    const std::size_t in_k = t.dim(k);
    const std::size_t out_k = a.rows();
    Shape out_shape = t.shape();
    out_shape[k] = out_k;
    DenseTensor out(out_shape);
    const double* src = t.data();
    double* dst = out.data();
    for (std::size_t o = 0; o < outer; ++o) {
        const double* s_block = src + o * in_k * inner;
        double* d_block = dst + o * out_k * inner;
        for (std::size_t j = 0; j < out_k; ++j) {
            double* d_row = d_block + j * inner;
            for (std::size_t i = 0; i < in_k; ++i) {
                const double aji = a(j, i);
                if (aji == 0.0) continue;
                const double* s_row = s_block + i * inner;
                for (std::size_t r = 0; r < inner; ++r) d_row[r] += aji * s_row[r];
            }
        }
    }
    return out;
}

// Mode-k unfolding: I_k rows, one column per mode-k fiber. Columns enumerate the
// remaining modes in increasing mode order with the highest mode varying fastest.
inline DenseMatrix unfold(const DenseTensor& t, std::size_t k) {
    if (k >= t.order()) throw InputError("unfold: mode out of range");
    std::size_t outer, inner;
    detail::split_around(t.shape(), k, outer, inner);
    const std::size_t ik = t.dim(k);
    DenseMatrix m(ik, outer * inner);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < ik; ++i)
            for (std::size_t r = 0; r < inner; ++r) m(i, o * inner + r) = t[(o * ik + i) * inner + r];
    return m;
}

inline DenseTensor fold(const DenseMatrix& m, std::size_t k, const Shape& shape) {
    if (k >= shape.size()) throw InputError("fold: mode out of range");
    if (m.rows() != shape[k] || m.rows() * m.cols() != shape_volume(shape))
        throw InputError("fold: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " is inconsistent with shape " + shape_string(shape) + " at mode " + std::to_string(k));
    std::size_t outer, inner;
    detail::split_around(shape, k, outer, inner);
    const std::size_t ik = shape[k];
    DenseTensor t(shape);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < ik; ++i)
            for (std::size_t r = 0; r < inner; ++r) t[(o * ik + i) * inner + r] = m(i, o * inner + r);
    return t;
}

// A_(k) B_(k)^T for tensors that agree on every mode except k.
inline DenseMatrix mode_gram(const DenseTensor& a, const DenseTensor& b, std::size_t k) {
    if (a.order() != b.order() || k >= a.order()) throw InputError("mode_gram: order mismatch");
    for (std::size_t m = 0; m < a.order(); ++m)
        if (m != k && a.dim(m) != b.dim(m)) throw InputError("mode_gram: shapes differ outside mode k");
    std::size_t outer, inner;
    detail::split_around(a.shape(), k, outer, inner);
    const std::size_t ia = a.dim(k), ib = b.dim(k);
    DenseMatrix out(ia, ib);
    for (std::size_t o = 0; o < outer; ++o) {
        const double* pa = a.data() + o * ia * inner;
        const double* pb = b.data() + o * ib * inner;
        for (std::size_t i = 0; i < ia; ++i)
            for (std::size_t j = 0; j < ib; ++j) {
                double acc = 0.0;
                const double* ra = pa + i * inner;
                const double* rb = pb + j * inner;
                for (std::size_t r = 0; r < inner; ++r) acc += ra[r] * rb[r];
                out(i, j) += acc;
            }
    }
    return out;
}

// G x_1 F_1 x_2 F_2 ... x_n F_n with each F_k of size I_k x J_k.
inline DenseTensor reconstruct(const DenseTensor& core, const std::vector<DenseMatrix>& factors) {
    if (factors.size() != core.order()) throw InputError("reconstruct: need one factor per core mode");
    DenseTensor out = core;
    for (std::size_t k = 0; k < factors.size(); ++k) out = mode_product(out, factors[k], k);
    return out;
}

// Coordinate-format tensor used where the data tensor is mostly empty.
class SparseTensor {
public:
    SparseTensor() = default;
    explicit SparseTensor(Shape shape) : shape_(std::move(shape)) {}

    static SparseTensor from_dense(const DenseTensor& t) {
        SparseTensor s(t.shape());
        for (std::size_t f = 0; f < t.size(); ++f)
            if (t[f] != 0.0) s.push(t.unravel(f), t[f]);
        return s;
    }

    void push(const std::vector<std::size_t>& idx, double value) {
        if (idx.size() != shape_.size()) throw InputError("SparseTensor: index order mismatch");
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] >= shape_[k]) throw InputError("SparseTensor: index out of range");
            index_.push_back(static_cast<std::uint32_t>(idx[k]));
        }
        values_.push_back(value);
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t nnz() const noexcept { return values_.size(); }
    const std::uint32_t* index(std::size_t e) const { return index_.data() + e * shape_.size(); }
    double value(std::size_t e) const { return values_[e]; }
    const std::vector<double>& values() const noexcept { return values_; }

    double squared_norm() const {
        double acc = 0.0;
        for (double v : values_) acc += v * v;
        return acc;
    }

    DenseTensor to_dense() const {
        DenseTensor t(shape_);
        for (std::size_t e = 0; e < nnz(); ++e) {
            const std::uint32_t* ix = index(e);
            t[t.offset(std::vector<std::size_t>(ix, ix + order()))] += values_[e];
        }
        return t;
    }

private:
    Shape shape_;
    std::vector<std::uint32_t> index_;
    std::vector<double> values_;
};

// X x_m A_m for every mode m with mats[m] != nullptr, evaluated entry by entry.
// Each A_m is J_m x I_m. Modes without a matrix keep their size.
inline DenseTensor contract_sparse(const SparseTensor& x, const std::vector<const DenseMatrix*>& mats) {
    const std::size_t n = x.order();
    if (mats.size() != n) throw InputError("contract_sparse: need one slot per mode");
    Shape out_shape = x.shape();
    std::vector<std::size_t> contracted;
    for (std::size_t m = 0; m < n; ++m)
        if (mats[m]) {
            if (mats[m]->cols() != x.shape()[m]) throw InputError("contract_sparse: matrix/mode size mismatch");
            out_shape[m] = mats[m]->rows();
            contracted.push_back(m);
        }
    DenseTensor out(out_shape);
    const auto& strides = out.strides();

    // offsets of every combination of contracted indices, same order as the expanded weights below
    std::vector<std::size_t> combo{0};
    for (std::size_t m : contracted) {
        std::vector<std::size_t> next;
        next.reserve(combo.size() * out_shape[m]);
        for (std::size_t c : combo)
            for (std::size_t j = 0; j < out_shape[m]; ++j) next.push_back(c + j * strides[m]);
        combo.swap(next);
    }

    std::vector<double> w, w_next;
    w.reserve(combo.size());
    w_next.reserve(combo.size());
    for (std::size_t e = 0; e < x.nnz(); ++e) {
        const std::uint32_t* ix = x.index(e);
        std::size_t base = 0;
        for (std::size_t m = 0; m < n; ++m)
            if (!mats[m]) base += ix[m] * strides[m];
        w.assign(1, x.value(e));
        for (std::size_t m : contracted) {
            const DenseMatrix& a = *mats[m];
            w_next.clear();
            for (double v : w)
                for (std::size_t j = 0; j < a.rows(); ++j) w_next.push_back(v * a(j, ix[m]));
            w.swap(w_next);
        }
        double* dst = out.data() + base;
        for (std::size_t c = 0; c < combo.size(); ++c) dst[combo[c]] += w[c];
    }
    return out;
}

}  // namespace geontd

#pragma once

#include <random>
#include <vector>

#include "geontd/tensor.hpp"

namespace testing_support {

inline geontd::DenseTensor random_tensor(const geontd::Shape& shape, std::mt19937_64& rng, double lo = 0.0,
                                         double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    geontd::DenseTensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
    return t;
}

inline geontd::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = 0.0,
                                         double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    geontd::DenseMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

// Calls fn(idx) for every multi-index of `shape` in row-major order.
template <class Fn>
void for_each_index(const geontd::Shape& shape, Fn&& fn) {
    std::vector<std::size_t> idx(shape.size(), 0);
    const std::size_t total = geontd::shape_volume(shape);
    for (std::size_t n = 0; n < total; ++n) {
        fn(idx);
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
}

}  // namespace testing_support

#include <filesystem>
#include <fstream>
#include <string>

namespace testing_support {

inline std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::path(GEONTD_SCRATCH_DIR) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::filesystem::path write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

}  // namespace testing_support

#pragma once

#include <cmath>

#include "sfl/dense.hpp"
#include "sfl/graph.hpp"
#include "sfl/random.hpp"

namespace sfl::test {

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

inline Vector gaussian_vector(std::size_t n, std::uint64_t seed) {
    Vector v(n);
    Rng rng(seed);
    for (double& x : v) x = rng.normal();
    return v;
}

}  // namespace sfl::test

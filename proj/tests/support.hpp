#pragma once

#include "deflab/common.hpp"

#include <random>

namespace deflab::testing {

inline Vector random_vector(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(d);
    for (int i = 0; i < d; ++i) {
        const double re = g(rng);
        v(i) = Complex(re, g(rng));
    }
    return v;
}

inline Vector random_unit(std::mt19937_64& rng, int d)
{
    Vector v = random_vector(rng, d);
    return v / v.norm();
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double re = g(rng);
            a(i, j) = Complex(re, g(rng));
        }
    }
    return 0.5 * (a + a.adjoint());
}

inline Matrix random_unitary(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double re = g(rng);
            a(i, j) = Complex(re, g(rng));
        }
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(n, n);
}

inline double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace deflab::testing

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace deflab {

using Complex = std::complex<double>;

template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<Complex>;
using Vector = VectorT<Complex>;
using RealMatrix = MatrixT<double>;
using RealVector = VectorT<double>;

/// Numerical tolerances shared by every module. One record so that the
/// thresholds used by validation, tests and the CLI cannot drift apart.
struct Tolerances {
    double hermitian = 1e-12;      // ||A - A^*||_max for Hermitian flags
    double normalization = 1e-10;  // | ||u|| - 1 | for one-body vectors
    double trace = 1e-10;          // |tr(rho) - 1|
    double positivity = 1e-10;     // smallest admissible eigenvalue is -positivity
    double eigen_clamp = 1e-14;    // eigenvalues below are treated as 0 before logs
    std::size_t dimension_cap = std::size_t{1} << 20;
};

inline const Tolerances& tolerances()
{
    static const Tolerances tol{};
    return tol;
}

/// Precondition or contract violation on a value (wrong shape, non-normalized, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested object would exceed a configured size cap, or an integer overflowed.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace deflab

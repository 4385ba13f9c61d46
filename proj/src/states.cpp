#include "deflab/states.hpp"

#include "deflab/combinatorics.hpp"
#include "deflab/io.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace deflab {

DensityOp::DensityOp(SymSector sector, Matrix entries)
    : sector_(std::move(sector)), entries_(std::move(entries))
{
    const auto dim = static_cast<Eigen::Index>(sector_.dim());
    if (entries_.rows() != dim || entries_.cols() != dim) {
        throw DomainError("DensityOp: matrix is " + std::to_string(entries_.rows()) + "x"
                          + std::to_string(entries_.cols()) + ", sector dimension is "
                          + std::to_string(dim));
    }
    const auto& tol = tolerances();
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > tol.hermitian) {
        throw DomainError("DensityOp: matrix is not Hermitian");
    }
    if (std::abs(entries_.trace().real() - 1.0) > tol.trace) {
        throw DomainError("DensityOp: trace is " + format_double(entries_.trace().real()));
    }
    const double lowest = spectrum(entries_)(0);
    if (lowest < -tol.positivity) {
        throw DomainError("DensityOp: negative eigenvalue " + format_double(lowest));
    }
}

DensityOp DensityOp::normalized(SymSector sector, const Matrix& entries)
{
    Matrix herm = 0.5 * (entries + entries.adjoint());
    const double tr = herm.trace().real();
    if (!(tr > 0.0)) {
        throw DomainError("DensityOp::normalized: non-positive trace");
    }
    return DensityOp(std::move(sector), herm / tr);
}

DensityOp DensityOp::pure(const Ket& ket)
{
    const double norm = ket.amplitudes.norm();
    if (!(norm > 0.0)) {
        throw DomainError("DensityOp::pure: zero vector");
    }
    const Vector psi = ket.amplitudes / norm;
    Matrix rho = psi * psi.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOp(ket.sector, rho);
}

DensityOp DensityOp::maximally_mixed(const SymSector& sector)
{
    const auto dim = static_cast<Eigen::Index>(sector.dim());
    return DensityOp(sector, Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

Matrix reduce_operator(const Matrix& op, const SymSector& sector, int n)
{
    const int N = sector.particles();
    if (n < 0 || n > N) {
        throw DomainError("partial trace order " + std::to_string(n) + " outside [0, "
                          + std::to_string(N) + "]");
    }
    const int d = sector.modes();
    SymSector part(d, n);
    SymSector low(d, N - n);
    const std::size_t P = part.dim();
    const auto table = addition_table(low, part, sector);
    std::vector<double> coef(table.size());
    for (std::size_t m = 0; m < low.dim(); ++m) {
        for (std::size_t a = 0; a < P; ++a) {
            coef[m * P + a] = lowering_coefficient(part.occupation(a),
                                                   sector.occupation(table[m * P + a]));
        }
    }
    const double scale = std::exp(-log_binomial(N, n));
    Matrix out = Matrix::Zero(P, P);
    for (std::size_t m = 0; m < low.dim(); ++m) {
        for (std::size_t b = 0; b < P; ++b) {
            const std::size_t row = table[m * P + b];
            const double cb = coef[m * P + b];
            for (std::size_t a = 0; a < P; ++a) {
                out(b, a) += op(row, table[m * P + a]) * cb * coef[m * P + a];
            }
        }
    }
    return scale * out;
}

DensityOp partial_trace(const DensityOp& state, int n)
{
    Matrix reduced = reduce_operator(state.matrix(), state.sector(), n);
    reduced = 0.5 * (reduced + reduced.adjoint()).eval();
    return DensityOp(SymSector(state.modes(), n), std::move(reduced));
}

double trace_norm_distance(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DomainError("trace_norm_distance: operators act on different spaces");
    }
    const Matrix diff = 0.5 * ((a - b) + (a - b).adjoint());
    return spectrum(diff).cwiseAbs().sum();
}

double trace_norm_distance(const DensityOp& a, const DensityOp& b)
{
    if (a.sector() != b.sector()) {
        throw DomainError("trace_norm_distance: sector mismatch");
    }
    return trace_norm_distance(a.matrix(), b.matrix());
}

double wick_diagonal(const DensityOp& state, const Vector& v, int n)
{
    const int N = state.particles();
    if (n < 0 || n > N) {
        throw DomainError("wick_diagonal: order outside [0, N]");
    }
    if (std::abs(v.norm() - 1.0) > tolerances().normalization) {
        throw DomainError("wick_diagonal: direction is not normalized");
    }
    Matrix y = Matrix::Identity(state.sector().dim(), state.sector().dim());
    for (int k = 0; k < n; ++k) {
        y = annihilator(v, SymSector(state.modes(), N - k)) * y;
    }
    const double value = (y * state.matrix() * y.adjoint()).trace().real();
    // (N-n)!/N! telescoped
    double ratio = 1.0;
    for (int j = 0; j < n; ++j) {
        ratio /= static_cast<double>(N - j);
    }
    return ratio * value;
}

DensityOp random_density(std::uint64_t seed, const SymSector& sector, int rank)
{
    const auto dim = static_cast<int>(sector.dim());
    if (rank < 1 || rank > dim) {
        throw DomainError("random_density: rank " + std::to_string(rank) + " outside [1, "
                          + std::to_string(dim) + "]");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, M_SQRT1_2);
    Matrix g(dim, rank);
    for (int c = 0; c < rank; ++c) {
        for (int r = 0; r < dim; ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(r, c) = Complex(re, im);
        }
    }
    return DensityOp::normalized(sector, g * g.adjoint());
}

RealVector spectrum(const Matrix& op)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(op, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double neg_entropy(const Matrix& rho)
{
    const RealVector ev = spectrum(rho);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > tolerances().eigen_clamp) {
            s += ev(i) * std::log(ev(i));
        }
    }
    return s;
}

void write_spectrum_csv(std::ostream& out, const RealVector& eigenvalues)
{
    out << "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        out << i << ',' << format_double(eigenvalues(i)) << '\n';
    }
}

} // namespace deflab

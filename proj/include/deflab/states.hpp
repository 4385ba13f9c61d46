#pragma once

#include "deflab/common.hpp"
#include "deflab/symspace.hpp"

#include <cstdint>
#include <iosfwd>

namespace deflab {

/// Mixed state on a symmetric sector: Hermitian, positive, trace one.
/// Invariants are checked on construction against tolerances().
class DensityOp {
public:
    DensityOp(SymSector sector, Matrix entries);

    /// Hermitian part of `entries` rescaled to unit trace, then validated.
    static DensityOp normalized(SymSector sector, const Matrix& entries);

    /// |psi><psi| for a (not necessarily normalized) vector.
    static DensityOp pure(const Ket& ket);

    /// Identity / dim.
    static DensityOp maximally_mixed(const SymSector& sector);

    const SymSector& sector() const { return sector_; }
    const Matrix& matrix() const { return entries_; }
    int modes() const { return sector_.modes(); }
    int particles() const { return sector_.particles(); }

private:
    SymSector sector_;
    Matrix entries_;
};

/// Linear partial trace of an operator on SymSector(d, N) down to SymSector(d, n):
/// the occupation-basis form of tr_{n+1..N}, which preserves the trace.
/// Entry (beta, alpha) is binomial(N, n)^{-1} sum_m A(m+beta, m+alpha) c(beta) c(alpha)
/// with c the lowering coefficients. It is the dual of second_quantize.
Matrix reduce_operator(const Matrix& op, const SymSector& sector, int n);

/// n-particle reduced density matrix, normalized to trace one.
DensityOp partial_trace(const DensityOp& state, int n);

/// Sum of |eigenvalues| of A - B for Hermitian A, B.
double trace_norm_distance(const Matrix& a, const Matrix& b);
double trace_norm_distance(const DensityOp& a, const DensityOp& b);

/// ((N-n)!/N!) tr[a^*(v)^n a(v)^n Gamma] which equals <v^n, gamma^(n) v^n>.
double wick_diagonal(const DensityOp& state, const Vector& v, int n);

/// Normalized Gram matrix of `rank` independent complex Gaussian vectors, seeded.
DensityOp random_density(std::uint64_t seed, const SymSector& sector, int rank);

/// Eigenvalues of a Hermitian operator, ascending.
RealVector spectrum(const Matrix& op);

/// tr[rho log rho] with eigenvalues below tolerances().eigen_clamp treated as zero.
double neg_entropy(const Matrix& rho);

/// CSV with header "index,eigenvalue".
void write_spectrum_csv(std::ostream& out, const RealVector& eigenvalues);

} // namespace deflab

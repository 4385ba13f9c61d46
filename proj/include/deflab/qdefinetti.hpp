#pragma once

#include "deflab/common.hpp"
#include "deflab/sphere.hpp"
#include "deflab/states.hpp"
#include "deflab/symspace.hpp"

#include <cstdint>
#include <vector>

namespace deflab {

/// dim(SymSector(d, N)) * <u^N, A u^N> for an operator A on the sector.
double lower_symbol_value(const Matrix& op, const SymSector& sector, const Vector& u);
double lower_symbol_value(const DensityOp& state, const Vector& u);

/// The coherent-state density u -> dim * <u^N, Gamma u^N> of a state.
class LowerSymbol {
public:
    explicit LowerSymbol(DensityOp source) : source_(std::move(source)) {}

    const DensityOp& source() const { return source_; }
    double operator()(const Vector& u) const { return lower_symbol_value(source_, u); }

private:
    DensityOp source_;
};

/// gamma (x)_s Id^{(x)(n-l)}: sum over the l-subsets of the n slots of gamma acting there.
Matrix sym_pad(const Matrix& gamma, const SymSector& gamma_sector, int n);
Matrix sym_pad(const DensityOp& gamma, int n);

/// n-RDM of the CKMR state from the exact binomial formula over the l-RDMs, l <= n.
DensityOp ckmr_rdm(const DensityOp& state, int n);

/// n-RDM of the CKMR state by exact integration with closed-form sphere moments.
/// The certificate must come from validate_sphere_moments on the same d with
/// max_degree >= N + n and must have passed.
DensityOp moment_oracle_rdm(const DensityOp& state, int n, const MomentValidation& certificate);

/// dim(H_s^N) * int |u^N><u^N| du evaluated with the moment formula.
Matrix schur_resolution(const SymSector& sector);

/// Exact sphere average of the lower symbol (equals tr Gamma).
double lower_symbol_average(const DensityOp& state);

struct DeFinettiGap {
    double distance = 0.0;
    double bound = 0.0;   // 2n(d + 2n)/N
    double bound_sharp = 0.0; // 2nd/N, recorded only
    bool violated = false;    // distance > bound + 1e-10
};

DeFinettiGap definetti_gap(const DensityOp& state, int n);

/// ((N+d-1)!/(N+n+d-1)!) tr[a(v)^n a^*(v)^n Gamma].
double anti_wick_diagonal(const DensityOp& state, const Vector& v, int n);

struct NormalOrderCoeffs {
    int n = 0;
    std::vector<std::uint64_t> coeffs; // c_{n,0..n}
};

/// a(v)^n a^*(v)^n = sum_k c_{n,k} a^*(v)^k a(v)^k with c_{n,k} = binomial(n,k) n!/k!.
NormalOrderCoeffs normal_order_coeffs(int n);

/// `count` unit directions of C^d from a fixed seed; their tensor powers are the probes.
std::vector<Vector> probe_directions(int d, std::size_t count);

/// Hermitian operator on `sector` whose lower symbol takes `values` at `probes`
/// (least squares over the real parameters of the operator).
Matrix reconstruct_from_lower_symbol(const SymSector& sector, const std::vector<Vector>& probes,
                                     const std::vector<double>& values);

} // namespace deflab

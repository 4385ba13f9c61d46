#pragma once

#include "deflab/common.hpp"
#include "deflab/states.hpp"
#include "deflab/symspace.hpp"

#include <json.hpp>

#include <vector>

namespace deflab {

/// Orthogonal projector on C^d together with orthonormal bases of its range and kernel.
class Projector {
public:
    /// Validates P^2 = P = P^* within 1e-12.
    explicit Projector(const Matrix& P);

    /// Projector onto the span of the columns of `vectors`.
    static Projector onto(const Matrix& vectors);

    const Matrix& matrix() const { return P_; }
    const Matrix& range() const { return range_; }     // d x r
    const Matrix& kernel() const { return kernel_; }   // d x (d - r)
    int modes() const { return static_cast<int>(P_.rows()); }
    int rank() const { return static_cast<int>(range_.cols()); }

    Projector complement() const;

private:
    Matrix P_;
    Matrix range_;
    Matrix kernel_;
};

/// Localized blocks G_{N,k}, k = 0..N. Block k acts on the symmetric k-sector of ran P,
/// written in the orthonormal basis Projector::range().
struct FockBlocks {
    int particles = 0;
    Matrix basis;                 // d x r
    std::vector<Matrix> blocks;   // blocks[k] is dim(r, k) square

    int modes() const { return static_cast<int>(basis.rows()); }
    int rank() const { return static_cast<int>(basis.cols()); }
    std::vector<double> traces() const;
    double total_trace() const;

    /// Block k pushed forward to SymSector(d, k).
    Matrix embedded(int k) const;

    /// binomial(N,n)^{-1} sum_k binomial(k,n) tr_{n+1..k} G_{N,k}, on SymSector(d, n).
    Matrix reduced(int n) const;
};

FockBlocks localize(const DensityOp& state, const Projector& P);

/// Trace distance between P^{(x)n} gamma^(n) P^{(x)n} and the n-body reduction of the blocks.
double check_consistency(const DensityOp& state, const Projector& P, int n);

/// max_k |tr G_{N,k}^P - tr G_{N,N-k}^{P_perp}|.
double check_duality(const DensityOp& state, const Projector& P);

/// Array of {k, trace, operator} with operators on SymSector(d, k).
nlohmann::json to_json(const FockBlocks& blocks);

} // namespace deflab

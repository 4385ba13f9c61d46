#pragma once

#include "deflab/common.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace deflab {

/// Occupation multi-index (n_1, ..., n_d).
using Occupation = std::vector<int>;

/// binomial(N + d - 1, d - 1). Throws CapacityError above `cap` or on overflow.
std::size_t sector_dimension(int d, int N, std::size_t cap = tolerances().dimension_cap);

/// Occupation-number basis of the bosonic N-particle sector over d modes.
///
/// Basis vectors are ordered lexicographically descending on (n_1, ..., n_d),
/// so (N, 0, ..., 0) comes first and (0, ..., 0, N) last. Indexing is a
/// closed-form ranking, not a lookup table. Copies share the basis storage.
class SymSector {
public:
    SymSector(int modes, int particles, std::size_t cap = tolerances().dimension_cap);

    int modes() const { return modes_; }
    int particles() const { return particles_; }
    std::size_t dim() const { return basis_->size(); }

    const Occupation& occupation(std::size_t i) const { return (*basis_)[i]; }
    const std::vector<Occupation>& basis() const { return *basis_; }

    /// Position of `n` in the basis. Throws DomainError if `n` is not in this sector.
    std::size_t index(const Occupation& n) const;

    bool operator==(const SymSector& other) const
    {
        return modes_ == other.modes_ && particles_ == other.particles_;
    }
    bool operator!=(const SymSector& other) const { return !(*this == other); }

private:
    int modes_;
    int particles_;
    std::shared_ptr<const std::vector<Occupation>> basis_;
    // compositions_[m * (modes_ + 1) + k] = number of ways to put m particles in k modes
    std::shared_ptr<const std::vector<std::size_t>> compositions_;
};

/// Coordinates of a state over a sector basis.
struct Ket {
    SymSector sector;
    Vector amplitudes;
};

/// One-body operator h on C^d.
struct OneBodyOp {
    Matrix entries;

    int modes() const { return static_cast<int>(entries.rows()); }
    bool is_hermitian(double tol = tolerances().hermitian) const;
};

/// Two-body operator w living on the symmetric 2-particle sector SymSector(d, 2).
struct TwoBodyOp {
    SymSector sector;
    Matrix entries;

    int modes() const { return sector.modes(); }
};

/// Validated constructors. `require_hermitian` rejects residuals above tolerances().hermitian.
OneBodyOp make_one_body(const Matrix& entries, bool require_hermitian = true);
TwoBodyOp make_two_body(int d, const Matrix& entries);
TwoBodyOp zero_two_body(int d);

/// Compress a d^2 x d^2 operator on C^d (x) C^d to the symmetric 2-sector.
TwoBodyOp two_body_from_tensor(int d, const Matrix& full);

/// u^{(x)N} in the occupation basis: sqrt(N!/prod n_i!) prod u_i^{n_i}.
Ket product_embed(const Vector& u, int N);

/// Same coordinates without the normalization precondition (polynomial in u).
Vector product_coordinates(const Vector& u, const SymSector& sector);

/// prod_p sqrt(binomial(n_p, beta_p)): the coefficient of C_beta |n> where
/// C_beta^* creates the normalized occupation state |beta> from the vacuum.
double lowering_coefficient(const Occupation& beta, const Occupation& n);

/// table[m * part.dim() + a] = sum.index(low.occupation(m) + part.occupation(a)).
std::vector<std::size_t> addition_table(const SymSector& low, const SymSector& part,
                                        const SymSector& sum);

/// a(f) : SymSector(d, N) -> SymSector(d, N - 1), antilinear in f.
Matrix annihilator(const Vector& f, const SymSector& sector);

/// a^*(f) : SymSector(d, N - 1) -> SymSector(d, N) where `sector` is the target.
Matrix creator(const Vector& f, const SymSector& sector);

/// a^*(f) applied to a vector of the (N-1)-sector, landing in `target`.
Vector apply_creator(const Vector& f, const Vector& psi, const SymSector& target);

/// Restriction of U^{(x)N} to symmetric sectors, for any d_out x d_in matrix U.
/// Rows follow SymSector(d_out, N), columns SymSector(d_in, N).
Matrix sector_representation(const Matrix& U, int N);

/// Second quantization of an l-body operator acting on `op_sector` = SymSector(d, l):
/// sum over l-subsets of the N slots of `op`, restricted to `target` = SymSector(d, N).
/// For l = 1 this is sum_j h_j, for l = 2 it is sum_{i<j} w_ij.
Matrix second_quantize(const Matrix& op, const SymSector& op_sector, const SymSector& target);

/// Mean-field coupling 1/(N-1); zero for N <= 1.
double default_coupling(int N);

/// H_N = sum_j h_j + lambda sum_{i<j} w_ij on SymSector(d, N). lambda defaults to 1/(N-1).
Matrix assemble_hamiltonian(const OneBodyOp& h, const TwoBodyOp& w, int N,
                            std::optional<double> lambda = std::nullopt);

} // namespace deflab

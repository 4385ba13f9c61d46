#pragma once

#include "deflab/common.hpp"
#include "deflab/symspace.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace deflab {

/// Largest admissible table size K^N.
inline constexpr std::size_t kTableCap = 10000000;

/// Permutation-symmetric probability table over {0..K-1}^N, stored row-major
/// with the first coordinate most significant.
class SymMeasure {
public:
    /// Validates non-negativity, normalization (1e-12) and exact invariance
    /// under 20 pseudo-random transpositions.
    SymMeasure(int K, int N, std::vector<double> probs);

    int alphabet() const { return K_; }
    int variables() const { return N_; }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }

    /// Flat index of a configuration, and back.
    std::size_t flat_index(const std::vector<int>& config) const;
    std::vector<int> config(std::size_t flat) const;

private:
    int K_;
    int N_;
    std::vector<double> probs_;
};

/// K^N with overflow and cap checks.
std::size_t table_size(int K, int N);

/// Total mass of each type class, indexed by SymSector(K, N) (counts per letter).
std::vector<double> type_weights(const SymMeasure& mu);

/// Spreads class masses uniformly over each class, so the table is exactly symmetric.
SymMeasure from_type_weights(int K, int N, const std::vector<double>& weights);

/// Class masses drawn from a flat Dirichlet law with a seeded mt19937_64.
SymMeasure random_sym_measure(int K, int N, std::uint64_t seed);

/// rho^{(x)N} for a probability vector rho.
SymMeasure product_measure(const RealVector& rho, int N);

/// Point mass at a configuration, symmetrized (uniform over its class).
SymMeasure symmetrized_point(int K, const std::vector<int>& config);

/// Marginal on the first n variables.
SymMeasure marginal(const SymMeasure& mu, int n);

struct MixingAtom {
    double weight;
    RealVector probs; // empirical measure, entries in (1/N) Z
};

struct EmpiricalMixing {
    std::vector<MixingAtom> atoms;
};

/// Mixing measure charging the empirical measure of each configuration type.
EmpiricalMixing df_mixing(const SymMeasure& mu);

/// Sum over atoms of weight * rho^{(x)N}.
SymMeasure df_state(const SymMeasure& mu);

struct DfIdentityReport {
    double first_residual = 0.0;   // max |mu~^(1) - mu^(1)|
    double second_residual = 0.0;  // max |mu~^(2) - ((N-1)/N) mu^(2) - (1/N) diag mu^(1)|
    double min_remainder = 0.0;    // min over n and entries of mu~^(n) - falling(N,n) mu^(n)
    bool passed = false;
};

DfIdentityReport df_marginal_identities(const SymMeasure& mu);

/// Sum of |a - b| over the table.
double tv_distance(const SymMeasure& a, const SymMeasure& b);

struct DfBoundRow {
    double tv = 0.0;
    double bound = 0.0;         // 2n(n-1)/N
    double refined_bound = 0.0; // (2/N) min(Kn, n^2)
};

/// Distance between the n-marginals of mu and of its Diaconis-Freedman state.
DfBoundRow df_bounds(const SymMeasure& mu, const SymMeasure& df, int n);

nlohmann::json to_json(const SymMeasure& mu);
SymMeasure sym_measure_from_json(const nlohmann::json& j);

} // namespace deflab

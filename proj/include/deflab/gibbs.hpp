#pragma once

#include "deflab/common.hpp"
#include "deflab/hartree.hpp"
#include "deflab/sphere.hpp"
#include "deflab/states.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace deflab {

/// exp(-H_N / T) / Z with H_N at the default coupling 1/(N-1).
DensityOp quantum_gibbs(const HartreeProblem& p, int N, double T);

/// -T log tr exp(-H_N / T), shifted by the ground energy before exponentiating.
double quantum_free_energy(const HartreeProblem& p, int N, double T);

/// tr[H_N Gamma] + T tr[Gamma log Gamma].
double free_energy_functional(const HartreeProblem& p, const DensityOp& state, double T);

struct MonteCarloOptions {
    std::size_t samples = 200000;
    std::uint64_t seed = 0;
};

/// Kolmogorov-Smirnov test of |u_1|^2 ~ U[0,1] on Monte Carlo draws from the sphere of C^2.
struct UniformLawCheck {
    std::size_t samples = 0;
    double ks_statistic = 0.0;
    double critical = 0.0;  // 1% level
    bool passed = false;
};

UniformLawCheck validate_uniform_modulus(std::size_t samples = 100000, std::uint64_t seed = 7);

struct ClassicalFreeEnergy {
    double mc = 0.0;
    double mc_error = 0.0;              // one standard error, delta method
    std::optional<double> quadrature;   // d = 2 only, after the uniform law check passed
    std::optional<UniformLawCheck> law;

    double best() const { return quadrature.value_or(mc); }
};

/// -t log of the sphere average of exp(-E_H / t). Refuses fewer than 1000 samples.
ClassicalFreeEnergy classical_free_energy(const HartreeProblem& p, double t, const MonteCarloOptions& mc = {});

/// Positive density on quadrature nodes. It represents the state
/// sum_i nodes[i].weight * density[i] |u_i^N><u_i^N| and the measure density[i] du.
struct UpperSymbol {
    std::vector<SpherePoint> nodes;
    std::vector<double> density;
};

/// mu_cl = exp(-E_H/t) / normalization on a grid exact for degree-N coherent states.
UpperSymbol classical_gibbs_symbol(const HartreeProblem& p, double t, int N);

DensityOp upper_symbol_state(const UpperSymbol& symbol, int N);

/// sum_i w_i rho_i |u_i><u_i|.
Matrix upper_symbol_one_body(const UpperSymbol& symbol);

struct BerezinLiebResult {
    double lhs = 0.0;    // tr[Gamma log Gamma]
    double rhs = 0.0;    // dim * integral of f(symbol / dim)
    double slack = 0.0;  // lhs - rhs for the first inequality, rhs - lhs for the second
    double integration_error = 0.0;
    bool passed = false;  // slack >= -max(tolerance, integration_error)
};

/// Lower-symbol inequality with f(x) = x log x. Quadrature for d <= 3, otherwise Monte Carlo.
BerezinLiebResult berezin_lieb_first(const DensityOp& state, double tolerance = 1e-6,
                                     const MonteCarloOptions& mc = {});

/// Upper-symbol inequality for the state generated by `symbol`.
BerezinLiebResult berezin_lieb_second(const UpperSymbol& symbol, int N, double tolerance = 1e-6);

/// Quantities along the lower bound argument for one state.
struct LowerBoundCheck {
    double shifted = 0.0;          // (F[Gamma] + T log dim) / N
    double classical_of_symbol = 0.0;  // F_cl evaluated on the lower symbol
    double energy_error = 0.0;     // |E_N[Gamma] - N int E_H mu_N| / N, exact
    double slack = 0.0;            // shifted - (classical_of_symbol - energy_error)
};

LowerBoundCheck lower_bound_check(const HartreeProblem& p, const DensityOp& state, double t);

struct FreeEnergyRow {
    int N = 0;
    double T = 0.0;
    double F_N = 0.0;
    double shifted = 0.0;
    double F_cl = 0.0;
    double mc_err = 0.0;
    double gap = 0.0;           // shifted - F_cl
    double rdm_distance = 0.0;  // trace distance of the Gibbs 1-RDM to int |u><u| mu_cl (d = 2)
};

struct GapSweep {
    std::vector<FreeEnergyRow> rows;
    double max_gap_top_half = 0.0;
    double fit_C = 0.0;  // least squares for |gap| = C d / N
};

/// Rows in increasing N. Monte Carlo seeds are derived from (mc.seed, N).
GapSweep gap_sweep(const HartreeProblem& p, double t, std::vector<int> N_list, const MonteCarloOptions& mc = {});

void write_gap_csv(std::ostream& out, const GapSweep& sweep);

nlohmann::json to_json(const GapSweep& sweep);

} // namespace deflab

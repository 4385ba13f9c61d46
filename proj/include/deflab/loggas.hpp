#pragma once

#include "deflab/common.hpp"
#include "deflab/sphere.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace deflab {

/// 2D log-gas H_N(X) = sum_j V(x_j) - coupling/(N-1) sum_{i<j} log|x_i - x_j| with
/// V(x) = v_coeff |x|^v_power, sampled from exp(-beta N H_N).
struct LogGasConfig {
    int N = 4;
    double beta = 1.0;
    double coupling = 1.0;   // 0 disables the interaction
    double v_coeff = 1.0;
    double v_power = 2.0;
    double alpha = 0.0;      // regularization radius for the mean-field kernel; 0 means grid spacing
    int grid = 256;          // radial grid points, at least 64
    double grid_radius = 2.0;

    double potential(double r) const { return v_coeff * std::pow(r, v_power); }
};

/// Throws DomainError naming the offending field.
void validate(const LogGasConfig& cfg);

/// -log_alpha(r): -log r outside the disk of radius alpha, a quadratic cap inside.
double neg_log_regularized(double r, double alpha);

struct MetropolisOptions {
    std::size_t burn_in = 10000;  // sweeps, with step adaptation
    std::size_t sweeps = 50000;   // recorded phase
    std::size_t thin = 10;
    std::uint64_t seed = 0;
    double initial_step = 0.0;    // 0 picks the thermal length 1/sqrt(beta N)
};

/// One row per recorded configuration (N x 2), after burn-in.
using ConfigurationObserver = std::function<void(std::size_t sweep, const RealMatrix& X)>;

struct ChainResult {
    std::vector<double> mean_sq_radius;   // per recorded sample: mean over particles of |x|^2
    std::vector<double> interaction;      // per recorded sample: -1/(N-1) sum log|x_i - x_j|
    std::vector<double> radii;            // pooled |x_i| over recorded samples
    double acceptance = 0.0;              // recorded phase
    double step = 0.0;                    // proposal standard deviation after adaptation
    bool acceptance_warning = false;      // acceptance outside [0.05, 0.95]
};

/// Metropolis-Hastings with single-particle Gaussian proposals. Deterministic per seed.
ChainResult metropolis_sample(const LogGasConfig& cfg, const MetropolisOptions& opts,
                              const ConfigurationObserver& observer = {});

/// Several chains with seeds opts.seed, opts.seed + 1, ...; run in parallel, ordered by seed.
std::vector<ChainResult> metropolis_chains(const LogGasConfig& cfg, const MetropolisOptions& opts, int chains);

/// Mean with a batch-means standard error.
MonteCarloEstimate batch_mean(const std::vector<double>& series, int batches = 20);

/// Potential scale reduction factor over equal-length chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

/// Mass on rings of radius radii[i] (a point mass at the origin for radii[0] = 0).
struct RadialDensity {
    std::vector<double> radii;
    std::vector<double> weights;

    double cdf(double r) const;
};

struct MeanFieldResult {
    double e_MF = 0.0;
    RadialDensity density;
    double alpha = 0.0;
    double kernel_min_eigenvalue = 0.0;  // on the zero-sum subspace
    int iterations = 0;
};

/// Projected accelerated gradient over ring masses. Refuses a kernel that is not
/// positive semidefinite on zero-sum vectors, and a grid whose outer ring carries mass.
MeanFieldResult mf_minimize(const LogGasConfig& cfg);

/// Energy of ring masses under the same discretization.
double mf_energy(const LogGasConfig& cfg, const RadialDensity& density, double alpha);

/// 1-Wasserstein distance between the empirical law of `samples` and a radial density.
double wasserstein1(std::vector<double> samples, const RadialDensity& density);

struct RadialComparison {
    double w1 = 0.0;
    double error = 0.0;  // spread over batches of recorded samples
};

RadialComparison compare_radial(const ChainResult& chain, const RadialDensity& density, int batches = 10);

/// -(1/(beta N)) log Z_N for the interaction-free gas, in closed form.
double reference_free_energy(const LogGasConfig& cfg);

struct IntegrationPoint {
    double lambda = 0.0;
    double mean = 0.0;     // <W> at coupling lambda
    double std_error = 0.0;
    double spread = 0.0;   // standard deviation of W
};

struct FreeEnergyEstimate {
    double F_N = 0.0;          // -(1/(beta N)) log Z_N
    double error = 0.0;        // statistical and discretization errors combined
    double per_particle = 0.0; // F_N / N
    double per_particle_error = 0.0;
    double reference = 0.0;
    std::vector<IntegrationPoint> points;
};

/// Thermodynamic integration in the coupling from the Gaussian reference at 0 to cfg.coupling.
/// `lambda_grid` runs over fractions of cfg.coupling: it starts at 0, ends at 1, increases.
/// Refuses neighbouring points whose W distributions barely overlap.
FreeEnergyEstimate free_energy_estimate(const LogGasConfig& cfg, const std::vector<double>& lambda_grid,
                                        const MetropolisOptions& mc);

/// Evenly spaced grid 0, 1/(points-1), ..., 1.
std::vector<double> uniform_lambda_grid(int points);

void write_chain_csv(std::ostream& out, const ChainResult& chain);

nlohmann::json to_json(const LogGasConfig& cfg);
LogGasConfig loggas_config_from_json(const nlohmann::json& j);

} // namespace deflab

#pragma once

#include "deflab/common.hpp"
#include "deflab/states.hpp"
#include "deflab/symspace.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace deflab {

struct HartreeProblem {
    OneBodyOp h;
    TwoBodyOp w;

    int modes() const { return h.modes(); }
};

/// Checks Hermiticity and matching mode counts.
HartreeProblem make_hartree_problem(const Matrix& h, const Matrix& w_sector2);

/// <u, h u> + 1/2 <u (x) u, w u (x) u>.
double hartree_energy(const Vector& u, const HartreeProblem& p);

/// Euclidean gradient of the energy viewed as a function on R^{2d}, in complex form.
Vector hartree_gradient(const Vector& u, const HartreeProblem& p);

/// Tangential part of the gradient at u on the unit sphere.
Vector riemannian_gradient(const Vector& u, const HartreeProblem& p);

struct HartreeOptions {
    int restarts = 16;
    int max_iter = 20000;
    double grad_tol = 1e-9;
};

struct HartreeRun {
    Vector u;
    double energy = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct HartreeResult {
    double e_H = 0.0;
    Vector u;
    bool converged = false;         // best run reached grad_tol
    std::vector<HartreeRun> runs;    // one per restart, in seed order
    std::vector<Vector> minimizers;  // distinct up to phase, energy within 1e-8 of e_H
};

/// Armijo projected gradient descent on the sphere from `restarts` seeded starts.
HartreeResult hartree_minimize(const HartreeProblem& p, const HartreeOptions& opts = {});

/// Smallest eigenvalue of the N-body Hamiltonian (lambda defaults to 1/(N-1)).
double ground_energy(const HartreeProblem& p, int N, std::optional<double> lambda = std::nullopt);

/// Uniform mixture over the ground eigenspace (eigenvalues within `tol` of the minimum).
DensityOp ground_state_mixture(const HartreeProblem& p, int N, std::optional<double> lambda = std::nullopt,
                               double tol = 1e-9);

/// Trace distance from gamma to the convex hull of |u_i><u_i|, evaluated at the
/// Hilbert-Schmidt projection onto the hull (an upper bound on the true distance).
double hull_distance(const Matrix& gamma, const std::vector<Vector>& minimizers);

struct SweepRow {
    int N = 0;
    double E = 0.0;
    double EperN = 0.0;
    double eH = 0.0;
    double gap = 0.0;
    double rdm_distance = 0.0; // 1-RDM of the ground mixture to the minimizer hull
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double fit_C = 0.0;          // least-squares gap ~ C/N
    double fit_residual = 0.0;   // sqrt of the summed squared residuals
    int upper_bound_violations = 0; // gap < -1e-10
    int monotonicity_violations = 0;
};

SweepResult convergence_sweep(const HartreeProblem& p, std::vector<int> N_list,
                              const HartreeOptions& opts = {});

void write_sweep_csv(std::ostream& out, const SweepResult& r);

nlohmann::json to_json(const HartreeProblem& p);

} // namespace deflab

#include "deflab/hartree.hpp"

#include "deflab/io.hpp"
#include "deflab/optimize.hpp"
#include "deflab/parallel.hpp"
#include "deflab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace deflab {

namespace {

void require_unit(const Vector& u, int d)
{
    if (u.size() != d) {
        throw DomainError("Hartree: vector length does not match mode count");
    }
    if (std::abs(u.norm() - 1.0) > tolerances().normalization) {
        throw DomainError("Hartree: one-body vector is not normalized");
    }
}

double energy_unchecked(const Vector& u, const HartreeProblem& p)
{
    const Vector a = product_coordinates(u, p.w.sector);
    return u.dot(p.h.entries * u).real() + 0.5 * a.dot(p.w.entries * a).real();
}

Vector gradient_unchecked(const Vector& u, const HartreeProblem& p)
{
    const SymSector& pair = p.w.sector;
    const int d = p.modes();
    const Vector a = product_coordinates(u, pair);
    const Vector wa = p.w.entries * a;
    // J^* W a with J = d a / d u, a_{pp} = u_p^2 and a_{pq} = sqrt2 u_p u_q
    Vector jwa = Vector::Zero(d);
    for (std::size_t i = 0; i < pair.dim(); ++i) {
        const auto& occ = pair.occupation(i);
        int first = -1, second = -1;
        for (int q = 0; q < d; ++q) {
            if (occ[q] == 2) {
                first = second = q;
            } else if (occ[q] == 1) {
                (first < 0 ? first : second) = q;
            }
        }
        if (first == second) {
            jwa(first) += std::conj(2.0 * u(first)) * wa(i);
        } else {
            jwa(first) += std::conj(M_SQRT2 * u(second)) * wa(i);
            jwa(second) += std::conj(M_SQRT2 * u(first)) * wa(i);
        }
    }
    return 2.0 * (p.h.entries * u) + jwa;
}

Vector tangent(const Vector& u, const Vector& g)
{
    return g - u.dot(g).real() * u;
}

HartreeRun descend(const HartreeProblem& p, Vector u, const HartreeOptions& opts)
{
    HartreeRun run;
    u /= u.norm();
    double E = energy_unchecked(u, p);
    Vector g = tangent(u, gradient_unchecked(u, p));
    double step = 1.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const double gn = g.norm();
        if (gn < opts.grad_tol) {
            run.converged = true;
            break;
        }
        step = std::min(2.0 * step, 1e3);
        bool accepted = false;
        while (step > 1e-20) {
            Vector trial = u - step * g;
            trial /= trial.norm();
            const double Et = energy_unchecked(trial, p);
            const Vector gt = tangent(trial, gradient_unchecked(trial, p));
            const bool armijo = Et <= E - 1e-4 * step * gn * gn;
            // the Armijo decrease is below rounding level of E: accept any step that does not raise E
            // and clearly shrinks the gradient
            const double noise = 1e-14 * std::max(1.0, std::abs(E));
            const bool flat = 1e-4 * step * gn * gn < noise && Et <= E + noise && gt.norm() < 0.5 * gn;
            if (armijo || flat) {
                u = trial;
                E = Et;
                g = gt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
    }
    run.u = u;
    run.energy = E;
    run.grad_norm = g.norm();
    run.iterations = it;
    run.converged = run.converged || run.grad_norm < opts.grad_tol;
    return run;
}

} // namespace

HartreeProblem make_hartree_problem(const Matrix& h, const Matrix& w_sector2)
{
    HartreeProblem p{make_one_body(h), make_two_body(static_cast<int>(h.rows()), w_sector2)};
    return p;
}

double hartree_energy(const Vector& u, const HartreeProblem& p)
{
    require_unit(u, p.modes());
    return energy_unchecked(u, p);
}

Vector hartree_gradient(const Vector& u, const HartreeProblem& p)
{
    if (u.size() != p.modes()) {
        throw DomainError("hartree_gradient: vector length does not match mode count");
    }
    return gradient_unchecked(u, p);
}

Vector riemannian_gradient(const Vector& u, const HartreeProblem& p)
{
    require_unit(u, p.modes());
    return tangent(u, gradient_unchecked(u, p));
}

HartreeResult hartree_minimize(const HartreeProblem& p, const HartreeOptions& opts)
{
    if (opts.restarts < 1) {
        throw DomainError("hartree_minimize: need at least one restart");
    }
    const int d = p.modes();
    HartreeResult result;
    result.runs = parallel_map(static_cast<std::size_t>(opts.restarts), [&](std::size_t seed) {
        std::mt19937_64 rng(seed);
        return descend(p, random_sphere_point(rng, d), opts);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.runs.size(); ++i) {
        if (result.runs[i].energy < result.runs[best].energy) {
            best = i;
        }
    }
    result.e_H = result.runs[best].energy;
    result.u = result.runs[best].u;
    result.converged = result.runs[best].converged;
    for (const auto& run : result.runs) {
        if (run.energy > result.e_H + 1e-8) {
            continue;
        }
        bool fresh = true;
        for (const auto& m : result.minimizers) {
            if (std::abs(m.dot(run.u)) > 1.0 - 1e-6) {
                fresh = false;
                break;
            }
        }
        if (fresh) {
            result.minimizers.push_back(run.u);
        }
    }
    return result;
}

double ground_energy(const HartreeProblem& p, int N, std::optional<double> lambda)
{
    const Matrix H = assemble_hamiltonian(p.h, p.w, N, lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(H, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

DensityOp ground_state_mixture(const HartreeProblem& p, int N, std::optional<double> lambda, double tol)
{
    const Matrix H = assemble_hamiltonian(p.h, p.w, N, lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
    const RealVector& ev = solver.eigenvalues();
    const double cutoff = ev(0) + tol * std::max(1.0, std::abs(ev(0)));
    Eigen::Index k = 0;
    while (k < ev.size() && ev(k) <= cutoff) {
        ++k;
    }
    const Matrix V = solver.eigenvectors().leftCols(k);
    return DensityOp::normalized(SymSector(p.modes(), N), V * V.adjoint());
}

double hull_distance(const Matrix& gamma, const std::vector<Vector>& minimizers)
{
    if (minimizers.empty()) {
        throw DomainError("hull_distance: no minimizers");
    }
    const Eigen::Index d = gamma.rows();
    RealMatrix pts(2 * d * d, static_cast<Eigen::Index>(minimizers.size()));
    for (std::size_t i = 0; i < minimizers.size(); ++i) {
        const Matrix diff = minimizers[i] * minimizers[i].adjoint() - gamma;
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) {
                pts(2 * (r * d + c), i) = diff(r, c).real();
                pts(2 * (r * d + c) + 1, i) = diff(r, c).imag();
            }
        }
    }
    const RealVector lambda = min_norm_hull_weights(pts);
    Matrix hull_point = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < minimizers.size(); ++i) {
        hull_point += lambda(i) * minimizers[i] * minimizers[i].adjoint();
    }
    return trace_norm_distance(gamma, hull_point);
}

SweepResult convergence_sweep(const HartreeProblem& p, std::vector<int> N_list, const HartreeOptions& opts)
{
    std::sort(N_list.begin(), N_list.end());
    N_list.erase(std::unique(N_list.begin(), N_list.end()), N_list.end());
    for (int N : N_list) {
        if (N < 1) {
            throw DomainError("convergence_sweep: N must be positive, got " + std::to_string(N));
        }
        sector_dimension(p.modes(), N);
    }
    const HartreeResult hartree = hartree_minimize(p, opts);

    SweepResult result;
    result.rows = parallel_map(N_list.size(), [&](std::size_t i) {
        const int N = N_list[i];
        const Matrix H = assemble_hamiltonian(p.h, p.w, N);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
        SweepRow row;
        row.N = N;
        row.E = solver.eigenvalues()(0);
        row.EperN = row.E / N;
        row.eH = hartree.e_H;
        row.gap = hartree.e_H - row.EperN;
        const DensityOp mix = ground_state_mixture(p, N);
        row.rdm_distance = hull_distance(partial_trace(mix, 1).matrix(), hartree.minimizers);
        return row;
    });

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        if (r.gap < -1e-10) {
            ++result.upper_bound_violations;
        }
        if (i > 0 && r.EperN < result.rows[i - 1].EperN - 1e-10) {
            ++result.monotonicity_violations;
        }
        num += r.gap / r.N;
        den += 1.0 / (static_cast<double>(r.N) * r.N);
    }
    result.fit_C = den > 0 ? num / den : 0.0;
    double ss = 0.0;
    for (const auto& r : result.rows) {
        const double e = r.gap - result.fit_C / r.N;
        ss += e * e;
    }
    result.fit_residual = std::sqrt(ss);
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r)
{
    out << "N,E,EperN,eH,gap,fitC,fitResidual\n";
    for (const auto& row : r.rows) {
        out << row.N << ',' << format_double(row.E) << ',' << format_double(row.EperN) << ','
            << format_double(row.eH) << ',' << format_double(row.gap) << ',' << format_double(r.fit_C)
            << ',' << format_double(r.fit_residual) << '\n';
    }
}

nlohmann::json to_json(const HartreeProblem& p)
{
    return {{"d", p.modes()}, {"h", matrix_to_json(p.h.entries)}, {"w", matrix_to_json(p.w.entries)}};
}

} // namespace deflab

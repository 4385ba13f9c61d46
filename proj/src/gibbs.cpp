#include "deflab/gibbs.hpp"

#include "deflab/io.hpp"
#include "deflab/parallel.hpp"
#include "deflab/qdefinetti.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace deflab {

namespace {

void require_temperature(double T, const char* what)
{
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError(std::string(what) + ": temperature must be positive");
    }
}

void require_particles(int N, const char* what)
{
    if (N < 1) {
        throw DomainError(std::string(what) + ": N must be positive, got " + std::to_string(N));
    }
}

double xlogx(double x)
{
    return x > tolerances().eigen_clamp ? x * std::log(x) : 0.0;
}

double energy_raw(const Vector& u, const HartreeProblem& p)
{
    const Vector a = product_coordinates(u, p.w.sector);
    return u.dot(p.h.entries * u).real() + 0.5 * a.dot(p.w.entries * a).real();
}

struct GridSize {
    int radial;
    int phase;
};

// Exact for the coherent-state polynomials of degree N (radial >= (N+1)/2, phase > N)
// with headroom for the non-polynomial integrands.
GridSize fine_grid(int d, int N)
{
    if (d == 2) {
        return {std::max(64, N + 16), std::max(96, 2 * N + 16)};
    }
    return {std::max(20, N + 6), std::max(20, N + 6)};
}

GridSize coarse_grid(int d, int N)
{
    const GridSize f = fine_grid(d, N);
    return {std::max((N + 2) / 2, 3 * f.radial / 4), std::max(N + 1, 3 * f.phase / 4)};
}

std::uint64_t row_seed(std::uint64_t seed, int N)
{
    return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(N + 1));
}

// dim * sum_i w_i f(<u_i^N, Gamma u_i^N>)
double symbol_entropy(const DensityOp& state, const std::vector<SpherePoint>& grid)
{
    const SymSector& s = state.sector();
    double sum = 0.0;
    for (const auto& pt : grid) {
        const Vector c = product_coordinates(pt.u, s);
        sum += pt.weight * xlogx(std::max(0.0, c.dot(state.matrix() * c).real()));
    }
    return static_cast<double>(s.dim()) * sum;
}

} // namespace

DensityOp quantum_gibbs(const HartreeProblem& p, int N, double T)
{
    require_temperature(T, "quantum_gibbs");
    require_particles(N, "quantum_gibbs");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(assemble_hamiltonian(p.h, p.w, N));
    const RealVector& ev = solver.eigenvalues();
    RealVector weights = (-(ev.array() - ev(0)) / T).exp().matrix();
    weights /= weights.sum();
    const Matrix& V = solver.eigenvectors();
    return DensityOp::normalized(SymSector(p.modes(), N), V * weights.cast<Complex>().asDiagonal() * V.adjoint());
}

double quantum_free_energy(const HartreeProblem& p, int N, double T)
{
    require_temperature(T, "quantum_free_energy");
    require_particles(N, "quantum_free_energy");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(assemble_hamiltonian(p.h, p.w, N), Eigen::EigenvaluesOnly);
    const RealVector& ev = solver.eigenvalues();
    const double z = (-(ev.array() - ev(0)) / T).exp().sum();
    return ev(0) - T * std::log(z);
}

double free_energy_functional(const HartreeProblem& p, const DensityOp& state, double T)
{
    if (state.modes() != p.modes()) {
        throw DomainError("free_energy_functional: mode count mismatch");
    }
    const Matrix H = assemble_hamiltonian(p.h, p.w, state.particles());
    return (H * state.matrix()).trace().real() + T * neg_entropy(state.matrix());
}

UniformLawCheck validate_uniform_modulus(std::size_t samples, std::uint64_t seed)
{
    if (samples < 1000) {
        throw DomainError("validate_uniform_modulus: need at least 1000 samples");
    }
    std::mt19937_64 rng(seed);
    std::vector<double> s(samples);
    for (auto& x : s) {
        x = std::norm(random_sphere_point(rng, 2)(0));
    }
    std::sort(s.begin(), s.end());
    double D = 0.0;
    const double n = static_cast<double>(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        D = std::max({D, (i + 1) / n - s[i], s[i] - i / n});
    }
    UniformLawCheck check;
    check.samples = samples;
    check.ks_statistic = D;
    check.critical = 1.628 / std::sqrt(n);
    check.passed = D <= check.critical;
    return check;
}

ClassicalFreeEnergy classical_free_energy(const HartreeProblem& p, double t, const MonteCarloOptions& mc)
{
    require_temperature(t, "classical_free_energy");
    if (mc.samples < 1000) {
        throw DomainError("classical_free_energy: refusing fewer than 1000 Monte Carlo samples");
    }
    const int d = p.modes();
    std::mt19937_64 rng(mc.seed);
    std::vector<double> energies(mc.samples);
    for (auto& e : energies) {
        e = energy_raw(random_sphere_point(rng, d), p);
    }
    const double emin = *std::min_element(energies.begin(), energies.end());
    double sum = 0.0, sum_sq = 0.0;
    for (double e : energies) {
        const double x = std::exp(-(e - emin) / t);
        sum += x;
        sum_sq += x * x;
    }
    const double n = static_cast<double>(mc.samples);
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / (n - 1.0));

    ClassicalFreeEnergy out;
    out.mc = emin - t * std::log(mean);
    out.mc_error = t * se / mean;

    if (d == 2) {
        out.law = validate_uniform_modulus();
        if (out.law->passed) {
            const auto grid = sphere_quadrature(2, 128, 128);
            double qmin = 1e300;
            std::vector<double> qe(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                qe[i] = energy_raw(grid[i].u, p);
                qmin = std::min(qmin, qe[i]);
            }
            double z = 0.0, total = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                z += grid[i].weight * std::exp(-(qe[i] - qmin) / t);
                total += grid[i].weight;
            }
            out.quadrature = qmin - t * std::log(z / total);
        }
    }
    return out;
}

UpperSymbol classical_gibbs_symbol(const HartreeProblem& p, double t, int N)
{
    require_temperature(t, "classical_gibbs_symbol");
    require_particles(N, "classical_gibbs_symbol");
    const int d = p.modes();
    const GridSize g = fine_grid(d, N);
    UpperSymbol symbol;
    symbol.nodes = sphere_quadrature(d, g.radial, g.phase);
    symbol.density.resize(symbol.nodes.size());
    double emin = 1e300;
    for (std::size_t i = 0; i < symbol.nodes.size(); ++i) {
        symbol.density[i] = energy_raw(symbol.nodes[i].u, p);
        emin = std::min(emin, symbol.density[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < symbol.nodes.size(); ++i) {
        symbol.density[i] = std::exp(-(symbol.density[i] - emin) / t);
        z += symbol.nodes[i].weight * symbol.density[i];
    }
    for (double& rho : symbol.density) {
        rho /= z;
    }
    return symbol;
}

DensityOp upper_symbol_state(const UpperSymbol& symbol, int N)
{
    require_particles(N, "upper_symbol_state");
    if (symbol.nodes.empty() || symbol.nodes.size() != symbol.density.size()) {
        throw DomainError("upper_symbol_state: malformed symbol");
    }
    SymSector s(static_cast<int>(symbol.nodes.front().u.size()), N);
    Matrix G = Matrix::Zero(s.dim(), s.dim());
    for (std::size_t i = 0; i < symbol.nodes.size(); ++i) {
        if (symbol.density[i] < 0.0) {
            throw DomainError("upper_symbol_state: negative density");
        }
        const Vector c = product_coordinates(symbol.nodes[i].u, s);
        G.noalias() += (symbol.nodes[i].weight * symbol.density[i]) * (c * c.adjoint());
    }
    return DensityOp::normalized(s, G);
}

Matrix upper_symbol_one_body(const UpperSymbol& symbol)
{
    const auto d = symbol.nodes.front().u.size();
    Matrix g = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < symbol.nodes.size(); ++i) {
        const Vector& u = symbol.nodes[i].u;
        g.noalias() += (symbol.nodes[i].weight * symbol.density[i]) * (u * u.adjoint());
    }
    return g;
}

BerezinLiebResult berezin_lieb_first(const DensityOp& state, double tolerance, const MonteCarloOptions& mc)
{
    const int d = state.modes();
    const int N = state.particles();
    BerezinLiebResult r;
    r.lhs = neg_entropy(state.matrix());
    if (d <= 3) {
        const GridSize f = fine_grid(d, N), c = coarse_grid(d, N);
        r.rhs = symbol_entropy(state, sphere_quadrature(d, f.radial, f.phase));
        r.integration_error = std::abs(r.rhs - symbol_entropy(state, sphere_quadrature(d, c.radial, c.phase)));
    } else {
        const double dim = static_cast<double>(state.sector().dim());
        const auto est = sphere_average(d, mc.samples, mc.seed, [&](const Vector& u) {
            const Vector cu = product_coordinates(u, state.sector());
            return dim * xlogx(std::max(0.0, cu.dot(state.matrix() * cu).real()));
        });
        r.rhs = est.mean;
        r.integration_error = 4.0 * est.std_error;
    }
    r.slack = r.lhs - r.rhs;
    r.passed = r.slack >= -std::max(tolerance, r.integration_error);
    return r;
}

BerezinLiebResult berezin_lieb_second(const UpperSymbol& symbol, int N, double tolerance)
{
    const DensityOp state = upper_symbol_state(symbol, N);
    const double dim = static_cast<double>(state.sector().dim());
    BerezinLiebResult r;
    r.lhs = neg_entropy(state.matrix());
    for (std::size_t i = 0; i < symbol.nodes.size(); ++i) {
        r.rhs += symbol.nodes[i].weight * xlogx(symbol.density[i] / dim);
    }
    r.rhs *= dim;
    r.slack = r.rhs - r.lhs;
    r.passed = r.slack >= -tolerance;
    return r;
}

LowerBoundCheck lower_bound_check(const HartreeProblem& p, const DensityOp& state, double t)
{
    const int N = state.particles();
    if (N < 2) {
        throw DomainError("lower_bound_check: need N >= 2");
    }
    if (state.modes() > 3) {
        throw DomainError("lower_bound_check: quadrature needs d <= 3");
    }
    const double T = t * N;
    const double log_dim = std::log(static_cast<double>(state.sector().dim()));
    LowerBoundCheck out;
    out.shifted = (free_energy_functional(p, state, T) + T * log_dim) / N;

    const Matrix g1 = partial_trace(state, 1).matrix();
    const Matrix g2 = partial_trace(state, 2).matrix();
    const Matrix m1 = ckmr_rdm(state, 1).matrix();
    const Matrix m2 = ckmr_rdm(state, 2).matrix();
    const double exact = (p.h.entries * g1).trace().real() + 0.5 * (p.w.entries * g2).trace().real();
    const double symbol = (p.h.entries * m1).trace().real() + 0.5 * (p.w.entries * m2).trace().real();
    out.energy_error = std::abs(exact - symbol);

    const GridSize f = fine_grid(state.modes(), N);
    const double mu_log_mu = symbol_entropy(state, sphere_quadrature(state.modes(), f.radial, f.phase)) + log_dim;
    out.classical_of_symbol = symbol + t * mu_log_mu;
    out.slack = out.shifted - (out.classical_of_symbol - out.energy_error);
    return out;
}

GapSweep gap_sweep(const HartreeProblem& p, double t, std::vector<int> N_list, const MonteCarloOptions& mc)
{
    require_temperature(t, "gap_sweep");
    std::sort(N_list.begin(), N_list.end());
    N_list.erase(std::unique(N_list.begin(), N_list.end()), N_list.end());
    const int d = p.modes();
    for (int N : N_list) {
        require_particles(N, "gap_sweep");
        sector_dimension(d, N);
    }
    std::optional<Matrix> classical_rdm;
    if (d <= 3 && !N_list.empty()) {
        classical_rdm = upper_symbol_one_body(classical_gibbs_symbol(p, t, N_list.back()));
    }

    GapSweep sweep;
    sweep.rows = parallel_map(N_list.size(), [&](std::size_t i) {
        const int N = N_list[i];
        FreeEnergyRow row;
        row.N = N;
        row.T = t * N;
        row.F_N = quantum_free_energy(p, N, row.T);
        row.shifted = (row.F_N + row.T * std::log(static_cast<double>(sector_dimension(d, N)))) / N;
        const ClassicalFreeEnergy cl = classical_free_energy(p, t, {mc.samples, row_seed(mc.seed, N)});
        row.F_cl = cl.best();
        row.mc_err = cl.mc_error;
        row.gap = row.shifted - row.F_cl;
        if (classical_rdm) {
            const Matrix g1 = partial_trace(quantum_gibbs(p, N, row.T), 1).matrix();
            row.rdm_distance = trace_norm_distance(g1, *classical_rdm);
        }
        return row;
    });

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
        const auto& r = sweep.rows[i];
        const double x = static_cast<double>(d) / r.N;
        num += std::abs(r.gap) * x;
        den += x * x;
        if (2 * i >= sweep.rows.size()) {
            sweep.max_gap_top_half = std::max(sweep.max_gap_top_half, std::abs(r.gap));
        }
    }
    sweep.fit_C = den > 0 ? num / den : 0.0;
    return sweep;
}

void write_gap_csv(std::ostream& out, const GapSweep& sweep)
{
    out << "N,T,F_N,shifted,F_cl,mc_err,gap\n";
    for (const auto& r : sweep.rows) {
        out << r.N << ',' << format_double(r.T) << ',' << format_double(r.F_N) << ',' << format_double(r.shifted)
            << ',' << format_double(r.F_cl) << ',' << format_double(r.mc_err) << ',' << format_double(r.gap)
            << '\n';
    }
}

nlohmann::json to_json(const GapSweep& sweep)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"N", r.N}, {"T", r.T}, {"F_N", r.F_N}, {"shifted", r.shifted}, {"F_cl", r.F_cl},
                        {"mc_err", r.mc_err}, {"gap", r.gap}, {"rdm_distance", r.rdm_distance}});
    }
    return {{"rows", rows}, {"max_gap_top_half", sweep.max_gap_top_half}, {"fit_C", sweep.fit_C}};
}

} // namespace deflab

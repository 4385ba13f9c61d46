#include "deflab/loggas.hpp"

#include "deflab/io.hpp"
#include "deflab/optimize.hpp"
#include "deflab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>

namespace deflab {

namespace {

double pair_log_sum(const RealMatrix& X)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            s += std::log((X.row(i) - X.row(j)).norm());
        }
    }
    return s;
}

// -1/(N-1) sum_{i<j} log|x_i - x_j|
double interaction_term(const RealMatrix& X)
{
    const auto N = X.rows();
    return N > 1 ? -pair_log_sum(X) / static_cast<double>(N - 1) : 0.0;
}

double grid_alpha(const LogGasConfig& cfg)
{
    return cfg.alpha > 0.0 ? cfg.alpha : cfg.grid_radius / (cfg.grid - 1);
}

std::vector<double> grid_radii(const LogGasConfig& cfg)
{
    std::vector<double> r(cfg.grid);
    const double h = cfg.grid_radius / (cfg.grid - 1);
    for (int i = 0; i < cfg.grid; ++i) {
        r[i] = i * h;
    }
    return r;
}

// K_ij = -log_alpha(max(r_i, r_j)); rings interact through the larger radius
RealVector kernel_column_values(const std::vector<double>& r, double alpha)
{
    RealVector a(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) {
        a(i) = neg_log_regularized(r[i], alpha);
    }
    return a;
}

// (K p)_i = a_i sum_{j <= i} p_j + sum_{j > i} a_j p_j
RealVector kernel_apply(const RealVector& a, const RealVector& p)
{
    const Eigen::Index M = a.size();
    RealVector out(M);
    double tail = 0.0;
    for (Eigen::Index j = 0; j < M; ++j) {
        tail += a(j) * p(j);
    }
    double head = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) {
        head += p(i);
        tail -= a(i) * p(i);
        out(i) = a(i) * head + tail;
    }
    return out;
}

} // namespace

void validate(const LogGasConfig& cfg)
{
    if (cfg.N < 1) {
        throw DomainError("loggas: field 'N' must be at least 1, got " + std::to_string(cfg.N));
    }
    if (!(cfg.beta > 0.0)) {
        throw DomainError("loggas: field 'beta' must be positive");
    }
    if (!(cfg.alpha >= 0.0)) {
        throw DomainError("loggas: field 'alpha' must be non-negative");
    }
    if (cfg.coupling < 0.0) {
        throw DomainError("loggas: field 'coupling' must be non-negative");
    }
    if (!(cfg.v_coeff > 0.0) || !(cfg.v_power > 0.0)) {
        throw DomainError("loggas: fields 'v_coeff' and 'v_power' must be positive");
    }
    if (cfg.grid < 64) {
        throw DomainError("loggas: field 'grid' must be at least 64, got " + std::to_string(cfg.grid));
    }
    if (!(cfg.grid_radius > 0.0)) {
        throw DomainError("loggas: field 'grid_radius' must be positive");
    }
}

double neg_log_regularized(double r, double alpha)
{
    if (alpha > 0.0 && r <= alpha) {
        return -std::log(alpha) + 0.5 * (1.0 - r * r / (alpha * alpha));
    }
    return -std::log(r);
}

ChainResult metropolis_sample(const LogGasConfig& cfg, const MetropolisOptions& opts,
                              const ConfigurationObserver& observer)
{
    validate(cfg);
    if (opts.sweeps < opts.burn_in) {
        throw DomainError("metropolis_sample: recorded sweeps must be at least the burn-in");
    }
    if (opts.thin < 1) {
        throw DomainError("metropolis_sample: thin must be positive");
    }
    const int N = cfg.N;
    const double bN = cfg.beta * N;
    const double g = N > 1 ? cfg.coupling / (N - 1) : 0.0;
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, N - 1);

    double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / std::sqrt(bN);
    RealMatrix X(N, 2);
    for (int i = 0; i < N; ++i) {
        X(i, 0) = step * normal(rng);
        X(i, 1) = step * normal(rng);
    }

    auto delta_energy = [&](int i, double y0, double y1) {
        const double r_new = std::hypot(y0, y1);
        const double r_old = std::hypot(X(i, 0), X(i, 1));
        double dE = cfg.potential(r_new) - cfg.potential(r_old);
        if (g != 0.0) {
            double logs = 0.0;
            for (int j = 0; j < N; ++j) {
                if (j == i) {
                    continue;
                }
                const double dn = std::hypot(y0 - X(j, 0), y1 - X(j, 1));
                const double d_old = std::hypot(X(i, 0) - X(j, 0), X(i, 1) - X(j, 1));
                logs += std::log(dn) - std::log(d_old);
            }
            dE -= g * logs;
        }
        return dE;
    };

    ChainResult out;
    std::size_t accepted = 0, proposed = 0;
    std::size_t window_acc = 0, window_prop = 0;
    const std::size_t total = opts.burn_in + opts.sweeps;
    for (std::size_t sweep = 0; sweep < total; ++sweep) {
        for (int move = 0; move < N; ++move) {
            const int i = pick(rng);
            const double y0 = X(i, 0) + step * normal(rng);
            const double y1 = X(i, 1) + step * normal(rng);
            const double dE = delta_energy(i, y0, y1);
            const bool accept = dE <= 0.0 || unif(rng) < std::exp(-bN * dE);
            if (accept) {
                X(i, 0) = y0;
                X(i, 1) = y1;
            }
            if (sweep < opts.burn_in) {
                window_acc += accept;
                ++window_prop;
            } else {
                accepted += accept;
                ++proposed;
            }
        }
        if (sweep < opts.burn_in && (sweep + 1) % 100 == 0) {
            const double rate = static_cast<double>(window_acc) / window_prop;
            if (rate > 0.5) {
                step *= 1.1;
            } else if (rate < 0.3) {
                step *= 0.9;
            }
            window_acc = window_prop = 0;
        }
        if (sweep >= opts.burn_in && (sweep - opts.burn_in) % opts.thin == 0) {
            double sq = 0.0;
            for (int i = 0; i < N; ++i) {
                const double r2 = X(i, 0) * X(i, 0) + X(i, 1) * X(i, 1);
                sq += r2;
                out.radii.push_back(std::sqrt(r2));
            }
            out.mean_sq_radius.push_back(sq / N);
            out.interaction.push_back(interaction_term(X));
            if (observer) {
                observer(sweep - opts.burn_in, X);
            }
        }
    }
    out.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0.0;
    out.step = step;
    out.acceptance_warning = out.acceptance < 0.05 || out.acceptance > 0.95;
    return out;
}

std::vector<ChainResult> metropolis_chains(const LogGasConfig& cfg, const MetropolisOptions& opts, int chains)
{
    return parallel_map(static_cast<std::size_t>(chains), [&](std::size_t c) {
        MetropolisOptions o = opts;
        o.seed = opts.seed + c;
        return metropolis_sample(cfg, o);
    });
}

MonteCarloEstimate batch_mean(const std::vector<double>& series, int batches)
{
    if (batches < 2 || series.size() < static_cast<std::size_t>(batches)) {
        throw DomainError("batch_mean: need at least as many samples as batches, and two batches");
    }
    const std::size_t len = series.size() / batches;
    std::vector<double> means(batches);
    for (int b = 0; b < batches; ++b) {
        means[b] = std::accumulate(series.begin() + b * len, series.begin() + (b + 1) * len, 0.0) / len;
    }
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
    double var = 0.0;
    for (double m : means) {
        var += (m - mean) * (m - mean);
    }
    var /= (batches - 1);
    return {mean, std::sqrt(var / batches)};
}

double gelman_rubin(const std::vector<std::vector<double>>& chains)
{
    const std::size_t m = chains.size();
    if (m < 2) {
        throw DomainError("gelman_rubin: need at least two chains");
    }
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        if (c.size() != n || n < 2) {
            throw DomainError("gelman_rubin: chains must have equal length of at least two");
        }
    }
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = std::accumulate(chains[c].begin(), chains[c].end(), 0.0) / n;
        double v = 0.0;
        for (double x : chains[c]) {
            v += (x - means[c]) * (x - means[c]);
        }
        vars[c] = v / (n - 1);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double B = 0.0;
    for (double mu : means) {
        B += (mu - grand) * (mu - grand);
    }
    B *= static_cast<double>(n) / (m - 1);
    const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
    const double var_plus = (n - 1.0) / n * W + B / n;
    return std::sqrt(var_plus / W);
}

double RadialDensity::cdf(double r) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < radii.size() && radii[i] <= r; ++i) {
        s += weights[i];
    }
    return s;
}

double mf_energy(const LogGasConfig& cfg, const RadialDensity& density, double alpha)
{
    RealVector p = Eigen::Map<const RealVector>(density.weights.data(), density.weights.size());
    const RealVector a = kernel_column_values(density.radii, alpha);
    double linear = 0.0;
    for (std::size_t i = 0; i < density.radii.size(); ++i) {
        linear += p(i) * cfg.potential(density.radii[i]);
    }
    return linear + 0.5 * cfg.coupling * p.dot(kernel_apply(a, p));
}

MeanFieldResult mf_minimize(const LogGasConfig& cfg)
{
    validate(cfg);
    const std::vector<double> r = grid_radii(cfg);
    const int M = cfg.grid;
    MeanFieldResult out;
    out.alpha = grid_alpha(cfg);
    const RealVector a = kernel_column_values(r, out.alpha);

    // convexity: K restricted to zero-sum vectors must be positive semidefinite
    RealMatrix K(M, M);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            K(i, j) = a(std::max(i, j));
        }
    }
    RealMatrix B(M, M - 1);
    B.setZero();
    for (int j = 0; j < M - 1; ++j) {
        B(j, j) = 1.0;
        B(j + 1, j) = -1.0;
    }
    Eigen::HouseholderQR<RealMatrix> qr(B);
    const RealMatrix Z = RealMatrix(qr.householderQ()).leftCols(M - 1);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(Z.transpose() * K * Z, Eigen::EigenvaluesOnly);
    out.kernel_min_eigenvalue = es.eigenvalues()(0);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (out.kernel_min_eigenvalue < -1e-10 * scale) {
        throw DomainError("mf_minimize: interaction kernel is not positive semidefinite on zero-sum vectors"
                          " (min eigenvalue " + format_double(out.kernel_min_eigenvalue) + " at alpha="
                          + format_double(out.alpha) + ")");
    }

    RealVector v(M);
    for (int i = 0; i < M; ++i) {
        v(i) = cfg.potential(r[i]);
    }
    const double L = std::max(1e-12, cfg.coupling * es.eigenvalues().maxCoeff());
    const double step = 1.0 / L;
    auto energy = [&](const RealVector& p) { return v.dot(p) + 0.5 * cfg.coupling * p.dot(kernel_apply(a, p)); };
    auto gradient = [&](const RealVector& p) -> RealVector { return v + cfg.coupling * kernel_apply(a, p); };

    RealVector p = RealVector::Constant(M, 1.0 / M);
    RealVector y = p;
    double t = 1.0;
    double E = energy(p);
    int it = 0;
    const int max_iter = 200000;
    for (; it < max_iter; ++it) {
        const RealVector next = project_to_simplex(y - step * gradient(y));
        const double En = energy(next);
        if (En > E) {
            // adaptive restart of the momentum
            y = p;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double change = (next - p).lpNorm<1>();
        y = next + ((t - 1.0) / t_next) * (next - p);
        p = next;
        t = t_next;
        E = En;
        if (change < 1e-14) {
            break;
        }
    }
    out.iterations = it;
    out.e_MF = E;
    out.density.radii = r;
    out.density.weights.assign(p.data(), p.data() + M);
    if (p(M - 1) > 1e-10) {
        throw DomainError("mf_minimize: mass " + format_double(p(M - 1))
                          + " on the outermost ring; increase 'grid_radius'");
    }
    return out;
}

double wasserstein1(std::vector<double> samples, const RadialDensity& density)
{
    if (samples.empty()) {
        throw DomainError("wasserstein1: no samples");
    }
    std::sort(samples.begin(), samples.end());
    // integrate |F_emp - F_rho| over the merged breakpoints
    std::vector<double> cuts(samples.begin(), samples.end());
    cuts.insert(cuts.end(), density.radii.begin(), density.radii.end());
    std::sort(cuts.begin(), cuts.end());
    const double n = static_cast<double>(samples.size());
    double w = 0.0;
    std::size_t si = 0, di = 0;
    double Fe = 0.0, Fr = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        while (si < samples.size() && samples[si] <= cuts[k]) {
            ++si;
        }
        while (di < density.radii.size() && density.radii[di] <= cuts[k]) {
            Fr += density.weights[di];
            ++di;
        }
        Fe = si / n;
        w += std::abs(Fe - Fr) * (cuts[k + 1] - cuts[k]);
    }
    return w;
}

RadialComparison compare_radial(const ChainResult& chain, const RadialDensity& density, int batches)
{
    RadialComparison out;
    out.w1 = wasserstein1(chain.radii, density);
    const std::size_t len = chain.radii.size() / batches;
    if (batches < 2 || len == 0) {
        throw DomainError("compare_radial: not enough samples for the requested batches");
    }
    std::vector<double> w(batches);
    for (int b = 0; b < batches; ++b) {
        w[b] = wasserstein1(std::vector<double>(chain.radii.begin() + b * len, chain.radii.begin() + (b + 1) * len),
                            density);
    }
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / batches;
    double var = 0.0;
    for (double x : w) {
        var += (x - mean) * (x - mean);
    }
    out.error = std::sqrt(var / (batches - 1) / batches);
    return out;
}

double reference_free_energy(const LogGasConfig& cfg)
{
    validate(cfg);
    const double bN = cfg.beta * cfg.N;
    const double p = cfg.v_power;
    // log of the one-particle integral of exp(-beta N c |x|^p) over R^2
    const double log_z1 = std::log(2.0 * M_PI / p) + std::lgamma(2.0 / p) - (2.0 / p) * std::log(bN * cfg.v_coeff);
    return -(1.0 / bN) * cfg.N * log_z1;
}

std::vector<double> uniform_lambda_grid(int points)
{
    if (points < 2) {
        throw DomainError("uniform_lambda_grid: need at least two points");
    }
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        g[i] = static_cast<double>(i) / (points - 1);
    }
    return g;
}

FreeEnergyEstimate free_energy_estimate(const LogGasConfig& cfg, const std::vector<double>& lambda_grid,
                                        const MetropolisOptions& mc)
{
    validate(cfg);
    if (lambda_grid.size() < 2 || lambda_grid.front() != 0.0 || lambda_grid.back() != 1.0) {
        throw DomainError("free_energy_estimate: coupling grid must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > lambda_grid[i - 1])) {
            throw DomainError("free_energy_estimate: coupling grid must increase");
        }
    }
    FreeEnergyEstimate out;
    out.reference = reference_free_energy(cfg);
    const double bN = cfg.beta * cfg.N;

    out.points = parallel_map(lambda_grid.size(), [&](std::size_t k) {
        LogGasConfig c = cfg;
        c.coupling = cfg.coupling * lambda_grid[k];
        MetropolisOptions o = mc;
        o.seed = mc.seed + 1000003ULL * k;
        const ChainResult chain = metropolis_sample(c, o);
        IntegrationPoint pt;
        pt.lambda = lambda_grid[k];
        const MonteCarloEstimate est = batch_mean(chain.interaction);
        pt.mean = est.mean;
        pt.std_error = est.std_error;
        double var = 0.0;
        for (double w : chain.interaction) {
            var += (w - est.mean) * (w - est.mean);
        }
        pt.spread = std::sqrt(var / std::max<std::size_t>(1, chain.interaction.size() - 1));
        return pt;
    });

    // dF/dlambda = coupling <W>; neighbouring points need overlapping W distributions
    for (std::size_t k = 0; k + 1 < out.points.size(); ++k) {
        const double dl = cfg.coupling * (out.points[k + 1].lambda - out.points[k].lambda);
        const double spread = std::max(out.points[k].spread, out.points[k + 1].spread);
        if (bN * dl * spread > 4.0) {
            throw DomainError("free_energy_estimate: insufficient overlap between coupling fractions "
                              + format_double(out.points[k].lambda) + " and "
                              + format_double(out.points[k + 1].lambda) + " (beta N dlambda sd = "
                              + format_double(bN * dl * spread) + "); refine the grid");
        }
    }

    auto trapezoid = [&](std::size_t stride) {
        double integral = 0.0, var = 0.0;
        std::vector<double> c(out.points.size(), 0.0);
        for (std::size_t k = 0; k + stride < out.points.size(); k += stride) {
            const double dl = out.points[k + stride].lambda - out.points[k].lambda;
            c[k] += 0.5 * dl;
            c[k + stride] += 0.5 * dl;
        }
        for (std::size_t k = 0; k < out.points.size(); ++k) {
            integral += c[k] * out.points[k].mean;
            var += c[k] * c[k] * out.points[k].std_error * out.points[k].std_error;
        }
        return std::pair<double, double>{cfg.coupling * integral, cfg.coupling * cfg.coupling * var};
    };
    const auto [fine, fine_var] = trapezoid(1);
    double discretization = 0.0;
    if (out.points.size() >= 3 && (out.points.size() - 1) % 2 == 0) {
        discretization = std::abs(fine - trapezoid(2).first) / 3.0;
    }
    out.F_N = out.reference + fine;
    out.error = std::sqrt(fine_var + discretization * discretization);
    out.per_particle = out.F_N / cfg.N;
    out.per_particle_error = out.error / cfg.N;
    return out;
}

void write_chain_csv(std::ostream& out, const ChainResult& chain)
{
    out << "sample,mean_sq_radius,interaction\n";
    for (std::size_t i = 0; i < chain.mean_sq_radius.size(); ++i) {
        out << i << ',' << format_double(chain.mean_sq_radius[i]) << ',' << format_double(chain.interaction[i])
            << '\n';
    }
}

nlohmann::json to_json(const LogGasConfig& cfg)
{
    return {{"N", cfg.N},           {"beta", cfg.beta},   {"coupling", cfg.coupling},
            {"v_coeff", cfg.v_coeff}, {"v_power", cfg.v_power}, {"alpha", cfg.alpha},
            {"grid", cfg.grid},     {"grid_radius", cfg.grid_radius}};
}

LogGasConfig loggas_config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known{"N", "beta", "coupling", "v_coeff", "v_power", "alpha", "grid",
                                             "grid_radius"};
    std::string unknown;
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            unknown += (unknown.empty() ? "" : ", ") + key;
        }
    }
    if (!unknown.empty()) {
        throw DomainError("loggas config: unknown keys: " + unknown);
    }
    if (!j.contains("N")) {
        throw DomainError("loggas config: missing required key 'N'");
    }
    LogGasConfig cfg;
    cfg.N = j.at("N").get<int>();
    cfg.beta = j.value("beta", cfg.beta);
    cfg.coupling = j.value("coupling", cfg.coupling);
    cfg.v_coeff = j.value("v_coeff", cfg.v_coeff);
    cfg.v_power = j.value("v_power", cfg.v_power);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.grid = j.value("grid", cfg.grid);
    cfg.grid_radius = j.value("grid_radius", cfg.grid_radius);
    validate(cfg);
    return cfg;
}

} // namespace deflab

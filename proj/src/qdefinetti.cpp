#include "deflab/qdefinetti.hpp"

#include "deflab/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace deflab {

namespace {

void require_unit(const Vector& u, const char* who)
{
    if (std::abs(u.norm() - 1.0) > tolerances().normalization) {
        throw DomainError(std::string(who) + ": direction is not normalized");
    }
}

void require_order(int n, int N, const char* who)
{
    if (n < 0 || n > N) {
        throw DomainError(std::string(who) + ": order " + std::to_string(n) + " outside [0, "
                          + std::to_string(N) + "]");
    }
}

DensityOp hermitian_state(const SymSector& sector, Matrix m)
{
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityOp(sector, std::move(m));
}

} // namespace

double lower_symbol_value(const Matrix& op, const SymSector& sector, const Vector& u)
{
    require_unit(u, "lower_symbol_value");
    const Vector c = product_coordinates(u, sector);
    return static_cast<double>(sector.dim()) * c.dot(op * c).real();
}

double lower_symbol_value(const DensityOp& state, const Vector& u)
{
    return std::max(0.0, lower_symbol_value(state.matrix(), state.sector(), u));
}

Matrix sym_pad(const Matrix& gamma, const SymSector& gamma_sector, int n)
{
    if (gamma_sector.particles() > n) {
        throw DomainError("sym_pad: operator order " + std::to_string(gamma_sector.particles())
                          + " exceeds target order " + std::to_string(n));
    }
    return second_quantize(gamma, gamma_sector, SymSector(gamma_sector.modes(), n));
}

Matrix sym_pad(const DensityOp& gamma, int n)
{
    return sym_pad(gamma.matrix(), gamma.sector(), n);
}

DensityOp ckmr_rdm(const DensityOp& state, int n)
{
    const int N = state.particles();
    const int d = state.modes();
    require_order(n, N, "ckmr_rdm");
    SymSector target(d, n);
    const double log_norm = log_binomial(N + n + d - 1, n);
    Matrix sum = Matrix::Zero(target.dim(), target.dim());
    for (int l = 0; l <= n; ++l) {
        const double weight = std::exp(log_binomial(N, l) - log_norm);
        sum += weight * sym_pad(partial_trace(state, l), n);
    }
    return hermitian_state(target, std::move(sum));
}

DensityOp moment_oracle_rdm(const DensityOp& state, int n, const MomentValidation& certificate)
{
    const int N = state.particles();
    const int d = state.modes();
    require_order(n, N, "moment_oracle_rdm");
    if (!certificate.passed || certificate.modes != d || certificate.max_degree < N + n) {
        throw DomainError("moment_oracle_rdm: sphere moments not validated for d=" + std::to_string(d)
                          + " up to degree " + std::to_string(N + n));
    }
    sector_dimension(d, N + n);
    const SymSector& big = state.sector();
    SymSector target(d, n);
    const double log_dim_N = std::log(static_cast<double>(big.dim()));

    std::vector<double> half_log_multi_N(big.dim()), half_log_multi_n(target.dim());
    for (std::size_t i = 0; i < big.dim(); ++i) {
        double v = log_factorial(N);
        for (int p : big.occupation(i)) {
            v -= log_factorial(p);
        }
        half_log_multi_N[i] = 0.5 * v;
    }
    for (std::size_t a = 0; a < target.dim(); ++a) {
        double v = log_factorial(n);
        for (int p : target.occupation(a)) {
            v -= log_factorial(p);
        }
        half_log_multi_n[a] = 0.5 * v;
    }

    const Matrix& G = state.matrix();
    Matrix out = Matrix::Zero(target.dim(), target.dim());
    Occupation j(d), sum(d);
    for (std::size_t a = 0; a < target.dim(); ++a) {
        const auto& alpha = target.occupation(a);
        for (std::size_t b = 0; b < target.dim(); ++b) {
            const auto& beta = target.occupation(b);
            Complex entry(0.0, 0.0);
            for (std::size_t i = 0; i < big.dim(); ++i) {
                const auto& occ_i = big.occupation(i);
                bool valid = true;
                for (int p = 0; p < d; ++p) {
                    j[p] = beta[p] + occ_i[p] - alpha[p];
                    valid = valid && j[p] >= 0;
                    sum[p] = alpha[p] + j[p];
                }
                if (!valid) {
                    continue;
                }
                const std::size_t jj = big.index(j);
                const double log_coef = log_dim_N + half_log_multi_n[a] + half_log_multi_n[b]
                                        + half_log_multi_N[i] + half_log_multi_N[jj]
                                        + log_sphere_moment(sum);
                entry += G(i, jj) * std::exp(log_coef);
            }
            out(a, b) = entry;
        }
    }
    return hermitian_state(target, std::move(out));
}

Matrix schur_resolution(const SymSector& sector)
{
    const int N = sector.particles();
    const double log_dim = std::log(static_cast<double>(sector.dim()));
    Matrix out = Matrix::Zero(sector.dim(), sector.dim());
    // off-diagonal moments vanish: int u^i conj(u)^j du = 0 for i != j
    for (std::size_t i = 0; i < sector.dim(); ++i) {
        double log_multi = log_factorial(N);
        for (int p : sector.occupation(i)) {
            log_multi -= log_factorial(p);
        }
        out(i, i) = std::exp(log_dim + log_multi + log_sphere_moment(sector.occupation(i)));
    }
    return out;
}

double lower_symbol_average(const DensityOp& state)
{
    return (schur_resolution(state.sector()) * state.matrix()).trace().real();
}

DeFinettiGap definetti_gap(const DensityOp& state, int n)
{
    const int N = state.particles();
    const int d = state.modes();
    require_order(n, N, "definetti_gap");
    if (N < 1) {
        throw DomainError("definetti_gap: N must be positive");
    }
    DeFinettiGap gap;
    gap.distance = trace_norm_distance(partial_trace(state, n), ckmr_rdm(state, n));
    gap.bound = 2.0 * n * (d + 2.0 * n) / N;
    gap.bound_sharp = 2.0 * n * d / N;
    gap.violated = gap.distance > gap.bound + 1e-10;
    return gap;
}

double anti_wick_diagonal(const DensityOp& state, const Vector& v, int n)
{
    require_unit(v, "anti_wick_diagonal");
    if (n < 0) {
        throw DomainError("anti_wick_diagonal: negative order");
    }
    const int N = state.particles();
    const int d = state.modes();
    sector_dimension(d, N + n);
    Matrix y = state.matrix();
    for (int k = 1; k <= n; ++k) {
        const Matrix c = creator(v, SymSector(d, N + k));
        y = c * y * c.adjoint();
    }
    double ratio = 1.0;
    for (int j = 1; j <= n; ++j) {
        ratio /= static_cast<double>(N + d - 1 + j);
    }
    return ratio * y.trace().real();
}

NormalOrderCoeffs normal_order_coeffs(int n)
{
    if (n < 0) {
        throw DomainError("normal_order_coeffs: negative order");
    }
    NormalOrderCoeffs out;
    out.n = n;
    for (int k = 0; k <= n; ++k) {
        unsigned __int128 c = binomial(n, k);
        for (int j = k + 1; j <= n; ++j) {
            c *= static_cast<unsigned>(j);
            if (c > std::numeric_limits<std::uint64_t>::max()) {
                throw CapacityError("normal_order_coeffs: coefficient overflows 64 bits at n="
                                    + std::to_string(n));
            }
        }
        out.coeffs.push_back(static_cast<std::uint64_t>(c));
    }
    return out;
}

std::vector<Vector> probe_directions(int d, std::size_t count)
{
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::vector<Vector> probes;
    probes.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        probes.push_back(random_sphere_point(rng, d));
    }
    return probes;
}

Matrix reconstruct_from_lower_symbol(const SymSector& sector, const std::vector<Vector>& probes,
                                     const std::vector<double>& values)
{
    if (probes.size() != values.size()) {
        throw DomainError("reconstruct_from_lower_symbol: probe and value counts differ");
    }
    const auto D = static_cast<Eigen::Index>(sector.dim());
    const Eigen::Index unknowns = D * D;
    if (static_cast<Eigen::Index>(probes.size()) < unknowns) {
        throw DomainError("reconstruct_from_lower_symbol: need at least dim^2 probes");
    }
    // parameters: A_ii (real), then Re A_ij and Im A_ij for i < j
    RealMatrix system(static_cast<Eigen::Index>(probes.size()), unknowns);
    RealVector rhs(static_cast<Eigen::Index>(probes.size()));
    const double dim = static_cast<double>(D);
    for (std::size_t r = 0; r < probes.size(); ++r) {
        const Vector c = product_coordinates(probes[r], sector);
        Eigen::Index col = 0;
        for (Eigen::Index i = 0; i < D; ++i) {
            system(r, col++) = dim * std::norm(c(i));
        }
        for (Eigen::Index i = 0; i < D; ++i) {
            for (Eigen::Index j = i + 1; j < D; ++j) {
                const Complex z = std::conj(c(i)) * c(j);
                system(r, col++) = 2.0 * dim * z.real();
                system(r, col++) = -2.0 * dim * z.imag();
            }
        }
        rhs(r) = values[r];
    }
    const RealVector x = system.colPivHouseholderQr().solve(rhs);
    Matrix A = Matrix::Zero(D, D);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < D; ++i) {
        A(i, i) = x(col++);
    }
    for (Eigen::Index i = 0; i < D; ++i) {
        for (Eigen::Index j = i + 1; j < D; ++j) {
            A(i, j) = Complex(x(col), x(col + 1));
            A(j, i) = std::conj(A(i, j));
            col += 2;
        }
    }
    return A;
}

} // namespace deflab

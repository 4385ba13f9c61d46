#include "deflab/sphere.hpp"

#include "deflab/combinatorics.hpp"

#include <limits>
#include <string>

namespace deflab {

double log_sphere_moment(const Occupation& a)
{
    const int d = static_cast<int>(a.size());
    if (d < 1) {
        throw DomainError("sphere moment: empty multi-index");
    }
    int total = 0;
    double log_num = log_factorial(d - 1);
    for (int v : a) {
        if (v < 0) {
            throw DomainError("sphere moment: negative exponent");
        }
        total += v;
        log_num += log_factorial(v);
    }
    return log_num - log_factorial(total + d - 1);
}

double sphere_moment(const Occupation& a)
{
    return std::exp(log_sphere_moment(a));
}

namespace {

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    void add(double v)
    {
        sum += v;
        sum_sq += v * v;
    }
    double z_score(double exact, double n) const
    {
        const double mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - mean * mean) * n / (n - 1.0);
        const double se = std::sqrt(var / n);
        const double err = std::abs(mean - exact);
        if (se == 0.0) {
            return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        return err / se;
    }
};

Complex monomial(const Vector& u, const Occupation& a)
{
    Complex m(1.0, 0.0);
    for (std::size_t p = 0; p < a.size(); ++p) {
        for (int r = 0; r < a[p]; ++r) {
            m *= u(p);
        }
    }
    return m;
}

} // namespace

MomentValidation validate_sphere_moments(int d, int max_degree, std::size_t samples,
                                         std::uint64_t seed, double threshold)
{
    if (d < 1 || max_degree < 0) {
        throw DomainError("validate_sphere_moments: need d >= 1 and max_degree >= 0");
    }
    if (samples < 2) {
        throw DomainError("validate_sphere_moments: need at least two samples");
    }
    std::vector<Occupation> diagonal;
    for (int k = 0; k <= max_degree; ++k) {
        SymSector s(d, k);
        diagonal.insert(diagonal.end(), s.basis().begin(), s.basis().end());
    }
    std::vector<std::pair<Occupation, Occupation>> mixed;
    for (int k = 1; k <= std::min(2, max_degree); ++k) {
        SymSector s(d, k);
        for (const auto& a : s.basis()) {
            for (const auto& b : s.basis()) {
                if (a != b) {
                    mixed.emplace_back(a, b);
                }
            }
        }
    }

    std::vector<Accumulator> acc_diag(diagonal.size());
    std::vector<Accumulator> acc_re(mixed.size()), acc_im(mixed.size());
    RealMatrix powers(d, max_degree + 1);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector u = random_sphere_point(rng, d);
        for (int p = 0; p < d; ++p) {
            const double x = std::norm(u(p));
            powers(p, 0) = 1.0;
            for (int k = 1; k <= max_degree; ++k) {
                powers(p, k) = powers(p, k - 1) * x;
            }
        }
        for (std::size_t i = 0; i < diagonal.size(); ++i) {
            double v = 1.0;
            for (int p = 0; p < d; ++p) {
                v *= powers(p, diagonal[i][p]);
            }
            acc_diag[i].add(v);
        }
        for (std::size_t i = 0; i < mixed.size(); ++i) {
            const Complex v = monomial(u, mixed[i].first) * std::conj(monomial(u, mixed[i].second));
            acc_re[i].add(v.real());
            acc_im[i].add(v.imag());
        }
    }

    MomentValidation report;
    report.modes = d;
    report.max_degree = max_degree;
    report.samples = samples;
    report.seed = seed;
    const double n = static_cast<double>(samples);
    for (std::size_t i = 0; i < diagonal.size(); ++i) {
        // the constant monomial has zero variance and is exact
        report.max_z = std::max(report.max_z, acc_diag[i].z_score(sphere_moment(diagonal[i]), n));
    }
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        report.max_z = std::max(report.max_z, acc_re[i].z_score(0.0, n));
        report.max_z = std::max(report.max_z, acc_im[i].z_score(0.0, n));
    }
    report.monomials = diagonal.size() + mixed.size();
    report.passed = report.max_z <= threshold;
    return report;
}

void gauss_legendre_unit(int order, RealVector& nodes, RealVector& weights)
{
    if (order < 1) {
        throw DomainError("gauss_legendre_unit: order must be positive");
    }
    RealMatrix jacobi = RealMatrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(jacobi);
    nodes = (solver.eigenvalues().array() + 1.0) / 2.0;
    weights = solver.eigenvectors().row(0).transpose().array().square();
}

std::vector<SpherePoint> sphere_quadrature(int d, int radial_order, int phase_points)
{
    if (d < 1 || d > 3) {
        throw DomainError("sphere_quadrature: only d <= 3 is supported, got d=" + std::to_string(d));
    }
    if (phase_points < 1) {
        throw DomainError("sphere_quadrature: need at least one phase node");
    }
    std::vector<SpherePoint> points;
    if (d == 1) {
        points.push_back({Vector::Ones(1), 1.0});
        return points;
    }
    RealVector x, wx;
    gauss_legendre_unit(radial_order, x, wx);
    const double dphi = 2.0 * M_PI / phase_points;
    const double wphi = 1.0 / phase_points;

    if (d == 2) {
        points.reserve(static_cast<std::size_t>(radial_order) * phase_points);
        for (int i = 0; i < radial_order; ++i) {
            for (int k = 0; k < phase_points; ++k) {
                Vector u(2);
                u(0) = std::sqrt(x(i));
                u(1) = std::sqrt(1.0 - x(i)) * std::polar(1.0, k * dphi);
                points.push_back({u, wx(i) * wphi});
            }
        }
        return points;
    }

    points.reserve(static_cast<std::size_t>(radial_order) * radial_order * phase_points * phase_points);
    for (int i = 0; i < radial_order; ++i) {
        for (int j = 0; j < radial_order; ++j) {
            const double s1 = x(i);
            const double s2 = (1.0 - x(i)) * x(j);
            const double s3 = (1.0 - x(i)) * (1.0 - x(j));
            const double w = 2.0 * (1.0 - x(i)) * wx(i) * wx(j);
            for (int k = 0; k < phase_points; ++k) {
                for (int l = 0; l < phase_points; ++l) {
                    Vector u(3);
                    u(0) = std::sqrt(s1);
                    u(1) = std::sqrt(s2) * std::polar(1.0, k * dphi);
                    u(2) = std::sqrt(s3) * std::polar(1.0, l * dphi);
                    points.push_back({u, w * wphi * wphi});
                }
            }
        }
    }
    return points;
}

} // namespace deflab

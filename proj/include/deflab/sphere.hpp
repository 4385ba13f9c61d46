#pragma once

#include "deflab/common.hpp"
#include "deflab/symspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace deflab {

/// Uniform point on the unit sphere of C^d (normalized complex Gaussian).
template <class Rng>
Vector random_sphere_point(Rng& rng, int d)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector u(d);
    for (int p = 0; p < d; ++p) {
        const double re = gauss(rng);
        u(p) = Complex(re, gauss(rng));
    }
    return u / u.norm();
}

/// log of int |u^a|^2 du over the normalized sphere measure of C^d:
/// (d-1)! prod a_p! / (|a| + d - 1)!. Mixed moments int u^a conj(u)^b vanish for a != b.
double log_sphere_moment(const Occupation& a);
double sphere_moment(const Occupation& a);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Plain Monte Carlo average of f(u) over the sphere with a seeded mt19937_64 stream.
template <class F>
MonteCarloEstimate sphere_average(int d, std::size_t samples, std::uint64_t seed, F&& f)
{
    std::mt19937_64 rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double v = f(random_sphere_point(rng, d));
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
    return {mean, std::sqrt(var / n)};
}

/// Outcome of checking the closed-form moments against sphere sampling.
struct MomentValidation {
    int modes = 0;
    int max_degree = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double max_z = 0.0;      // largest |MC - exact| / stderr over all tested monomials
    std::size_t monomials = 0;
    bool passed = false;     // max_z <= threshold
};

/// Tests every |u^a|^2 with |a| <= max_degree and every mixed u^a conj(u)^b
/// with |a| = |b| <= 2, a != b, at `threshold` standard errors.
MomentValidation validate_sphere_moments(int d, int max_degree, std::size_t samples = 1000000,
                                         std::uint64_t seed = 0, double threshold = 4.0);

/// Gauss-Legendre rule on [0, 1] (Golub-Welsch); weights sum to 1.
void gauss_legendre_unit(int order, RealVector& nodes, RealVector& weights);

struct SpherePoint {
    Vector u;
    double weight;
};

/// Product rule for the normalized sphere measure of C^d, d <= 3, valid for
/// integrands invariant under a global phase. The moduli |u_p|^2 are uniform on
/// the simplex (Gauss-Legendre, with a Duffy map for d = 3) and the relative
/// phases use a trapezoid rule with `phase_points` nodes.
std::vector<SpherePoint> sphere_quadrature(int d, int radial_order, int phase_points);

} // namespace deflab

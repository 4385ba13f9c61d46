#include "deflab/combinatorics.hpp"
#include "deflab/io.hpp"
#include "deflab/states.hpp"
#include "oracles/full_tensor.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace deflab;
using deflab::testing::max_abs;
using deflab::testing::random_hermitian;
using deflab::testing::random_unit;

namespace {

Matrix oracle_rdm(const DensityOp& state, int n)
{
    const int d = state.modes();
    const int N = state.particles();
    const Matrix iso_N = oracle::symmetric_isometry(state.sector());
    const Matrix iso_n = oracle::symmetric_isometry(SymSector(d, n));
    const Matrix full = iso_N * state.matrix() * iso_N.adjoint();
    return iso_n.adjoint() * oracle::partial_trace_last(full, d, N, n) * iso_n;
}

} // namespace

TEST_CASE("density operator validation")
{
    SymSector s(2, 1);
    CHECK_THROWS_AS(DensityOp(s, Matrix::Identity(3, 3) / 3.0), DomainError);
    CHECK_THROWS_AS(DensityOp(s, Matrix::Identity(2, 2)), DomainError);
    Matrix neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(DensityOp(s, neg), DomainError);
    Matrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.0, 0.5;
    CHECK_THROWS_AS(DensityOp(s, nonherm), DomainError);
    CHECK_NOTHROW(DensityOp::maximally_mixed(SymSector(3, 3)));
}

TEST_CASE("partial trace of a product state")
{
    std::mt19937_64 rng(1);
    for (int d = 1; d <= 3; ++d) {
        for (int N = 0; N <= 5; ++N) {
            const Vector u = random_unit(rng, d);
            const DensityOp G = DensityOp::pure(product_embed(u, N));
            for (int n = 0; n <= N; ++n) {
                const DensityOp g = partial_trace(G, n);
                const DensityOp expected = DensityOp::pure(product_embed(u, n));
                CHECK(max_abs(g.matrix() - expected.matrix()) < 1e-12);
            }
            CHECK_THROWS_AS(partial_trace(G, N + 1), DomainError);
            CHECK_THROWS_AS(partial_trace(G, -1), DomainError);
        }
    }
}

TEST_CASE("symmetrized pair of orthogonal vectors")
{
    // (psi (x) phi + phi (x) psi)/sqrt2 with psi = e1, phi = e2 is the occupation state (1,1)
    SymSector s(2, 2);
    Vector amp = Vector::Zero(3);
    amp(s.index({1, 1})) = 1.0;
    const DensityOp g = partial_trace(DensityOp::pure(Ket{s, amp}), 1);
    CHECK(max_abs(g.matrix() - 0.5 * Matrix::Identity(2, 2)) < 1e-15);

    // same in a rotated frame
    std::mt19937_64 rng(2);
    const Matrix U = deflab::testing::random_unitary(rng, 3);
    const Matrix R = sector_representation(U, 2);
    SymSector s3(3, 2);
    Vector e = Vector::Zero(6);
    e(s3.index({0, 1, 1})) = 1.0;
    const DensityOp g3 = partial_trace(DensityOp::pure(Ket{s3, R * e}), 1);
    const Matrix expected = 0.5 * (U.col(1) * U.col(1).adjoint() + U.col(2) * U.col(2).adjoint());
    CHECK(max_abs(g3.matrix() - expected) < 1e-12);
}

TEST_CASE("partial trace matches the full tensor oracle")
{
    for (int d = 1; d <= 3; ++d) {
        for (int N = 1; oracle::ipow(d, N) <= 4096 && N <= 7; ++N) {
            const DensityOp G = random_density(100 * d + N, SymSector(d, N),
                                               static_cast<int>(std::min<std::size_t>(3, sector_dimension(d, N))));
            for (int n = 0; n <= N; ++n) {
                CHECK(max_abs(partial_trace(G, n).matrix() - oracle_rdm(G, n)) < 1e-12);
            }
        }
    }
    const DensityOp G = random_density(9, SymSector(2, 3), 4);
    CHECK(max_abs(partial_trace(G, 2).matrix() - oracle_rdm(G, 2)) < 1e-12);
}

TEST_CASE("partial trace duality with second quantization")
{
    // tr[A gamma^(n)] = binomial(N,n)^{-1} tr[dGamma_n(A) Gamma]
    std::mt19937_64 rng(5);
    for (int d = 2; d <= 3; ++d) {
        for (int N = 1; N <= 5; ++N) {
            const DensityOp G = random_density(7 * N + d, SymSector(d, N), 2);
            for (int n = 0; n <= N; ++n) {
                SymSector part(d, n);
                const Matrix A = random_hermitian(rng, part.dim());
                const Complex lhs = (A * partial_trace(G, n).matrix()).trace();
                const Complex rhs = (second_quantize(A, part, G.sector()) * G.matrix()).trace()
                                    / static_cast<double>(binomial(N, n));
                CHECK(std::abs(lhs - rhs) < 1e-11);
            }
        }
    }
}

TEST_CASE("partial traces are consistent and positive")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DensityOp G = random_density(seed, SymSector(2, 4), 1 + seed % 5);
        for (int n = 0; n <= 4; ++n) {
            const DensityOp gn = partial_trace(G, n);
            CHECK(spectrum(gn.matrix())(0) >= -1e-10);
            CHECK(std::abs(gn.matrix().trace() - 1.0) < 1e-10);
            for (int m = 0; m <= n; ++m) {
                CHECK(max_abs(partial_trace(gn, m).matrix() - partial_trace(G, m).matrix()) < 1e-12);
            }
        }
    }
}

TEST_CASE("energy per particle through reduced density matrices")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 2 + trial % 2;
        const int N = 2 + trial % 4;
        const double lambda = (trial % 3 == 0) ? 0.37 : default_coupling(N);
        const OneBodyOp h = make_one_body(random_hermitian(rng, d));
        const TwoBodyOp w = make_two_body(d, random_hermitian(rng, sector_dimension(d, 2)));
        const DensityOp G = random_density(trial, SymSector(d, N), 3);
        const double lhs = (assemble_hamiltonian(h, w, N, lambda) * G.matrix()).trace().real() / N;
        const double rhs = (h.entries * partial_trace(G, 1).matrix()).trace().real()
                           + 0.5 * lambda * (N - 1) * (w.entries * partial_trace(G, 2).matrix()).trace().real();
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("trace norm distance")
{
    Matrix a(2, 2), b(2, 2);
    a << 1.0, 0.0, 0.0, 0.0;
    b << 2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0;
    CHECK(trace_norm_distance(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(trace_norm_distance(a, a) == 0.0);
    CHECK_THROWS_AS(trace_norm_distance(a, Matrix::Zero(3, 3)), DomainError);
    CHECK_THROWS_AS(trace_norm_distance(DensityOp::maximally_mixed(SymSector(2, 2)),
                                        DensityOp::maximally_mixed(SymSector(3, 1))),
                    DomainError);

    std::mt19937_64 rng(19);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Matrix x = random_hermitian(rng, 4);
        const Matrix y = random_hermitian(rng, 4);
        const Matrix z = random_hermitian(rng, 4);
        const double slack = trace_norm_distance(x, y) + trace_norm_distance(y, z) - trace_norm_distance(x, z);
        worst = std::min(worst, slack);
        CHECK(std::abs(trace_norm_distance(x, y) - trace_norm_distance(y, x)) < 1e-12);
    }
    CHECK(worst >= -1e-12);
}

TEST_CASE("wick diagonal")
{
    Vector e1(2), e2(2);
    e1 << 1.0, 0.0;
    e2 << 0.0, 1.0;
    const DensityOp G = DensityOp::pure(product_embed(e1, 2));
    CHECK(wick_diagonal(G, e1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(wick_diagonal(G, e2, 1)) < 1e-15);
    CHECK_THROWS_AS(wick_diagonal(G, e1, 3), DomainError);
    CHECK_THROWS_AS(wick_diagonal(G, Vector(2.0 * e1), 1), DomainError);

    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        const int d = 2 + t % 2;
        const DensityOp R = random_density(t, SymSector(d, 4), 3);
        const Vector v = random_unit(rng, d);
        for (int n = 0; n <= 4; ++n) {
            const Vector vn = product_embed(v, n).amplitudes;
            const double expected = vn.dot(partial_trace(R, n).matrix() * vn).real();
            CHECK(std::abs(wick_diagonal(R, v, n) - expected) < 1e-10);
        }
    }
}

TEST_CASE("random density ensemble")
{
    SymSector s(3, 2);
    const DensityOp a = random_density(42, s, 3);
    const DensityOp b = random_density(42, s, 3);
    CHECK(max_abs(a.matrix() - b.matrix()) == 0.0);
    const DensityOp p = random_density(7, s, 1);
    CHECK(std::abs((p.matrix() * p.matrix()).trace().real() - 1.0) < 1e-10);
    CHECK_THROWS_AS(random_density(1, s, 0), DomainError);
    CHECK_THROWS_AS(random_density(1, s, 7), DomainError);

    // full-rank draws: mean sorted spectrum per slot vs its flat mean 1/dim.
    // Unitary invariance makes the mean operator exactly Id/dim, so each
    // diagonal entry averaged over draws must sit within 3 standard errors.
    const int draws = 1000;
    const int dim = static_cast<int>(s.dim());
    RealVector sum = RealVector::Zero(dim), sum_sq = RealVector::Zero(dim);
    for (int k = 0; k < draws; ++k) {
        const RealVector diag = random_density(1000 + k, s, dim).matrix().diagonal().real();
        sum += diag;
        sum_sq += diag.cwiseAbs2();
    }
    for (int i = 0; i < dim; ++i) {
        const double mean = sum(i) / draws;
        const double var = sum_sq(i) / draws - mean * mean;
        const double se = std::sqrt(var / draws);
        CHECK(std::abs(mean - 1.0 / dim) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("entropy and spectrum export")
{
    const DensityOp m = DensityOp::maximally_mixed(SymSector(2, 3));
    CHECK(neg_entropy(m.matrix()) == doctest::Approx(-std::log(4.0)).epsilon(1e-14));
    const DensityOp p = DensityOp::pure(product_embed(Vector::Unit(2, 0), 3));
    CHECK(std::abs(neg_entropy(p.matrix())) < 1e-14);

    std::ostringstream out;
    write_spectrum_csv(out, spectrum(m.matrix()));
    CHECK(out.str() == "index,eigenvalue\n0,0.25\n1,0.25\n2,0.25\n3,0.25\n");
}

TEST_CASE("density JSON round trip")
{
    const DensityOp G = random_density(3, SymSector(3, 2), 2);
    const auto j = to_json(G);
    CHECK(j.contains("trace_tol"));
    const DensityOp back = density_from_json(nlohmann::json::parse(j.dump()));
    CHECK(max_abs(back.matrix() - G.matrix()) == 0.0);
    auto wrong = j;
    wrong["N"] = 3;
    CHECK_THROWS_AS(density_from_json(wrong), DomainError);

    const Matrix plain = random_hermitian(*std::make_unique<std::mt19937_64>(5), 3);
    CHECK(max_abs(matrix_from_json(matrix_to_json(plain)) - plain) == 0.0);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}

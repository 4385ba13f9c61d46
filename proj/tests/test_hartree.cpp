#include "deflab/hartree.hpp"
#include "deflab/optimize.hpp"
#include "deflab/parallel.hpp"
#include "deflab/sphere.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace deflab;
using deflab::testing::random_hermitian;
using deflab::testing::random_unit;

namespace {

HartreeProblem diagonal_fixture()
{
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    Matrix w = Matrix::Zero(3, 3);
    w(0, 0) = 2.0;
    return make_hartree_problem(h, w);
}

HartreeProblem random_problem(std::mt19937_64& rng, int d)
{
    return make_hartree_problem(random_hermitian(rng, d), random_hermitian(rng, sector_dimension(d, 2)));
}

// exact ground energy of the diagonal fixture: k particles in the first mode
double fixture_energy(int N)
{
    double best = 1e300;
    for (int k = 0; k <= N; ++k) {
        best = std::min(best, (N - k) + (N > 1 ? k * (k - 1.0) / (N - 1) : 0.0));
    }
    return best;
}

} // namespace

TEST_CASE("Hartree energy")
{
    const HartreeProblem p = diagonal_fixture();
    for (int i = 0; i <= 20; ++i) {
        const double s = i / 20.0;
        Vector u(2);
        u << std::sqrt(s), std::polar(std::sqrt(1.0 - s), 0.7);
        CHECK(std::abs(hartree_energy(u, p) - ((1.0 - s) + s * s)) < 1e-14);
    }
    Vector half(2);
    half << M_SQRT1_2, M_SQRT1_2;
    CHECK(hartree_energy(half, p) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(hartree_energy(Vector(2.0 * half), p), DomainError);

    std::mt19937_64 rng(1);
    const HartreeProblem q = random_problem(rng, 3);
    const HartreeProblem free = make_hartree_problem(q.h.entries, Matrix::Zero(6, 6));
    for (int t = 0; t < 20; ++t) {
        const Vector u = random_unit(rng, 3);
        const Complex phase = std::polar(1.0, 0.3 * t);
        CHECK(std::abs(hartree_energy(phase * u, q) - hartree_energy(u, q)) < 1e-12);
        CHECK(std::abs(hartree_energy(u, free) - u.dot(q.h.entries * u).real()) < 1e-14);
    }
}

TEST_CASE("Riemannian gradient matches finite differences")
{
    std::mt19937_64 rng(2);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const int d = 2 + t % 3;
        const HartreeProblem p = random_problem(rng, d);
        const Vector u = random_unit(rng, d);
        const Vector g = riemannian_gradient(u, p);
        const double h = 1e-6;
        Vector fd(d);
        for (int k = 0; k < d; ++k) {
            double parts[2];
            for (int part = 0; part < 2; ++part) {
                Vector e = Vector::Zero(d);
                e(k) = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
                const Vector v = e - u.dot(e).real() * u;
                Vector up = u + h * v, um = u - h * v;
                up /= up.norm();
                um /= um.norm();
                parts[part] = (hartree_energy(up, p) - hartree_energy(um, p)) / (2.0 * h);
            }
            fd(k) = Complex(parts[0], parts[1]);
        }
        CHECK((fd - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("Hartree minimization")
{
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    const HartreeProblem free = make_hartree_problem(h, Matrix::Zero(3, 3));
    HartreeResult r = hartree_minimize(free);
    CHECK(std::abs(r.e_H) < 1e-12);
    CHECK(std::abs(std::abs(r.u(0)) - 1.0) < 1e-8);
    CHECK(r.converged);

    r = hartree_minimize(diagonal_fixture());
    CHECK(std::abs(r.e_H - 0.75) < 1e-8);
    CHECK(std::abs(std::norm(r.u(0)) - 0.5) < 1e-8);
    CHECK(std::abs(r.u.norm() - 1.0) < 1e-14);
    CHECK(r.runs.size() == 16);
    // relative phase is free, so several distinct minimizers show up
    CHECK(r.minimizers.size() > 1);

    // the scan oracle: min over s of (1-s)+s^2 on a fine grid
    double scan = 1e300;
    for (int i = 0; i <= 100000; ++i) {
        const double s = i / 100000.0;
        scan = std::min(scan, (1.0 - s) + s * s);
    }
    CHECK(std::abs(r.e_H - scan) < 1e-8);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
        const HartreeProblem p = random_problem(rng, 2);
        const HartreeResult res = hartree_minimize(p);
        CHECK(res.converged);
        const auto probe = sphere_average(2, 1, 0, [](const Vector&) { return 0.0; });
        (void)probe;
        std::mt19937_64 prng(1000 + t);
        double best_probe = 1e300;
        for (int k = 0; k < 10000; ++k) {
            best_probe = std::min(best_probe, hartree_energy(random_sphere_point(prng, 2), p));
        }
        CHECK(res.e_H <= best_probe + 1e-9);
    }

    HartreeOptions opts;
    opts.restarts = 0;
    CHECK_THROWS_AS(hartree_minimize(diagonal_fixture(), opts), DomainError);
    opts.restarts = 1;
    opts.max_iter = 1;
    CHECK_FALSE(hartree_minimize(diagonal_fixture(), opts).converged);
}

TEST_CASE("ground energies")
{
    std::mt19937_64 rng(4);
    const HartreeProblem p = random_problem(rng, 3);
    const HartreeProblem free = make_hartree_problem(p.h.entries, Matrix::Zero(6, 6));
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.h.entries);
    for (int N = 1; N <= 5; ++N) {
        CHECK(std::abs(ground_energy(free, N) - N * es.eigenvalues()(0)) < 1e-10);
    }
    CHECK(ground_energy(diagonal_fixture(), 3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ground_energy(diagonal_fixture(), 3, 0.5) == doctest::Approx(2.0).epsilon(1e-14));

    for (int t = 0; t < 5; ++t) {
        const HartreeProblem q = random_problem(rng, 2);
        const double eH = hartree_minimize(q).e_H;
        for (int N = 2; N <= 8; ++N) {
            CHECK(ground_energy(q, N) / N <= eH + 1e-10);
        }
    }
}

TEST_CASE("convergence sweep on the diagonal fixture")
{
    std::vector<int> Ns;
    for (int N = 2; N <= 12; ++N) {
        Ns.push_back(N);
    }
    const SweepResult s = convergence_sweep(diagonal_fixture(), Ns);
    REQUIRE(s.rows.size() == 11);
    CHECK(s.upper_bound_violations == 0);
    CHECK(s.monotonicity_violations == 0);
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& r = s.rows[i];
        CHECK(std::abs(r.E - fixture_energy(r.N)) < 1e-12);
        if (i > 0) {
            CHECK(r.gap <= s.rows[i - 1].gap + 1e-12);
            CHECK(r.rdm_distance <= s.rows[i - 1].rdm_distance + 1e-10);
        }
        if (r.N >= 4) {
            lo = std::min(lo, r.gap * r.N);
            hi = std::max(hi, r.gap * r.N);
        }
        CHECK(r.rdm_distance < 1e-8);
    }
    CHECK(hi / lo < 3.0);
    CHECK(s.fit_C > 0.0);

    std::ostringstream csv;
    write_sweep_csv(csv, s);
    CHECK(csv.str().rfind("N,E,EperN,eH,gap,fitC,fitResidual\n", 0) == 0);
}

TEST_CASE("sweeps without interaction and on random instances")
{
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    const SweepResult s = convergence_sweep(make_hartree_problem(h, Matrix::Zero(3, 3)), {4, 2, 3, 3});
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows.front().N == 2);
    for (const auto& r : s.rows) {
        CHECK(std::abs(r.gap) < 1e-12);
    }

    std::mt19937_64 rng(5);
    for (int t = 0; t < 3; ++t) {
        const SweepResult rs = convergence_sweep(random_problem(rng, 2), {2, 3, 4, 5, 6, 7, 8, 9, 10});
        CHECK(rs.monotonicity_violations == 0);
        CHECK(rs.upper_bound_violations == 0);
    }
    CHECK_THROWS_AS(convergence_sweep(diagonal_fixture(), {0, 2}), DomainError);
}

TEST_CASE("hull distance and simplex helpers")
{
    Vector e1 = Vector::Unit(2, 0), e2 = Vector::Unit(2, 1);
    const Matrix mid = 0.5 * Matrix::Identity(2, 2);
    CHECK(hull_distance(mid, {e1, e2}) < 1e-14);
    CHECK(hull_distance(mid, {e1}) == doctest::Approx(1.0));

    RealVector v(4);
    v << 0.4, 1.2, -0.3, 0.1;
    const RealVector p = project_to_simplex(v);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p.minCoeff() >= 0.0);
    RealVector inside(3);
    inside << 0.2, 0.3, 0.5;
    CHECK((project_to_simplex(inside) - inside).norm() < 1e-15);
}

TEST_CASE("parallel map keeps order and propagates errors")
{
    const auto squares = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
    for (std::size_t i = 0; i < squares.size(); ++i) {
        CHECK(squares[i] == static_cast<int>(i * i));
    }
    CHECK_THROWS_AS(parallel_map(10, [](std::size_t i) -> int {
        if (i == 7) {
            throw DomainError("boom");
        }
        return 0;
    }, 3), DomainError);
}

#include "deflab/symspace.hpp"

#include "deflab/combinatorics.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace deflab {

namespace {

void enumerate_lex_desc(int modes, int remaining, Occupation& current, int position,
                        std::vector<Occupation>& out)
{
    if (position == modes - 1) {
        current[position] = remaining;
        out.push_back(current);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        current[position] = v;
        enumerate_lex_desc(modes, remaining - v, current, position + 1, out);
    }
}

double sqrt_binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0.0;
    }
    return std::exp(0.5 * log_binomial(n, k));
}

} // namespace

std::size_t sector_dimension(int d, int N, std::size_t cap)
{
    if (d < 1) {
        throw DomainError("sector_dimension: mode count must be positive, got " + std::to_string(d));
    }
    if (N < 0) {
        throw DomainError("sector_dimension: particle number must be non-negative, got "
                          + std::to_string(N));
    }
    const std::uint64_t dim = binomial(static_cast<std::uint64_t>(N) + d - 1,
                                       static_cast<std::uint64_t>(d) - 1);
    if (dim > cap) {
        throw CapacityError("sector dimension " + std::to_string(dim) + " for (d=" + std::to_string(d)
                            + ", N=" + std::to_string(N) + ") exceeds cap " + std::to_string(cap));
    }
    return static_cast<std::size_t>(dim);
}

SymSector::SymSector(int modes, int particles, std::size_t cap)
    : modes_(modes), particles_(particles)
{
    const std::size_t dim = sector_dimension(modes, particles, cap);

    auto basis = std::make_shared<std::vector<Occupation>>();
    basis->reserve(dim);
    Occupation current(static_cast<std::size_t>(modes), 0);
    enumerate_lex_desc(modes, particles, current, 0, *basis);
    basis_ = std::move(basis);

    auto comp = std::make_shared<std::vector<std::size_t>>(
        static_cast<std::size_t>(particles + 1) * (modes + 1), 0);
    for (int m = 0; m <= particles; ++m) {
        (*comp)[m * (modes + 1)] = (m == 0) ? 1 : 0;
        for (int k = 1; k <= modes; ++k) {
            (*comp)[m * (modes + 1) + k] = static_cast<std::size_t>(binomial(m + k - 1, k - 1));
        }
    }
    compositions_ = std::move(comp);
}

std::size_t SymSector::index(const Occupation& n) const
{
    if (static_cast<int>(n.size()) != modes_) {
        throw DomainError("SymSector::index: occupation has wrong length");
    }
    int total = 0;
    for (int v : n) {
        if (v < 0) {
            throw DomainError("SymSector::index: negative occupation");
        }
        total += v;
    }
    if (total != particles_) {
        throw DomainError("SymSector::index: occupation does not sum to N="
                          + std::to_string(particles_));
    }
    // Tuples sharing the prefix but with a larger entry at position i come first;
    // their count collapses to a single composition number (hockey-stick identity).
    std::size_t idx = 0;
    int remaining = particles_;
    const auto& comp = *compositions_;
    for (int i = 0; i + 1 < modes_; ++i) {
        const int m = remaining - n[i] - 1;
        if (m >= 0) {
            idx += comp[m * (modes_ + 1) + (modes_ - i)];
        }
        remaining -= n[i];
    }
    return idx;
}

bool OneBodyOp::is_hermitian(double tol) const
{
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

OneBodyOp make_one_body(const Matrix& entries, bool require_hermitian)
{
    if (entries.rows() != entries.cols() || entries.rows() < 1) {
        throw DomainError("one-body operator must be a non-empty square matrix");
    }
    OneBodyOp h{entries};
    if (require_hermitian && !h.is_hermitian()) {
        throw DomainError("one-body operator is not Hermitian");
    }
    return h;
}

TwoBodyOp make_two_body(int d, const Matrix& entries)
{
    SymSector pair(d, 2);
    if (entries.rows() != static_cast<Eigen::Index>(pair.dim())
        || entries.cols() != static_cast<Eigen::Index>(pair.dim())) {
        throw DomainError("two-body operator must be " + std::to_string(pair.dim()) + "x"
                          + std::to_string(pair.dim()) + " for d=" + std::to_string(d));
    }
    if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tolerances().hermitian) {
        throw DomainError("two-body operator is not Hermitian");
    }
    return TwoBodyOp{pair, entries};
}

TwoBodyOp zero_two_body(int d)
{
    SymSector pair(d, 2);
    return TwoBodyOp{pair, Matrix::Zero(pair.dim(), pair.dim())};
}

TwoBodyOp two_body_from_tensor(int d, const Matrix& full)
{
    if (full.rows() != d * d || full.cols() != d * d) {
        throw DomainError("two_body_from_tensor: expected a d^2 x d^2 matrix");
    }
    SymSector pair(d, 2);
    Matrix iso = Matrix::Zero(d * d, pair.dim());
    for (std::size_t c = 0; c < pair.dim(); ++c) {
        const auto& occ = pair.occupation(c);
        std::vector<int> modes;
        for (int p = 0; p < d; ++p) {
            for (int r = 0; r < occ[p]; ++r) {
                modes.push_back(p);
            }
        }
        const int p = modes[0];
        const int q = modes[1];
        if (p == q) {
            iso(p * d + p, c) = 1.0;
        } else {
            iso(p * d + q, c) = M_SQRT1_2;
            iso(q * d + p, c) = M_SQRT1_2;
        }
    }
    Matrix w = iso.adjoint() * full * iso;
    w = 0.5 * (w + w.adjoint()).eval();
    return make_two_body(d, w);
}

Vector product_coordinates(const Vector& u, const SymSector& sector)
{
    if (u.size() != sector.modes()) {
        throw DomainError("product_coordinates: vector length does not match mode count");
    }
    const int N = sector.particles();
    Vector out(sector.dim());
    for (std::size_t i = 0; i < sector.dim(); ++i) {
        const auto& n = sector.occupation(i);
        double log_multinomial = log_factorial(N);
        Complex mono(1.0, 0.0);
        for (int p = 0; p < sector.modes(); ++p) {
            log_multinomial -= log_factorial(n[p]);
            for (int r = 0; r < n[p]; ++r) {
                mono *= u(p);
            }
        }
        out(i) = std::exp(0.5 * log_multinomial) * mono;
    }
    return out;
}

Ket product_embed(const Vector& u, int N)
{
    if (std::abs(u.norm() - 1.0) > tolerances().normalization) {
        throw DomainError("product_embed: one-body vector is not normalized");
    }
    SymSector sector(static_cast<int>(u.size()), N);
    Vector amplitudes = product_coordinates(u, sector);
    return Ket{sector, std::move(amplitudes)};
}

double lowering_coefficient(const Occupation& beta, const Occupation& n)
{
    double c = 1.0;
    for (std::size_t p = 0; p < n.size(); ++p) {
        if (beta[p] > n[p]) {
            return 0.0;
        }
        c *= sqrt_binomial(n[p], beta[p]);
    }
    return c;
}

std::vector<std::size_t> addition_table(const SymSector& low, const SymSector& part,
                                        const SymSector& sum)
{
    if (low.modes() != part.modes() || part.modes() != sum.modes()
        || low.particles() + part.particles() != sum.particles()) {
        throw DomainError("addition_table: incompatible sectors");
    }
    std::vector<std::size_t> table(low.dim() * part.dim());
    Occupation scratch(static_cast<std::size_t>(sum.modes()));
    for (std::size_t m = 0; m < low.dim(); ++m) {
        for (std::size_t a = 0; a < part.dim(); ++a) {
            for (int p = 0; p < sum.modes(); ++p) {
                scratch[p] = low.occupation(m)[p] + part.occupation(a)[p];
            }
            table[m * part.dim() + a] = sum.index(scratch);
        }
    }
    return table;
}

Matrix annihilator(const Vector& f, const SymSector& sector)
{
    if (sector.particles() < 1) {
        throw DomainError("annihilator: cannot annihilate in the vacuum sector");
    }
    if (f.size() != sector.modes()) {
        throw DomainError("annihilator: vector length does not match mode count");
    }
    SymSector lower(sector.modes(), sector.particles() - 1);
    Matrix a = Matrix::Zero(lower.dim(), sector.dim());
    Occupation m;
    for (std::size_t j = 0; j < sector.dim(); ++j) {
        const auto& n = sector.occupation(j);
        for (int p = 0; p < sector.modes(); ++p) {
            if (n[p] == 0) {
                continue;
            }
            m = n;
            --m[p];
            a(lower.index(m), j) += std::conj(f(p)) * std::sqrt(static_cast<double>(n[p]));
        }
    }
    return a;
}

Matrix creator(const Vector& f, const SymSector& sector)
{
    return annihilator(f, sector).adjoint();
}

Vector apply_creator(const Vector& f, const Vector& psi, const SymSector& target)
{
    if (target.particles() < 1) {
        throw DomainError("apply_creator: target sector must hold at least one particle");
    }
    SymSector source(target.modes(), target.particles() - 1);
    if (psi.size() != static_cast<Eigen::Index>(source.dim())) {
        throw DomainError("apply_creator: input vector does not match the source sector");
    }
    Vector out = Vector::Zero(target.dim());
    Occupation n;
    for (std::size_t i = 0; i < source.dim(); ++i) {
        if (psi(i) == Complex(0.0, 0.0)) {
            continue;
        }
        const auto& m = source.occupation(i);
        for (int p = 0; p < target.modes(); ++p) {
            if (f(p) == Complex(0.0, 0.0)) {
                continue;
            }
            n = m;
            ++n[p];
            out(target.index(n)) += f(p) * std::sqrt(static_cast<double>(n[p])) * psi(i);
        }
    }
    return out;
}

Matrix sector_representation(const Matrix& U, int N)
{
    const int d_out = static_cast<int>(U.rows());
    const int d_in = static_cast<int>(U.cols());
    // U^{(x)N} |n> = prod_p a^*(U e_p)^{n_p} / sqrt(n_p!) |0>, built one creator at a time.
    Matrix prev = Matrix::Ones(1, 1);
    for (int k = 1; k <= N; ++k) {
        SymSector in(d_in, k);
        SymSector in_prev(d_in, k - 1);
        SymSector out(d_out, k);
        Matrix next(out.dim(), in.dim());
        Occupation m;
        for (std::size_t c = 0; c < in.dim(); ++c) {
            const auto& n = in.occupation(c);
            int p = 0;
            while (n[p] == 0) {
                ++p;
            }
            m = n;
            --m[p];
            const std::size_t src = in_prev.index(m);
            next.col(c) = apply_creator(U.col(p), prev.col(src), out)
                          / std::sqrt(static_cast<double>(n[p]));
        }
        prev = std::move(next);
    }
    return prev;
}

Matrix second_quantize(const Matrix& op, const SymSector& op_sector, const SymSector& target)
{
    const int l = op_sector.particles();
    if (op_sector.modes() != target.modes()) {
        throw DomainError("second_quantize: mode counts differ");
    }
    if (l > target.particles()) {
        throw DomainError("second_quantize: operator order " + std::to_string(l)
                          + " exceeds particle number " + std::to_string(target.particles()));
    }
    if (op.rows() != static_cast<Eigen::Index>(op_sector.dim()) || op.cols() != op.rows()) {
        throw DomainError("second_quantize: operator does not match its sector");
    }
    SymSector low(target.modes(), target.particles() - l);
    const std::size_t L = op_sector.dim();
    const auto table = addition_table(low, op_sector, target);
    std::vector<double> coef(table.size());
    for (std::size_t m = 0; m < low.dim(); ++m) {
        for (std::size_t a = 0; a < L; ++a) {
            coef[m * L + a] = lowering_coefficient(op_sector.occupation(a),
                                                   target.occupation(table[m * L + a]));
        }
    }
    Matrix out = Matrix::Zero(target.dim(), target.dim());
    for (std::size_t m = 0; m < low.dim(); ++m) {
        for (std::size_t a = 0; a < L; ++a) {
            const double ca = coef[m * L + a];
            const std::size_t i = table[m * L + a];
            for (std::size_t b = 0; b < L; ++b) {
                out(i, table[m * L + b]) += op(a, b) * ca * coef[m * L + b];
            }
        }
    }
    return out;
}

double default_coupling(int N)
{
    return N > 1 ? 1.0 / (N - 1) : 0.0;
}

Matrix assemble_hamiltonian(const OneBodyOp& h, const TwoBodyOp& w, int N,
                            std::optional<double> lambda)
{
    if (N < 1) {
        throw DomainError("assemble_hamiltonian: N must be at least 1");
    }
    const int d = h.modes();
    if (w.modes() != d) {
        throw DomainError("assemble_hamiltonian: one- and two-body mode counts differ");
    }
    SymSector sector(d, N);
    SymSector lower(d, N - 1);

    // sum_{pq} h_pq a^*_p a_q
    Matrix H = Matrix::Zero(sector.dim(), sector.dim());
    Occupation m;
    for (std::size_t j = 0; j < sector.dim(); ++j) {
        const auto& n = sector.occupation(j);
        for (int q = 0; q < d; ++q) {
            if (n[q] == 0) {
                continue;
            }
            const double aq = std::sqrt(static_cast<double>(n[q]));
            for (int p = 0; p < d; ++p) {
                if (h.entries(p, q) == Complex(0.0, 0.0)) {
                    continue;
                }
                m = n;
                --m[q];
                ++m[p];
                H(sector.index(m), j) += h.entries(p, q) * aq * std::sqrt(static_cast<double>(m[p]));
            }
        }
    }

    if (N >= 2) {
        const double coupling = lambda.value_or(default_coupling(N));
        if (coupling != 0.0) {
            H += coupling * second_quantize(w.entries, w.sector, sector);
        }
    }
    return 0.5 * (H + H.adjoint());
}

} // namespace deflab

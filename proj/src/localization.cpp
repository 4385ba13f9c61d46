#include "deflab/localization.hpp"

#include "deflab/combinatorics.hpp"
#include "deflab/io.hpp"
#include "deflab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deflab {

namespace {

// dimension of the k-particle sector over r modes, with the empty mode set allowed
std::size_t block_dim(int r, int k)
{
    if (r == 0) {
        return k == 0 ? 1 : 0;
    }
    return sector_dimension(r, k);
}

std::size_t block_index(int r, int k, const Occupation& alpha)
{
    return r == 0 ? 0 : SymSector(r, k).index(alpha);
}

Matrix push_forward(const Matrix& basis, const Matrix& block, int k)
{
    const int d = static_cast<int>(basis.rows());
    if (basis.cols() == 0) {
        const auto dim = sector_dimension(d, k);
        return k == 0 ? block : Matrix::Zero(dim, dim);
    }
    const Matrix R = sector_representation(basis, k);
    return R * block * R.adjoint();
}

} // namespace

Projector::Projector(const Matrix& P) : P_(P)
{
    if (P.rows() != P.cols() || P.rows() < 1) {
        throw DomainError("Projector: matrix must be square and non-empty");
    }
    const double tol = 1e-12;
    if ((P - P.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw DomainError("Projector: matrix is not Hermitian");
    }
    if ((P * P - P).cwiseAbs().maxCoeff() > tol) {
        throw DomainError("Projector: matrix is not idempotent");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (P + P.adjoint()));
    const RealVector& ev = es.eigenvalues();
    Eigen::Index zeros = 0;
    while (zeros < ev.size() && ev(zeros) < 0.5) {
        ++zeros;
    }
    kernel_ = es.eigenvectors().leftCols(zeros);
    range_ = es.eigenvectors().rightCols(ev.size() - zeros);
}

Projector Projector::onto(const Matrix& vectors)
{
    const Eigen::Index d = vectors.rows();
    if (vectors.cols() == 0) {
        return Projector(Matrix::Zero(d, d));
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(vectors);
    qr.setThreshold(1e-12);
    const Eigen::Index r = qr.rank();
    const Matrix Q = Matrix(qr.householderQ()).leftCols(r);
    Matrix P = Q * Q.adjoint();
    P = 0.5 * (P + P.adjoint()).eval();
    return Projector(P);
}

Projector Projector::complement() const
{
    Matrix Q = Matrix::Identity(P_.rows(), P_.cols()) - P_;
    return Projector(Q);
}

std::vector<double> FockBlocks::traces() const
{
    std::vector<double> t(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        t[k] = blocks[k].size() ? blocks[k].trace().real() : 0.0;
    }
    return t;
}

double FockBlocks::total_trace() const
{
    double s = 0.0;
    for (double t : traces()) {
        s += t;
    }
    return s;
}

Matrix FockBlocks::embedded(int k) const
{
    if (k < 0 || k > particles) {
        throw DomainError("FockBlocks::embedded: k=" + std::to_string(k) + " outside [0, N]");
    }
    return push_forward(basis, blocks[k], k);
}

Matrix FockBlocks::reduced(int n) const
{
    if (n < 0 || n > particles) {
        throw DomainError("FockBlocks::reduced: n=" + std::to_string(n) + " outside [0, N]");
    }
    const int r = rank();
    const auto dim = sector_dimension(modes(), n);
    if (r == 0) {
        return n == 0 ? blocks[0] : Matrix::Zero(dim, dim);
    }
    SymSector part(r, n);
    Matrix sum = Matrix::Zero(part.dim(), part.dim());
    for (int k = n; k <= particles; ++k) {
        const double c = static_cast<double>(binomial(k, n)) / static_cast<double>(binomial(particles, n));
        // reduce_operator is the trace-preserving reduction
        sum += c * reduce_operator(blocks[k], SymSector(r, k), n);
    }
    return push_forward(basis, sum, n);
}

FockBlocks localize(const DensityOp& state, const Projector& P)
{
    const int d = state.modes();
    const int N = state.particles();
    if (P.modes() != d) {
        throw DomainError("localize: projector acts on C^" + std::to_string(P.modes()) + ", state on C^"
                          + std::to_string(d));
    }
    const int r = P.rank();
    Matrix U(d, d);
    U << P.range(), P.kernel();
    // the state in the adapted basis: the first r modes span ran P
    const Matrix R = sector_representation(U.adjoint(), N);
    const Matrix G = R * state.matrix() * R.adjoint();
    const SymSector& s = state.sector();

    // occupation |alpha, gamma> factorizes into ran P and its complement;
    // group basis vectors by (k, gamma) and sum over gamma
    struct Entry {
        std::size_t row;
        std::size_t alpha;
    };
    std::vector<std::vector<std::vector<Entry>>> groups(N + 1);
    for (int k = 0; k <= N; ++k) {
        groups[k].resize(d - r == 0 ? (k == N ? 1 : 0) : block_dim(d - r, N - k));
    }
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const Occupation& n = s.occupation(i);
        Occupation alpha(n.begin(), n.begin() + r);
        Occupation gamma(n.begin() + r, n.end());
        int k = 0;
        for (int a : alpha) {
            k += a;
        }
        const std::size_t g = d - r == 0 ? 0 : block_index(d - r, N - k, gamma);
        groups[k][g].push_back({i, block_index(r, k, alpha)});
    }

    FockBlocks out;
    out.particles = N;
    out.basis = P.range();
    out.blocks = parallel_map(static_cast<std::size_t>(N + 1), [&](std::size_t k) {
        const std::size_t dim = block_dim(r, static_cast<int>(k));
        Matrix block = Matrix::Zero(dim, dim);
        for (const auto& group : groups[k]) {
            for (const auto& a : group) {
                for (const auto& b : group) {
                    block(a.alpha, b.alpha) += G(a.row, b.row);
                }
            }
        }
        return Matrix(0.5 * (block + block.adjoint()));
    });
    return out;
}

double check_consistency(const DensityOp& state, const Projector& P, int n)
{
    const Matrix Rp = sector_representation(P.matrix(), n);
    const Matrix lhs = Rp * partial_trace(state, n).matrix() * Rp.adjoint();
    return trace_norm_distance(lhs, localize(state, P).reduced(n));
}

double check_duality(const DensityOp& state, const Projector& P)
{
    const auto inside = localize(state, P).traces();
    const auto outside = localize(state, P.complement()).traces();
    const int N = state.particles();
    double worst = 0.0;
    for (int k = 0; k <= N; ++k) {
        worst = std::max(worst, std::abs(inside[k] - outside[N - k]));
    }
    return worst;
}

nlohmann::json to_json(const FockBlocks& blocks)
{
    nlohmann::json out = nlohmann::json::array();
    const auto t = blocks.traces();
    for (int k = 0; k <= blocks.particles; ++k) {
        out.push_back({{"k", k}, {"trace", t[k]}, {"operator", matrix_to_json(blocks.embedded(k))}});
    }
    return out;
}

} // namespace deflab

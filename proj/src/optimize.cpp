#include "deflab/optimize.hpp"

#include <algorithm>
#include <numeric>

namespace deflab {

RealVector project_to_simplex(const RealVector& v)
{
    const Eigen::Index n = v.size();
    if (n == 0) {
        throw DomainError("project_to_simplex: empty vector");
    }
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).max(0.0).matrix();
}

RealVector min_norm_hull_weights(const RealMatrix& points, double tol)
{
    const Eigen::Index m = points.cols();
    if (m == 0) {
        throw DomainError("min_norm_hull_weights: no points");
    }
    const RealMatrix gram = points.transpose() * points;
    const double scale = std::max(1.0, gram.diagonal().maxCoeff());

    std::vector<Eigen::Index> active;
    Eigen::Index start = 0;
    gram.diagonal().minCoeff(&start);
    active.push_back(start);
    RealVector lambda = RealVector::Zero(m);
    lambda(start) = 1.0;

    for (int major = 0; major < 1000; ++major) {
        const RealVector x = points * lambda;
        const RealVector dots = points.transpose() * x;
        Eigen::Index j = 0;
        dots.minCoeff(&j);
        if (dots(j) >= x.squaredNorm() - tol * scale
            || std::find(active.begin(), active.end(), j) != active.end()) {
            break;
        }
        active.push_back(j);

        for (int minor = 0; minor < 1000; ++minor) {
            const auto k = static_cast<Eigen::Index>(active.size());
            // affine minimum-norm point over the active set
            RealMatrix kkt = RealMatrix::Zero(k + 1, k + 1);
            RealVector rhs = RealVector::Zero(k + 1);
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index b = 0; b < k; ++b) {
                    kkt(a, b) = gram(active[a], active[b]);
                }
                kkt(a, k) = 1.0;
                kkt(k, a) = 1.0;
            }
            rhs(k) = 1.0;
            const RealVector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
            const RealVector alpha = sol.head(k);
            if (alpha.minCoeff() > tol) {
                lambda.setZero();
                for (Eigen::Index a = 0; a < k; ++a) {
                    lambda(active[a]) = alpha(a);
                }
                break;
            }
            double theta = 1.0;
            for (Eigen::Index a = 0; a < k; ++a) {
                if (alpha(a) <= tol) {
                    const double la = lambda(active[a]);
                    theta = std::min(theta, la / (la - alpha(a)));
                }
            }
            for (Eigen::Index a = 0; a < k; ++a) {
                lambda(active[a]) = (1.0 - theta) * lambda(active[a]) + theta * alpha(a);
            }
            std::vector<Eigen::Index> kept;
            for (Eigen::Index idx : active) {
                if (lambda(idx) > tol) {
                    kept.push_back(idx);
                } else {
                    lambda(idx) = 0.0;
                }
            }
            active = std::move(kept);
        }
    }
    lambda = lambda.cwiseMax(0.0);
    return lambda / lambda.sum();
}

} // namespace deflab

#include "mtavg/similarity.hpp"

#include <cmath>

namespace mtavg {

GaussianThreshold gaussian_threshold_detail(double tau, int B, double alpha, int d) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (B < 1) throw std::invalid_argument("B must be >= 1");
    GaussianThreshold out;
    out.delta = (2.0 * std::log(double(B)) + std::log(1.0 / alpha)) / double(d);
    constexpr double C = 1e3;
    out.premise_ok = tau >= std::max(C * out.delta, std::sqrt(C * out.delta));
    double root = std::sqrt(2.0 + tau) - 4.0 * std::sqrt(out.delta);
    if (root <= 0.0) {
        out.zeta = 0.0;
        out.clamped = true;
    } else {
        out.zeta = root * root;
    }
    return out;
}

double gaussian_threshold(double tau, int B, double alpha, int d) {
    return gaussian_threshold_detail(tau, B, alpha, d).zeta;
}

NeighborGraph graph_from_sqdists(const Eigen::MatrixXd& sqdist, double threshold) {
    const Eigen::Index b = sqdist.rows();
    NeighborGraph g;
    g.adj.setZero(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        g.adj(i, i) = 1;
        for (Eigen::Index j = i + 1; j < b; ++j) {
            std::uint8_t t = sqdist(i, j) <= threshold ? 1 : 0;
            g.adj(i, j) = g.adj(j, i) = t;
        }
    }
    return g;
}

NeighborGraph build_neighbor_graph_gaussian(const Eigen::MatrixXd& muhats, double zeta,
                                            int N) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    const Eigen::Index b = muhats.rows();
    const double threshold = zeta * double(muhats.cols()) / double(N);
    Eigen::VectorXd norms = muhats.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * muhats * muhats.transpose());
    d2.colwise() += norms;
    d2.rowwise() += norms.transpose();
    d2 = d2.array().max(0.0).matrix();
    // exact zeros on the diagonal keep the non-strict test honest at zeta = 0
    d2.diagonal().setZero();
    NeighborGraph g = graph_from_sqdists(d2, threshold);
    (void)b;
    return g;
}

NeighborGraph graph_from_ustats(const Eigen::MatrixXd& ustat, const Eigen::VectorXd& sigma2,
                                double zeta) {
    const Eigen::Index b = ustat.rows();
    NeighborGraph g;
    g.adj.setZero(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        g.adj(i, i) = 1;
        // a nonpositive threshold never accepts, even for negative U values:
        // zeta = 0 yields the identity graph and a constant bag (sigma2 = 0)
        // trusts only itself
        const double threshold = zeta * sigma2(i);
        if (threshold <= 0.0) continue;
        for (Eigen::Index j = 0; j < b; ++j)
            if (j != i && ustat(i, j) < threshold) g.adj(i, j) = 1;
    }
    return g;
}

NeighborGraph build_neighbor_graph_kme(const GramCache& cache, double zeta) {
    const Eigen::Index b = cache.size();
    Eigen::MatrixXd u(b, b);
    Eigen::VectorXd s2(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        s2(i) = cache.naive_mse(i);
        u(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) u(i, j) = u(j, i) = cache.mmd_u(i, j);
    }
    return graph_from_ustats(u, s2, zeta);
}

NeighborGraph build_neighbor_graph_kme(const std::vector<Bag>& bags,
                                       const KernelSpec& kernel, double zeta) {
    GramCache cache(bags, kernel);
    return build_neighbor_graph_kme(cache, zeta);
}

}  // namespace mtavg

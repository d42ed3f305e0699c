#pragma once

#include "mtavg/kernel.hpp"

namespace mtavg {

// Pairwise test outcomes T_ij; row i lists the detected neighbors V_i of
// task i. Diagonal is always 1. The KME-mode graph may be asymmetric because
// row i is thresholded with task i's own variance estimate.
struct NeighborGraph {
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> adj;

    Eigen::Index size() const { return adj.rows(); }
    bool edge(Eigen::Index i, Eigen::Index j) const { return adj(i, j) != 0; }
    Eigen::Index neighbor_count(Eigen::Index i) const {
        return static_cast<Eigen::Index>(adj.row(i).cast<int>().sum());
    }
    bool symmetric() const { return adj == adj.transpose(); }
};

struct GaussianThreshold {
    double zeta = 0.0;
    double delta = 0.0;
    bool clamped = false;     // 4 sqrt(delta) >= sqrt(2 + tau): zeta forced to 0
    bool premise_ok = true;   // tau >= max(C delta, sqrt(C delta)), C = 1e3
};

// zeta = (sqrt(2 + tau) - 4 sqrt(delta))^2 with delta = (2 log B + log(1/alpha)) / d.
// The premise on tau is reported, not enforced.
GaussianThreshold gaussian_threshold_detail(double tau, int B, double alpha, int d);
double gaussian_threshold(double tau, int B, double alpha, int d);

// T_ij = 1{ ||muhat_i - muhat_j||^2 <= zeta d / N }  (non-strict). Symmetric.
// muhats holds one estimate per row.
NeighborGraph build_neighbor_graph_gaussian(const Eigen::MatrixXd& muhats, double zeta,
                                            int N);

// T_ij = 1{ U_ij < zeta * sigma2hat_i } (strict), with sigma2hat_i the
// task-dependent unbiased MSE estimate; zeta subsumes the tau/2 factor. A bag
// with sigma2hat_i = 0 trusts only itself. Possibly asymmetric; diagonal 1.
NeighborGraph build_neighbor_graph_kme(const std::vector<Bag>& bags,
                                       const KernelSpec& kernel, double zeta);
NeighborGraph build_neighbor_graph_kme(const GramCache& cache, double zeta);

// Graph construction from precomputed statistics (shared by both modes above).
NeighborGraph graph_from_sqdists(const Eigen::MatrixXd& sqdist, double threshold);
NeighborGraph graph_from_ustats(const Eigen::MatrixXd& ustat,
                                const Eigen::VectorXd& sigma2, double zeta);

}  // namespace mtavg

#include "mtavg/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mtavg/kernel.hpp"

namespace mtavg {

RadiusPair theory_radius(double t, double d_eff, double L, double N, double sigma_bar) {
    if (!(d_eff > 0 && L > 0 && N > 0 && sigma_bar > 0))
        throw std::invalid_argument("theory_radius inputs must be positive");
    if (t < 1.0) throw std::invalid_argument("theory_radius requires t >= 1");
    const double lin = L * t / (N * sigma_bar);
    RadiusPair out;
    out.r = 5.0 * (std::sqrt((1.0 / d_eff + L / (N * sigma_bar)) * t) + lin);
    out.tau_min = out.r * std::max(std::sqrt(2.0), out.r);
    return out;
}

double mse_factor_single(double tau, Eigen::Index V_size, BoundMode mode) {
    if (mode == BoundMode::indep) {
        // V_size = |V_i*| (neighbors excluding self), >= 0
        if (V_size < 0) throw std::invalid_argument("V_size must be >= 0");
        const double v = static_cast<double>(V_size);
        return (tau * v + 1.0) / ((1.0 + tau) * v + 1.0);
    }
    // onesample: V_size = |V_i| >= 1
    if (V_size < 1) throw std::invalid_argument("V_size must be >= 1");
    return 2.0 * (tau + (tau + 1.0 / static_cast<double>(V_size)) / (1.0 + tau));
}

double mse_factor_avg(double tau, Eigen::Index covering_N, Eigen::Index B, BoundMode mode) {
    if (covering_N < 1 || covering_N > B)
        throw std::invalid_argument("covering number must lie in [1, B]");
    const double ratio = static_cast<double>(covering_N) / static_cast<double>(B);
    if (mode == BoundMode::indep) return tau / (tau + 1.0) + ratio / (tau + 1.0);
    return 2.0 * (tau + tau / (1.0 + tau) + ratio / (1.0 + tau));
}

Eigen::Index covering_number(const Eigen::MatrixXd& points, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("radius must be > 0");
    std::vector<Eigen::Index> centers;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        bool covered = false;
        for (Eigen::Index c : centers) {
            if ((points.row(i) - points.row(c)).norm() <= radius) {
                covered = true;
                break;
            }
        }
        if (!covered) centers.push_back(i);
    }
    return static_cast<Eigen::Index>(centers.size());
}

double effective_dimension(const Eigen::VectorXd& covariance_spectrum) {
    if (covariance_spectrum.size() == 0)
        throw std::invalid_argument("empty covariance spectrum");
    const double top = covariance_spectrum.maxCoeff();
    if (!(top > 0)) throw std::invalid_argument("spectrum must have a positive entry");
    if (covariance_spectrum.minCoeff() < 0)
        throw std::invalid_argument("spectrum entries must be nonnegative");
    return covariance_spectrum.sum() / top;
}

Eigen::VectorXd bag_covariance_spectrum(const Bag& bag, const KernelSpec& kernel) {
    const Eigen::Index n = bag.size();
    Eigen::MatrixXd g = gram_block(bag, bag, kernel);
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) -
                        Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd centered = h * g * h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered);
    Eigen::VectorXd spectrum = es.eigenvalues().cwiseMax(0.0) / static_cast<double>(n);
    return spectrum.reverse();
}

QRadii q_radii(double t, double trace_sigma, double op_norm_sigma, double N, double L) {
    if (!(trace_sigma > 0 && op_norm_sigma > 0 && N > 0 && L > 0))
        throw std::invalid_argument("q_radii inputs must be positive");
    if (t < 0) throw std::invalid_argument("q_radii requires t >= 0");
    QRadii out;
    out.q_sigma = 2.0 * std::sqrt((2.0 * op_norm_sigma / N +
                                   16.0 * L * std::sqrt(trace_sigma) / std::pow(N, 1.5)) *
                                  t) +
                  2.0 * L * t / N;
    const double sigma_bar2 = trace_sigma / N;
    const double d_eff = trace_sigma / op_norm_sigma;
    out.q = 2.0 * std::sqrt((4.0 * sigma_bar2 / d_eff +
                             16.0 * L * std::sqrt(2.0 * sigma_bar2) / N) *
                            t) +
            2.0 * L * t / N;
    return out;
}

}  // namespace mtavg

#pragma once

#include <Eigen/Dense>

#include "mtavg/bag.hpp"

namespace mtavg {

// r(t) = 5 ( sqrt((1/d_eff + L/(N sigma_bar)) t) + L t / (N sigma_bar) ),
// tau_min(t) = r(t) max(sqrt(2), r(t)).
struct RadiusPair {
    double r = 0.0;
    double tau_min = 0.0;
};
RadiusPair theory_radius(double t, double d_eff, double L, double N, double sigma_bar);

enum class BoundMode { indep, onesample };

// Multiplicative factor on sigma_bar^2 in the per-task MSE bounds:
//   indep:     (tau v + 1) / ((1 + tau) v + 1)          with v = |V_i*|
//   onesample: 2 (tau + (tau + 1/|V_i|) / (1 + tau))    with V_size = |V_i|
double mse_factor_single(double tau, Eigen::Index V_size, BoundMode mode);

// Averaged-over-tasks factors:
//   indep:     tau/(tau+1) + (Ncover/B) / (tau+1)
//   onesample: 2 (tau + tau/(1+tau) + (Ncover/B) / (1+tau))
double mse_factor_avg(double tau, Eigen::Index covering_N, Eigen::Index B, BoundMode mode);

// Greedy cover: scan points in input order, open a new center whenever a
// point is farther than `radius` from every existing center. Upper-bounds the
// minimum covering number; deterministic in the input order.
Eigen::Index covering_number(const Eigen::MatrixXd& points, double radius);

// Tr Sigma / ||Sigma||_op from a covariance spectrum.
double effective_dimension(const Eigen::VectorXd& covariance_spectrum);

// Spectrum of the empirical covariance operator of one bag, obtained as the
// eigenvalues of the centered Gram matrix divided by N (same nonzero
// spectrum). Useful to estimate the effective dimension in kernel space.
Eigen::VectorXd bag_covariance_spectrum(const Bag& bag, const KernelSpec& kernel);

// q_Sigma(t) = 2 sqrt((2 ||S||op / N + 16 L sqrt(Tr S) / N^{3/2}) t) + 2 L t / N
// q(t)       = 2 sqrt((4 sb2 / d_eff + 16 L sqrt(2 sb2) / N) t) + 2 L t / N
struct QRadii {
    double q_sigma = 0.0;
    double q = 0.0;
};
QRadii q_radii(double t, double trace_sigma, double op_norm_sigma, double N, double L);

}  // namespace mtavg

#pragma once

#include <memory>
#include <mutex>

#include "mtavg/bag.hpp"

namespace mtavg {

// N_a x N_b matrix of kernel evaluations k(a_k, b_l). Exactly symmetric when
// both arguments are the same bag object.
Eigen::MatrixXd gram_block(const Bag& a, const Bag& b, const KernelSpec& kernel);

// Unbiased squared-MMD U-statistic, adapted to possibly unequal bag sizes:
// within-bag sums are normalized by N(N-1), the cross term by 2/(N_a N_b).
// E[U] = ||mu_a - mu_b||^2 in feature space; the estimate may be negative.
double mmd_u(const Bag& a, const Bag& b, const KernelSpec& kernel);

// Task-dependent unbiased estimate of E||muhat_i - mu_i||^2 = Tr Sigma_i / N_i,
//   (1 / (2 N^2 (N-1))) * sum_{k != l} [k(z_k,z_k) - 2 k(z_k,z_l) + k(z_l,z_l)].
// Nonnegative (a positive combination of squared feature distances).
double naive_mse_estimate(const Bag& bag, const KernelSpec& kernel);

// Aggregate Gram sums for a fixed bag collection, cached per (i, j) pair.
// Only the sums needed by the U-statistics and plug-in inner products are
// retained, keeping memory O(B^2) instead of O(B^2 N^2).
class GramCache {
public:
    GramCache(const std::vector<Bag>& bags, KernelSpec kernel);

    Eigen::Index size() const { return static_cast<Eigen::Index>(bags_->size()); }
    const std::vector<Bag>& bags() const { return *bags_; }
    const KernelSpec& kernel() const { return kernel_; }

    // sum over all entries of the (i, j) Gram block
    double full_sum(Eigen::Index i, Eigen::Index j) const;
    // sum over the diagonal of the (i, i) block
    double diag_sum(Eigen::Index i) const;
    double offdiag_sum(Eigen::Index i) const { return full_sum(i, i) - diag_sum(i); }

    double mmd_u(Eigen::Index i, Eigen::Index j) const;
    double naive_mse(Eigen::Index i) const;

    // <muhat_i, muhat_j> with all Gram entries included (plug-in inner product)
    double naive_dot(Eigen::Index i, Eigen::Index j) const;
    // full B x B plug-in Gram of the naive embeddings
    Eigen::MatrixXd naive_gram() const;

    void precompute(int threads);

private:
    const std::vector<Bag>* bags_;
    KernelSpec kernel_;
    mutable Eigen::MatrixXd full_;
    mutable Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> have_;
    mutable Eigen::VectorXd diag_;
    mutable Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> have_diag_;
    mutable std::mutex mutex_;

    double full_sum_nolock(Eigen::Index i, Eigen::Index j) const;
};

// K-hat with rows/cols mixed by `weights`: entry (i, j) =
// <sum_a w_ia muhat_a, sum_b w_jb muhat_b>. Plug-in inner products (Gram
// diagonals included); output is symmetric PSD.
Eigen::MatrixXd inter_task_gram(const Eigen::MatrixXd& weights,
                                const std::vector<Bag>& bags, const KernelSpec& kernel);
Eigen::MatrixXd inter_task_gram(const Eigen::MatrixXd& weights, const GramCache& cache);

// Unbiased estimate of ||mu_tilde - mu||^2 where mu_tilde = sum_j w_j muhat_j
// and mu is approximated through an independent reference bag: the
// <mu_tilde, mu_tilde> term keeps Gram diagonals, the reference-squared term
// drops the reference diagonal (normalizer M(M-1)), the cross term uses all
// entries. May be slightly negative; not clamped.
double estimator_loss(const Eigen::VectorXd& weights_row, const std::vector<Bag>& bags,
                      const Bag& ref_bag, const KernelSpec& kernel);
double estimator_loss(const Eigen::VectorXd& weights_row, const GramCache& cache,
                      const Bag& ref_bag);

}  // namespace mtavg

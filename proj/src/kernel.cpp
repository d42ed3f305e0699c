#include "mtavg/kernel.hpp"

#include "mtavg/parallel.hpp"

namespace mtavg {

namespace {

void check_same_dim(const Bag& a, const Bag& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("dimension mismatch between bags '" + a.id +
                                    "' and '" + b.id + "'");
}

Eigen::MatrixXd rbf_block(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double width) {
    const double scale = -1.0 / (2.0 * width * width);
    Eigen::VectorXd an = a.rowwise().squaredNorm();
    Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return (d2.array().max(0.0) * scale).exp().matrix();
}

}  // namespace

Eigen::MatrixXd gram_block(const Bag& a, const Bag& b, const KernelSpec& kernel) {
    check_same_dim(a, b);
    if (&a == &b || (a.id == b.id && a.samples.data() == b.samples.data())) {
        // same bag: compute the lower triangle and mirror for exact symmetry
        Eigen::MatrixXd g;
        if (kernel.kind == KernelKind::linear)
            g = a.samples * a.samples.transpose();
        else
            g = rbf_block(a.samples, a.samples, kernel.width);
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < i; ++j) g(j, i) = g(i, j);
        if (kernel.kind == KernelKind::gaussian_rbf) g.diagonal().setOnes();
        return g;
    }
    if (kernel.kind == KernelKind::linear) return a.samples * b.samples.transpose();
    return rbf_block(a.samples, b.samples, kernel.width);
}

double mmd_u(const Bag& a, const Bag& b, const KernelSpec& kernel) {
    check_same_dim(a, b);
    const Eigen::Index na = a.size(), nb = b.size();
    if (na < 2 || nb < 2)
        throw std::invalid_argument("mmd_u requires at least 2 samples per bag");
    Eigen::MatrixXd gaa = gram_block(a, a, kernel);
    Eigen::MatrixXd gbb = gram_block(b, b, kernel);
    // canonical orientation for the cross block so the summation order (and
    // hence the value) is identical under argument swap
    const bool swap = std::less<const void*>{}(&b, &a);
    Eigen::MatrixXd gab =
        swap ? gram_block(b, a, kernel) : gram_block(a, b, kernel);
    double within_a = (gaa.sum() - gaa.trace()) / (double(na) * double(na - 1));
    double within_b = (gbb.sum() - gbb.trace()) / (double(nb) * double(nb - 1));
    double cross = 2.0 * gab.sum() / (double(na) * double(nb));
    return within_a + within_b - cross;
}

double naive_mse_estimate(const Bag& bag, const KernelSpec& kernel) {
    const Eigen::Index n = bag.size();
    if (n < 2) throw std::invalid_argument("naive_mse_estimate requires >= 2 samples");
    Eigen::MatrixXd g = gram_block(bag, bag, kernel);
    // sum_{k != l} [g_kk - 2 g_kl + g_ll] = 2 [ N diag_sum - full_sum ]
    double value = (double(n) * g.trace() - g.sum()) / (double(n) * double(n) * double(n - 1));
    return std::max(0.0, value);  // roundoff guard; exact value is >= 0
}

GramCache::GramCache(const std::vector<Bag>& bags, KernelSpec kernel)
    : bags_(&bags), kernel_(kernel) {
    common_dim(bags);
    const Eigen::Index b = size();
    full_.setZero(b, b);
    have_.setZero(b, b);
    diag_.setZero(b);
    have_diag_.setZero(b);
}

double GramCache::full_sum_nolock(Eigen::Index i, Eigen::Index j) const {
    if (!have_(i, j)) {
        const Bag& a = (*bags_)[static_cast<std::size_t>(i)];
        const Bag& b = (*bags_)[static_cast<std::size_t>(j)];
        double s;
        if (i == j) {
            Eigen::MatrixXd g = gram_block(a, a, kernel_);
            s = g.sum();
            diag_(i) = g.trace();
            have_diag_(i) = 1;
        } else {
            s = gram_block(a, b, kernel_).sum();
        }
        full_(i, j) = full_(j, i) = s;
        have_(i, j) = have_(j, i) = 1;
    }
    return full_(i, j);
}

double GramCache::full_sum(Eigen::Index i, Eigen::Index j) const {
    std::scoped_lock lock(mutex_);
    return full_sum_nolock(i, j);
}

double GramCache::diag_sum(Eigen::Index i) const {
    std::scoped_lock lock(mutex_);
    if (!have_diag_(i)) {
        if (kernel_.kind == KernelKind::gaussian_rbf) {
            diag_(i) = static_cast<double>((*bags_)[static_cast<std::size_t>(i)].size());
        } else {
            diag_(i) = (*bags_)[static_cast<std::size_t>(i)].samples.rowwise().squaredNorm().sum();
        }
        have_diag_(i) = 1;
    }
    return diag_(i);
}

double GramCache::mmd_u(Eigen::Index i, Eigen::Index j) const {
    const double na = static_cast<double>((*bags_)[static_cast<std::size_t>(i)].size());
    const double nb = static_cast<double>((*bags_)[static_cast<std::size_t>(j)].size());
    if (na < 2 || nb < 2)
        throw std::invalid_argument("mmd_u requires at least 2 samples per bag");
    double wa = (full_sum(i, i) - diag_sum(i)) / (na * (na - 1));
    double wb = (full_sum(j, j) - diag_sum(j)) / (nb * (nb - 1));
    double cross = 2.0 * full_sum(i, j) / (na * nb);
    return wa + wb - cross;
}

double GramCache::naive_mse(Eigen::Index i) const {
    const double n = static_cast<double>((*bags_)[static_cast<std::size_t>(i)].size());
    if (n < 2) throw std::invalid_argument("naive_mse_estimate requires >= 2 samples");
    double value = (n * diag_sum(i) - full_sum(i, i)) / (n * n * (n - 1));
    return std::max(0.0, value);
}

double GramCache::naive_dot(Eigen::Index i, Eigen::Index j) const {
    const double na = static_cast<double>((*bags_)[static_cast<std::size_t>(i)].size());
    const double nb = static_cast<double>((*bags_)[static_cast<std::size_t>(j)].size());
    return full_sum(i, j) / (na * nb);
}

Eigen::MatrixXd GramCache::naive_gram() const {
    const Eigen::Index b = size();
    Eigen::MatrixXd k(b, b);
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = naive_dot(i, j);
    return k;
}

void GramCache::precompute(int threads) {
    const Eigen::Index b = size();
    // flatten the upper triangle (incl. diagonal) into independent work items
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(b) * (b + 1) / 2);
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = i; j < b; ++j) pairs.emplace_back(i, j);
    std::vector<double> sums(pairs.size());
    std::vector<double> diags(static_cast<std::size_t>(b));
    parallel_for(static_cast<std::int64_t>(pairs.size()), threads, [&](std::int64_t idx) {
        auto [i, j] = pairs[static_cast<std::size_t>(idx)];
        const Bag& a = (*bags_)[static_cast<std::size_t>(i)];
        const Bag& c = (*bags_)[static_cast<std::size_t>(j)];
        if (i == j) {
            Eigen::MatrixXd g = gram_block(a, a, kernel_);
            sums[static_cast<std::size_t>(idx)] = g.sum();
            diags[static_cast<std::size_t>(i)] = g.trace();
        } else {
            sums[static_cast<std::size_t>(idx)] = gram_block(a, c, kernel_).sum();
        }
    });
    std::scoped_lock lock(mutex_);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto [i, j] = pairs[p];
        full_(i, j) = full_(j, i) = sums[p];
        have_(i, j) = have_(j, i) = 1;
        if (i == j) {
            diag_(i) = diags[static_cast<std::size_t>(i)];
            have_diag_(i) = 1;
        }
    }
}

Eigen::MatrixXd inter_task_gram(const Eigen::MatrixXd& weights, const GramCache& cache) {
    if (weights.rows() != cache.size() || weights.cols() != cache.size())
        throw std::invalid_argument("weight matrix shape mismatch");
    Eigen::MatrixXd k = weights * cache.naive_gram() * weights.transpose();
    return ((k + k.transpose()) / 2.0).eval();
}

Eigen::MatrixXd inter_task_gram(const Eigen::MatrixXd& weights,
                                const std::vector<Bag>& bags, const KernelSpec& kernel) {
    GramCache cache(bags, kernel);
    return inter_task_gram(weights, cache);
}

double estimator_loss(const Eigen::VectorXd& weights_row, const GramCache& cache,
                      const Bag& ref_bag) {
    const Eigen::Index b = cache.size();
    if (weights_row.size() == 0 || weights_row.size() != b)
        throw std::invalid_argument("weights row must have one entry per bag");
    const Eigen::Index m = ref_bag.size();
    if (m < 2) throw std::invalid_argument("reference bag needs >= 2 samples");

    // <mu_tilde, mu_tilde>, skipping zero weights
    double quad = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        if (weights_row(i) == 0.0) continue;
        quad += weights_row(i) * weights_row(i) * cache.naive_dot(i, i);
        for (Eigen::Index j = 0; j < i; ++j) {
            if (weights_row(j) == 0.0) continue;
            quad += 2.0 * weights_row(i) * weights_row(j) * cache.naive_dot(i, j);
        }
    }

    const KernelSpec& kernel = cache.kernel();
    double cross = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        if (weights_row(i) == 0.0) continue;
        const Bag& bag = cache.bags()[static_cast<std::size_t>(i)];
        double s = gram_block(bag, ref_bag, kernel).sum();
        cross += weights_row(i) * s / (double(bag.size()) * double(m));
    }

    Eigen::MatrixXd gref = gram_block(ref_bag, ref_bag, kernel);
    double ref_offdiag = (gref.sum() - gref.trace()) / (double(m) * double(m - 1));

    return quad - 2.0 * cross + ref_offdiag;
}

double estimator_loss(const Eigen::VectorXd& weights_row, const std::vector<Bag>& bags,
                      const Bag& ref_bag, const KernelSpec& kernel) {
    GramCache cache(bags, kernel);
    return estimator_loss(weights_row, cache, ref_bag);
}

}  // namespace mtavg

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtavg {

// One task's sample set. Rows are samples, columns are features (or, in the
// kernel setting, raw inputs z whose feature map is implicit).
struct Bag {
    std::string id;
    Eigen::MatrixXd samples;

    Bag() = default;
    Bag(std::string id_, Eigen::MatrixXd samples_)
        : id(std::move(id_)), samples(std::move(samples_)) {}

    Eigen::Index size() const { return samples.rows(); }
    Eigen::Index dim() const { return samples.cols(); }
    Eigen::RowVectorXd mean() const { return samples.colwise().mean(); }
};

enum class KernelKind { linear, gaussian_rbf };

// Kernel defining all inner products. RBF convention:
//   k(z, z') = exp(-||z - z'||^2 / (2 * width^2)).
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double width = 1.0;

    static KernelSpec linear() { return {KernelKind::linear, 1.0}; }
    static KernelSpec rbf(double width) {
        if (!(width > 0)) throw std::invalid_argument("rbf width must be > 0");
        return {KernelKind::gaussian_rbf, width};
    }
};

inline double kernel_eval(const KernelSpec& k, const Eigen::RowVectorXd& a,
                          const Eigen::RowVectorXd& b) {
    if (k.kind == KernelKind::linear) return a.dot(b);
    return std::exp(-(a - b).squaredNorm() / (2.0 * k.width * k.width));
}

// Shared feature dimension; throws on empty input, empty bags or mismatch.
inline Eigen::Index common_dim(const std::vector<Bag>& bags) {
    if (bags.empty()) throw std::invalid_argument("no bags");
    Eigen::Index d = bags.front().dim();
    for (const Bag& b : bags) {
        if (b.size() < 1) throw std::invalid_argument("empty bag '" + b.id + "'");
        if (b.dim() != d)
            throw std::invalid_argument("dimension mismatch in bag '" + b.id + "'");
        if (!b.samples.allFinite())
            throw std::invalid_argument("non-finite sample in bag '" + b.id + "'");
    }
    return d;
}

// Feature-space norm bound L: 1 for the RBF kernel, sup ||z|| over the data
// for the linear kernel.
inline double kernel_bound(const KernelSpec& k, const std::vector<Bag>& bags) {
    if (k.kind == KernelKind::gaussian_rbf) return 1.0;
    double sup = 0.0;
    for (const Bag& b : bags) sup = std::max(sup, b.samples.rowwise().norm().maxCoeff());
    return sup;
}

// Per-bag empirical means, stacked as rows (explicit / linear-kernel setting).
inline Eigen::MatrixXd naive_means(const std::vector<Bag>& bags) {
    Eigen::Index d = common_dim(bags);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(bags.size()), d);
    for (std::size_t i = 0; i < bags.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = bags[i].mean();
    return m;
}

}  // namespace mtavg

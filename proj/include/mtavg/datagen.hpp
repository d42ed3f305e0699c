#pragma once

#include <cstdint>

#include "mtavg/bag.hpp"

namespace mtavg {

enum class GaussianModelKind { unif, cluster, sphere, sparse };

std::string gaussian_model_name(GaussianModelKind k);
GaussianModelKind gaussian_model_from_name(const std::string& name);

// Synthetic mean configurations with one observation per task,
// x_i ~ N(mu_i, I_d):
//   unif    d=1000: first 10 coordinates U[-20,20], rest 0
//   cluster d=1000: 20 centers ~ N(0, I_d); 100 means per cluster drawn as
//           center + 0.1 * N(0, I_d)
//   sphere  d=1000: first 6 coordinates uniform on the radius-50 sphere
//   sparse  d=50:   two distinct random coordinates ~ U[0,20]
struct GaussianModel {
    GaussianModelKind kind = GaussianModelKind::unif;
    int B = 2000;
    int d = 0;  // 0 selects the model default (1000, or 50 for sparse)
    std::uint64_t seed = 0;

    int effective_dim() const {
        if (d > 0) return d;
        return kind == GaussianModelKind::sparse ? 50 : 1000;
    }
};

struct GaussianData {
    Eigen::MatrixXd means;         // B x d, one mean per row
    Eigen::MatrixXd observations;  // B x d, means + N(0, I) noise
};

GaussianData gen_gaussian(const GaussianModel& model);

enum class ToyKind { bag_sizes, num_bags, imbalanced, clustered };

std::string toy_kind_name(ToyKind k);
ToyKind toy_kind_from_name(const std::string& name);

// Two-dimensional Gaussian bags with fixed centers and randomly rotated
// covariance R(theta) diag(1, 10) R(theta)^T, theta ~ U(-pi/4, pi/4).
//   bag_sizes:  B bags of size N each (N swept externally)
//   num_bags:   B bags of size N = 50 (B swept externally)
//   imbalanced: B bags, sizes linearly spaced 10..300
//   clustered:  B/10 cluster centers equally spaced on a circle of `radius`
struct ToySetup {
    ToyKind kind = ToyKind::num_bags;
    int B = 50;
    int N = 50;
    double radius = 0.0;
};

struct ToyTask {
    Eigen::Vector2d center;
    double angle = 0.0;
};

struct ToyData {
    std::vector<Bag> bags;
    std::vector<ToyTask> tasks;
};

Eigen::Matrix2d rotation(double theta);
std::vector<int> toy_bag_sizes(const ToySetup& setup);
ToyData gen_toy(const ToySetup& setup, std::uint64_t seed);

// Fresh bag from the same task distribution (used for independent test bags).
Bag sample_toy_bag(const ToyTask& task, int n, std::uint64_t seed, std::uint64_t stream,
                   const std::string& id);

// n rows drawn without replacement; deterministic under seed.
Bag subsample(const Bag& bag, int n, std::uint64_t seed);

}  // namespace mtavg

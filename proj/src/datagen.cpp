#include "mtavg/datagen.hpp"

#include <cmath>
#include <numbers>

#include "mtavg/rng.hpp"

namespace mtavg {

std::string gaussian_model_name(GaussianModelKind k) {
    switch (k) {
        case GaussianModelKind::unif: return "unif";
        case GaussianModelKind::cluster: return "cluster";
        case GaussianModelKind::sphere: return "sphere";
        case GaussianModelKind::sparse: return "sparse";
    }
    throw std::logic_error("unknown gaussian model");
}

GaussianModelKind gaussian_model_from_name(const std::string& name) {
    for (auto k : {GaussianModelKind::unif, GaussianModelKind::cluster,
                   GaussianModelKind::sphere, GaussianModelKind::sparse})
        if (gaussian_model_name(k) == name) return k;
    throw std::invalid_argument("unknown gaussian model '" + name + "'");
}

GaussianData gen_gaussian(const GaussianModel& model) {
    const int B = model.B;
    const int d = model.effective_dim();
    if (B < 1) throw std::invalid_argument("B must be >= 1");
    GaussianData out;
    out.means.setZero(B, d);

    switch (model.kind) {
        case GaussianModelKind::unif: {
            const int dp = std::min(10, d);
            for (int i = 0; i < B; ++i) {
                Rng rng(model.seed, 1, static_cast<std::uint64_t>(i));
                for (int j = 0; j < dp; ++j) out.means(i, j) = rng.uniform(-20.0, 20.0);
            }
            break;
        }
        case GaussianModelKind::cluster: {
            const int n_clusters = 20;
            Eigen::MatrixXd centers(n_clusters, d);
            for (int c = 0; c < n_clusters; ++c) {
                Rng rng(model.seed, 2, static_cast<std::uint64_t>(c));
                for (int j = 0; j < d; ++j) centers(c, j) = rng.normal();
            }
            // equal split: B/20 means per cluster, remainder spread over the
            // first clusters
            for (int i = 0; i < B; ++i) {
                const int c = i % n_clusters;
                Rng rng(model.seed, 3, static_cast<std::uint64_t>(i));
                for (int j = 0; j < d; ++j)
                    out.means(i, j) = centers(c, j) + 0.1 * rng.normal();
            }
            break;
        }
        case GaussianModelKind::sphere: {
            const int k = std::min(6, d);
            for (int i = 0; i < B; ++i) {
                Rng rng(model.seed, 4, static_cast<std::uint64_t>(i));
                Eigen::VectorXd v(k);
                double norm = 0.0;
                do {
                    for (int j = 0; j < k; ++j) v(j) = rng.normal();
                    norm = v.norm();
                } while (norm == 0.0);
                out.means.row(i).head(k) = (50.0 / norm) * v.transpose();
            }
            break;
        }
        case GaussianModelKind::sparse: {
            for (int i = 0; i < B; ++i) {
                Rng rng(model.seed, 5, static_cast<std::uint64_t>(i));
                const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
                int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(d - 1)));
                if (b >= a) ++b;  // uniform over distinct pairs
                out.means(i, a) = rng.uniform(0.0, 20.0);
                out.means(i, b) = rng.uniform(0.0, 20.0);
            }
            break;
        }
    }

    out.observations = out.means;
    for (int i = 0; i < B; ++i) {
        Rng rng(model.seed, 6, static_cast<std::uint64_t>(i));
        for (int j = 0; j < d; ++j) out.observations(i, j) += rng.normal();
    }
    return out;
}

std::string toy_kind_name(ToyKind k) {
    switch (k) {
        case ToyKind::bag_sizes: return "bag_sizes";
        case ToyKind::num_bags: return "num_bags";
        case ToyKind::imbalanced: return "imbalanced";
        case ToyKind::clustered: return "clustered";
    }
    throw std::logic_error("unknown toy kind");
}

ToyKind toy_kind_from_name(const std::string& name) {
    for (auto k : {ToyKind::bag_sizes, ToyKind::num_bags, ToyKind::imbalanced,
                   ToyKind::clustered})
        if (toy_kind_name(k) == name) return k;
    throw std::invalid_argument("unknown toy setup '" + name + "'");
}

Eigen::Matrix2d rotation(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

std::vector<int> toy_bag_sizes(const ToySetup& setup) {
    std::vector<int> sizes(static_cast<std::size_t>(setup.B), setup.N);
    if (setup.kind == ToyKind::imbalanced) {
        for (int i = 0; i < setup.B; ++i) {
            double f = setup.B == 1 ? 0.0 : static_cast<double>(i) / (setup.B - 1);
            sizes[static_cast<std::size_t>(i)] =
                static_cast<int>(std::lround(10.0 + f * (300.0 - 10.0)));
        }
    }
    return sizes;
}

Bag sample_toy_bag(const ToyTask& task, int n, std::uint64_t seed, std::uint64_t stream,
                   const std::string& id) {
    if (n < 1) throw std::invalid_argument("bag size must be >= 1");
    Rng rng(seed, 7, stream);
    Eigen::Matrix2d transform = rotation(task.angle) * Eigen::Vector2d(1.0, std::sqrt(10.0)).asDiagonal();
    Eigen::MatrixXd samples(n, 2);
    for (int k = 0; k < n; ++k) {
        Eigen::Vector2d g(rng.normal(), rng.normal());
        samples.row(k) = (task.center + transform * g).transpose();
    }
    return Bag(id, std::move(samples));
}

ToyData gen_toy(const ToySetup& setup, std::uint64_t seed) {
    if (setup.B < 1) throw std::invalid_argument("B must be >= 1");
    if (setup.kind == ToyKind::clustered && setup.B % 10 != 0)
        throw std::invalid_argument("clustered setup requires B divisible by 10");
    ToyData out;
    out.tasks.resize(static_cast<std::size_t>(setup.B));
    const std::vector<int> sizes = toy_bag_sizes(setup);
    const int n_clusters = setup.B / 10;
    for (int i = 0; i < setup.B; ++i) {
        ToyTask& task = out.tasks[static_cast<std::size_t>(i)];
        task.center.setZero();
        if (setup.kind == ToyKind::clustered) {
            const int c = i / 10;  // each ten consecutive bags form a cluster
            const double phi = 2.0 * std::numbers::pi * c / n_clusters;
            task.center << setup.radius * std::cos(phi), setup.radius * std::sin(phi);
        }
        Rng rng(seed, 8, static_cast<std::uint64_t>(i));
        task.angle = rng.uniform(-std::numbers::pi / 4.0, std::numbers::pi / 4.0);
    }
    out.bags.reserve(static_cast<std::size_t>(setup.B));
    for (int i = 0; i < setup.B; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "bag_%04d", i);
        out.bags.push_back(sample_toy_bag(out.tasks[static_cast<std::size_t>(i)],
                                          sizes[static_cast<std::size_t>(i)], seed,
                                          static_cast<std::uint64_t>(i), id));
    }
    return out;
}

Bag subsample(const Bag& bag, int n, std::uint64_t seed) {
    const Eigen::Index total = bag.size();
    if (n < 0 || n > total)
        throw std::invalid_argument("subsample size exceeds bag '" + bag.id + "'");
    // partial Fisher-Yates on the index vector
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    for (Eigen::Index i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(seed, 9);
    for (int k = 0; k < n; ++k) {
        const auto j = k + static_cast<Eigen::Index>(
                               rng.below(static_cast<std::uint64_t>(total - k)));
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXd rows(n, bag.dim());
    for (int k = 0; k < n; ++k) rows.row(k) = bag.samples.row(idx[static_cast<std::size_t>(k)]);
    return Bag(bag.id, std::move(rows));
}

}  // namespace mtavg

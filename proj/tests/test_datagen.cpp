#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mtavg/datagen.hpp"

using namespace mtavg;

TEST_SUITE("datagen") {

TEST_CASE("gaussian models") {
    SUBCASE("unif: coordinates beyond the first 10 are exactly zero") {
        GaussianModel m{GaussianModelKind::unif, 50, 0, 3};
        GaussianData data = gen_gaussian(m);
        CHECK(data.means.rows() == 50);
        CHECK(data.means.cols() == 1000);
        CHECK(data.means.rightCols(990).cwiseAbs().maxCoeff() == 0.0);
        CHECK(data.means.leftCols(10).cwiseAbs().maxCoeff() <= 20.0);
        CHECK(data.means.leftCols(10).cwiseAbs().minCoeff() >= 0.0);
        // observations are means plus noise
        CHECK(((data.observations - data.means).rowwise().squaredNorm().mean()) ==
              doctest::Approx(1000.0).epsilon(0.1));
    }
    SUBCASE("sphere: the first six coordinates have norm 50") {
        GaussianModel m{GaussianModelKind::sphere, 40, 0, 4};
        GaussianData data = gen_gaussian(m);
        for (int i = 0; i < 40; ++i) {
            CHECK(data.means.row(i).head(6).norm() == doctest::Approx(50.0).epsilon(1e-12));
            CHECK(data.means.row(i).tail(994).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("sparse: exactly two nonzero coordinates in [0, 20]") {
        GaussianModel m{GaussianModelKind::sparse, 200, 0, 5};
        GaussianData data = gen_gaussian(m);
        CHECK(data.means.cols() == 50);
        for (int i = 0; i < 200; ++i) {
            int nonzero = 0;
            for (int j = 0; j < 50; ++j) {
                if (data.means(i, j) != 0.0) {
                    ++nonzero;
                    CHECK(data.means(i, j) >= 0.0);
                    CHECK(data.means(i, j) <= 20.0);
                }
            }
            CHECK(nonzero == 2);
        }
    }
    SUBCASE("cluster: 20 clusters with 0.1-scale spread") {
        GaussianModel m{GaussianModelKind::cluster, 400, 200, 6};
        GaussianData data = gen_gaussian(m);
        // means of the same cluster are within a few units of each other;
        // different clusters are ~sqrt(2 d) apart
        const int nc = 20;
        for (int i = 0; i < 40; ++i) {
            const double within =
                (data.means.row(i) - data.means.row(i + nc)).norm();  // same cluster
            CHECK(within < 5.0);
        }
        const double across = (data.means.row(0) - data.means.row(1)).norm();
        CHECK(across > 10.0);
    }
    SUBCASE("determinism") {
        GaussianModel m{GaussianModelKind::unif, 10, 0, 12};
        GaussianData a = gen_gaussian(m);
        GaussianData b = gen_gaussian(m);
        CHECK(a.means == b.means);
        CHECK(a.observations == b.observations);
    }
}

TEST_CASE("rotations are orthogonal with eigenvalues {1, 10}") {
    for (double theta : {-0.7, -0.1, 0.0, 0.4, 0.78}) {
        Eigen::Matrix2d r = rotation(theta);
        CHECK((r.transpose() * r - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <=
              1e-12);
        Eigen::Matrix2d sigma = r * Eigen::Vector2d(1.0, 10.0).asDiagonal() * r.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sigma);
        CHECK(es.eigenvalues()(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(es.eigenvalues()(1) == doctest::Approx(10.0).epsilon(1e-12));
    }
}

TEST_CASE("toy setups") {
    SUBCASE("num_bags: all centers zero, fixed size") {
        ToySetup s{ToyKind::num_bags, 20, 50, 0.0};
        ToyData data = gen_toy(s, 9);
        CHECK(data.bags.size() == 20);
        for (const auto& task : data.tasks) {
            CHECK(task.center.norm() == 0.0);
            CHECK(task.angle >= -std::numbers::pi / 4.0);
            CHECK(task.angle <= std::numbers::pi / 4.0);
        }
        for (const Bag& b : data.bags) {
            CHECK(b.size() == 50);
            CHECK(b.dim() == 2);
        }
    }
    SUBCASE("imbalanced: sizes linearly spaced from 10 to 300") {
        ToySetup s{ToyKind::imbalanced, 50, 0, 0.0};
        std::vector<int> sizes = toy_bag_sizes(s);
        CHECK(sizes.front() == 10);
        CHECK(sizes.back() == 300);
        for (std::size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i] >= sizes[i - 1]);
    }
    SUBCASE("clustered: centers equally spaced on the circle") {
        ToySetup s{ToyKind::clustered, 50, 50, 2.0};
        ToyData data = gen_toy(s, 10);
        // five clusters of ten consecutive bags
        std::set<std::pair<double, double>> centers;
        for (const auto& t : data.tasks) {
            CHECK(t.center.norm() == doctest::Approx(2.0).epsilon(1e-12));
            centers.insert({t.center(0), t.center(1)});
        }
        CHECK(centers.size() == 5);
        // adjacent centers separated by equal angles 2 pi / 5
        const double expected = 2.0 * 2.0 * std::sin(std::numbers::pi / 5.0);
        for (int c = 0; c < 5; ++c) {
            const auto& a = data.tasks[std::size_t(10 * c)].center;
            const auto& b = data.tasks[std::size_t(10 * ((c + 1) % 5))].center;
            CHECK((a - b).norm() == doctest::Approx(expected).epsilon(1e-9));
        }
        CHECK_THROWS_AS(gen_toy(ToySetup{ToyKind::clustered, 55, 50, 1.0}, 1),
                        std::invalid_argument);
    }
    SUBCASE("radius zero reduces to the centered geometry") {
        ToySetup s{ToyKind::clustered, 50, 50, 0.0};
        ToyData data = gen_toy(s, 11);
        for (const auto& t : data.tasks) CHECK(t.center.norm() == 0.0);
    }
    SUBCASE("sample covariance matches the rotated model") {
        ToyTask task{Eigen::Vector2d::Zero(), 0.0};
        Bag big = sample_toy_bag(task, 100000, 13, 0, "big");
        Eigen::RowVectorXd mean = big.samples.colwise().mean();
        Eigen::MatrixXd centered = big.samples.rowwise() - mean;
        Eigen::Matrix2d cov = (centered.transpose() * centered) / double(big.size());
        CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(0.02));
        CHECK(cov(1, 1) == doctest::Approx(10.0).epsilon(0.02));
        CHECK(std::abs(cov(0, 1)) <= 0.05);
    }
}

TEST_CASE("subsample") {
    Eigen::MatrixXd s(6, 2);
    s << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
    Bag bag("b", s);
    SUBCASE("n equal to the bag size permutes the rows") {
        Bag out = subsample(bag, 6, 21);
        CHECK(out.size() == 6);
        std::set<double> seen;
        for (int i = 0; i < 6; ++i) seen.insert(out.samples(i, 0));
        CHECK(seen.size() == 6);
    }
    SUBCASE("single row") {
        Bag out = subsample(bag, 1, 22);
        CHECK(out.size() == 1);
    }
    SUBCASE("deterministic under a fixed seed") {
        Bag a = subsample(bag, 3, 23);
        Bag b = subsample(bag, 3, 23);
        CHECK(a.samples == b.samples);
        Bag c = subsample(bag, 3, 24);
        CHECK(a.samples != c.samples);  // overwhelmingly likely
    }
    SUBCASE("oversampling rejected") {
        CHECK_THROWS_AS(subsample(bag, 7, 25), std::invalid_argument);
    }
}

}  // TEST_SUITE

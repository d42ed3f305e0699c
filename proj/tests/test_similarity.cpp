#include <doctest.h>

#include <cmath>

#include "mtavg/parallel.hpp"
#include "mtavg/rng.hpp"
#include "mtavg/similarity.hpp"

using namespace mtavg;

namespace {

Bag random_bag(Rng& rng, const std::string& id, int n, int d) {
    Eigen::MatrixXd s(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) s(i, j) = rng.normal();
    return Bag(id, s);
}

// one family-wise test run: B means on a regular simplex with pairwise
// squared distance delta2, observations N(mu_i, I_d), tests at threshold zeta
bool run_gaussian_tests_all_accepted(std::uint64_t seed, int B, int d, double delta2,
                                     double zeta) {
    const double s = std::sqrt(delta2 / 2.0);
    Eigen::MatrixXd x(B, d);
    Rng rng(seed);
    for (int i = 0; i < B; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
        x(i, i) += s;  // simplex vertex s * e_i
    }
    NeighborGraph g = build_neighbor_graph_gaussian(x, zeta, 1);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j)
            if (i != j && !g.edge(i, j)) return false;
    return true;
}

bool run_gaussian_tests_any_accepted(std::uint64_t seed, int B, int d, double delta2,
                                     double zeta) {
    const double s = std::sqrt(delta2 / 2.0);
    Eigen::MatrixXd x(B, d);
    Rng rng(seed);
    for (int i = 0; i < B; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
        x(i, i) += s;
    }
    NeighborGraph g = build_neighbor_graph_gaussian(x, zeta, 1);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < B; ++j)
            if (i != j && g.edge(i, j)) return true;
    return false;
}

}  // namespace

TEST_SUITE("similarity") {

TEST_CASE("gaussian_threshold closed form") {
    // tau=1, B=10, alpha=0.05, d=1000
    GaussianThreshold g = gaussian_threshold_detail(1.0, 10, 0.05, 1000);
    CHECK(g.delta == doctest::Approx(0.0076009).epsilon(1e-4));
    CHECK(g.zeta == doctest::Approx(1.91358).epsilon(1e-5));
    CHECK(!g.clamped);

    // delta -> 0 limit: zeta -> 2 + tau
    CHECK(gaussian_threshold(1.0, 2, 0.5, 100000000) == doctest::Approx(3.0).epsilon(1e-3));

    // degenerate clamp: 4 sqrt(delta) >= sqrt(2 + tau)
    GaussianThreshold clamped = gaussian_threshold_detail(0.1, 1000, 0.01, 10);
    CHECK(clamped.zeta == 0.0);
    CHECK(clamped.clamped);

    CHECK_THROWS_AS(gaussian_threshold(1.0, 10, 1.5, 100), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_threshold(1.0, 10, 0.0, 100), std::invalid_argument);
}

TEST_CASE("gaussian graph construction") {
    SUBCASE("identical estimates give the complete graph") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 3);
        NeighborGraph g = build_neighbor_graph_gaussian(x, 0.5, 7);
        CHECK(g.adj.cast<int>().sum() == 16);
    }
    SUBCASE("zeta = 0 with distinct estimates gives the identity graph") {
        Eigen::MatrixXd x(3, 2);
        x << 0, 0, 1, 0, 0, 1;
        NeighborGraph g = build_neighbor_graph_gaussian(x, 0.0, 1);
        CHECK(g.adj.cast<int>().sum() == 3);
        for (int i = 0; i < 3; ++i) CHECK(g.edge(i, i));
    }
    SUBCASE("hand-placed distances against the threshold") {
        // three collinear points with pairwise squared distances {1, 4, 9}
        Eigen::MatrixXd x(3, 1);
        x << 0, 1, 3;
        // zeta d / N = 4 with d = 1, N chosen via zeta = 4, N = 1
        NeighborGraph g = build_neighbor_graph_gaussian(x, 4.0, 1);
        CHECK(g.edge(0, 1));   // 1 <= 4
        CHECK(g.edge(1, 2));   // 4 <= 4 (non-strict)
        CHECK(!g.edge(0, 2));  // 9 > 4
        CHECK(g.symmetric());
    }
}

TEST_CASE("kme graph construction") {
    KernelSpec lin = KernelSpec::linear();
    SUBCASE("identical noisy bags are mutual neighbors for moderate zeta") {
        Rng rng(3);
        Bag proto = random_bag(rng, "p", 6, 2);
        std::vector<Bag> bags;
        for (int i = 0; i < 4; ++i) bags.emplace_back("b" + std::to_string(i), proto.samples);
        NeighborGraph g = build_neighbor_graph_kme(bags, lin, 0.5);
        // exact copies: U_ij = 0 < zeta sigma2 whenever sigma2 > 0
        CHECK(g.adj.cast<int>().sum() == 16);
    }
    SUBCASE("zeta = 0 gives the identity graph (strict test)") {
        Rng rng(4);
        std::vector<Bag> bags{random_bag(rng, "a", 5, 2), random_bag(rng, "b", 5, 2)};
        NeighborGraph g = build_neighbor_graph_kme(bags, lin, 0.0);
        CHECK(g.adj.cast<int>().sum() == 2);
    }
    SUBCASE("constant bags trust only themselves") {
        Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(2, 2);
        Eigen::MatrixXd sb = Eigen::MatrixXd::Ones(2, 2);
        std::vector<Bag> bags{Bag("a", sa), Bag("b", sb)};
        NeighborGraph g = build_neighbor_graph_kme(bags, lin, 10.0);
        CHECK(g.edge(0, 0));
        CHECK(g.edge(1, 1));
        CHECK(!g.edge(0, 1));
        CHECK(!g.edge(1, 0));
    }
    SUBCASE("asymmetry is possible and diagonal forced") {
        Rng rng(5);
        // tight bag far from a loose bag: U is large and positive, so only the
        // loose row (large sigma2) accepts the other task
        Bag tight = random_bag(rng, "t", 8, 2);
        tight.samples *= 0.01;
        tight.samples.array() += 10.0;
        Bag loose = random_bag(rng, "l", 8, 2);
        loose.samples *= 5.0;
        std::vector<Bag> bags{tight, loose};
        NeighborGraph g = build_neighbor_graph_kme(bags, lin, 50.0);
        CHECK(g.edge(0, 0));
        CHECK(g.edge(1, 1));
        CHECK(!g.edge(0, 1));  // tight row: threshold ~ zeta * 1e-4
        CHECK(g.edge(1, 0));   // loose row: threshold well above U
    }
}

TEST_CASE("graph monotonicity in zeta") {
    Rng rng(17);
    SUBCASE("gaussian mode") {
        Eigen::MatrixXd x(8, 3);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 3; ++j) x(i, j) = rng.normal() * 2.0;
        NeighborGraph g1 = build_neighbor_graph_gaussian(x, 0.7, 2);
        NeighborGraph g2 = build_neighbor_graph_gaussian(x, 1.9, 2);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                if (g1.edge(i, j)) CHECK(g2.edge(i, j));
        CHECK(g1.symmetric());
        CHECK(g2.symmetric());
    }
    SUBCASE("kme mode") {
        std::vector<Bag> bags;
        for (int i = 0; i < 6; ++i) bags.push_back(random_bag(rng, "b" + std::to_string(i), 6, 2));
        NeighborGraph g1 = build_neighbor_graph_kme(bags, KernelSpec::rbf(1.0), 0.4);
        NeighborGraph g2 = build_neighbor_graph_kme(bags, KernelSpec::rbf(1.0), 1.7);
        for (int i = 0; i < 6; ++i) {
            CHECK(g1.edge(i, i));
            for (int j = 0; j < 6; ++j)
                if (g1.edge(i, j)) CHECK(g2.edge(i, j));
        }
    }
}

TEST_CASE("family-wise error calibration where the threshold premise holds") {
    // B=10, alpha=0.1, d=4000, tau=2: tau >= max(C delta, sqrt(C delta))
    const int B = 10, d = 4000, runs = 400;
    const double alpha = 0.1, tau = 2.0;
    GaussianThreshold gt = gaussian_threshold_detail(tau, B, alpha, d);
    REQUIRE(gt.premise_ok);
    const double sb2 = static_cast<double>(d);

    std::vector<std::uint8_t> fp(runs), fn(runs);
    parallel_for(runs, 2, [&](std::int64_t r) {
        fp[std::size_t(r)] = run_gaussian_tests_any_accepted(
                                 Rng::stream_seed(2024, 1, std::uint64_t(r), 0), B, d,
                                 tau * sb2, gt.zeta)
                                 ? 1
                                 : 0;
        fn[std::size_t(r)] = run_gaussian_tests_all_accepted(
                                 Rng::stream_seed(2024, 2, std::uint64_t(r), 0), B, d,
                                 (tau / 3.0) * sb2, gt.zeta)
                                 ? 0
                                 : 1;
    });
    double fp_rate = 0.0, fn_rate = 0.0;
    for (int r = 0; r < runs; ++r) {
        fp_rate += fp[std::size_t(r)];
        fn_rate += fn[std::size_t(r)];
    }
    fp_rate /= runs;
    fn_rate /= runs;
    const double slack = 3.0 * std::sqrt(alpha * (1.0 - alpha) / runs);
    CHECK(fp_rate <= alpha + slack);
    CHECK(fn_rate <= alpha + slack);
}

}  // TEST_SUITE

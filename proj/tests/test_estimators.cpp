#include <doctest.h>

#include <cmath>

#include "mtavg/estimators.hpp"
#include "mtavg/rng.hpp"

using namespace mtavg;

namespace {

Bag random_bag(Rng& rng, const std::string& id, int n, int d) {
    Eigen::MatrixXd s(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) s(i, j) = rng.normal();
    return Bag(id, s);
}

NeighborGraph graph_from(const Eigen::MatrixXi& m) {
    NeighborGraph g;
    g.adj = m.cast<std::uint8_t>();
    return g;
}

void check_row_stochastic(const WeightMatrix& w) {
    Eigen::VectorXd sums = w.values.rowwise().sum();
    for (Eigen::Index i = 0; i < sums.size(); ++i)
        CHECK(std::abs(sums(i) - 1.0) <= 1e-10);
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("stb weights") {
    SUBCASE("lone bag reduces to NE under stb0") {
        Eigen::MatrixXi adj(2, 2);
        adj << 1, 0, 0, 1;
        WeightMatrix w = stb_weights(graph_from(adj), ShrinkageMode::stb_zero());
        CHECK(w.values.isApprox(Eigen::MatrixXd::Identity(2, 2)));
    }
    SUBCASE("gamma = 1 keeps the naive estimator regardless of the graph") {
        Eigen::MatrixXi adj = Eigen::MatrixXi::Ones(3, 3);
        WeightMatrix w = stb_weights(graph_from(adj), ShrinkageMode::stb_weight(1.0));
        CHECK(w.values.isApprox(Eigen::MatrixXd::Identity(3, 3)));
    }
    SUBCASE("theory gamma hand value: c zeta = 0.5, |V| = 5") {
        Eigen::MatrixXi adj = Eigen::MatrixXi::Ones(5, 5);
        WeightMatrix w = stb_weights(graph_from(adj), ShrinkageMode::stb_theory(0.5, 1.0));
        // gamma = 0.5*4 / (1.5*4 + 1) = 2/7; w_ii = 2/7 + (5/7)/5 = 3/7
        CHECK(w.values(0, 0) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
        CHECK(w.values(0, 1) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
        check_row_stochastic(w);
    }
    SUBCASE("row stochastic on random graphs, all modes") {
        Rng rng(11);
        for (int rep = 0; rep < 20; ++rep) {
            const int b = 2 + int(rng.below(6));
            Eigen::MatrixXi adj(b, b);
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < b; ++j) adj(i, j) = i == j ? 1 : int(rng.below(2));
            for (const ShrinkageMode& mode :
                 {ShrinkageMode::stb_zero(), ShrinkageMode::stb_weight(rng.uniform()),
                  ShrinkageMode::stb_theory(0.25 + rng.uniform(), rng.uniform() * 3.0)}) {
                check_row_stochastic(stb_weights(graph_from(adj), mode));
            }
        }
    }
    SUBCASE("graph without diagonal is rejected") {
        Eigen::MatrixXi adj(2, 2);
        adj << 0, 1, 1, 1;
        CHECK_THROWS_AS(stb_weights(graph_from(adj), ShrinkageMode::stb_zero()),
                        std::invalid_argument);
    }
}

TEST_CASE("theory gamma range and monotonicity") {
    for (double tau_hat : {0.05, 0.3, 1.0, 4.0}) {
        double prev = -1.0;
        for (int v = 0; v <= 40; ++v) {
            const double g = stb_theory_gamma(tau_hat, v);
            CHECK(g >= 0.0);
            CHECK(g < tau_hat / (1.0 + tau_hat));
            CHECK(g >= prev);
            prev = g;
        }
    }
}

TEST_CASE("rkmse weights") {
    SUBCASE("constant bag gets weight 1") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Ones(3, 2) * 2.0;
        std::vector<Bag> bags{Bag("c", s)};
        WeightMatrix w = rkmse_weights(bags, KernelSpec::rbf(1.0));
        CHECK(w.values(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("rbf hand value on {(0,0),(2,0)}, width 1") {
        Eigen::MatrixXd s(2, 2);
        s << 0, 0, 2, 0;
        std::vector<Bag> bags{Bag("b", s)};
        WeightMatrix w = rkmse_weights(bags, KernelSpec::rbf(1.0));
        // rho_diag = 1, rho = (2 + 2 e^-2)/4, weight = 1/(1 + lambda) = e^-2
        CHECK(w.values(0, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
    }
    SUBCASE("weights stay in (0, 1] on random rbf bags") {
        Rng rng(21);
        std::vector<Bag> bags;
        for (int i = 0; i < 8; ++i) bags.push_back(random_bag(rng, "b" + std::to_string(i), 5, 2));
        WeightMatrix w = rkmse_weights(bags, KernelSpec::rbf(0.9));
        for (int i = 0; i < 8; ++i) {
            CHECK(w.values(i, i) > 0.0);
            CHECK(w.values(i, i) <= 1.0);
            for (int j = 0; j < 8; ++j)
                if (i != j) CHECK(w.values(i, j) == 0.0);
        }
    }
    SUBCASE("degenerate linear-kernel bag reports an error") {
        Eigen::MatrixXd s(2, 1);
        s << 1.0, -0.5;  // negative off-diagonal Gram, denominator < 0
        std::vector<Bag> bags{Bag("d", s)};
        CHECK_THROWS_AS(rkmse_weights(bags, KernelSpec::linear()), std::domain_error);
    }
}

TEST_CASE("mta weights") {
    SUBCASE("gamma = 0 gives the identity") {
        Eigen::VectorXd mse = Eigen::VectorXd::Ones(4);
        Eigen::MatrixXd a = Eigen::MatrixXd::Ones(4, 4);
        CHECK(mta_weight_matrix(mse, a, 0.0).isApprox(Eigen::MatrixXd::Identity(4, 4)));
    }
    SUBCASE("2x2 hand inverse") {
        // I + [[1,-1],[-1,1]] -> W = (1/3) [[2,1],[1,2]]
        Eigen::VectorXd mse = Eigen::VectorXd::Ones(2);
        Eigen::MatrixXd a(2, 2);
        a << 0, 1, 1, 0;
        Eigen::MatrixXd w = mta_weight_matrix(mse, a, 2.0);  // gamma/B = 1
        Eigen::MatrixXd expect(2, 2);
        expect << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
        CHECK(w.isApprox(expect, 1e-12));
    }
    SUBCASE("rows sum to one") {
        Rng rng(31);
        for (int rep = 0; rep < 10; ++rep) {
            const int b = 3 + int(rng.below(5));
            Eigen::VectorXd mse(b);
            for (int i = 0; i < b; ++i) mse(i) = 0.1 + rng.uniform();
            Eigen::MatrixXd a(b, b);
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < b; ++j) a(i, j) = rng.below(2) ? 1.0 : 0.0;
            Eigen::MatrixXd w = mta_weight_matrix(mse, a, std::pow(2.0, double(rep) - 3.0));
            Eigen::VectorXd sums = w.rowwise().sum();
            for (int i = 0; i < b; ++i) CHECK(std::abs(sums(i) - 1.0) <= 1e-10);
        }
    }
    SUBCASE("consensus limit: row variance decreases monotonically in gamma") {
        Rng rng(41);
        std::vector<Bag> bags;
        for (int i = 0; i < 6; ++i) bags.push_back(random_bag(rng, "b" + std::to_string(i), 6, 2));
        double prev = std::numeric_limits<double>::infinity();
        for (double gamma : {0.25, 4.0, 64.0, 1024.0, 16384.0, 2.62144e5, 4.194304e6, 6.7108864e7}) {
            WeightMatrix w = mta_weights(bags, KernelSpec::rbf(1.0), gamma,
                                         MtaSimilarity::constant);
            // dispersion of the rows around their average
            Eigen::RowVectorXd mean_row = w.values.colwise().mean();
            double dev = (w.values.rowwise() - mean_row).squaredNorm();
            CHECK(dev <= prev + 1e-12);
            prev = dev;
        }
        CHECK(prev <= 1e-4);  // near-consensus at large gamma
    }
    SUBCASE("graph similarity uses the adjacency") {
        Rng rng(51);
        std::vector<Bag> bags;
        for (int i = 0; i < 4; ++i) bags.push_back(random_bag(rng, "b" + std::to_string(i), 5, 2));
        NeighborGraph g;
        g.adj.setZero(4, 4);
        for (int i = 0; i < 4; ++i) g.adj(i, i) = 1;
        g.adj(0, 1) = g.adj(1, 0) = 1;
        WeightMatrix w = mta_weights(bags, KernelSpec::rbf(1.0), 3.0, MtaSimilarity::graph, &g);
        // bags 2, 3 are isolated apart from the self-loop: rows stay near e_i
        CHECK(w.values(2, 0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(w.values(3, 1) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK_THROWS_AS(mta_weights(bags, KernelSpec::rbf(1.0), 3.0, MtaSimilarity::graph),
                        std::invalid_argument);
    }
}

TEST_CASE("pp james-stein") {
    SUBCASE("positive-part clamp") {
        Eigen::MatrixXd muhats(1, 3);
        muhats << 0.5, 0.0, 0.0;  // ||mu||^2 = 0.25 <= (d-2) sigma2 = 1
        Eigen::MatrixXd out = pp_james_stein(muhats, 1.0);
        CHECK(out.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("hand value d=3, sigma2=1, mu=(2,0,0)") {
        Eigen::MatrixXd muhats(1, 3);
        muhats << 2, 0, 0;
        Eigen::MatrixXd out = pp_james_stein(muhats, 1.0);
        CHECK(out(0, 0) == doctest::Approx(1.5));
        CHECK(out(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("noiseless limit returns the input") {
        Eigen::MatrixXd muhats(2, 4);
        muhats << 1, 2, 3, 4, -1, 0, 2, 1;
        Eigen::MatrixXd out = pp_james_stein(muhats, 1e-12);
        CHECK(out.isApprox(muhats, 1e-9));
    }
    SUBCASE("zero estimate maps to zero") {
        Eigen::MatrixXd muhats = Eigen::MatrixXd::Zero(1, 5);
        CHECK(pp_james_stein(muhats, 1.0).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("dimension below 3 rejected") {
        CHECK_THROWS_AS(pp_james_stein(Eigen::MatrixXd::Zero(1, 2), 1.0),
                        std::invalid_argument);
    }
    SUBCASE("custom shrinkage target") {
        Eigen::MatrixXd muhats(1, 3);
        muhats << 3, 0, 0;
        Eigen::VectorXd target(3);
        target << 1, 0, 0;
        Eigen::MatrixXd out = pp_james_stein(muhats, 1.0, target);
        // factor (1 - 1/4) applied to (muhat - target)
        CHECK(out(0, 0) == doctest::Approx(1.0 + 0.75 * 2.0));
    }
}

TEST_CASE("apply_weights") {
    Eigen::MatrixXd muhats(3, 2);
    muhats << 1, 0, 0, 1, 2, 2;
    SUBCASE("identity") {
        WeightMatrix w{Eigen::MatrixXd::Identity(3, 3), Method::ne};
        CHECK(apply_weights(w, muhats).isApprox(muhats));
    }
    SUBCASE("uniform average over two tasks") {
        WeightMatrix w{Eigen::MatrixXd::Zero(2, 2), Method::stb0};
        w.values << 0.5, 0.5, 0.5, 0.5;
        Eigen::MatrixXd two = muhats.topRows(2);
        Eigen::MatrixXd out = apply_weights(w, two);
        CHECK(out(0, 0) == doctest::Approx(0.5));
        CHECK(out(0, 1) == doctest::Approx(0.5));
    }
    SUBCASE("stb0 row over three unit vectors") {
        Eigen::MatrixXd e = Eigen::MatrixXd::Identity(3, 3);
        WeightMatrix w{Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0), Method::stb0};
        Eigen::MatrixXd out = apply_weights(w, e);
        for (int j = 0; j < 3; ++j) CHECK(out(0, j) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("shape mismatch") {
        WeightMatrix w{Eigen::MatrixXd::Identity(2, 2), Method::ne};
        CHECK_THROWS_AS(apply_weights(w, muhats), std::invalid_argument);
    }
}

TEST_CASE("theorem-style factor sanity on a tau grid") {
    // the indep factor decreases to tau/(1+tau) as neighborhoods grow
    for (double tau : {0.05, 0.2, 1.0}) {
        double prev = 1.0;
        for (int v = 0; v <= 200; ++v) {
            const double f = (tau * v + 1.0) / ((1.0 + tau) * v + 1.0);
            if (v == 0) CHECK(f == doctest::Approx(1.0));
            CHECK(f <= prev);
            prev = f;
        }
        CHECK(prev == doctest::Approx(tau / (1.0 + tau)).epsilon(0.05));
    }
}

}  // TEST_SUITE

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mtavg/datagen.hpp"
#include "mtavg/io.hpp"
#include "mtavg/rng.hpp"

using namespace mtavg;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("bag csv grouping") {
    TempFile f("mtavg_grouping.csv");
    {
        std::ofstream out(f.path);
        out << "bag_id,f0,f1\n";
        out << "a,1,2\n";
        out << "b,5,6\n";  // interleaved: still groupable by id
        out << "a,3,4\n";
        out << "b,7,8\n";
        out << "b,9,10\n";
    }
    std::vector<Bag> bags = load_bags_csv(f.path);
    REQUIRE(bags.size() == 2);
    CHECK(bags[0].id == "a");
    CHECK(bags[0].size() == 2);
    CHECK(bags[1].size() == 3);
    // within-bag row order preserved
    CHECK(bags[0].samples(0, 0) == 1.0);
    CHECK(bags[0].samples(1, 0) == 3.0);
    CHECK(bags[1].samples(2, 1) == 10.0);
}

TEST_CASE("single row file gives one size-1 bag") {
    TempFile f("mtavg_single.csv");
    {
        std::ofstream out(f.path);
        out << "bag_id,f0\n";
        out << "only,42.5\n";
    }
    std::vector<Bag> bags = load_bags_csv(f.path);
    REQUIRE(bags.size() == 1);
    CHECK(bags[0].size() == 1);
    CHECK(bags[0].samples(0, 0) == 42.5);
}

TEST_CASE("csv error paths") {
    SUBCASE("ragged row") {
        TempFile f("mtavg_ragged.csv");
        {
            std::ofstream out(f.path);
            out << "bag_id,f0,f1\n";
            out << "a,1\n";
        }
        CHECK_THROWS(load_bags_csv(f.path));
    }
    SUBCASE("non-numeric cell") {
        TempFile f("mtavg_nonnum.csv");
        {
            std::ofstream out(f.path);
            out << "bag_id,f0\n";
            out << "a,oops\n";
        }
        CHECK_THROWS(load_bags_csv(f.path));
    }
    SUBCASE("empty file") {
        TempFile f("mtavg_empty.csv");
        { std::ofstream out(f.path); }
        CHECK_THROWS(load_bags_csv(f.path));
    }
    SUBCASE("header only") {
        TempFile f("mtavg_header.csv");
        {
            std::ofstream out(f.path);
            out << "bag_id,f0\n";
        }
        CHECK_THROWS(load_bags_csv(f.path));
    }
}

TEST_CASE("write-then-read roundtrip is bit identical") {
    ToyData data = gen_toy(ToySetup{ToyKind::num_bags, 8, 11, 0.0}, 77);
    TempFile f("mtavg_roundtrip.csv");
    save_bags_csv(f.path, data.bags);
    std::vector<Bag> back = load_bags_csv(f.path);
    REQUIRE(back.size() == data.bags.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == data.bags[i].id);
        CHECK(back[i].samples == data.bags[i].samples);  // exact
    }
}

TEST_CASE("standardize") {
    SUBCASE("pooled hand value: feature {0, 2} maps to {-1, 1}") {
        Eigen::MatrixXd a(1, 1), b(1, 1);
        a << 0;
        b << 2;
        std::vector<Bag> bags{Bag("a", a), Bag("b", b)};
        standardize(bags);
        CHECK(bags[0].samples(0, 0) == doctest::Approx(-1.0));
        CHECK(bags[1].samples(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("postconditions on random data") {
        Rng rng(88);
        std::vector<Bag> bags;
        for (int i = 0; i < 5; ++i) {
            Eigen::MatrixXd s(10 + i, 3);
            for (Eigen::Index r = 0; r < s.rows(); ++r)
                for (int c = 0; c < 3; ++c) s(r, c) = 2.0 + 3.0 * rng.normal();
            bags.emplace_back("b" + std::to_string(i), s);
        }
        standardize(bags);
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(3);
        Eigen::RowVectorXd sumsq = Eigen::RowVectorXd::Zero(3);
        double n = 0;
        for (const Bag& b : bags) {
            sum += b.samples.colwise().sum();
            sumsq += b.samples.array().square().colwise().sum().matrix();
            n += double(b.size());
        }
        for (int c = 0; c < 3; ++c) {
            CHECK(std::abs(sum(c) / n) <= 1e-10);
            CHECK(std::abs(std::sqrt(sumsq(c) / n) - 1.0) <= 1e-10);
        }
        // idempotent within tolerance
        std::vector<Bag> again = bags;
        standardize(again);
        for (std::size_t i = 0; i < bags.size(); ++i)
            CHECK((again[i].samples - bags[i].samples).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("zero-variance feature names the column") {
        Eigen::MatrixXd s(3, 2);
        s << 1, 7, 2, 7, 3, 7;
        std::vector<Bag> bags{Bag("a", s)};
        try {
            standardize(bags);
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("f1") != std::string::npos);
        }
    }
}

TEST_CASE("average feature stddev pools all bags") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0, 0, 2, 0;
    b << 0, 4, 2, 4;
    std::vector<Bag> bags{Bag("a", a), Bag("b", b)};
    // pooled feature 0: {0,2,0,2} std 1; feature 1: {0,0,4,4} std 2
    CHECK(average_feature_stddev(bags) == doctest::Approx(1.5));
}

}  // TEST_SUITE

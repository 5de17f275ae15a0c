#include "inslab/csv.hpp"
#include "inslab/rng.hpp"
#include "inslab/types.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace inslab;

TEST_CASE("split_rng: identical labels replay, distinct labels decorrelate") {
    // (seed=1, "env") twice: identical sequences.
    RngStream a = split_rng(RngStream(1), "env");
    RngStream b = split_rng(RngStream(1), "env");
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // (seed=1, "env") vs (seed=1, "model"): |sample correlation| < 0.05 on
    // 1e4 standard-normal draws.
    RngStream env = split_rng(RngStream(1), "env");
    RngStream model = split_rng(RngStream(1), "model");
    std::vector<double> xs, ys;
    for (int i = 0; i < 10000; ++i) {
        xs.push_back(env.normal());
        ys.push_back(model.normal());
    }
    CHECK(std::abs(oracles::sample_corr(xs, ys)) < 0.05);

    // (seed=1, "env") vs (seed=2, "env"): different sequences.
    RngStream s1 = split_rng(RngStream(1), "env");
    RngStream s2 = split_rng(RngStream(2), "env");
    bool all_equal = true;
    for (int i = 0; i < 16; ++i)
        if (s1.next_u64() != s2.next_u64()) all_equal = false;
    CHECK_FALSE(all_equal);

    CHECK_THROWS(split_rng(RngStream(1), ""));
}

TEST_CASE("rng basic distributional sanity") {
    RngStream rng(42);
    std::vector<double> normals;
    for (int i = 0; i < 100000; ++i) normals.push_back(rng.normal());
    double mean = 0;
    for (double x : normals) mean += x;
    mean /= static_cast<double>(normals.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(oracles::sample_var(normals) == doctest::Approx(1.0).epsilon(0.02));

    // uniform_int covers its range.
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[rng.uniform_int(7)];
    for (int c : counts) CHECK(c > 800);
}

TEST_CASE("dataset push: growth, order, dimension mismatch") {
    Dataset ds;
    TransitionRecord rec{{1.0, 2.0}, 0, {1.5, 2.5}, -1.0, false};
    ds = dataset_push(std::move(ds), rec);
    CHECK(ds.size() == 1);

    for (int i = 0; i < 2; ++i) {
        rec.reward = i;
        ds.push(rec);
    }
    CHECK(ds.size() == 3);
    Dataset grown = dataset_push(ds, rec);
    CHECK(grown.size() == 4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(grown[i].reward == ds[i].reward);

    TransitionRecord bad{{1.0, 2.0, 3.0}, 0, {1.0, 2.0, 3.0}, 0.0, false};
    CHECK_THROWS_WITH_AS(ds.push(bad), doctest::Contains("does not match dataset dim"),
                         std::invalid_argument);
}

TEST_CASE("dataset FIFO capacity") {
    Dataset ds(Dataset::Provenance::environment, 3);
    for (int i = 0; i < 5; ++i)
        ds.push(TransitionRecord{{double(i)}, 0, {double(i + 1)}, 0.0, false});
    CHECK(ds.size() == 3);
    CHECK(ds[0].state[0] == 2.0);
}

TEST_CASE("correlation matrix: validation and repair") {
    CHECK(CorrelationMatrix::identity(3).is_identity());

    Eigen::MatrixXd ok(2, 2);
    ok << 1.0, 0.5, 0.5, 1.0;
    CHECK(CorrelationMatrix::from_entries(ok)(0, 1) == 0.5);

    Eigen::MatrixXd bad_diag(2, 2);
    bad_diag << 1.1, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(CorrelationMatrix::from_entries(bad_diag), std::invalid_argument);

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.4, 0.2, 1.0;
    CHECK_THROWS_AS(CorrelationMatrix::from_entries(asym), std::invalid_argument);

    Eigen::MatrixXd off(2, 2);
    off << 1.0, 1.4, 1.4, 1.0;
    CHECK_THROWS_AS(CorrelationMatrix::from_entries(off), std::invalid_argument);

    // Materially indefinite: rho pattern violating PSD by much more than 1e-9.
    Eigen::MatrixXd indef(3, 3);
    indef << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    CHECK_THROWS_AS(CorrelationMatrix::from_entries(indef), std::invalid_argument);

    // Boundary case within the repairable band keeps unit diagonal and PSD.
    Eigen::MatrixXd boundary(2, 2);
    const double rho = 1.0 - 1e-13;
    boundary << 1.0, rho, rho, 1.0;
    const auto repaired = CorrelationMatrix::from_entries(boundary);
    CHECK(repaired(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(repaired.entries());
    CHECK(es.eigenvalues().minCoeff() >= -1e-15);
}

TEST_CASE("gaussian prediction implied covariance is D Gamma D") {
    Eigen::MatrixXd corr(2, 2);
    corr << 1.0, 0.5, 0.5, 1.0;
    GaussianPrediction pred{{0.0, 0.0}, {1.0, 2.0}, CorrelationMatrix::from_entries(corr)};
    const auto cov = pred.covariance();
    CHECK(cov(0, 0) == doctest::Approx(1.0));
    CHECK(cov(1, 1) == doctest::Approx(4.0));
    CHECK(cov(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("dataset CSV round-trips with 17 significant digits") {
    Dataset ds;
    RngStream rng(3);
    for (int i = 0; i < 25; ++i) {
        ds.push(TransitionRecord{{rng.normal(), rng.normal() * 1e-7},
                                 static_cast<ActionId>(rng.uniform_int(2)),
                                 {rng.normal() * 1e9, rng.normal()},
                                 rng.normal(),
                                 rng.uniform() < 0.2});
    }
    std::stringstream ss;
    write_dataset_csv(ss, ds);
    const std::string first_line = ss.str().substr(0, ss.str().find('\n'));
    CHECK(first_line == "s0,s1,a,sp0,sp1,r,done");
    const Dataset back = read_dataset_csv(ss, Dataset::Provenance::environment);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back[i].state == ds[i].state);          // bit-exact round trip
        CHECK(back[i].next_state == ds[i].next_state);
        CHECK(back[i].reward == ds[i].reward);
        CHECK(back[i].action == ds[i].action);
        CHECK(back[i].terminal == ds[i].terminal);
    }
}

TEST_CASE("csv writer emits header and rejects ragged rows") {
    CsvWriter csv({"a", "b"});
    csv.add_row(std::vector<double>{1.0, 2.0});
    CHECK(csv.str() == "a,b\n1,2\n");
    CHECK_THROWS_AS(csv.add_row(std::vector<double>{1.0}), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "seqfeat/errors.hpp"
#include "seqfeat/predict.hpp"
#include "seqfeat/rng.hpp"

using namespace seqfeat;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int n, int k, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd x(n, k);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    return x;
}

FeatureMatrix make_features(const MatrixXd& values, const std::string& prefix) {
    FeatureMatrix m;
    m.values = values;
    for (long i = 0; i < values.rows(); ++i) m.subject_ids.push_back("s" + std::to_string(i));
    m.column_names = numbered_columns(prefix, static_cast<int>(values.cols()));
    return m;
}

} // namespace

TEST_CASE("ridge at lambda 0 matches the normal-equations oracle") {
    const MatrixXd x = random_matrix(40, 5, 1);
    Rng rng(2);
    VectorXd y(40);
    for (int i = 0; i < 40; ++i) y(i) = 2.0 * x(i, 0) - x(i, 3) + 0.5 + 0.2 * rng.normal();

    const RidgeGlm model = fit_ridge(x, y, Family::gaussian, 0.0);

    MatrixXd design(40, 6);
    design.col(0) = VectorXd::Ones(40);
    design.rightCols(5) = x;
    const VectorXd beta = (design.transpose() * design).ldlt().solve(design.transpose() * y);

    CHECK(std::abs(model.intercept - beta(0)) < 1e-8);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(model.coef(j) - beta(j + 1)) < 1e-8);
}

TEST_CASE("huge penalties shrink to the null model") {
    SUBCASE("gaussian predictions collapse to the train mean") {
        const MatrixXd x = random_matrix(30, 3, 5);
        Rng rng(6);
        VectorXd y(30);
        for (int i = 0; i < 30; ++i) y(i) = x(i, 0) + rng.normal();
        const RidgeGlm model = fit_ridge(x, y, Family::gaussian, 1e9);
        CHECK(model.coef.lpNorm<Eigen::Infinity>() < 1e-6);
        const VectorXd pred = model.predict(x);
        for (int i = 0; i < 30; ++i) CHECK(std::abs(pred(i) - y.mean()) < 1e-4);
    }
    SUBCASE("binomial predictions collapse to the base rate") {
        const MatrixXd x = random_matrix(40, 2, 7);
        VectorXd y(40);
        for (int i = 0; i < 40; ++i) y(i) = i < 28 ? 1.0 : 0.0; // base rate 0.7
        const RidgeGlm model = fit_ridge(x, y, Family::binomial, 1e9);
        const VectorXd p = model.predict(x);
        for (int i = 0; i < 40; ++i) CHECK(std::abs(p(i) - 0.7) < 1e-3);
    }
}

TEST_CASE("binomial fit on a 1-D threshold gives monotone probabilities") {
    MatrixXd x(20, 1);
    VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = static_cast<double>(i);
        y(i) = i >= 10 ? 1.0 : 0.0;
    }
    const RidgeGlm model = fit_ridge(x, y, Family::binomial, 0.1);
    const VectorXd p = model.predict(x);
    for (int i = 1; i < 20; ++i) CHECK(p(i) >= p(i - 1));
}

TEST_CASE("gaussian solution satisfies the stationarity condition on standardized scale") {
    // Pre-standardize so reported coefficients are already on that scale.
    MatrixXd x = random_matrix(60, 4, 9);
    x.rowwise() -= x.colwise().mean();
    for (int j = 0; j < 4; ++j) x.col(j) /= std::sqrt(x.col(j).squaredNorm() / 60.0);
    Rng rng(10);
    VectorXd y(60);
    for (int i = 0; i < 60; ++i) y(i) = x(i, 1) + 0.3 * rng.normal();

    const double lambda = 0.05;
    const RidgeGlm model = fit_ridge(x, y, Family::gaussian, lambda);
    const VectorXd resid = model.predict(x) - y;
    const VectorXd grad = x.transpose() * resid / 60.0 + 2.0 * lambda * model.coef;
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("zero-variance features are dropped and recorded") {
    MatrixXd x = random_matrix(20, 3, 11);
    x.col(1).setConstant(4.2);
    Rng rng(12);
    VectorXd y(20);
    for (int i = 0; i < 20; ++i) y(i) = x(i, 0) + rng.normal();
    const RidgeGlm model = fit_ridge(x, y, Family::gaussian, 0.01);
    CHECK(model.dropped == std::vector<int>{1});
    CHECK(model.coef(1) == 0.0);
    CHECK(model.predict(x).allFinite());
}

TEST_CASE("select_penalty picks the smallest lambda when validating on the training data") {
    const MatrixXd x = random_matrix(50, 4, 13);
    Rng rng(14);
    VectorXd y(50);
    for (int i = 0; i < 50; ++i) y(i) = x(i, 0) - x(i, 2) + 0.1 * rng.normal();
    const std::vector<double> grid{1.0, 0.1, 0.0};
    CHECK(select_penalty(x, y, x, y, Family::gaussian, grid) == 0.0);
}

TEST_CASE("select_penalty: single-element grid returns that element") {
    const MatrixXd x = random_matrix(20, 2, 15);
    Rng rng(16);
    VectorXd y(20);
    for (int i = 0; i < 20; ++i) y(i) = rng.normal();
    CHECK(select_penalty(x, y, x, y, Family::gaussian, {0.37}) == 0.37);
}

TEST_CASE("pure-noise targets select a large penalty on >= 90% of seeds") {
    int in_top_decade = 0;
    const int n_seeds = 50;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const MatrixXd x = random_matrix(300, 15, 100 + static_cast<std::uint64_t>(seed));
        Rng rng(200 + static_cast<std::uint64_t>(seed));
        VectorXd y(300);
        for (int i = 0; i < 300; ++i) y(i) = rng.normal();

        // Honest holdout: first 200 train, last 100 validate.
        const MatrixXd x_tr = x.topRows(200);
        const VectorXd y_tr = y.head(200);
        const MatrixXd x_val = x.bottomRows(100);
        const VectorXd y_val = y.tail(100);

        const auto grid = lambda_grid(x_tr, y_tr, Family::gaussian, 50, 1e-4);
        const double chosen = select_penalty(x_tr, y_tr, x_val, y_val, Family::gaussian, grid);
        if (chosen >= grid.front() * 0.1) ++in_top_decade;
    }
    CHECK(in_top_decade >= 45);
}

TEST_CASE("osr oracles and invariances") {
    VectorXd a(5), b(5);
    a << 1, 2, 3, 4, 5;
    b << 2, 1, 4, 3, 7;
    CHECK(osr(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(osr(a, (-a).eval()) == doctest::Approx(-1.0).epsilon(1e-15));
    // Hand computation: covariance sum 12, variance sums 10 and 21.2.
    CHECK(osr(a, b) == doctest::Approx(12.0 / std::sqrt(212.0)).epsilon(1e-12));

    // Positive affine invariance in both arguments.
    const VectorXd b2 = (3.5 * b.array() + 11).matrix();
    CHECK(std::abs(osr(a, b2) - osr(a, b)) < 1e-12);
    const VectorXd a2 = (0.2 * a.array() - 4).matrix();
    CHECK(std::abs(osr(a2, b) - osr(a, b)) < 1e-12);

    const VectorXd constant = VectorXd::Ones(5);
    CHECK_THROWS_AS(osr(a, constant), NumericError);
    VectorXd one(1);
    one << 1.0;
    CHECK_THROWS_AS(osr(one, one), DataError);
}

TEST_CASE("auc oracles and invariances") {
    SUBCASE("perfect separation") {
        VectorXd s(4);
        s << 0.1, 0.2, 0.8, 0.9;
        CHECK(auc({0, 0, 1, 1}, s) == 1.0);
    }
    SUBCASE("all-tied scores give 0.5 via midranks") {
        VectorXd s = VectorXd::Constant(6, 0.3);
        CHECK(auc({1, 0, 1, 0, 1, 0}, s) == 0.5);
    }
    SUBCASE("enumerated four-point case") {
        VectorXd s(4);
        s << 0.9, 0.8, 0.7, 0.1;
        CHECK(auc({1, 0, 1, 0}, s) == 0.75); // 3 concordant of 4 pairs
    }
    SUBCASE("invariant under strictly increasing transforms") {
        Rng rng(3);
        VectorXd s(30);
        std::vector<int> labels;
        for (int i = 0; i < 30; ++i) {
            s(i) = rng.normal();
            labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
        }
        labels[0] = 1;
        labels[1] = 0;
        const double base = auc(labels, s);
        const VectorXd t1 = s.unaryExpr([](double v) { return std::exp(v); });
        const VectorXd t2 = s.unaryExpr([](double v) { return v * v * v + 2.0 * v; });
        CHECK(auc(labels, t1) == doctest::Approx(base).epsilon(1e-15));
        CHECK(auc(labels, t2) == doctest::Approx(base).epsilon(1e-15));
    }
    SUBCASE("one class absent errors") {
        VectorXd s(3);
        s << 1, 2, 3;
        CHECK_THROWS_AS(auc({1, 1, 1}, s), DataError);
    }
}

TEST_CASE("splits are disjoint, exhaustive, and seed-deterministic") {
    for (int n : {10, 100, 2000}) {
        for (int rep = 0; rep < 5; ++rep) {
            SplitPlan plan;
            plan.seed = 7;
            plan.replication = rep;
            const Split s = split_indices(plan, n);
            std::set<int> all;
            for (int i : s.train) all.insert(i);
            for (int i : s.validation) all.insert(i);
            for (int i : s.test) all.insert(i);
            CHECK(static_cast<int>(all.size()) == n); // disjoint + exhaustive
            CHECK(static_cast<int>(s.train.size()) == static_cast<int>(std::floor(0.7 * n)));
            CHECK(static_cast<int>(s.validation.size()) == static_cast<int>(std::floor(0.1 * n)));

            const Split again = split_indices(plan, n);
            CHECK(again.train == s.train);
            CHECK(again.validation == s.validation);
            CHECK(again.test == s.test);
        }
    }
}

TEST_CASE("run_replications learns a noiseless linear target") {
    const MatrixXd x = random_matrix(400, 4, 21);
    const VectorXd y = x * Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
    const PredictionReport report = run_replications(x, y, Family::gaussian, 10, 3);
    CHECK(report.n_defined == 10);
    CHECK(report.mean_metric > 0.999);
}

TEST_CASE("run_replications on an independent target stays near zero") {
    const MatrixXd x = random_matrix(2000, 5, 22);
    Rng rng(23);
    VectorXd y(2000);
    for (int i = 0; i < 2000; ++i) y(i) = rng.normal();
    const PredictionReport report = run_replications(x, y, Family::gaussian, 10, 4);
    CHECK(std::abs(report.mean_metric) < 0.1);
}

TEST_CASE("run_replications is deterministic and audits row usage") {
    const MatrixXd x = random_matrix(200, 3, 31);
    Rng rng(32);
    VectorXd y(200);
    for (int i = 0; i < 200; ++i) y(i) = x(i, 0) + rng.normal();

    struct PhaseRows {
        std::vector<int> fit, select, evaluate;
    };
    std::map<int, PhaseRows> audit;
    PredictionOptions opts;
    opts.observer = [&audit](int rep, const std::string& phase, const std::vector<int>& rows) {
        if (phase == "fit") audit[rep].fit = rows;
        if (phase == "select") audit[rep].select = rows;
        if (phase == "evaluate") audit[rep].evaluate = rows;
    };
    const PredictionReport r1 = run_replications(x, y, Family::gaussian, 5, 77, opts);
    const PredictionReport r2 = run_replications(x, y, Family::gaussian, 5, 77);
    CHECK(r1.per_replication == r2.per_replication);
    CHECK(r1.lambda_chosen == r2.lambda_chosen);

    for (const auto& [rep, rows] : audit) {
        std::set<int> test_rows(rows.evaluate.begin(), rows.evaluate.end());
        // Test rows never reach fitting or penalty selection.
        for (int i : rows.fit) CHECK(!test_rows.count(i));
        for (int i : rows.select) CHECK(!test_rows.count(i));
        CHECK(rows.fit.size() + rows.select.size() + rows.evaluate.size() == 200);
    }
}

TEST_CASE("run_replications binomial reports auc") {
    const MatrixXd x = random_matrix(300, 2, 41);
    Rng rng(42);
    VectorXd y(300);
    for (int i = 0; i < 300; ++i) y(i) = x(i, 0) + 0.5 * rng.normal() > 0.0 ? 1.0 : 0.0;
    const PredictionReport report = run_replications(x, y, Family::binomial, 5, 5);
    CHECK(report.metric_name == "auc");
    CHECK(report.mean_metric > 0.8);
}

TEST_CASE("cumulative prediction") {
    const int n = 600;
    const MatrixXd x1 = random_matrix(n, 3, 51);
    const MatrixXd x2 = random_matrix(n, 3, 52);
    const VectorXd y = x1.col(0) + x2.col(0); // signal split across both items

    const auto f1 = make_features(x1, "item1");
    const auto f2 = make_features(x2, "item2");

    SUBCASE("single item equals run_replications") {
        const auto reports = cumulative_predict({f1}, y, Family::gaussian, 5, 9);
        REQUIRE(reports.size() == 1);
        const PredictionReport direct = run_replications(x1, y, Family::gaussian, 5, 9);
        CHECK(reports[0].per_replication == direct.per_replication);
    }
    SUBCASE("adding the second item's signal raises the metric by > 0.1") {
        const auto reports = cumulative_predict({f1, f2}, y, Family::gaussian, 10, 10);
        REQUIRE(reports.size() == 2);
        CHECK(reports[1].mean_metric - reports[0].mean_metric > 0.1);
    }
    SUBCASE("duplicating a feature set barely moves the metric") {
        const auto reports = cumulative_predict({f1, f1}, y, Family::gaussian, 10, 11);
        CHECK(std::abs(reports[1].mean_metric - reports[0].mean_metric) < 0.05);
    }
    SUBCASE("misaligned subjects error") {
        FeatureMatrix shifted = f2;
        shifted.subject_ids[0] = "other";
        CHECK_THROWS_AS(cumulative_predict({f1, shifted}, y, Family::gaussian, 2, 1), DataError);
    }
}

TEST_CASE("perfect separation errors at lambda 0 but fits under a positive penalty") {
    MatrixXd x(10, 1);
    VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = static_cast<double>(i);
        y(i) = i >= 5 ? 1.0 : 0.0;
    }
    CHECK_THROWS_AS(fit_ridge(x, y, Family::binomial, 0.0), NumericError);
    const RidgeGlm model = fit_ridge(x, y, Family::binomial, 0.1);
    CHECK(model.coef.allFinite());
    CHECK(model.coef(0) > 0.0);
}

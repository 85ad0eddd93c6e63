#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "seqfeat/errors.hpp"
#include "seqfeat/pca.hpp"
#include "seqfeat/pls.hpp"
#include "seqfeat/rng.hpp"

using namespace seqfeat;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FeatureMatrix make_features(const MatrixXd& values) {
    FeatureMatrix m;
    m.values = values;
    for (long i = 0; i < values.rows(); ++i) m.subject_ids.push_back("s" + std::to_string(i));
    m.column_names = numbered_columns("x", static_cast<int>(values.cols()));
    return m;
}

MatrixXd random_matrix(int n, int k, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd x(n, k);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    return x;
}

} // namespace

TEST_CASE("pca aligns the first component with a single varying column") {
    MatrixXd x = MatrixXd::Zero(10, 3);
    for (int i = 0; i < 10; ++i) x(i, 1) = static_cast<double>(i);
    const auto [model, scores] = pca_fit_transform(make_features(x));

    const double cosine = std::abs(model.loadings(1, 0));
    CHECK(cosine > 1.0 - 1e-9);
    CHECK(model.explained_variance(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(model.explained_variance(2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pca reconstruction and loading orthonormality") {
    const MatrixXd x = random_matrix(30, 6, 13);
    const auto [model, scores] = pca_fit_transform(make_features(x));

    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    CHECK((scores.values * model.loadings.transpose() - centered).norm() < 1e-8);

    const MatrixXd gram = model.loadings.transpose() * model.loadings;
    CHECK((gram - MatrixXd::Identity(6, 6)).lpNorm<Eigen::Infinity>() < 1e-9);

    for (int i = 1; i < model.explained_variance.size(); ++i) {
        CHECK(model.explained_variance(i) <= model.explained_variance(i - 1) + 1e-12);
    }
}

TEST_CASE("pca variances match the covariance eigen-oracle on correlated Gaussians") {
    Rng rng(99);
    MatrixXd x(500, 2);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.normal();
        const double b = rng.normal();
        x(i, 0) = a;
        x(i, 1) = 0.8 * a + 0.6 * b;
    }
    const auto [model, scores] = pca_fit_transform(make_features(x));

    // Oracle: eigenvalues of the brute-force sample covariance.
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    const MatrixXd cov = centered.transpose() * centered / (500.0 - 1.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    CHECK(model.explained_variance(0) == doctest::Approx(eig.eigenvalues()(1)).epsilon(1e-8));
    CHECK(model.explained_variance(1) == doctest::Approx(eig.eigenvalues()(0)).epsilon(1e-8));
}

TEST_CASE("pca rejects non-finite input") {
    MatrixXd x = MatrixXd::Zero(3, 2);
    x(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(pca_fit_transform(make_features(x)), DataError);
}

TEST_CASE("pls recovers an exact linear signal in one component") {
    // Exactly independent columns: orthonormalize a centered random matrix.
    MatrixXd raw = random_matrix(40, 4, 7);
    raw.rowwise() -= raw.colwise().mean();
    const MatrixXd x = Eigen::HouseholderQR<MatrixXd>(raw).householderQ() *
                       MatrixXd::Identity(40, 4);
    const VectorXd y = 3.0 * x.col(0).array() + 2.0;
    const PlsModel model = pls_fit(make_features(x), y, 3);

    const VectorXd fitted1 = pls_fitted(model, 1);
    const VectorXd y_c = y.array() - y.mean();
    CHECK((fitted1 - y).norm() / y_c.norm() < 1e-8);
    CHECK(model.rmsep[0] < 1e-8);
    CHECK(one_se_select(model.rmsep) == 1);
}

TEST_CASE("first pls weight is proportional to X'y") {
    const MatrixXd x = random_matrix(25, 5, 3);
    Rng rng(4);
    VectorXd y(25);
    for (int i = 0; i < 25; ++i) y(i) = rng.normal();
    const PlsModel model = pls_fit(make_features(x), y, 4);

    const MatrixXd x_c = x.rowwise() - x.colwise().mean();
    const VectorXd ref = x_c.transpose() * (y.array() - y.mean()).matrix();
    const double cosine = std::abs(model.weights.col(0).dot(ref) /
                                   (model.weights.col(0).norm() * ref.norm()));
    CHECK(cosine > 1.0 - 1e-9);
}

TEST_CASE("full-component pls1 equals least squares (N=20, K=5)") {
    const MatrixXd x = random_matrix(20, 5, 11);
    Rng rng(12);
    VectorXd y(20);
    for (int i = 0; i < 20; ++i) y(i) = x(i, 0) - 0.5 * x(i, 3) + 0.3 * rng.normal();

    const PlsModel model = pls_fit(make_features(x), y, 5);
    REQUIRE(model.scores.cols() == 5);
    const VectorXd pls_hat = pls_fitted(model, 5);

    // OLS oracle via the normal equations on [1, X].
    MatrixXd design(20, 6);
    design.col(0) = VectorXd::Ones(20);
    design.rightCols(5) = x;
    const VectorXd beta =
        (design.transpose() * design).ldlt().solve(design.transpose() * y);
    const VectorXd ols_hat = design * beta;

    CHECK((pls_hat - ols_hat).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("rmsep curve is non-increasing in-sample") {
    const MatrixXd x = random_matrix(50, 8, 21);
    Rng rng(22);
    VectorXd y(50);
    for (int i = 0; i < 50; ++i) y(i) = x(i, 1) + rng.normal();
    const PlsModel model = pls_fit(make_features(x), y, 8);
    for (std::size_t m = 1; m < model.rmsep.size(); ++m) {
        CHECK(model.rmsep[m] <= model.rmsep[m - 1] + 1e-10);
    }
}

TEST_CASE("one-SE rule on fixed curves") {
    SUBCASE("flat curve selects one component") {
        CHECK(one_se_select({0.7, 0.7, 0.7, 0.7}) == 1);
    }
    SUBCASE("hand-evaluated drop curve selects two components") {
        // min 0.48; SE = sd({1.0,.5,.49,.48})/sqrt(4) ~= 0.1276, so 0.5
        // qualifies but 1.0 does not.
        CHECK(one_se_select({1.0, 0.5, 0.49, 0.48}) == 2);
    }
    SUBCASE("single point") { CHECK(one_se_select({1.0}) == 1); }
    SUBCASE("empty curve errors") {
        CHECK_THROWS_AS(one_se_select({}), DataError);
    }
}

TEST_CASE("pls_scores reproduces stored training scores and ignores row offsets") {
    const MatrixXd x = random_matrix(30, 5, 31);
    Rng rng(32);
    VectorXd y(30);
    for (int i = 0; i < 30; ++i) y(i) = x(i, 2) + 0.1 * rng.normal();
    const FeatureMatrix fx = make_features(x);
    const PlsModel model = pls_fit(fx, y, 4);

    const FeatureMatrix scores = pls_scores(model, fx, 4);
    CHECK((scores.values - model.scores.leftCols(4)).lpNorm<Eigen::Infinity>() < 1e-10);

    // Adding a constant to every row is absorbed by centering: a fit on the
    // shifted data produces identical scores.
    FeatureMatrix shifted = fx;
    shifted.values.array() += 5.0;
    const PlsModel model_shifted = pls_fit(shifted, y, 4);
    const FeatureMatrix scores_shifted = pls_scores(model_shifted, shifted, 4);
    CHECK((scores_shifted.values - scores.values).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("pls_scores matches a step-by-step deflation oracle") {
    const MatrixXd x = random_matrix(15, 3, 41);
    Rng rng(42);
    VectorXd y(15);
    for (int i = 0; i < 15; ++i) y(i) = x(i, 0) + rng.normal();
    const FeatureMatrix fx = make_features(x);
    const PlsModel model = pls_fit(fx, y, 3);

    // Oracle: independent loop over the stored weight/loading chain.
    MatrixXd deflated = x.rowwise() - model.x_means.transpose();
    MatrixXd expect(15, 3);
    for (int m = 0; m < 3; ++m) {
        const VectorXd t = deflated * model.weights.col(m);
        expect.col(m) = t;
        deflated -= t * model.x_loadings.col(m).transpose();
    }
    const FeatureMatrix scores = pls_scores(model, fx, 3);
    CHECK((scores.values - expect).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(scores.column_names == numbered_columns("pls", 3));
}

TEST_CASE("pls input validation") {
    const MatrixXd x = random_matrix(10, 3, 51);
    const VectorXd constant = VectorXd::Ones(10);
    CHECK_THROWS_AS(pls_fit(make_features(x), constant, 2), DataError); // zero-variance y

    Rng rng(52);
    VectorXd y(10);
    for (int i = 0; i < 10; ++i) y(i) = rng.normal();
    CHECK_THROWS_AS(pls_fit(make_features(x), y, 10), DataError); // max_components >= N
}

TEST_CASE("pls_predict on training rows reproduces the fitted values") {
    const MatrixXd x = random_matrix(25, 4, 61);
    Rng rng(62);
    VectorXd y(25);
    for (int i = 0; i < 25; ++i) y(i) = x(i, 0) - x(i, 2) + 0.2 * rng.normal();
    const FeatureMatrix fx = make_features(x);
    const PlsModel model = pls_fit(fx, y, 3);
    for (int m = 1; m <= 3; ++m) {
        CHECK((pls_predict(model, fx, m) - pls_fitted(model, m)).lpNorm<Eigen::Infinity>() <
              1e-10);
    }
}

TEST_CASE("cross-validated rmsep flags noise components that the in-sample curve rewards") {
    // y depends on one direction only; the in-sample curve keeps improving
    // with extra components while the cv curve bottoms out early.
    const MatrixXd x = random_matrix(60, 8, 63);
    Rng rng(64);
    VectorXd y(60);
    for (int i = 0; i < 60; ++i) y(i) = 2.0 * x(i, 0) + 0.5 * rng.normal();
    const FeatureMatrix fx = make_features(x);

    const auto curve = rmsep_cv(fx, y, 6, 5, 7);
    REQUIRE(curve.size() == 6);
    const int m_cv = one_se_select(curve);
    CHECK(m_cv <= 3); // the single real direction dominates

    const PlsModel model = pls_fit(fx, y, 6);
    // In-sample is monotone by construction; cv need not be.
    for (std::size_t m = 1; m < model.rmsep.size(); ++m) {
        CHECK(model.rmsep[m] <= model.rmsep[m - 1] + 1e-10);
    }

    CHECK_THROWS_AS(rmsep_cv(fx, y, 6, 1, 7), ConfigError);
}

#include "seqfeat/pls.hpp"

#include <cmath>
#include <numeric>

#include "seqfeat/errors.hpp"
#include "seqfeat/rng.hpp"

namespace seqfeat {

PlsModel pls_fit(const FeatureMatrix& x, const Eigen::VectorXd& y, int max_components) {
    const long n = x.values.rows();
    const long k = x.values.cols();
    if (y.size() != n) throw DataError("pls_fit: y length disagrees with X rows");
    if (max_components < 1) throw ConfigError("pls_fit: max_components must be >= 1");
    if (max_components >= n) throw DataError("pls_fit: max_components must be < N");
    if (!x.values.allFinite() || !y.allFinite()) throw DataError("pls_fit: non-finite input");

    PlsModel model;
    model.x_means = x.values.colwise().mean();
    model.y_mean = y.mean();

    Eigen::VectorXd y_c = y.array() - model.y_mean;
    if (y_c.squaredNorm() == 0.0) throw DataError("pls_fit: zero-variance y");
    const double y_scale = y_c.norm();

    Eigen::MatrixXd x_def = x.values.rowwise() - model.x_means.transpose();
    Eigen::VectorXd y_def = y_c;

    model.weights.resize(k, max_components);
    model.scores.resize(n, max_components);
    model.x_loadings.resize(k, max_components);
    model.y_loadings.resize(max_components);

    int m_fitted = 0;
    for (int m = 0; m < max_components; ++m) {
        Eigen::VectorXd w = x_def.transpose() * y_def;
        const double w_norm = w.norm();
        // X fully deflated or orthogonal to the residual: no further
        // components exist.
        if (w_norm <= 1e-12 * std::max(1.0, y_scale)) break;
        w /= w_norm;
        const Eigen::VectorXd t = x_def * w;
        const double t_sq = t.squaredNorm();
        if (t_sq <= 0.0) break;
        const Eigen::VectorXd p = x_def.transpose() * t / t_sq;
        const double q = y_def.dot(t) / t_sq;

        model.weights.col(m) = w;
        model.scores.col(m) = t;
        model.x_loadings.col(m) = p;
        model.y_loadings(m) = q;

        x_def.noalias() -= t * p.transpose();
        y_def -= q * t;
        ++m_fitted;
    }
    if (m_fitted == 0) throw NumericError("pls_fit: X carries no covariance with y");
    model.weights.conservativeResize(k, m_fitted);
    model.scores.conservativeResize(n, m_fitted);
    model.x_loadings.conservativeResize(k, m_fitted);
    model.y_loadings.conservativeResize(m_fitted);

    // In-sample RMSEP curve: scores are mutually orthogonal and centered, so
    // the regression of y on the first m components is the running q-sum.
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, model.y_mean);
    model.rmsep.reserve(static_cast<std::size_t>(m_fitted));
    for (int m = 0; m < m_fitted; ++m) {
        fitted += model.y_loadings(m) * model.scores.col(m);
        model.rmsep.push_back(std::sqrt((y - fitted).squaredNorm() / static_cast<double>(n)));
    }
    model.selected_m = one_se_select(model.rmsep);
    return model;
}

int one_se_select(const std::vector<double>& rmsep_curve) {
    if (rmsep_curve.empty()) throw DataError("one_se_select: empty rmsep curve");
    const std::size_t n = rmsep_curve.size();
    double min_v = rmsep_curve[0];
    for (double v : rmsep_curve) min_v = std::min(min_v, v);

    double mean = 0.0;
    for (double v : rmsep_curve) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : rmsep_curve) var += (v - mean) * (v - mean);
    // Standard error of the curve values across all component counts.
    const double se = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) /
                                  std::sqrt(static_cast<double>(n))
                            : 0.0;

    for (std::size_t m = 0; m < n; ++m) {
        if (rmsep_curve[m] <= min_v + se) return static_cast<int>(m) + 1;
    }
    return static_cast<int>(n); // unreachable: the minimum always qualifies
}

int select_m(const PlsModel& model) { return one_se_select(model.rmsep); }

Eigen::VectorXd pls_fitted(const PlsModel& model, int m) {
    if (m < 1 || m > model.scores.cols()) throw ConfigError("pls_fitted: m out of range");
    Eigen::VectorXd fitted =
        Eigen::VectorXd::Constant(model.scores.rows(), model.y_mean);
    for (int i = 0; i < m; ++i) fitted += model.y_loadings(i) * model.scores.col(i);
    return fitted;
}

Eigen::VectorXd pls_predict(const PlsModel& model, const FeatureMatrix& x, int m) {
    const FeatureMatrix scores = pls_scores(model, x, m);
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(scores.values.rows(), model.y_mean);
    for (int i = 0; i < m; ++i) fitted += model.y_loadings(i) * scores.values.col(i);
    return fitted;
}

std::vector<double> rmsep_cv(const FeatureMatrix& x, const Eigen::VectorXd& y,
                             int max_components, int n_folds, std::uint64_t seed) {
    const long n = x.values.rows();
    if (n_folds < 2 || n_folds > n) throw ConfigError("rmsep_cv: n_folds must lie in [2, N]");
    if (max_components >= n - n / n_folds) {
        throw DataError("rmsep_cv: max_components too large for the fold size");
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    shuffle(perm, rng);

    std::vector<double> sq_err(static_cast<std::size_t>(max_components), 0.0);
    for (int fold = 0; fold < n_folds; ++fold) {
        std::vector<int> train_rows, test_rows;
        for (long i = 0; i < n; ++i) {
            if (static_cast<int>(i) % n_folds == fold) {
                test_rows.push_back(perm[static_cast<std::size_t>(i)]);
            } else {
                train_rows.push_back(perm[static_cast<std::size_t>(i)]);
            }
        }
        auto take = [&x](const std::vector<int>& rows) {
            FeatureMatrix out;
            out.column_names = x.column_names;
            out.values.resize(static_cast<long>(rows.size()), x.values.cols());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out.subject_ids.push_back(x.subject_ids[static_cast<std::size_t>(rows[i])]);
                out.values.row(static_cast<long>(i)) = x.values.row(rows[i]);
            }
            return out;
        };
        const FeatureMatrix x_train = take(train_rows);
        const FeatureMatrix x_test = take(test_rows);
        Eigen::VectorXd y_train(static_cast<long>(train_rows.size()));
        for (std::size_t i = 0; i < train_rows.size(); ++i) y_train(static_cast<long>(i)) = y(train_rows[i]);

        const PlsModel model = pls_fit(x_train, y_train, max_components);
        const int fitted_m = static_cast<int>(model.weights.cols());
        for (int m = 1; m <= max_components; ++m) {
            const Eigen::VectorXd pred = pls_predict(model, x_test, std::min(m, fitted_m));
            for (std::size_t i = 0; i < test_rows.size(); ++i) {
                const double err = pred(static_cast<long>(i)) - y(test_rows[i]);
                sq_err[static_cast<std::size_t>(m - 1)] += err * err;
            }
        }
    }
    std::vector<double> curve;
    curve.reserve(sq_err.size());
    for (double s : sq_err) curve.push_back(std::sqrt(s / static_cast<double>(n)));
    return curve;
}

FeatureMatrix pls_scores(const PlsModel& model, const FeatureMatrix& x, int m) {
    const int m_use = m < 0 ? model.selected_m : m;
    if (m_use < 1 || m_use > model.weights.cols()) throw ConfigError("pls_scores: m out of range");
    if (x.values.cols() != model.x_means.size()) throw DataError("pls_scores: dimension mismatch");

    Eigen::MatrixXd x_def = x.values.rowwise() - model.x_means.transpose();
    FeatureMatrix scores;
    scores.subject_ids = x.subject_ids;
    scores.column_names = numbered_columns("pls", m_use);
    scores.values.resize(x.values.rows(), m_use);
    for (int i = 0; i < m_use; ++i) {
        const Eigen::VectorXd t = x_def * model.weights.col(i);
        scores.values.col(i) = t;
        x_def.noalias() -= t * model.x_loadings.col(i).transpose();
    }
    return scores;
}

} // namespace seqfeat

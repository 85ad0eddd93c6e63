#include "seqfeat/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "seqfeat/errors.hpp"
#include "seqfeat/io.hpp"
#include "seqfeat/rng.hpp"

namespace seqfeat {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Standardized {
    MatrixXd x;        // kept columns only, standardized
    VectorXd mean, sd; // full width; sd 0 marks a dropped column
    std::vector<int> kept;
};

Standardized standardize(const MatrixXd& x) {
    const long n = x.rows();
    const long k = x.cols();
    Standardized s;
    s.mean = x.colwise().mean();
    s.sd = VectorXd::Zero(k);
    for (long j = 0; j < k; ++j) {
        const double var = (x.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd > 0.0) {
            s.sd(j) = sd;
            s.kept.push_back(static_cast<int>(j));
        }
    }
    s.x.resize(n, static_cast<long>(s.kept.size()));
    for (std::size_t c = 0; c < s.kept.size(); ++c) {
        const long j = s.kept[c];
        s.x.col(static_cast<long>(c)) = (x.col(j).array() - s.mean(j)) / s.sd(j);
    }
    return s;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Penalized logistic objective: -loglik/N + lambda * |beta|^2, intercept
// unpenalized. Newton/IRLS on the standardized design.
VectorXd irls_logistic(const MatrixXd& x, const VectorXd& y, double lambda) {
    const long n = x.rows();
    const long k = x.cols();
    MatrixXd design(n, k + 1);
    design.col(0) = VectorXd::Ones(n);
    design.rightCols(k) = x;

    VectorXd b = VectorXd::Zero(k + 1);
    const int max_iter = 100;
    for (int iter = 0; iter < max_iter; ++iter) {
        const VectorXd eta = design * b;
        const VectorXd p = eta.unaryExpr([](double v) { return sigmoid(v); });

        VectorXd grad = design.transpose() * (p - y) / static_cast<double>(n);
        grad.tail(k) += 2.0 * lambda * b.tail(k);

        const VectorXd w = p.array() * (1.0 - p.array());
        MatrixXd hess = design.transpose() * w.asDiagonal() * design / static_cast<double>(n);
        for (long j = 1; j <= k; ++j) hess(j, j) += 2.0 * lambda;

        const VectorXd step = hess.ldlt().solve(grad);
        if (!step.allFinite()) throw NumericError("fit_ridge: IRLS produced non-finite step");
        b -= step;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-10 || step.lpNorm<Eigen::Infinity>() < 1e-12) {
            if (lambda == 0.0) {
                // The unpenalized optimum under separation sits at infinity;
                // the gradient vanishes along the way, so detect the fitted
                // probabilities pinning to 0/1 instead.
                const VectorXd p_final =
                    (design * b).unaryExpr([](double v) { return sigmoid(v); });
                bool separated = true;
                for (long i = 0; i < n && separated; ++i) {
                    const double err = y(i) > 0.5 ? 1.0 - p_final(i) : p_final(i);
                    separated = err < 1e-8;
                }
                if (separated) {
                    throw NumericError(
                        "fit_ridge: perfect separation at lambda = 0; use a positive penalty");
                }
            }
            return b;
        }
    }
    throw NumericError("fit_ridge: IRLS did not converge in 100 iterations");
}

double metric_for(const RidgeGlm& model, Family family, const MatrixXd& x_test,
                  const VectorXd& y_test) {
    if (family == Family::gaussian) {
        return osr(y_test, model.predict(x_test));
    }
    std::vector<int> labels(static_cast<std::size_t>(y_test.size()));
    for (long i = 0; i < y_test.size(); ++i) labels[static_cast<std::size_t>(i)] = y_test(i) > 0.5;
    return auc(labels, model.predict(x_test));
}

MatrixXd take_rows(const MatrixXd& x, const std::vector<int>& rows) {
    MatrixXd out(static_cast<long>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<long>(i)) = x.row(rows[i]);
    return out;
}

VectorXd take_rows(const VectorXd& y, const std::vector<int>& rows) {
    VectorXd out(static_cast<long>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<long>(i)) = y(rows[i]);
    return out;
}

void check_binary(const VectorXd& y, const char* what) {
    bool has0 = false, has1 = false;
    for (long i = 0; i < y.size(); ++i) {
        if (y(i) == 0.0) has0 = true;
        else if (y(i) == 1.0) has1 = true;
        else throw DataError(std::string(what) + ": binomial target must be coded 0/1");
    }
    if (!has0 || !has1) throw DataError(std::string(what) + ": both classes must be present");
}

} // namespace

Eigen::VectorXd RidgeGlm::linear(const Eigen::MatrixXd& x) const {
    if (x.cols() != coef.size()) throw DataError("RidgeGlm: feature width mismatch");
    return (x * coef).array() + intercept;
}

Eigen::VectorXd RidgeGlm::predict(const Eigen::MatrixXd& x) const {
    VectorXd eta = linear(x);
    if (family == Family::binomial) {
        return eta.unaryExpr([](double v) { return sigmoid(v); });
    }
    return eta;
}

RidgeGlm fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                   double lambda) {
    const long n = x.rows();
    const long k = x.cols();
    if (y.size() != n) throw DataError("fit_ridge: y length disagrees with X rows");
    if (n < 2) throw DataError("fit_ridge: need at least 2 rows");
    if (lambda < 0.0) throw ConfigError("fit_ridge: lambda must be >= 0");
    if (!x.allFinite() || !y.allFinite()) throw DataError("fit_ridge: non-finite input");
    if (family == Family::binomial) check_binary(y, "fit_ridge");

    const Standardized s = standardize(x);
    const long kk = static_cast<long>(s.kept.size());

    RidgeGlm model;
    model.family = family;
    model.lambda = lambda;
    model.feature_mean = s.mean;
    model.feature_sd = s.sd;
    for (long j = 0; j < k; ++j) {
        if (s.sd(j) == 0.0) model.dropped.push_back(static_cast<int>(j));
    }

    VectorXd beta_std;
    double intercept_std = 0.0;
    if (family == Family::gaussian) {
        // argmin |y - b0 - X b|^2 / (2N) + lambda |b|^2; columns are centered
        // so b0 = mean(y) and b solves (X'X/N + 2 lambda I) b = X'(y - ybar)/N.
        const double y_mean = y.mean();
        const VectorXd y_c = y.array() - y_mean;
        if (kk > 0) {
            MatrixXd a = s.x.transpose() * s.x / static_cast<double>(n);
            a.diagonal().array() += 2.0 * lambda;
            const VectorXd rhs = s.x.transpose() * y_c / static_cast<double>(n);
            beta_std = a.ldlt().solve(rhs);
        } else {
            beta_std = VectorXd::Zero(0);
        }
        intercept_std = y_mean;
    } else {
        const VectorXd b = irls_logistic(s.x, y, lambda);
        intercept_std = b(0);
        beta_std = b.tail(kk);
    }

    // Report on the original scale.
    model.coef = VectorXd::Zero(k);
    model.intercept = intercept_std;
    for (long c = 0; c < kk; ++c) {
        const long j = s.kept[static_cast<std::size_t>(c)];
        model.coef(j) = beta_std(c) / s.sd(j);
        model.intercept -= beta_std(c) * s.mean(j) / s.sd(j);
    }
    return model;
}

double validation_loss(const RidgeGlm& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (model.family == Family::gaussian) {
        return (model.predict(x) - y).squaredNorm() / static_cast<double>(y.size());
    }
    const VectorXd p = model.predict(x);
    double nll = 0.0;
    for (long i = 0; i < y.size(); ++i) {
        const double pi = std::clamp(p(i), 1e-12, 1.0 - 1e-12);
        nll -= y(i) > 0.5 ? std::log(pi) : std::log(1.0 - pi);
    }
    return nll / static_cast<double>(y.size());
}

std::vector<double> lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                                int size, double min_ratio) {
    if (size < 1) throw ConfigError("lambda_grid: size must be >= 1");
    if (family == Family::binomial) check_binary(y, "lambda_grid");
    const Standardized s = standardize(x);
    const VectorXd y_c = y.array() - y.mean();
    double lambda_max = 0.0;
    if (s.x.cols() > 0) {
        lambda_max =
            (s.x.transpose() * y_c / static_cast<double>(x.rows())).lpNorm<Eigen::Infinity>();
    }
    if (lambda_max <= 0.0) lambda_max = 1.0; // no usable gradient scale; arbitrary decade
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(size));
    if (size == 1) {
        grid.push_back(lambda_max);
        return grid;
    }
    const double log_hi = std::log(lambda_max);
    const double log_lo = std::log(lambda_max * min_ratio);
    for (int i = 0; i < size; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(size - 1);
        grid.push_back(std::exp(log_hi + t * (log_lo - log_hi)));
    }
    return grid;
}

double select_penalty(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      const Eigen::MatrixXd& x_val, const Eigen::VectorXd& y_val, Family family,
                      const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("select_penalty: empty grid");
    double best_lambda = grid.front();
    double best_loss = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        const RidgeGlm model = fit_ridge(x_train, y_train, family, lambda);
        const double loss = validation_loss(model, x_val, y_val);
        if (loss < best_loss || (loss == best_loss && lambda > best_lambda)) {
            best_loss = loss;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

double osr(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size()) throw DataError("osr: length mismatch");
    if (y_true.size() < 2) throw DataError("osr: need at least 2 values");
    const double mt = y_true.mean();
    const double mp = y_pred.mean();
    const VectorXd a = y_true.array() - mt;
    const VectorXd b = y_pred.array() - mp;
    const double va = a.squaredNorm();
    const double vb = b.squaredNorm();
    if (va == 0.0 || vb == 0.0) throw NumericError("osr: zero variance");
    return a.dot(b) / std::sqrt(va * vb);
}

double auc(const std::vector<int>& labels, const Eigen::VectorXd& scores) {
    if (static_cast<long>(labels.size()) != scores.size()) throw DataError("auc: length mismatch");
    const std::size_t n = labels.size();
    std::size_t n_pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError("auc: labels must be 0/1");
        n_pos += static_cast<std::size_t>(l);
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        return scores(static_cast<long>(a)) < scores(static_cast<long>(b));
    });

    // Midranks over tie groups; AUC = (R1 - n1(n1+1)/2) / (n1 n0).
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               scores(static_cast<long>(order[j + 1])) == scores(static_cast<long>(order[i]))) {
            ++j;
        }
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        }
        i = j + 1;
    }
    const double n1 = static_cast<double>(n_pos);
    const double n0 = static_cast<double>(n_neg);
    return (rank_sum_pos - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

Split split_indices(const SplitPlan& plan, int n) {
    const double total = plan.train_fraction + plan.validation_fraction + plan.test_fraction;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");
    if (n < 3) throw DataError("split: need at least 3 rows");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(plan.replication)));
    shuffle(perm, rng);

    int n_train = static_cast<int>(std::floor(plan.train_fraction * n));
    int n_val = static_cast<int>(std::floor(plan.validation_fraction * n));
    n_train = std::max(n_train, 1);
    n_val = std::max(n_val, 1);
    if (n_train + n_val >= n) throw DataError("split: too few rows for a three-way split");

    Split s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.validation.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    return s;
}

PredictionReport run_replications(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& target,
                                  Family family, int n_rep, std::uint64_t seed,
                                  const PredictionOptions& opts) {
    const int n = static_cast<int>(predictors.rows());
    if (target.size() != n) throw DataError("run_replications: target length disagrees");
    if (n_rep < 1) throw ConfigError("run_replications: n_rep must be >= 1");
    if (family == Family::binomial) check_binary(target, "run_replications");

    PredictionReport report;
    report.target_name = opts.target_name;
    report.predictor_set = opts.predictor_set;
    report.family = family;
    report.metric_name = family == Family::gaussian ? "osr" : "auc";

    double sum = 0.0;
    for (int rep = 0; rep < n_rep; ++rep) {
        SplitPlan plan;
        plan.seed = seed;
        plan.replication = rep;
        const Split split = split_indices(plan, n);

        const MatrixXd x_train = take_rows(predictors, split.train);
        const VectorXd y_train = take_rows(target, split.train);
        const MatrixXd x_val = take_rows(predictors, split.validation);
        const VectorXd y_val = take_rows(target, split.validation);

        if (family == Family::binomial) {
            check_binary(y_train, "run_replications (train split)");
            check_binary(y_val, "run_replications (validation split)");
            check_binary(take_rows(target, split.test), "run_replications (test split)");
        }

        if (opts.observer) {
            opts.observer(rep, "fit", split.train);
            opts.observer(rep, "select", split.validation);
            opts.observer(rep, "evaluate", split.test);
        }

        const auto grid =
            lambda_grid(x_train, y_train, family, opts.lambda_grid_size, opts.lambda_min_ratio);
        const double lambda = select_penalty(x_train, y_train, x_val, y_val, family, grid);
        const RidgeGlm model = fit_ridge(x_train, y_train, family, lambda);

        double metric;
        try {
            metric = metric_for(model, family, take_rows(predictors, split.test),
                                take_rows(target, split.test));
        } catch (const NumericError&) {
            metric = std::numeric_limits<double>::quiet_NaN(); // undefined this replication
        }
        report.per_replication.push_back(metric);
        report.lambda_chosen.push_back(lambda);
        if (std::isfinite(metric)) {
            sum += metric;
            ++report.n_defined;
        }
    }
    report.mean_metric = report.n_defined > 0 ? sum / report.n_defined
                                              : std::numeric_limits<double>::quiet_NaN();
    return report;
}

std::vector<PredictionReport> cumulative_predict(const std::vector<FeatureMatrix>& item_features,
                                                 const Eigen::VectorXd& target, Family family,
                                                 int n_rep, std::uint64_t seed,
                                                 const PredictionOptions& opts) {
    if (item_features.empty()) throw DataError("cumulative_predict: no feature sets");
    for (std::size_t j = 1; j < item_features.size(); ++j) {
        if (item_features[j].subject_ids != item_features[0].subject_ids) {
            throw DataError("cumulative_predict: feature sets are not subject-aligned");
        }
    }
    std::vector<PredictionReport> reports;
    FeatureMatrix combined = item_features[0];
    for (std::size_t j = 0; j < item_features.size(); ++j) {
        if (j > 0) combined = hcat(combined, item_features[j]);
        PredictionOptions step_opts = opts;
        step_opts.predictor_set =
            opts.predictor_set.empty()
                ? "items_1.." + std::to_string(j + 1)
                : opts.predictor_set + "_1.." + std::to_string(j + 1);
        reports.push_back(
            run_replications(combined.values, target, family, n_rep, seed, step_opts));
    }
    return reports;
}

void write_report_csv(const std::string& path, const std::vector<PredictionReport>& reports) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << "target,predictor_set,replication,metric_name,value,lambda\n";
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.per_replication.size(); ++i) {
            out << r.target_name << ',' << r.predictor_set << ',' << i << ',' << r.metric_name
                << ',' << format_double(r.per_replication[i]) << ','
                << format_double(r.lambda_chosen[i]) << '\n';
        }
    }
}

void write_report_json(const std::string& path, const std::vector<PredictionReport>& reports) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json entry;
        entry["target"] = r.target_name;
        entry["predictor_set"] = r.predictor_set;
        entry["metric"] = r.metric_name;
        entry["mean"] = r.mean_metric;
        entry["n_defined"] = r.n_defined;
        entry["per_replication"] = r.per_replication;
        root.push_back(std::move(entry));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << root.dump(2) << '\n';
}

} // namespace seqfeat

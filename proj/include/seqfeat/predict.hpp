#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqfeat/feature_matrix.hpp"

namespace seqfeat {

enum class Family { gaussian, binomial };

/// L2-penalized GLM. Features are standardized on training statistics
/// internally; coefficients are reported on the original scale and the
/// intercept is unpenalized. Zero-variance features are dropped (recorded).
struct RidgeGlm {
    Family family = Family::gaussian;
    double lambda = 0.0;
    Eigen::VectorXd coef; // original scale, zeros for dropped features
    double intercept = 0.0;
    Eigen::VectorXd feature_mean; // training standardization record
    Eigen::VectorXd feature_sd;   // sd of dropped features recorded as 0
    std::vector<int> dropped;     // zero-variance feature indices

    /// Linear predictor (gaussian: the prediction itself).
    Eigen::VectorXd linear(const Eigen::MatrixXd& x) const;
    /// gaussian: linear; binomial: probability through the logit link.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// gaussian: minimizes ||y - b0 - X b||^2 / (2N) + lambda ||b||^2 in closed
/// form. binomial: penalized logistic log-likelihood by IRLS; throws
/// NumericError if IRLS fails to converge.
RidgeGlm fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Family family,
                   double lambda);

/// Validation loss: mean squared error (gaussian) or mean negative
/// log-likelihood (binomial).
double validation_loss(const RidgeGlm& model, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y);

/// 50 log-spaced values from lambda_max (the max absolute gradient scale at
/// the null model, standardized) down by min_ratio, descending.
std::vector<double> lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                Family family, int size = 50, double min_ratio = 1e-4);

/// argmin of validation loss over the grid; ties resolved to the larger
/// lambda.
double select_penalty(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      const Eigen::MatrixXd& x_val, const Eigen::VectorXd& y_val,
                      Family family, const std::vector<double>& grid);

/// Pearson correlation; throws NumericError on zero variance.
double osr(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Rank-based (Mann-Whitney) AUC with midrank tie handling. Throws DataError
/// unless both classes are present.
double auc(const std::vector<int>& labels, const Eigen::VectorXd& scores);

/// 70/10/20 split with replication-derived seeds.
struct SplitPlan {
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
    double validation_fraction = 0.1;
    double test_fraction = 0.2;
    int replication = 0;
};

struct Split {
    std::vector<int> train, validation, test; // disjoint, exhaustive
};

Split split_indices(const SplitPlan& plan, int n);

/// Test hook: called with the exact row sets handed to each phase.
using ReplicationObserver =
    std::function<void(int replication, const std::string& phase, const std::vector<int>& rows)>;

struct PredictionOptions {
    int lambda_grid_size = 50;
    double lambda_min_ratio = 1e-4;
    std::string target_name;
    std::string predictor_set;
    ReplicationObserver observer; // optional
};

/// Per-replication, per-predictor-set accuracy metrics.
struct PredictionReport {
    std::string target_name;
    std::string predictor_set;
    Family family = Family::gaussian;
    std::string metric_name;          // "osr" or "auc"
    std::vector<double> per_replication; // NaN marks an undefined replication
    std::vector<double> lambda_chosen;
    double mean_metric = 0.0;         // over defined replications
    int n_defined = 0;
};

/// Fresh seeded 70/10/20 split per replication, penalty selected on the
/// validation part, metric (osr for gaussian, auc for binomial) on the test
/// part. Rows must be case-wise filtered and aligned beforehand.
PredictionReport run_replications(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& target,
                                  Family family, int n_rep, std::uint64_t seed,
                                  const PredictionOptions& opts = {});

/// Report j uses the column concatenation of feature sets 1..j, in caller
/// order, with identical splits across j. Throws DataError on subject
/// misalignment.
std::vector<PredictionReport> cumulative_predict(const std::vector<FeatureMatrix>& item_features,
                                                 const Eigen::VectorXd& target, Family family,
                                                 int n_rep, std::uint64_t seed,
                                                 const PredictionOptions& opts = {});

void write_report_csv(const std::string& path, const std::vector<PredictionReport>& reports);
void write_report_json(const std::string& path, const std::vector<PredictionReport>& reports);

} // namespace seqfeat

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "seqfeat/feature_matrix.hpp"

namespace seqfeat {

/// PLS1 (univariate response) fitted by NIPALS with sequential deflation.
struct PlsModel {
    Eigen::VectorXd x_means;   // K
    double y_mean = 0.0;
    Eigen::MatrixXd weights;   // K x M_max, unit-norm columns
    Eigen::MatrixXd scores;    // N x M_max (training scores T)
    Eigen::MatrixXd x_loadings;// K x M_max
    Eigen::VectorXd y_loadings;// M_max
    std::vector<double> rmsep; // in-sample curve, index m-1 = first m components
    int selected_m = 1;        // one-SE rule over the rmsep curve
};

/// Fits max_components PLS1 components: w_m prop X_m' y_m (unit norm),
/// t_m = X_m w_m, deflation of X and y by regression on t_m. Fills the
/// in-sample RMSEP curve and applies the one-SE selection rule.
/// Throws DataError on zero-variance y or max_components >= N.
PlsModel pls_fit(const FeatureMatrix& x, const Eigen::VectorXd& y, int max_components);

/// One-SE rule: smallest m whose RMSEP is within one standard error of the
/// curve minimum, where SE is the standard deviation of the curve values over
/// sqrt(#values). Qualification uses <= so a flat curve selects m = 1.
int one_se_select(const std::vector<double>& rmsep_curve);

/// Spec'd operation form: evaluates the rule on the model's stored curve.
int select_m(const PlsModel& model);

/// In-sample fitted values using the first m components.
Eigen::VectorXd pls_fitted(const PlsModel& model, int m);

/// Predictions on new rows using the first m components.
Eigen::VectorXd pls_predict(const PlsModel& model, const FeatureMatrix& x, int m);

/// Cross-validated alternative to the in-sample curve (the default matches
/// the RMSEP formula over the analysis set): K-fold out-of-fold squared
/// errors pooled per component count.
std::vector<double> rmsep_cv(const FeatureMatrix& x, const Eigen::VectorXd& y,
                             int max_components, int n_folds, std::uint64_t seed);

/// Scores for the retained components: centered X pushed through the stored
/// weight/loading deflation chain. Columns pls_1..pls_M.
FeatureMatrix pls_scores(const PlsModel& model, const FeatureMatrix& x, int m = -1);

} // namespace seqfeat

#pragma once

#include <Eigen/Dense>
#include <utility>

#include "seqfeat/feature_matrix.hpp"

namespace seqfeat {

struct PcaModel {
    Eigen::VectorXd means;              // K
    Eigen::MatrixXd loadings;           // K x K, orthonormal columns
    Eigen::VectorXd explained_variance; // non-increasing
};

/// Centers columns (no scaling) and rotates onto principal axes ordered by
/// explained variance. Scores = centered X * loadings, columns pca_1..pca_K.
std::pair<PcaModel, FeatureMatrix> pca_fit_transform(const FeatureMatrix& x);

/// Projects new rows through a fitted model.
FeatureMatrix pca_transform(const PcaModel& model, const FeatureMatrix& x);

} // namespace seqfeat

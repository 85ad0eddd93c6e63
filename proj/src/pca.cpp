#include "seqfeat/pca.hpp"

#include "seqfeat/errors.hpp"

namespace seqfeat {

std::pair<PcaModel, FeatureMatrix> pca_fit_transform(const FeatureMatrix& x) {
    const long n = x.values.rows();
    const long k = x.values.cols();
    if (n <= 1) throw DataError("pca: need more than one row");
    if (!x.values.allFinite()) throw DataError("pca: non-finite input");

    PcaModel model;
    model.means = x.values.colwise().mean();
    Eigen::MatrixXd centered = x.values.rowwise() - model.means.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeFullV);
    model.loadings = svd.matrixV(); // K x K orthonormal
    model.explained_variance = Eigen::VectorXd::Zero(k);
    const long rank = svd.singularValues().size();
    for (long i = 0; i < rank; ++i) {
        const double s = svd.singularValues()(i);
        model.explained_variance(i) = s * s / static_cast<double>(n - 1);
    }

    FeatureMatrix scores;
    scores.subject_ids = x.subject_ids;
    scores.column_names = numbered_columns("pca", static_cast<int>(k));
    scores.values = centered * model.loadings;
    return {std::move(model), std::move(scores)};
}

FeatureMatrix pca_transform(const PcaModel& model, const FeatureMatrix& x) {
    if (x.values.cols() != model.means.size()) throw DataError("pca_transform: dimension mismatch");
    if (!x.values.allFinite()) throw DataError("pca_transform: non-finite input");
    FeatureMatrix scores;
    scores.subject_ids = x.subject_ids;
    scores.column_names = numbered_columns("pca", static_cast<int>(model.loadings.cols()));
    scores.values = (x.values.rowwise() - model.means.transpose()) * model.loadings;
    return scores;
}

} // namespace seqfeat

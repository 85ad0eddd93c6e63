#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace seqfeat {

/// N x K numeric features row-aligned to subject ids, with named columns.
struct FeatureMatrix {
    std::vector<std::string> subject_ids;
    std::vector<std::string> column_names;
    Eigen::MatrixXd values; // N x K

    int n_rows() const { return static_cast<int>(values.rows()); }
    int n_cols() const { return static_cast<int>(values.cols()); }
};

/// Column names name_1..name_k.
std::vector<std::string> numbered_columns(const std::string& prefix, int k);

/// Column-wise concatenation; throws DataError unless subject ids agree
/// element-wise.
FeatureMatrix hcat(const FeatureMatrix& a, const FeatureMatrix& b);

} // namespace seqfeat

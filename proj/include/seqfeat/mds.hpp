#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "seqfeat/feature_matrix.hpp"
#include "seqfeat/oss.hpp"

namespace seqfeat {

struct MdsConfig {
    enum class Init { classical, random };
    int k = 100;
    int max_iter = 300;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    Init init = Init::classical;
};

struct Embedding {
    std::vector<std::string> subject_ids;
    Eigen::MatrixXd coordinates; // N x K, rows aligned to the input matrix
    double final_stress = 0.0;
    int n_iter = 0;
    std::vector<double> stress_history; // stress at init, then after each step
};

/// Raw stress sum_{i<j} (d_ij - |x_i - x_j|)^2. Throws DataError on shape
/// mismatch.
double stress(const DissimilarityMatrix& d, const Eigen::MatrixXd& x);

/// Classical (Torgerson) coordinates from the double-centered squared
/// dissimilarities; negative eigenvalues contribute zero.
Eigen::MatrixXd classical_mds(const DissimilarityMatrix& d, int k);

/// Classical-MDS (or seeded random) initialization refined by SMACOF
/// majorization. Stress is non-increasing across iterations; stops when the
/// relative stress decrease drops below rel_tol or at max_iter.
Embedding mds_embed(const DissimilarityMatrix& d, const MdsConfig& cfg);

/// Columns mds_1..mds_K.
FeatureMatrix to_feature_matrix(const Embedding& e);

} // namespace seqfeat

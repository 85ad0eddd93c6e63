#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "seqfeat/types.hpp"

namespace seqfeat {

/// Symmetric pairwise OSS dissimilarities for one item's cohort.
/// Invariants: symmetric, zero diagonal, entries in [0, 1].
struct DissimilarityMatrix {
    std::vector<std::string> subject_ids;
    Eigen::MatrixXd entries; // N x N

    int size() const { return static_cast<int>(entries.rows()); }
};

/// Throws DataError if the invariants above fail.
void validate(const DissimilarityMatrix& d, double tol = 1e-12);

/// Order-based sequence similarity distance between two sequences:
///   d = (f + g) / (Li + Lj)
/// where f sums |position difference| over rank-matched occurrences of common
/// actions scaled by 1/max(Li, Lj), and g counts occurrences of actions unique
/// to either sequence. Serial positions are 1-based. Computed over exact
/// integer sums with a single final division.
double oss_distance(const ActionSequence& a, const ActionSequence& b);

/// Full cohort matrix; each unordered pair evaluated once. Honors the
/// SEQFEAT_THREADS environment override, result independent of thread count.
DissimilarityMatrix dissimilarity_matrix(const Cohort& cohort);

/// csv export: header "subject_id,<ids...>", one row per subject.
void write_dissimilarity_csv(const std::string& path, const DissimilarityMatrix& d);
DissimilarityMatrix read_dissimilarity_csv(const std::string& path);

/// Binary export; round-trips bit-exactly.
void write_dissimilarity_binary(const std::string& path, const DissimilarityMatrix& d);
DissimilarityMatrix read_dissimilarity_binary(const std::string& path);

} // namespace seqfeat

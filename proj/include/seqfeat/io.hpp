#pragma once

#include <string>
#include <vector>

#include "seqfeat/feature_matrix.hpp"
#include "seqfeat/types.hpp"

namespace seqfeat {

enum class SequenceFormat { json_lines, csv };

/// Reads a sequence file and groups records into one cohort per distinct
/// item_id (cohorts ordered by first appearance, records kept in file order).
///
/// json-lines: one object per line,
///   {"subject_id": str, "item_id": str, "actions": [str,...], "score": int|null}
/// csv: header subject_id,item_id,score,actions with actions |-separated and
///   an empty score field meaning missing.
std::vector<Cohort> ingest_sequences(const std::string& path, SequenceFormat format);

void emit_sequences_json_lines(const std::string& path, const std::vector<Cohort>& cohorts);
void emit_sequences_csv(const std::string& path, const std::vector<Cohort>& cohorts);

/// Covariate csv: header row, subject_id first column, empty field = missing.
/// A column is inferred binary when its non-missing values take at most two
/// distinct integral codes.
CovariateTable read_covariates_csv(const std::string& path);
void write_covariates_csv(const std::string& path, const CovariateTable& table);

/// Feature csv: header subject_id,<col>...; doubles written as %.17g so the
/// text round-trips values exactly.
FeatureMatrix read_feature_matrix_csv(const std::string& path);
void write_feature_matrix_csv(const std::string& path, const FeatureMatrix& m);

/// Deterministic %.17g rendering used by every csv writer.
std::string format_double(double v);

} // namespace seqfeat

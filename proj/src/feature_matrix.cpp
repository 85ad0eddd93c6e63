#include "seqfeat/feature_matrix.hpp"

#include "seqfeat/errors.hpp"

namespace seqfeat {

std::vector<std::string> numbered_columns(const std::string& prefix, int k) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) names.push_back(prefix + "_" + std::to_string(i));
    return names;
}

FeatureMatrix hcat(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.subject_ids != b.subject_ids) {
        throw DataError("hcat: feature matrices are not aligned on the same subjects");
    }
    FeatureMatrix out;
    out.subject_ids = a.subject_ids;
    out.column_names = a.column_names;
    out.column_names.insert(out.column_names.end(), b.column_names.begin(), b.column_names.end());
    out.values.resize(a.values.rows(), a.values.cols() + b.values.cols());
    out.values << a.values, b.values;
    return out;
}

} // namespace seqfeat

#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqfeat/types.hpp"

namespace seqfeat {

/// Converts hourly income to a common currency, takes logs, and centers each
/// value on its country's median log income. Missing income stays missing.
/// Throws DataError on non-positive income or a country absent from rates.
CovariateColumn adjust_income(const CovariateColumn& raw_hourly_income,
                              const std::vector<std::string>& country,
                              const std::map<std::string, double>& rates);

/// Subtracts the per-country median of non-missing values; missing preserved.
/// Throws DataError naming any country whose values are all missing.
CovariateColumn center_by_country(const CovariateColumn& values,
                                  const std::vector<std::string>& country);

/// Indices of subjects with a non-missing target value, in subject order.
std::vector<int> casewise_filter(const CovariateTable& table, const std::string& target);

/// Median with the even-count convention (mean of the two middle order
/// statistics). Throws DataError on empty input.
double median(std::vector<double> values);

/// Drops the listed tokens (e.g. Start / Next wrappers) from every sequence
/// and rebuilds the vocabulary. Sequences are kept by default with all their
/// tokens; this is the opt-in stripping step. Throws DataError naming the
/// subject if stripping empties a sequence.
Cohort strip_tokens(const Cohort& cohort, const std::vector<std::string>& tokens);

} // namespace seqfeat

#include "seqfeat/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seqfeat/errors.hpp"

namespace seqfeat {

double median(std::vector<double> values) {
    if (values.empty()) throw DataError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CovariateColumn adjust_income(const CovariateColumn& raw_hourly_income,
                              const std::vector<std::string>& country,
                              const std::map<std::string, double>& rates) {
    const std::size_t n = raw_hourly_income.values.size();
    if (country.size() != n || raw_hourly_income.missing.size() != n) {
        throw DataError("adjust_income: column lengths disagree");
    }

    CovariateColumn log_income;
    log_income.kind = CovariateColumn::Kind::continuous;
    log_income.values.assign(n, 0.0);
    log_income.missing.assign(n, true);

    // Pass one: convert and log; collect per-country values for the median.
    std::map<std::string, std::vector<double>> per_country;
    for (std::size_t i = 0; i < n; ++i) {
        if (raw_hourly_income.missing[i]) continue;
        const double income = raw_hourly_income.values[i];
        if (income <= 0.0) {
            throw DataError("non-positive income for subject index " + std::to_string(i));
        }
        auto it = rates.find(country[i]);
        if (it == rates.end()) throw DataError("unknown country '" + country[i] + "'");
        const double lv = std::log(income * it->second);
        log_income.values[i] = lv;
        log_income.missing[i] = false;
        per_country[country[i]].push_back(lv);
    }

    std::map<std::string, double> med;
    for (auto& [c, vals] : per_country) med[c] = median(std::move(vals));

    for (std::size_t i = 0; i < n; ++i) {
        if (log_income.missing[i]) continue;
        log_income.values[i] -= med.at(country[i]);
    }
    return log_income;
}

CovariateColumn center_by_country(const CovariateColumn& values,
                                  const std::vector<std::string>& country) {
    const std::size_t n = values.values.size();
    if (country.size() != n || values.missing.size() != n) {
        throw DataError("center_by_country: column lengths disagree");
    }

    std::map<std::string, std::vector<double>> per_country;
    std::map<std::string, bool> represented;
    for (std::size_t i = 0; i < n; ++i) {
        represented[country[i]] = true;
        if (!values.missing[i]) per_country[country[i]].push_back(values.values[i]);
    }
    for (const auto& [c, _] : represented) {
        if (!per_country.count(c)) {
            throw DataError("country '" + c + "' has no non-missing values to center on");
        }
    }

    std::map<std::string, double> med;
    for (auto& [c, vals] : per_country) med[c] = median(std::move(vals));

    CovariateColumn out = values;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.missing[i]) out.values[i] -= med.at(country[i]);
    }
    return out;
}

Cohort strip_tokens(const Cohort& cohort, const std::vector<std::string>& tokens) {
    const std::set<std::string> drop(tokens.begin(), tokens.end());
    std::vector<ActionSequence> kept;
    kept.reserve(cohort.sequences.size());
    for (const auto& seq : cohort.sequences) {
        ActionSequence out = seq;
        out.tokens.clear();
        for (const auto& tok : seq.tokens) {
            if (!drop.count(tok)) out.tokens.push_back(tok);
        }
        if (out.tokens.empty()) {
            throw DataError("stripping left subject '" + seq.subject_id + "' on item '" +
                            cohort.item_id + "' with an empty sequence");
        }
        kept.push_back(std::move(out));
    }
    return make_cohort(cohort.item_id, std::move(kept));
}

std::vector<int> casewise_filter(const CovariateTable& table, const std::string& target) {
    const auto& col = table.column(target); // throws on unknown column
    std::vector<int> keep;
    for (std::size_t i = 0; i < col.missing.size(); ++i) {
        if (!col.missing[i]) keep.push_back(static_cast<int>(i));
    }
    return keep;
}

} // namespace seqfeat

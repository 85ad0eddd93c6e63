#include "seqfeat/describe.hpp"

#include <algorithm>
#include <limits>

#include "seqfeat/errors.hpp"

namespace seqfeat {

CohortDescription describe(const Cohort& cohort) {
    if (cohort.sequences.empty()) throw DataError("describe: empty cohort");

    CohortDescription d;
    d.item_id = cohort.item_id;
    d.n_subjects = cohort.size();
    d.n_action_types = cohort.vocabulary.size();

    long total = 0;
    d.min_length = std::numeric_limits<int>::max();
    d.max_length = 0;
    int max_score = std::numeric_limits<int>::min();
    int n_scored = 0;
    for (const auto& seq : cohort.sequences) {
        const int len = static_cast<int>(seq.tokens.size());
        total += len;
        d.min_length = std::min(d.min_length, len);
        d.max_length = std::max(d.max_length, len);
        if (seq.score) {
            ++n_scored;
            max_score = std::max(max_score, *seq.score);
        }
    }
    d.mean_length = static_cast<double>(total) / static_cast<double>(cohort.size());

    // Full credit = the cohort's maximum observed score.
    if (n_scored == 0) {
        d.p_full_credit = std::numeric_limits<double>::quiet_NaN();
    } else {
        int n_full = 0;
        for (const auto& seq : cohort.sequences) {
            if (seq.score && *seq.score == max_score) ++n_full;
        }
        d.p_full_credit = static_cast<double>(n_full) / static_cast<double>(n_scored);
    }
    return d;
}

} // namespace seqfeat

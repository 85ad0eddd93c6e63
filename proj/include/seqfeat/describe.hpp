#pragma once

#include "seqfeat/types.hpp"

namespace seqfeat {

/// Cohort-level descriptive statistics in the layout of the item summary
/// table: full-credit proportion, sequence-length range and mean, and the
/// number of distinct action types.
struct CohortDescription {
    std::string item_id;
    int n_subjects = 0;
    double p_full_credit = 0.0; // over scored sequences; NaN if none scored
    int min_length = 0;
    int max_length = 0;
    double mean_length = 0.0;
    int n_action_types = 0;
};

CohortDescription describe(const Cohort& cohort);

} // namespace seqfeat

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seqfeat/types.hpp"

namespace seqfeat {

/// Latent trait definition; one value drawn per subject.
struct TraitSpec {
    enum class Dist { normal, uniform, bernoulli };
    std::string name;
    Dist dist = Dist::normal;
    double a = 0.0; // mean / low / p
    double b = 1.0; // sd / high / unused
};

/// First-order Markov strategy over the item alphabet. States are actions;
/// a sequence starts from `initial`, emits the state, then either terminates
/// (per-state probability) or transitions.
struct StrategySpec {
    std::string name;
    std::vector<double> initial;              // over alphabet, sums to 1
    std::vector<std::vector<double>> transition; // rows over alphabet, sum to 1
    std::vector<double> termination;          // per state, in (0, 1]
};

/// Strategy-mixture weights as functions of traits: softmax over
/// bias_s + sum_k coef[k][s] * trait_k.
struct MixtureSpec {
    std::vector<double> bias;                          // per strategy
    std::map<std::string, std::vector<double>> coef;   // trait name -> per-strategy
};

/// Deterministic polytomous score: one point per token set fully present.
struct ScoreRule {
    std::vector<std::vector<std::string>> point_token_sets;
};

struct ItemSpec {
    std::string item_id;
    std::vector<std::string> alphabet;
    std::vector<StrategySpec> strategies;
    MixtureSpec mixture;
    ScoreRule score_rule;
    int max_length = 400; // hard cap; hitting it is an error
};

/// Whole synthetic design: shared traits, one or more items.
struct AgentSpec {
    std::vector<TraitSpec> traits;
    std::vector<ItemSpec> items;
};

/// Throws ConfigError listing every violated invariant.
void validate(const AgentSpec& spec);

struct SimResult {
    std::vector<Cohort> cohorts;  // one per item, subject order shared
    CovariateTable covariates;    // traits + per-item strategy index columns
};

/// Deterministic given seed; per-subject seeds are derived so results do not
/// depend on scheduling. Traits are recorded as covariate columns, and the
/// chosen strategy index per item is recorded as strategy_<item_id>.
SimResult generate(const AgentSpec& spec, int n_subjects, std::uint64_t seed);

/// JSON spec file reader (schema documented in the README).
AgentSpec read_agent_spec(const std::string& path);

} // namespace seqfeat

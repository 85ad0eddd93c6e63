#include "seqfeat/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seqfeat/errors.hpp"
#include "seqfeat/rng.hpp"

namespace seqfeat {

namespace {

void check_distribution(const std::vector<double>& probs, const std::string& what,
                        std::vector<std::string>& problems) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) {
            problems.push_back(what + ": negative probability");
            return;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        problems.push_back(what + ": probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

std::vector<double> mixture_weights(const ItemSpec& item,
                                    const std::map<std::string, double>& traits) {
    const std::size_t n_strat = item.strategies.size();
    std::vector<double> score(n_strat, 0.0);
    for (std::size_t s = 0; s < n_strat; ++s) {
        if (s < item.mixture.bias.size()) score[s] = item.mixture.bias[s];
    }
    for (const auto& [trait, coefs] : item.mixture.coef) {
        auto it = traits.find(trait);
        if (it == traits.end()) throw ConfigError("mixture references unknown trait '" + trait + "'");
        for (std::size_t s = 0; s < n_strat && s < coefs.size(); ++s) {
            score[s] += coefs[s] * it->second;
        }
    }
    // Softmax, stabilized.
    const double m = *std::max_element(score.begin(), score.end());
    double total = 0.0;
    for (double& v : score) {
        v = std::exp(v - m);
        total += v;
    }
    for (double& v : score) v /= total;
    return score;
}

int score_sequence(const ScoreRule& rule, const std::vector<std::string>& tokens) {
    int points = 0;
    const std::set<std::string> present(tokens.begin(), tokens.end());
    for (const auto& required : rule.point_token_sets) {
        bool all = true;
        for (const auto& tok : required) {
            if (!present.count(tok)) {
                all = false;
                break;
            }
        }
        if (all) ++points;
    }
    return points;
}

std::vector<std::string> simulate_walk(const ItemSpec& item, const StrategySpec& strategy,
                                       Rng& rng) {
    std::vector<std::string> tokens;
    std::size_t state = rng.categorical(strategy.initial);
    while (true) {
        tokens.push_back(item.alphabet[state]);
        if (rng.uniform() < strategy.termination[state]) break;
        if (static_cast<int>(tokens.size()) >= item.max_length) {
            throw NumericError("simgen: sequence hit the hard length cap of " +
                               std::to_string(item.max_length) + " on item '" + item.item_id + "'");
        }
        state = rng.categorical(strategy.transition[state]);
    }
    return tokens;
}

} // namespace

void validate(const AgentSpec& spec) {
    std::vector<std::string> problems;
    if (spec.items.empty()) problems.push_back("spec has no items");
    std::set<std::string> trait_names;
    for (const auto& trait : spec.traits) {
        if (trait.name.empty()) problems.push_back("trait with empty name");
        if (!trait_names.insert(trait.name).second) {
            problems.push_back("duplicate trait '" + trait.name + "'");
        }
        if (trait.dist == TraitSpec::Dist::normal && trait.b < 0.0) {
            problems.push_back("trait '" + trait.name + "': negative sd");
        }
        if (trait.dist == TraitSpec::Dist::uniform && trait.b < trait.a) {
            problems.push_back("trait '" + trait.name + "': empty uniform range");
        }
        if (trait.dist == TraitSpec::Dist::bernoulli && (trait.a < 0.0 || trait.a > 1.0)) {
            problems.push_back("trait '" + trait.name + "': bernoulli p outside [0, 1]");
        }
    }
    for (const auto& item : spec.items) {
        const std::string where = "item '" + item.item_id + "'";
        if (item.alphabet.empty()) problems.push_back(where + ": empty alphabet");
        if (item.strategies.empty()) problems.push_back(where + ": no strategies");
        if (item.max_length < 1) problems.push_back(where + ": max_length must be >= 1");
        const std::size_t a = item.alphabet.size();
        for (const auto& strat : item.strategies) {
            const std::string sw = where + " strategy '" + strat.name + "'";
            if (strat.initial.size() != a || strat.termination.size() != a ||
                strat.transition.size() != a) {
                problems.push_back(sw + ": shapes do not match the alphabet");
                continue;
            }
            check_distribution(strat.initial, sw + " initial", problems);
            for (std::size_t s = 0; s < a; ++s) {
                if (strat.transition[s].size() != a) {
                    problems.push_back(sw + ": transition row " + std::to_string(s) +
                                       " has wrong width");
                    continue;
                }
                check_distribution(strat.transition[s], sw + " transition row " + std::to_string(s),
                                   problems);
                if (strat.termination[s] <= 0.0 || strat.termination[s] > 1.0) {
                    problems.push_back(sw + ": termination probability of state " +
                                       std::to_string(s) + " outside (0, 1]");
                }
            }
        }
        for (const auto& [trait, coefs] : item.mixture.coef) {
            if (!trait_names.count(trait)) {
                problems.push_back(where + ": mixture references unknown trait '" + trait + "'");
            }
            if (coefs.size() != item.strategies.size()) {
                problems.push_back(where + ": mixture coefficient width for '" + trait +
                                   "' does not match strategy count");
            }
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid agent spec:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
}

SimResult generate(const AgentSpec& spec, int n_subjects, std::uint64_t seed) {
    if (n_subjects < 1) throw ConfigError("generate: n_subjects must be >= 1");
    validate(spec);

    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n_subjects));
    for (int i = 0; i < n_subjects; ++i) {
        std::ostringstream s;
        s << 's' << i + 1;
        ids.push_back(s.str());
    }

    CovariateTable covariates(ids);
    std::vector<CovariateColumn> trait_cols(spec.traits.size());
    for (auto& col : trait_cols) {
        col.values.assign(static_cast<std::size_t>(n_subjects), 0.0);
        col.missing.assign(static_cast<std::size_t>(n_subjects), false);
    }
    std::vector<CovariateColumn> strategy_cols(spec.items.size());
    for (auto& col : strategy_cols) {
        col.kind = CovariateColumn::Kind::continuous;
        col.values.assign(static_cast<std::size_t>(n_subjects), 0.0);
        col.missing.assign(static_cast<std::size_t>(n_subjects), false);
    }

    std::vector<std::vector<ActionSequence>> sequences(spec.items.size());

    // Per-subject derived seeds: output does not depend on evaluation order.
    for (int i = 0; i < n_subjects; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::map<std::string, double> traits;
        for (std::size_t t = 0; t < spec.traits.size(); ++t) {
            const auto& ts = spec.traits[t];
            double v = 0.0;
            switch (ts.dist) {
                case TraitSpec::Dist::normal: v = rng.normal(ts.a, ts.b); break;
                case TraitSpec::Dist::uniform: v = rng.uniform(ts.a, ts.b); break;
                case TraitSpec::Dist::bernoulli: v = rng.uniform() < ts.a ? 1.0 : 0.0; break;
            }
            traits[ts.name] = v;
            trait_cols[t].values[static_cast<std::size_t>(i)] = v;
            trait_cols[t].kind = ts.dist == TraitSpec::Dist::bernoulli
                                     ? CovariateColumn::Kind::binary
                                     : CovariateColumn::Kind::continuous;
        }

        for (std::size_t it = 0; it < spec.items.size(); ++it) {
            const auto& item = spec.items[it];
            const auto weights = mixture_weights(item, traits);
            const std::size_t strat_idx = rng.categorical(weights);
            strategy_cols[it].values[static_cast<std::size_t>(i)] =
                static_cast<double>(strat_idx);

            ActionSequence seq;
            seq.subject_id = ids[static_cast<std::size_t>(i)];
            seq.item_id = item.item_id;
            seq.tokens = simulate_walk(item, item.strategies[strat_idx], rng);
            seq.score = score_sequence(item.score_rule, seq.tokens);
            sequences[it].push_back(std::move(seq));
        }
    }

    for (std::size_t t = 0; t < spec.traits.size(); ++t) {
        covariates.add_column(spec.traits[t].name, std::move(trait_cols[t]));
    }
    for (std::size_t it = 0; it < spec.items.size(); ++it) {
        covariates.add_column("strategy_" + spec.items[it].item_id, std::move(strategy_cols[it]));
    }

    SimResult result;
    result.covariates = std::move(covariates);
    result.cohorts.reserve(spec.items.size());
    for (std::size_t it = 0; it < spec.items.size(); ++it) {
        result.cohorts.push_back(make_cohort(spec.items[it].item_id, std::move(sequences[it])));
    }
    return result;
}

AgentSpec read_agent_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open agent spec '" + path + "'");
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("agent spec '" + path + "': " + e.what());
    }

    AgentSpec spec;
    try {
        for (const auto& t : root.value("traits", nlohmann::json::array())) {
            TraitSpec ts;
            ts.name = t.at("name").get<std::string>();
            const std::string dist = t.at("dist").get<std::string>();
            if (dist == "normal") {
                ts.dist = TraitSpec::Dist::normal;
                ts.a = t.value("mean", 0.0);
                ts.b = t.value("sd", 1.0);
            } else if (dist == "uniform") {
                ts.dist = TraitSpec::Dist::uniform;
                ts.a = t.value("low", 0.0);
                ts.b = t.value("high", 1.0);
            } else if (dist == "bernoulli") {
                ts.dist = TraitSpec::Dist::bernoulli;
                ts.a = t.value("p", 0.5);
            } else {
                throw ConfigError("unknown trait distribution '" + dist + "'");
            }
            spec.traits.push_back(std::move(ts));
        }
        for (const auto& item_json : root.at("items")) {
            ItemSpec item;
            item.item_id = item_json.at("item_id").get<std::string>();
            item.alphabet = item_json.at("alphabet").get<std::vector<std::string>>();
            item.max_length = item_json.value("max_length", 400);
            std::map<std::string, std::size_t> token_index;
            for (std::size_t a = 0; a < item.alphabet.size(); ++a) {
                token_index[item.alphabet[a]] = a;
            }
            auto dense = [&](const nlohmann::json& obj, const char* what) {
                std::vector<double> probs(item.alphabet.size(), 0.0);
                for (const auto& [tok, p] : obj.items()) {
                    auto it = token_index.find(tok);
                    if (it == token_index.end()) {
                        throw ConfigError(std::string(what) + " names unknown token '" + tok + "'");
                    }
                    probs[it->second] = p.get<double>();
                }
                return probs;
            };
            for (const auto& s : item_json.at("strategies")) {
                StrategySpec strat;
                strat.name = s.at("name").get<std::string>();
                strat.initial = dense(s.at("initial"), "initial distribution");
                const auto& term = s.at("termination");
                const double term_default = term.value("default", 0.0);
                strat.termination.assign(item.alphabet.size(), term_default);
                for (const auto& [tok, p] : term.items()) {
                    if (tok == "default") continue;
                    auto it = token_index.find(tok);
                    if (it == token_index.end()) {
                        throw ConfigError("termination names unknown token '" + tok + "'");
                    }
                    strat.termination[it->second] = p.get<double>();
                }
                for (const auto& [tok, row] : s.at("transitions").items()) {
                    auto it = token_index.find(tok);
                    if (it == token_index.end()) {
                        throw ConfigError("transitions name unknown token '" + tok + "'");
                    }
                    if (strat.transition.empty()) {
                        strat.transition.assign(item.alphabet.size(),
                                                std::vector<double>(item.alphabet.size(), 0.0));
                    }
                    strat.transition[it->second] = dense(row, "transition row");
                }
                if (strat.transition.empty()) {
                    strat.transition.assign(item.alphabet.size(),
                                            std::vector<double>(item.alphabet.size(), 0.0));
                }
                // The json format is sparse: states with no outgoing
                // transitions listed (absorbing or unreachable under this
                // strategy) default to a self-loop.
                for (std::size_t st = 0; st < item.alphabet.size(); ++st) {
                    double row_sum = 0.0;
                    for (double p : strat.transition[st]) row_sum += p;
                    if (row_sum == 0.0) strat.transition[st][st] = 1.0;
                }
                item.strategies.push_back(std::move(strat));
            }
            if (item_json.contains("mixture")) {
                const auto& mix = item_json.at("mixture");
                item.mixture.bias = mix.value("bias", std::vector<double>{});
                if (mix.contains("coef")) {
                    for (const auto& [trait, coefs] : mix.at("coef").items()) {
                        item.mixture.coef[trait] = coefs.get<std::vector<double>>();
                    }
                }
            } else {
                item.mixture.bias.assign(item.strategies.size(), 0.0);
            }
            if (item_json.contains("score_rule")) {
                for (const auto& group : item_json.at("score_rule").at("point_token_sets")) {
                    item.score_rule.point_token_sets.push_back(
                        group.get<std::vector<std::string>>());
                }
            }
            spec.items.push_back(std::move(item));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("agent spec '" + path + "': " + e.what());
    }
    validate(spec);
    return spec;
}

} // namespace seqfeat

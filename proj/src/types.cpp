#include "seqfeat/types.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "seqfeat/errors.hpp"

namespace seqfeat {

void validate(const ActionSequence& seq) {
    if (seq.tokens.empty()) {
        throw DataError("empty sequence for subject '" + seq.subject_id + "' on item '" +
                        seq.item_id + "'");
    }
    for (const auto& tok : seq.tokens) {
        if (tok.empty()) {
            throw DataError("empty token for subject '" + seq.subject_id + "' on item '" +
                            seq.item_id + "'");
        }
        if (std::any_of(tok.begin(), tok.end(),
                        [](unsigned char c) { return std::isspace(c); })) {
            throw DataError("token '" + tok + "' contains whitespace (subject '" +
                            seq.subject_id + "', item '" + seq.item_id + "')");
        }
    }
    if (seq.score && *seq.score < 0) {
        throw DataError("negative score for subject '" + seq.subject_id + "' on item '" +
                        seq.item_id + "'");
    }
}

int Vocabulary::add(const std::string& label) {
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(labels_.size());
    labels_.push_back(label);
    index_.emplace(label, idx);
    return idx;
}

int Vocabulary::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) {
        throw DataError("label '" + label + "' not in vocabulary of item '" + item_id_ + "'");
    }
    return it->second;
}

std::optional<int> Vocabulary::find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::label_of(int index) const {
    if (index < 0 || index >= size()) {
        throw DataError("vocabulary index out of range for item '" + item_id_ + "'");
    }
    return labels_[static_cast<std::size_t>(index)];
}

Cohort make_cohort(std::string item_id, std::vector<ActionSequence> sequences) {
    Cohort cohort;
    cohort.item_id = std::move(item_id);
    cohort.vocabulary = Vocabulary(cohort.item_id);
    std::unordered_set<std::string> seen;
    for (const auto& seq : sequences) {
        validate(seq);
        if (seq.item_id != cohort.item_id) {
            throw DataError("sequence of subject '" + seq.subject_id + "' belongs to item '" +
                            seq.item_id + "', not '" + cohort.item_id + "'");
        }
        if (!seen.insert(seq.subject_id).second) {
            throw DataError("duplicate subject_id '" + seq.subject_id + "' in item '" +
                            cohort.item_id + "'");
        }
        for (const auto& tok : seq.tokens) cohort.vocabulary.add(tok);
    }
    cohort.sequences = std::move(sequences);
    return cohort;
}

std::vector<int> index_tokens(const ActionSequence& seq, const Vocabulary& vocab) {
    std::vector<int> out;
    out.reserve(seq.tokens.size());
    for (const auto& tok : seq.tokens) out.push_back(vocab.index_of(tok));
    return out;
}

void CovariateTable::add_column(const std::string& name, CovariateColumn column) {
    if (column.values.size() != subject_ids_.size() ||
        column.missing.size() != subject_ids_.size()) {
        throw DataError("covariate column '" + name + "' length does not match subject count");
    }
    if (columns_.count(name)) throw DataError("duplicate covariate column '" + name + "'");
    column_names_.push_back(name);
    columns_.emplace(name, std::move(column));
}

bool CovariateTable::has_column(const std::string& name) const { return columns_.count(name) > 0; }

const CovariateColumn& CovariateTable::column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw DataError("unknown covariate column '" + name + "'");
    return it->second;
}

CovariateColumn& CovariateTable::column(const std::string& name) {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw DataError("unknown covariate column '" + name + "'");
    return it->second;
}

} // namespace seqfeat

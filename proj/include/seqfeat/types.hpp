#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace seqfeat {

/// One subject's ordered categorical actions on one item.
struct ActionSequence {
    std::string subject_id;
    std::string item_id;
    std::vector<std::string> tokens;
    std::optional<int> score; // polytomous, >= 0 when present
};

/// Throws DataError unless tokens are non-empty, whitespace-free strings and
/// the score (if any) is non-negative.
void validate(const ActionSequence& seq);

/// Bijection between action label and dense index 0..n-1 for one item.
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::string item_id) : item_id_(std::move(item_id)) {}

    /// Inserts if absent; returns the label's index either way.
    int add(const std::string& label);
    /// Index of a known label; throws DataError if absent.
    int index_of(const std::string& label) const;
    /// Index of a label if present.
    std::optional<int> find(const std::string& label) const;
    const std::string& label_of(int index) const;

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& item_id() const { return item_id_; }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    std::string item_id_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

/// All sequences of one item plus the vocabulary covering their tokens.
struct Cohort {
    std::string item_id;
    std::vector<ActionSequence> sequences;
    Vocabulary vocabulary;

    int size() const { return static_cast<int>(sequences.size()); }
};

/// Builds a cohort from sequences sharing item_id: validates each sequence,
/// enforces unique subject_ids, and indexes tokens in first-occurrence order.
Cohort make_cohort(std::string item_id, std::vector<ActionSequence> sequences);

/// Token-index view of one sequence under a vocabulary.
std::vector<int> index_tokens(const ActionSequence& seq, const Vocabulary& vocab);

struct CovariateColumn {
    enum class Kind { continuous, binary };
    Kind kind = Kind::continuous;
    std::vector<double> values;  // aligned to subject_ids; undefined where missing
    std::vector<bool> missing;
};

/// Per-subject external variables with a missingness mask.
class CovariateTable {
  public:
    CovariateTable() = default;
    explicit CovariateTable(std::vector<std::string> subject_ids)
        : subject_ids_(std::move(subject_ids)) {}

    void add_column(const std::string& name, CovariateColumn column);
    bool has_column(const std::string& name) const;
    const CovariateColumn& column(const std::string& name) const; // throws DataError
    CovariateColumn& column(const std::string& name);

    const std::vector<std::string>& subject_ids() const { return subject_ids_; }
    const std::vector<std::string>& column_names() const { return column_names_; }
    int n_subjects() const { return static_cast<int>(subject_ids_.size()); }

  private:
    std::vector<std::string> subject_ids_;
    std::vector<std::string> column_names_; // insertion order, drives csv layout
    std::unordered_map<std::string, CovariateColumn> columns_;
};

} // namespace seqfeat

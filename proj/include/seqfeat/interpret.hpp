#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "seqfeat/types.hpp"

namespace seqfeat {

/// Analyst-defined probe evaluated against one token list.
struct PatternSpec {
    enum class Kind { contains_token, contains_subsequence, token_count, predicate };
    Kind kind = Kind::contains_token;
    std::string token;                     // contains_token / token_count
    std::vector<std::string> subsequence;  // contains_subsequence (contiguous run)
    std::string predicate_name;            // predicate
    std::string label;                     // for file output; defaults from payload
};

/// Named user predicates for item-specific patterns.
class PatternRegistry {
  public:
    using Predicate = std::function<double(const std::vector<std::string>&)>;
    void add(const std::string& name, Predicate fn);
    const Predicate& get(const std::string& name) const; // throws ConfigError
  private:
    std::map<std::string, Predicate> fns_;
};

/// Pattern value for one sequence: 0/1 for contains-* kinds, occurrence count
/// for token_count, the predicate's value otherwise.
double pattern_value(const PatternSpec& spec, const std::vector<std::string>& tokens,
                     const PatternRegistry* registry = nullptr);

struct RankedRecord {
    int rank;    // 1-based within the score ordering
    double score;
    std::string subject_id;
    std::vector<std::string> tokens;
};

/// Sequences sorted by score (ties by subject_id), every interval-th emitted
/// starting at rank 1.
std::vector<RankedRecord> rank_export(const Cohort& cohort, const std::vector<double>& scores,
                                      int interval);

void write_rank_export(const std::string& path, const std::vector<RankedRecord>& records);

/// Per-grid-point statistic over the `window` individuals whose scores are
/// nearest the grid value (ties by index, exactly `window` chosen).
struct PatternSeries {
    std::vector<double> grid;      // ascending
    std::vector<double> statistic; // mean pattern value over the window
    int window = 100;
};

/// Grid = `grid_size` equally spaced quantiles of the score distribution.
/// Throws DataError when N < window, naming the override.
PatternSeries pattern_series(const Cohort& cohort, const std::vector<double>& scores,
                             const PatternSpec& pattern, int grid_size = 40, int window = 100,
                             const PatternRegistry* registry = nullptr);

/// Tricube-weighted local linear fit over the ceil(span*N) nearest neighbors
/// of each x; no robustness iterations. Returns fitted values at sorted x.
/// Degenerate windows (all identical x) fall back to the local weighted mean.
struct LowessFit {
    std::vector<double> x; // sorted
    std::vector<double> fitted;
};

LowessFit lowess(const std::vector<double>& x, const std::vector<double>& y, double span = 2.0 / 3.0);

/// LOWESS of a variable against component scores.
LowessFit component_variable_curve(const std::vector<double>& scores,
                                   const std::vector<double>& variable, double span = 2.0 / 3.0);

/// Linear interpolation of a fitted curve at new abscissae (clamped at the
/// ends).
std::vector<double> interpolate(const LowessFit& fit, const std::vector<double>& at);

/// Plot-data csv over the pattern grid:
/// component_score,smoothed_variable,pattern_statistic,smoothed_pattern_statistic
void write_plot_csv(const std::string& path, const PatternSeries& series,
                    const LowessFit& variable_curve, double span = 2.0 / 3.0);

} // namespace seqfeat

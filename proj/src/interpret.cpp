#include "seqfeat/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "seqfeat/errors.hpp"
#include "seqfeat/io.hpp"

namespace seqfeat {

void PatternRegistry::add(const std::string& name, Predicate fn) {
    if (!fn) throw ConfigError("pattern predicate '" + name + "' is empty");
    fns_[name] = std::move(fn);
}

const PatternRegistry::Predicate& PatternRegistry::get(const std::string& name) const {
    auto it = fns_.find(name);
    if (it == fns_.end()) throw ConfigError("unknown pattern predicate '" + name + "'");
    return it->second;
}

namespace {

bool contains_run(const std::vector<std::string>& tokens, const std::vector<std::string>& run) {
    if (run.empty() || run.size() > tokens.size()) return false;
    for (std::size_t i = 0; i + run.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < run.size(); ++j) {
            if (tokens[i + j] != run[j]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

} // namespace

double pattern_value(const PatternSpec& spec, const std::vector<std::string>& tokens,
                     const PatternRegistry* registry) {
    switch (spec.kind) {
        case PatternSpec::Kind::contains_token:
            return std::find(tokens.begin(), tokens.end(), spec.token) != tokens.end() ? 1.0 : 0.0;
        case PatternSpec::Kind::contains_subsequence:
            return contains_run(tokens, spec.subsequence) ? 1.0 : 0.0;
        case PatternSpec::Kind::token_count:
            return static_cast<double>(std::count(tokens.begin(), tokens.end(), spec.token));
        case PatternSpec::Kind::predicate:
            if (!registry) throw ConfigError("pattern predicate requires a registry");
            return registry->get(spec.predicate_name)(tokens);
    }
    throw ConfigError("unknown pattern kind");
}

std::vector<RankedRecord> rank_export(const Cohort& cohort, const std::vector<double>& scores,
                                      int interval) {
    if (interval < 1) throw ConfigError("rank_export: interval must be >= 1");
    if (scores.size() != static_cast<std::size_t>(cohort.size())) {
        throw DataError("rank_export: scores not aligned to cohort");
    }

    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
        }
        // Ties break by subject_id for a stable, deterministic order.
        return cohort.sequences[static_cast<std::size_t>(a)].subject_id <
               cohort.sequences[static_cast<std::size_t>(b)].subject_id;
    });

    std::vector<RankedRecord> records;
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(interval)) {
        const auto& seq = cohort.sequences[static_cast<std::size_t>(order[pos])];
        records.push_back({static_cast<int>(pos) + 1, scores[static_cast<std::size_t>(order[pos])],
                           seq.subject_id, seq.tokens});
    }
    return records;
}

void write_rank_export(const std::string& path, const std::vector<RankedRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    for (const auto& rec : records) {
        out << "rank " << rec.rank << "  score " << format_double(rec.score) << "  subject "
            << rec.subject_id << "\n  ";
        for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
            if (i) out << ' ';
            out << rec.tokens[i];
        }
        out << '\n';
    }
}

namespace {

// Equally spaced quantiles with linear interpolation between order statistics.
std::vector<double> quantile_grid(std::vector<double> sorted_scores, int grid_size) {
    const std::size_t n = sorted_scores.size();
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_size));
    for (int g = 0; g < grid_size; ++g) {
        const double q = grid_size == 1 ? 0.5
                                        : static_cast<double>(g) / static_cast<double>(grid_size - 1);
        const double pos = q * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        grid.push_back((1.0 - frac) * sorted_scores[lo] + frac * sorted_scores[hi]);
    }
    return grid;
}

} // namespace

PatternSeries pattern_series(const Cohort& cohort, const std::vector<double>& scores,
                             const PatternSpec& pattern, int grid_size, int window,
                             const PatternRegistry* registry) {
    const int n = cohort.size();
    if (scores.size() != static_cast<std::size_t>(n)) {
        throw DataError("pattern_series: scores not aligned to cohort");
    }
    if (grid_size < 1) throw ConfigError("pattern_series: grid_size must be >= 1");
    if (window < 1) throw ConfigError("pattern_series: window must be >= 1");
    if (n < window) {
        throw DataError("pattern_series: cohort has " + std::to_string(n) +
                        " subjects, fewer than the window of " + std::to_string(window) +
                        "; pass a smaller window override");
    }

    std::vector<double> values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] =
            pattern_value(pattern, cohort.sequences[static_cast<std::size_t>(i)].tokens, registry);
    }

    std::vector<double> sorted_scores = scores;
    std::sort(sorted_scores.begin(), sorted_scores.end());

    PatternSeries series;
    series.window = window;
    series.grid = quantile_grid(std::move(sorted_scores), grid_size);

    std::vector<int> idx(static_cast<std::size_t>(n));
    for (double g : series.grid) {
        std::iota(idx.begin(), idx.end(), 0);
        // Nearest `window` individuals by |score - g|, ties by index.
        std::nth_element(idx.begin(), idx.begin() + (window - 1), idx.end(), [&](int a, int b) {
            const double da = std::abs(scores[static_cast<std::size_t>(a)] - g);
            const double db = std::abs(scores[static_cast<std::size_t>(b)] - g);
            if (da != db) return da < db;
            return a < b;
        });
        double sum = 0.0;
        for (int i = 0; i < window; ++i) sum += values[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        series.statistic.push_back(sum / static_cast<double>(window));
    }
    return series;
}

LowessFit lowess(const std::vector<double>& x, const std::vector<double>& y, double span) {
    const std::size_t n = x.size();
    if (n != y.size()) throw DataError("lowess: x and y lengths disagree");
    if (n < 3) throw DataError("lowess: need at least 3 points");
    if (span <= 0.0 || span > 1.0) throw ConfigError("lowess: span must lie in (0, 1]");

    // Sort by (x, y): the fit is then a function of the point multiset only.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }

    const std::size_t window =
        std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(span * n))));

    LowessFit fit;
    fit.x = xs;
    fit.fitted.resize(n);

    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // Slide the window of nearest neighbors (x is sorted).
        while (lo + window < n &&
               xs[i] - xs[lo] > xs[lo + window] - xs[i]) {
            ++lo;
        }
        const std::size_t hi = lo + window - 1;
        const double x0 = xs[i];
        const double d_max = std::max(x0 - xs[lo], xs[hi] - x0);

        if (d_max == 0.0) {
            // Degenerate window: all abscissae identical; local mean.
            double sum = 0.0;
            for (std::size_t j = lo; j <= hi; ++j) sum += ys[j];
            fit.fitted[i] = sum / static_cast<double>(window);
            continue;
        }

        // Tricube weights with the bandwidth nudged past the farthest point
        // so boundary points keep an (infinitesimal) positive weight and a
        // two-point window still determines a line.
        const double h = d_max * (1.0 + 1e-9);
        double sw = 0.0, swx = 0.0, swy = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double u = std::abs(xs[j] - x0) / h;
            const double t = 1.0 - u * u * u;
            const double w = t * t * t;
            sw += w;
            swx += w * (xs[j] - x0);
            swy += w * ys[j];
        }
        const double xbar = swx / sw;
        const double ybar = swy / sw;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double u = std::abs(xs[j] - x0) / h;
            const double t = 1.0 - u * u * u;
            const double w = t * t * t;
            const double dx = (xs[j] - x0) - xbar;
            sxx += w * dx * dx;
            sxy += w * dx * (ys[j] - ybar);
        }
        if (sxx <= 0.0) {
            fit.fitted[i] = ybar; // weighted-mean fallback
        } else {
            const double slope = sxy / sxx;
            // Value at x0, i.e. local offset -xbar from the weighted center.
            fit.fitted[i] = ybar + slope * (0.0 - xbar);
        }
    }
    return fit;
}

LowessFit component_variable_curve(const std::vector<double>& scores,
                                   const std::vector<double>& variable, double span) {
    return lowess(scores, variable, span);
}

std::vector<double> interpolate(const LowessFit& fit, const std::vector<double>& at) {
    if (fit.x.empty()) throw DataError("interpolate: empty fit");
    std::vector<double> out;
    out.reserve(at.size());
    for (double v : at) {
        if (v <= fit.x.front()) {
            out.push_back(fit.fitted.front());
            continue;
        }
        if (v >= fit.x.back()) {
            out.push_back(fit.fitted.back());
            continue;
        }
        const auto it = std::upper_bound(fit.x.begin(), fit.x.end(), v);
        const std::size_t hi = static_cast<std::size_t>(it - fit.x.begin());
        const std::size_t lo = hi - 1;
        const double gap = fit.x[hi] - fit.x[lo];
        const double frac = gap > 0.0 ? (v - fit.x[lo]) / gap : 0.0;
        out.push_back((1.0 - frac) * fit.fitted[lo] + frac * fit.fitted[hi]);
    }
    return out;
}

void write_plot_csv(const std::string& path, const PatternSeries& series,
                    const LowessFit& variable_curve, double span) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    const std::vector<double> smoothed_variable = interpolate(variable_curve, series.grid);
    const LowessFit smoothed_stat = lowess(series.grid, series.statistic, span);
    const std::vector<double> stat_curve = interpolate(smoothed_stat, series.grid);
    out << "component_score,smoothed_variable,pattern_statistic,smoothed_pattern_statistic\n";
    for (std::size_t i = 0; i < series.grid.size(); ++i) {
        out << format_double(series.grid[i]) << ',' << format_double(smoothed_variable[i]) << ','
            << format_double(series.statistic[i]) << ',' << format_double(stat_curve[i]) << '\n';
    }
}

} // namespace seqfeat

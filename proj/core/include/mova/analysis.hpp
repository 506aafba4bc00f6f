#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mova/harness.hpp"
#include "mova/stats.hpp"

namespace mova {

// Fixed presentation order: environments and agents appear in tables the way
// the stock experiments enumerate them, distorted conditions after the
// untouched one, alignment before primary.
int env_rank(const std::string& env);
int agent_rank(const std::string& agent);
bool canonical_condition_less(const ConditionSpec& a, const ConditionSpec& b);
bool condition_equal(const ConditionSpec& a, const ConditionSpec& b);

struct ConditionAggregate {
    ConditionSpec cond;
    std::vector<double> run_online_means;  // one entry per run
    std::vector<double> run_offline_means; // runs without offline episodes drop out
};

struct SummaryRow {
    ConditionSpec cond;
    int n = 0;
    double mean_r_star = 0.0;
    double sd_r_star = 0.0;
    bool has_test = false;
    WelchResult test;
    std::string stars;
    std::string direction = "none"; // "up"/"down" when starred, else "none"
    bool best = false;     // within 10% of the row's best agent
};

// Streaming collector for episode records. Both the sweep (in memory) and the
// report command (from CSV) feed it, so their outputs match byte for byte.
class SummaryAccumulator {
public:
    void add(const ConditionSpec& cond, const EpisodeRecord& record);

    bool empty() const { return stats_.empty(); }

    // Per-condition run means, canonically ordered.
    std::vector<ConditionAggregate> aggregates() const;

    // Summary rows with tloa-baseline comparisons. Every non-baseline row is
    // tested against the same condition run by tloa, falling back to the
    // environment's undistorted tloa row; a group that contains no tloa rows
    // at all skips the tests.
    std::vector<SummaryRow> summarize() const;

    void write_summary_csv(std::ostream& out) const;
    void write_table_markdown(std::ostream& out) const;

    // One learning-curve CSV per condition under `dir`: per online episode,
    // across-run means of both reward sums and the combined return, plus a
    // trailing rolling mean of the combined return.
    void write_curves(const std::string& dir, int rolling_window) const;

private:
    struct ConditionStats {
        std::vector<double> run_online_sum;
        std::vector<long long> run_online_count;
        std::vector<double> run_offline_sum;
        std::vector<long long> run_offline_count;
        std::vector<double> episode_online_sum;
        std::vector<double> episode_online_rp;
        std::vector<double> episode_online_ra;
        std::vector<long long> episode_online_count;
    };

    struct KeyLess {
        bool operator()(const ConditionSpec& a, const ConditionSpec& b) const {
            return canonical_condition_less(a, b);
        }
    };

    std::map<ConditionSpec, ConditionStats, KeyLess> stats_;
};

const std::string& summary_csv_header();

// File name stem identifying a condition, used for curve files.
std::string condition_slug(const ConditionSpec& cond);

// Human-readable row label: "base", "primary x0.01", "alignment g=100", ...
std::string condition_row_label(const ConditionSpec& cond, bool granularity_view);

} // namespace mova

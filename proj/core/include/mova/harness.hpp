#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mova/agent.hpp"
#include "mova/gridworld.hpp"

namespace mova {

enum class ScaleTarget { None, Primary, Alignment, Both };
enum class GranTarget { None, Primary, Alignment };
enum class Phase { Online, Offline };

const char* scale_target_name(ScaleTarget t);
ScaleTarget parse_scale_target(const std::string& name);
const char* gran_target_name(GranTarget t);
GranTarget parse_gran_target(const std::string& name);
const char* phase_name(Phase p);
Phase parse_phase(const std::string& name);

// One experimental cell: which agent runs in which environment, and how the
// reward signal or the agent's value resolution is distorted.
struct ConditionSpec {
    std::string experiment = "run";
    std::string env;
    std::string agent;
    UpdateMode mode = UpdateMode::QValues;
    ScaleTarget scale_target = ScaleTarget::None;
    double scale_factor = 1.0;
    GranTarget gran_target = GranTarget::None;
    double gran_size = 0.0;
};

// Reward multipliers the agent sees during learning. Recorded sums stay in
// base units so scores from different conditions compare directly.
struct ScalePair {
    double primary = 1.0;
    double alignment = 1.0;
};

ScalePair condition_scaling(const ConditionSpec& cond);

struct RunSettings {
    int runs = 100;
    int online_episodes = 5000;
    int offline_episodes = 100;
    uint64_t base_seed = 1;
    int threads = 0; // 0 picks the hardware thread count
    double alpha = 0.1;
    double gamma = 1.0;
    double online_epsilon = 0.1;
    double offline_epsilon = 0.0;
    double tloa_threshold = 0.0;
    double transform_scale = 1.0;
};

struct EpisodeRecord {
    int run = 0;
    int episode = 0; // counts from 0 within each phase
    Phase phase = Phase::Online;
    int steps = 0;
    double sum_primary = 0.0;
    double sum_alignment = 0.0;
    double r_star = 0.0;
};

// Builds the agent a condition asks for, sized for `env`.
TabularAgent make_agent(const Environment& env, const ConditionSpec& cond,
                        const RunSettings& settings);

// One episode from the start state until the task ends or the step cap hits.
// Learning updates happen only when `learn` is set.
EpisodeRecord run_episode(const Environment& env, TabularAgent& agent,
                          const ScalePair& scaling, double epsilon, bool learn,
                          Rng& rng);

// All runs of one condition, records ordered by (run, phase, episode).
// Runs are independent (fresh agent, seed derived from `condition_seed`) and
// execute on `threads` worker threads; the output order never depends on the
// thread count. When `final_tables` is given it receives each run's learned
// Q-table, indexed by run.
std::vector<EpisodeRecord> run_condition(const Environment& env,
                                         const ConditionSpec& cond,
                                         const RunSettings& settings,
                                         uint64_t condition_seed,
                                         std::vector<QTable>* final_tables = nullptr);

// Q-table CSV for offline inspection: state_id,action_id,q_p,q_a.
void write_qtable_csv(std::ostream& out, const QTable& table);

// Seed for the i-th condition of a sweep.
uint64_t derive_condition_seed(uint64_t base_seed, std::size_t condition_index);

// Deterministic condition lists for the three stock experiments:
//   table1  - every agent in every environment under reward rescaling
//   exp2    - the same grid, learning from transformed rewards
//   table2  - value-resolution sweep for sfella and linear, with a shared
//             untouched tloa baseline per environment
std::vector<ConditionSpec> preset_conditions(const std::string& preset);
const std::vector<std::string>& preset_names();

// episodes.csv column header.
const std::string& episode_csv_header();
void write_episode_csv_header(std::ostream& out);
void write_episode_csv_rows(std::ostream& out, const ConditionSpec& cond,
                            const std::vector<EpisodeRecord>& records);

struct ParsedEpisodeRow {
    ConditionSpec cond;
    EpisodeRecord record;
};

// Streams a CSV produced by write_episode_csv_rows, invoking `sink` per row.
void read_episode_csv(std::istream& in, const std::string& source_name,
                      const std::function<void(const ParsedEpisodeRow&)>& sink);

} // namespace mova

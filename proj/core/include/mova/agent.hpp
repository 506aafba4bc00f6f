#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mova/gridworld.hpp"
#include "mova/rng.hpp"
#include "mova/transforms.hpp"

namespace mova {

// What the learner feeds its utility through: observed rewards before the
// update, or the stored action values at selection time.
enum class UpdateMode { QValues, Rewards };

const char* update_mode_name(UpdateMode mode);
UpdateMode parse_update_mode(const std::string& name);

// Per-state-action estimates for both reward components, zero-initialised.
class QTable {
public:
    QTable(int states, int actions)
        : states_(states), actions_(actions),
          values_(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions) * 2, 0.0) {}

    int states() const { return states_; }
    int actions() const { return actions_; }

    double* at(int state, int action) {
        return values_.data() + (static_cast<std::size_t>(state) * actions_ + action) * 2;
    }
    const double* at(int state, int action) const {
        return values_.data() + (static_cast<std::size_t>(state) * actions_ + action) * 2;
    }

private:
    int states_;
    int actions_;
    std::vector<double> values_;
};

// Pick the action maximising the summed transformed values.
struct UtilityAggregation {
    std::vector<TransformSpec> specs; // one per reward component
};

// Pick lexicographically: first the alignment estimate clipped at the
// threshold, then the primary estimate.
struct ThresholdedLexicographic {
    double threshold = 0.0;
};

using SelectionPolicy = std::variant<UtilityAggregation, ThresholdedLexicographic>;

// Action values this close together count as tied; ties break uniformly.
inline constexpr double kTieTolerance = 1e-12;

// Best action in `state` under the policy. Consumes one bounded draw only
// when two or more actions tie.
int greedy_action(const QTable& q, int state, const SelectionPolicy& policy, Rng& rng);

// Epsilon-greedy: always consumes one uniform draw for the explore decision,
// one bounded draw more when exploring.
int select_action(const QTable& q, int state, const SelectionPolicy& policy,
                  double epsilon, Rng& rng);

// Policy actually used when choosing actions and bootstrapping under `mode`.
// Rewards mode moves the transforms onto the observed rewards, so selection
// falls back to a plain sum of the stored values.
SelectionPolicy effective_selection(const SelectionPolicy& policy, UpdateMode mode);

// One off-policy TD step on both components. The bootstrap action is chosen
// greedily in `next_state` under the mode's effective policy; `rng` resolves
// its ties.
void update(QTable& q, int state, int action, const Rewards& reward, int next_state,
            bool done, const SelectionPolicy& policy, UpdateMode mode,
            double alpha, double gamma, Rng& rng);

// Knobs for building a named selection policy.
struct PolicyOptions {
    double transform_scale = 1.0;
    double primary_granularity = 0.0;
    double alignment_granularity = 0.0;
    double tloa_threshold = 0.0;
};

// Named policy construction. The registry maps an agent name to a policy
// factory; additional aggregators can be registered at startup.
SelectionPolicy make_policy(const std::string& agent, const PolicyOptions& options);
void register_policy(const std::string& agent,
                     SelectionPolicy (*factory)(const PolicyOptions&));
std::vector<std::string> agent_names();

struct AgentSettings {
    UpdateMode mode = UpdateMode::QValues;
    double alpha = 0.1;
    double gamma = 1.0;
};

// Q-table plus policy, bundled for the harness.
class TabularAgent {
public:
    TabularAgent(int states, int actions, SelectionPolicy policy, AgentSettings settings)
        : q_(states, actions), policy_(std::move(policy)),
          acting_(effective_selection(policy_, settings.mode)), settings_(settings) {}

    int act(int state, double epsilon, Rng& rng) const {
        return select_action(q_, state, acting_, epsilon, rng);
    }

    void learn(int state, int action, const Rewards& reward, int next_state,
               bool done, Rng& rng) {
        update(q_, state, action, reward, next_state, done, policy_, settings_.mode,
               settings_.alpha, settings_.gamma, rng);
    }

    const QTable& q() const { return q_; }
    QTable& q() { return q_; }
    const SelectionPolicy& policy() const { return policy_; }
    const SelectionPolicy& acting_policy() const { return acting_; }

private:
    QTable q_;
    SelectionPolicy policy_;
    SelectionPolicy acting_;
    AgentSettings settings_;
};

} // namespace mova

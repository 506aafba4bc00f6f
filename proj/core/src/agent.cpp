#include "mova/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "mova/error.hpp"

namespace mova {

const char* update_mode_name(UpdateMode mode) {
    return mode == UpdateMode::QValues ? "q" : "reward";
}

UpdateMode parse_update_mode(const std::string& name) {
    if (name == "q") return UpdateMode::QValues;
    if (name == "reward") return UpdateMode::Rewards;
    throw ConfigError("unknown update mode: " + name);
}

namespace {

double action_utility(const QTable& q, int state, int action, const UtilityAggregation& u) {
    return aggregate(u.specs, q.at(state, action), 2);
}

int pick_tied(int tie_count, int first_tied, Rng& rng,
              const auto& is_tied, int n_actions) {
    if (tie_count <= 1) return first_tied;
    int target = static_cast<int>(rng.bounded(static_cast<uint64_t>(tie_count)));
    for (int a = 0; a < n_actions; ++a) {
        if (!is_tied(a)) continue;
        if (target == 0) return a;
        --target;
    }
    return first_tied;
}

} // namespace

int greedy_action(const QTable& q, int state, const SelectionPolicy& policy, Rng& rng) {
    const int n = q.actions();
    if (const auto* util = std::get_if<UtilityAggregation>(&policy)) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
            best = std::max(best, action_utility(q, state, a, *util));
        }
        const auto is_tied = [&](int a) {
            return action_utility(q, state, a, *util) >= best - kTieTolerance;
        };
        int ties = 0, first = 0;
        for (int a = n - 1; a >= 0; --a) {
            if (is_tied(a)) {
                ++ties;
                first = a;
            }
        }
        return pick_tied(ties, first, rng, is_tied, n);
    }

    const auto& lex = std::get<ThresholdedLexicographic>(policy);
    double best_clipped = -std::numeric_limits<double>::infinity();
    double best_primary = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
        const double* v = q.at(state, a);
        const double clipped = std::min(v[1], lex.threshold);
        if (clipped > best_clipped ||
            (clipped == best_clipped && v[0] > best_primary)) {
            best_clipped = clipped;
            best_primary = v[0];
        }
    }
    const auto is_tied = [&](int a) {
        const double* v = q.at(state, a);
        return std::min(v[1], lex.threshold) >= best_clipped - kTieTolerance &&
               v[0] >= best_primary - kTieTolerance;
    };
    int ties = 0, first = 0;
    for (int a = n - 1; a >= 0; --a) {
        if (is_tied(a)) {
            ++ties;
            first = a;
        }
    }
    return pick_tied(ties, first, rng, is_tied, n);
}

int select_action(const QTable& q, int state, const SelectionPolicy& policy,
                  double epsilon, Rng& rng) {
    const double draw = rng.uniform01();
    if (draw < epsilon) {
        return static_cast<int>(rng.bounded(static_cast<uint64_t>(q.actions())));
    }
    return greedy_action(q, state, policy, rng);
}

SelectionPolicy effective_selection(const SelectionPolicy& policy, UpdateMode mode) {
    if (mode == UpdateMode::Rewards) {
        if (const auto* util = std::get_if<UtilityAggregation>(&policy)) {
            UtilityAggregation plain;
            plain.specs.assign(util->specs.size(), TransformSpec{});
            return plain;
        }
    }
    return policy;
}

void update(QTable& q, int state, int action, const Rewards& reward, int next_state,
            bool done, const SelectionPolicy& policy, UpdateMode mode,
            double alpha, double gamma, Rng& rng) {
    double r0 = reward.primary;
    double r1 = reward.alignment;
    const SelectionPolicy* bootstrap = &policy;
    static const SelectionPolicy plain_sum =
        UtilityAggregation{{TransformSpec{}, TransformSpec{}}};
    if (mode == UpdateMode::Rewards) {
        if (const auto* util = std::get_if<UtilityAggregation>(&policy)) {
            if (util->specs.size() != 2) {
                throw ConfigError("update: reward transform needs one spec per component");
            }
            r0 = apply_spec(util->specs[0], r0);
            r1 = apply_spec(util->specs[1], r1);
            bootstrap = &plain_sum;
        }
    }
    double target0 = r0;
    double target1 = r1;
    if (!done) {
        const int next_action = greedy_action(q, next_state, *bootstrap, rng);
        const double* next_q = q.at(next_state, next_action);
        target0 += gamma * next_q[0];
        target1 += gamma * next_q[1];
    }
    double* cell = q.at(state, action);
    cell[0] += alpha * (target0 - cell[0]);
    cell[1] += alpha * (target1 - cell[1]);
}

namespace {

using PolicyFactory = SelectionPolicy (*)(const PolicyOptions&);

SelectionPolicy two_spec_policy(TransformKind primary, TransformKind alignment,
                                const PolicyOptions& o) {
    UtilityAggregation util;
    util.specs = {
        TransformSpec{primary, o.transform_scale, o.primary_granularity},
        TransformSpec{alignment, o.transform_scale, o.alignment_granularity},
    };
    return util;
}

SelectionPolicy make_seba(const PolicyOptions& o) {
    return two_spec_policy(TransformKind::SebaPerformance, TransformKind::SebaAlignment, o);
}
SelectionPolicy make_sfella(const PolicyOptions& o) {
    return two_spec_policy(TransformKind::Sfella, TransformKind::Sfella, o);
}
SelectionPolicy make_ela(const PolicyOptions& o) {
    return two_spec_policy(TransformKind::Ela, TransformKind::Ela, o);
}
SelectionPolicy make_lela(const PolicyOptions& o) {
    return two_spec_policy(TransformKind::Lela, TransformKind::Lela, o);
}
SelectionPolicy make_linear(const PolicyOptions& o) {
    return two_spec_policy(TransformKind::Linear, TransformKind::Linear, o);
}
SelectionPolicy make_tloa(const PolicyOptions& o) {
    return ThresholdedLexicographic{o.tloa_threshold};
}

std::vector<std::pair<std::string, PolicyFactory>>& policy_registry() {
    static std::vector<std::pair<std::string, PolicyFactory>> registry = {
        {"seba", &make_seba},     {"sfella", &make_sfella}, {"ela", &make_ela},
        {"lela", &make_lela},     {"linear", &make_linear}, {"tloa", &make_tloa},
    };
    return registry;
}

} // namespace

SelectionPolicy make_policy(const std::string& agent, const PolicyOptions& options) {
    for (const auto& [name, factory] : policy_registry()) {
        if (name == agent) return factory(options);
    }
    throw ConfigError("unknown agent: " + agent);
}

void register_policy(const std::string& agent, SelectionPolicy (*factory)(const PolicyOptions&)) {
    for (auto& [name, existing] : policy_registry()) {
        if (name == agent) {
            existing = factory;
            return;
        }
    }
    policy_registry().emplace_back(agent, factory);
}

std::vector<std::string> agent_names() {
    std::vector<std::string> out;
    for (const auto& [name, factory] : policy_registry()) out.push_back(name);
    return out;
}

} // namespace mova

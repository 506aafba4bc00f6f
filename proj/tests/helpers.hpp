#pragma once

// Shared test utilities: a tiny deterministic MDP with a known optimum,
// exhaustive-search oracles for the deterministic gridworlds, a forced-roll
// drop-rate probe, and the randomized transform property suites. Both the
// doctest binary and the acceptance gate include this header.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mova/agent.hpp"
#include "mova/gridworld.hpp"
#include "mova/harness.hpp"
#include "mova/rng.hpp"
#include "mova/transforms.hpp"

namespace testutil {

// --- three-state chain with a known optimum -------------------------------
//
//   state 0 --right--> state 1 --right--> state 2 (done, +9 = -1 step +10)
//     ^                   |
//     +-------left--------+   (left always lands on state 0, reward -1)
//
// With gamma = 1 the optimal primary values are Q(0,right) = 8,
// Q(1,right) = 9 and Q(s,left) = 7; the alignment reward is identically 0.
class ChainEnv : public mova::Environment {
public:
    enum Action : int { kLeft = 0, kRight = 1 };

    const char* name() const override { return "chain"; }
    int state_count() const override { return 3; }
    int action_count() const override { return 2; }
    int start_state() const override { return 0; }
    double r_star_weight() const override { return 1.0; }
    int violation_count(int) const override { return 0; }

    mova::StepOutcome step(int state, int action, mova::Rng&) const override {
        mova::StepOutcome out;
        if (action == kRight) {
            if (state == 0) {
                out.next_state = 1;
                out.reward = {-1.0, 0.0};
            } else {
                out.next_state = 2;
                out.reward = {9.0, 0.0};
                out.done = true;
            }
        } else {
            out.next_state = 0;
            out.reward = {-1.0, 0.0};
        }
        return out;
    }
};

inline constexpr double kChainOptimum[2][2] = {
    // left, right
    {7.0, 8.0}, // state 0
    {7.0, 9.0}, // state 1
};

// Environment wrapper that logs every (state, action) pair it is stepped
// with, for trajectory-identity checks.
class RecordingEnv : public mova::Environment {
public:
    explicit RecordingEnv(const mova::Environment& inner) : inner_(inner) {}

    std::vector<std::pair<int, int>>& log() { return log_; }

    const char* name() const override { return inner_.name(); }
    int state_count() const override { return inner_.state_count(); }
    int action_count() const override { return inner_.action_count(); }
    int start_state() const override { return inner_.start_state(); }
    double r_star_weight() const override { return inner_.r_star_weight(); }
    int violation_count(int s) const override { return inner_.violation_count(s); }

    mova::StepOutcome step(int state, int action, mova::Rng& rng) const override {
        log_.emplace_back(state, action);
        return inner_.step(state, action, rng);
    }

private:
    const mova::Environment& inner_;
    mutable std::vector<std::pair<int, int>> log_;
};

inline bool qtables_equal(const mova::QTable& a, const mova::QTable& b) {
    if (a.states() != b.states() || a.actions() != b.actions()) return false;
    for (int s = 0; s < a.states(); ++s) {
        for (int act = 0; act < a.actions(); ++act) {
            const double* va = a.at(s, act);
            const double* vb = b.at(s, act);
            if (va[0] != vb[0] || va[1] != vb[1]) return false;
        }
    }
    return true;
}

// Trains one agent on the chain and returns it.
inline mova::TabularAgent chain_train(const std::string& agent_name,
                                      mova::UpdateMode mode, int episodes,
                                      uint64_t seed) {
    ChainEnv env;
    mova::AgentSettings settings;
    settings.mode = mode;
    settings.alpha = 0.1;
    settings.gamma = 1.0;
    mova::TabularAgent agent(env.state_count(), env.action_count(),
                             mova::make_policy(agent_name, mova::PolicyOptions{}),
                             settings);
    mova::Rng rng(seed);
    for (int e = 0; e < episodes; ++e) {
        mova::run_episode(env, agent, mova::ScalePair{}, 0.1, true, rng);
    }
    return agent;
}

// --- exhaustive search over a deterministic environment -------------------

struct TerminalPath {
    int state = 0;   // terminal state
    int actions = 0; // fewest actions that reach it
};

struct SearchResult {
    std::vector<int> dist;               // per state; -1 = not reached
    std::vector<TerminalPath> terminals; // deduplicated, minimal depth each
};

// Breadth-first search over the full transition graph from the start state.
// `allow` (when set) must accept every state on a path, terminals included.
inline SearchResult exhaustive_search(const mova::Environment& env,
                                      const std::function<bool(int)>& allow = {}) {
    SearchResult result;
    result.dist.assign(static_cast<std::size_t>(env.state_count()), -1);
    std::map<int, int> terminal_depth;
    mova::Rng rng(0); // deterministic envs ignore it
    std::deque<int> queue;
    const int start = env.start_state();
    if (allow && !allow(start)) return result;
    result.dist[static_cast<std::size_t>(start)] = 0;
    queue.push_back(start);
    while (!queue.empty()) {
        const int state = queue.front();
        queue.pop_front();
        const int d = result.dist[static_cast<std::size_t>(state)];
        for (int action = 0; action < env.action_count(); ++action) {
            const auto out = env.step(state, action, rng);
            if (allow && !allow(out.next_state)) continue;
            if (out.done) {
                auto [it, fresh] = terminal_depth.emplace(out.next_state, d + 1);
                if (!fresh) it->second = std::min(it->second, d + 1);
                continue;
            }
            auto& slot = result.dist[static_cast<std::size_t>(out.next_state)];
            if (slot == -1) {
                slot = d + 1;
                queue.push_back(out.next_state);
            }
        }
    }
    for (const auto& [state, depth] : terminal_depth) {
        result.terminals.push_back({state, depth});
    }
    return result;
}

inline int min_terminal_actions(const SearchResult& search) {
    int best = -1;
    for (const auto& t : search.terminals) {
        if (best == -1 || t.actions < best) best = t.actions;
    }
    return best;
}

// Highest combined return reachable by any terminal path: the primary sum is
// -actions + 50 (goal bonus) and the alignment sum telescopes to the change
// in violation count.
inline double best_terminal_r_star(const mova::Environment& env,
                                   const SearchResult& search) {
    const int start_viol = env.violation_count(env.start_state());
    double best = -1e300;
    for (const auto& t : search.terminals) {
        const double rp = -static_cast<double>(t.actions) + 50.0;
        const double ra = static_cast<double>(start_viol - env.violation_count(t.state));
        best = std::max(best, mova::episode_r_star(rp, ra, env.r_star_weight()));
    }
    return best;
}

// Fraction of forced carrying-two transitions that drop a bottle.
inline double measured_drop_rate(uint64_t seed, int transitions) {
    auto env_owner = mova::make_environment("bb");
    const auto& env = dynamic_cast<const mova::BottlesEnv&>(*env_owner);
    mova::BottlesEnv::Layout mid;
    mid.pos = 2;
    mid.carried = mova::BottlesEnv::kMaxCarried;
    mid.delivered = 0;
    mid.floor.assign(static_cast<std::size_t>(env.cell_count() - 2), 0);
    const int state = env.encode(mid);
    mova::Rng rng(seed);
    int drops = 0;
    for (int i = 0; i < transitions; ++i) {
        const auto out = env.step(state, mova::BottlesEnv::kRight, rng);
        if (env.decode(out.next_state).carried == mid.carried - 1) ++drops;
    }
    return static_cast<double>(drops) / static_cast<double>(transitions);
}

// --- randomized transform property suites ----------------------------------

struct PropertyOutcome {
    long long cases = 0;
    std::string error; // empty on success
};

namespace detail {

inline double log_uniform(mova::Rng& rng, double lo, double hi) {
    return std::exp(std::log(lo) + rng.uniform01() * (std::log(hi) - std::log(lo)));
}

inline double uniform_in(mova::Rng& rng, double lo, double hi) {
    return lo + rng.uniform01() * (hi - lo);
}

inline constexpr mova::TransformKind kAllKinds[] = {
    mova::TransformKind::Linear,          mova::TransformKind::Sfella,
    mova::TransformKind::Ela,             mova::TransformKind::Lela,
    mova::TransformKind::SebaPerformance, mova::TransformKind::SebaAlignment,
};

inline std::string describe_case(mova::TransformKind kind, double c, double x,
                                 const std::string& what) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: kind=%s c=%.17g x=%.17g",
                  what.c_str(), mova::transform_kind_name(kind), c, x);
    return buf;
}

} // namespace detail

// Every kind maps 0 to exactly 0, granularized or not.
inline PropertyOutcome prop_zero_fixpoint(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const auto kind = detail::kAllKinds[rng.bounded(6)];
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        if (mova::transform_value(kind, c, 0.0) != 0.0) {
            out.error = detail::describe_case(kind, c, 0.0, "f(0) != 0");
            return out;
        }
        mova::TransformSpec spec{kind, c, detail::log_uniform(rng, 1e-3, 1e3)};
        if (mova::apply_spec(spec, 0.0) != 0.0) {
            out.error = detail::describe_case(kind, c, 0.0, "granularized f(0) != 0");
            return out;
        }
    }
    return out;
}

// f is nondecreasing in x for every kind and scale.
inline PropertyOutcome prop_monotonicity(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const auto kind = detail::kAllKinds[rng.bounded(6)];
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        double x = detail::uniform_in(rng, -1e6, 1e6);
        double y = detail::uniform_in(rng, -1e6, 1e6);
        if (x > y) std::swap(x, y);
        if (mova::transform_value(kind, c, x) > mova::transform_value(kind, c, y)) {
            out.error = detail::describe_case(kind, c, x, "monotonicity broken");
            return out;
        }
    }
    return out;
}

// Midpoint concavity for the loss-averse kinds. The domain stays clear of
// exp saturation so the 1e-9 slack dominates floating-point rounding.
inline PropertyOutcome prop_concavity(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    const mova::TransformKind kinds[] = {
        mova::TransformKind::Sfella, mova::TransformKind::Ela,
        mova::TransformKind::Lela, mova::TransformKind::SebaAlignment};
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const auto kind = kinds[rng.bounded(4)];
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        const bool squared = kind == mova::TransformKind::SebaAlignment;
        const double lo = squared ? -1000.0 / c : -13.0 / c;
        const double hi = squared ? 0.0 : 1e6 / c;
        const double x = detail::uniform_in(rng, lo, hi);
        const double y = detail::uniform_in(rng, lo, hi);
        const double mid = mova::transform_value(kind, c, 0.5 * (x + y));
        const double chord = 0.5 * (mova::transform_value(kind, c, x) +
                                    mova::transform_value(kind, c, y));
        if (mid < chord - 1e-9) {
            out.error = detail::describe_case(kind, c, x, "concavity broken");
            return out;
        }
    }
    return out;
}

// Losses weigh at least as much as equal-size gains: |f(-x)| >= |f(x)|, x > 0.
inline PropertyOutcome prop_loss_aversion(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const auto kind = detail::kAllKinds[rng.bounded(6)];
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        const double x = detail::log_uniform(rng, 1e-6, 1e6) / c;
        const double gain = std::fabs(mova::transform_value(kind, c, x));
        const double loss = std::fabs(mova::transform_value(kind, c, -x));
        if (loss < gain) {
            out.error = detail::describe_case(kind, c, x, "loss aversion broken");
            return out;
        }
    }
    return out;
}

// The split transform stays C1 at the origin for moderate scales: tiny
// inputs give tiny outputs and both one-sided slopes approach c.
inline PropertyOutcome prop_sfella_smooth(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    const auto kind = mova::TransformKind::Sfella;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const double c = detail::log_uniform(rng, 0.05, 2.0);
        if (std::fabs(mova::transform_value(kind, c, 1e-9)) >= 1e-8 ||
            std::fabs(mova::transform_value(kind, c, -1e-9)) >= 1e-8) {
            out.error = detail::describe_case(kind, c, 1e-9, "f near 0 too large");
            return out;
        }
        const double eps = 1e-6;
        const double up = mova::transform_value(kind, c, eps) / eps;
        const double down = -mova::transform_value(kind, c, -eps) / eps;
        if (std::fabs(up - c) > 1e-3 || std::fabs(down - c) > 1e-3) {
            out.error = detail::describe_case(kind, c, eps, "slope at 0 not ~c");
            return out;
        }
    }
    return out;
}

// The linear term keeps LELA growing at least at rate c; checked on secants
// away from exp saturation, where the difference is numerically meaningful.
inline PropertyOutcome prop_lela_slope(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    const auto kind = mova::TransformKind::Lela;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        double x = detail::uniform_in(rng, -13.0 / c, 1e6 / c);
        double y = detail::uniform_in(rng, -13.0 / c, 1e6 / c);
        if (x > y) std::swap(x, y);
        if (y - x < 1e-3 / c) continue; // differencing noise would dominate
        const double slope = (mova::transform_value(kind, c, y) -
                              mova::transform_value(kind, c, x)) /
                             (y - x);
        if (slope < c * (1.0 - 1e-6)) {
            out.error = detail::describe_case(kind, c, x, "lela slope below c");
            return out;
        }
    }
    return out;
}

// ELA utility never exceeds 1; strictly below until the exp term is smaller
// than double precision can represent next to 1.
inline PropertyOutcome prop_ela_bound(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    const auto kind = mova::TransformKind::Ela;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        const double x = detail::uniform_in(rng, -1e9, 1e9);
        const double f = mova::transform_value(kind, c, x);
        if (f > 1.0) {
            out.error = detail::describe_case(kind, c, x, "ela above 1");
            return out;
        }
        if (c * x <= 30.0 && f >= 1.0) {
            out.error = detail::describe_case(kind, c, x, "ela reached 1 early");
            return out;
        }
    }
    return out;
}

// No overflow anywhere on the extreme input range, alone or aggregated.
inline PropertyOutcome prop_overflow_safety(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const auto kind = detail::kAllKinds[rng.bounded(6)];
        const double c = detail::log_uniform(rng, 0.01, 100.0);
        const double x = detail::uniform_in(rng, -1e9, 1e9);
        if (!std::isfinite(mova::transform_value(kind, c, x))) {
            out.error = detail::describe_case(kind, c, x, "not finite");
            return out;
        }
        const std::vector<mova::TransformSpec> specs = {
            {kind, c, 0.0},
            {detail::kAllKinds[rng.bounded(6)], c, 0.0},
        };
        const std::vector<double> values = {x, detail::uniform_in(rng, -1e9, 1e9)};
        if (!std::isfinite(mova::aggregate(specs, values))) {
            out.error = detail::describe_case(kind, c, x, "aggregate not finite");
            return out;
        }
    }
    return out;
}

// Snapping is idempotent and never moves a value by more than half a step
// (plus representation slack).
inline PropertyOutcome prop_granularity(long long n, uint64_t seed) {
    mova::Rng rng(seed);
    PropertyOutcome out;
    for (long long i = 0; i < n; ++i, ++out.cases) {
        const double g = (rng.bounded(8) == 0) ? 0.0 : detail::log_uniform(rng, 1e-3, 1e3);
        const double x = detail::uniform_in(rng, -1e6, 1e6);
        const double y = mova::granularize(x, g);
        if (mova::granularize(y, g) != y) {
            out.error = detail::describe_case(mova::TransformKind::Linear, g, x,
                                              "granularize not idempotent");
            return out;
        }
        const double slack = 1e-9 * std::max({std::fabs(x), g, 1.0});
        if (std::fabs(x - y) > 0.5 * g + slack) {
            out.error = detail::describe_case(mova::TransformKind::Linear, g, x,
                                              "granularize moved too far");
            return out;
        }
    }
    return out;
}

struct NamedSuite {
    const char* name;
    PropertyOutcome (*run)(long long, uint64_t);
    long long cases;
    uint64_t seed;
};

// The nine randomized invariants behind the transform property gate. Case
// counts sum past 1e5.
inline const std::vector<NamedSuite>& property_suites() {
    static const std::vector<NamedSuite> suites = {
        {"zero fixpoint", prop_zero_fixpoint, 15000, 1001},
        {"monotonicity", prop_monotonicity, 15000, 1002},
        {"concavity", prop_concavity, 15000, 1003},
        {"loss aversion", prop_loss_aversion, 12000, 1004},
        {"smoothness at zero", prop_sfella_smooth, 6000, 1005},
        {"lela slope", prop_lela_slope, 12000, 1006},
        {"ela bound", prop_ela_bound, 10000, 1007},
        {"overflow safety", prop_overflow_safety, 10000, 1008},
        {"granularity", prop_granularity, 15000, 1009},
    };
    return suites;
}

} // namespace testutil

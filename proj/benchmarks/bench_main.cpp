#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "mova/agent.hpp"
#include "mova/gridworld.hpp"
#include "mova/harness.hpp"
#include "mova/rng.hpp"
#include "mova/transforms.hpp"

namespace {

const std::vector<double> kInputs = {-120.0, -7.5, -1.0, -0.01, 0.0,
                                     0.01,   1.0,  7.5,  120.0};

void BM_TransformValue(benchmark::State& state) {
    const auto kind = static_cast<mova::TransformKind>(state.range(0));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mova::transform_value(kind, 1.0, kInputs[i % kInputs.size()]));
        ++i;
    }
}

void BM_Aggregate(benchmark::State& state) {
    const auto kind = static_cast<mova::TransformKind>(state.range(0));
    const std::vector<mova::TransformSpec> specs = {{kind, 1.0, 0.0},
                                                    {kind, 1.0, 0.0}};
    const double values[2] = {3.25, -1.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mova::aggregate(specs, values, 2));
    }
}

void BM_EnvStep(benchmark::State& state, const char* name) {
    const auto env = mova::make_environment(name);
    mova::Rng rng(7);
    int s = env->start_state();
    int tick = 0;
    for (auto _ : state) {
        const auto out =
            env->step(s, tick++ % env->action_count(), rng);
        benchmark::DoNotOptimize(out);
        s = out.done ? env->start_state() : out.next_state;
    }
}

void BM_AgentActLearn(benchmark::State& state, const char* agent_name) {
    const auto env = mova::make_environment("bb");
    mova::AgentSettings settings;
    mova::TabularAgent agent(env->state_count(), env->action_count(),
                             mova::make_policy(agent_name, {}), settings);
    mova::Rng rng(11);
    int s = env->start_state();
    for (auto _ : state) {
        const int action = agent.act(s, 0.1, rng);
        const auto out = env->step(s, action, rng);
        agent.learn(s, action, out.reward, out.next_state, out.done, rng);
        s = out.done ? env->start_state() : out.next_state;
    }
}

void BM_RunEpisode(benchmark::State& state, const char* env_name) {
    const auto env = mova::make_environment(env_name);
    mova::AgentSettings settings;
    mova::TabularAgent agent(env->state_count(), env->action_count(),
                             mova::make_policy("sfella", {}), settings);
    mova::Rng rng(13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mova::run_episode(*env, agent, mova::ScalePair{}, 0.1, true, rng));
    }
}

} // namespace

BENCHMARK(BM_TransformValue)
    ->DenseRange(0, 5)
    ->ArgNames({"kind"});
BENCHMARK(BM_Aggregate)
    ->DenseRange(0, 5)
    ->ArgNames({"kind"});
BENCHMARK_CAPTURE(BM_EnvStep, bb, "bb");
BENCHMARK_CAPTURE(BM_EnvStep, ub, "ub");
BENCHMARK_CAPTURE(BM_EnvStep, sokoban, "sokoban");
BENCHMARK_CAPTURE(BM_EnvStep, doors, "doors");
BENCHMARK_CAPTURE(BM_AgentActLearn, sfella, "sfella");
BENCHMARK_CAPTURE(BM_AgentActLearn, tloa, "tloa");
BENCHMARK_CAPTURE(BM_AgentActLearn, linear, "linear");
BENCHMARK_CAPTURE(BM_RunEpisode, bb, "bb");
BENCHMARK_CAPTURE(BM_RunEpisode, doors, "doors");

BENCHMARK_MAIN();

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mova/analysis.hpp"
#include "mova/error.hpp"
#include "mova/strfmt.hpp"
#include "mova/sweep.hpp"
#include "mova/transforms.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

void validate_run_settings(const mova::RunSettings& s) {
    if (s.runs < 1) throw mova::ConfigError("runs must be at least 1");
    if (s.online_episodes < 0 || s.offline_episodes < 0) {
        throw mova::ConfigError("episode counts must be nonnegative");
    }
    if (s.online_episodes + s.offline_episodes == 0) {
        throw mova::ConfigError("at least one episode per run is required");
    }
    if (s.alpha <= 0.0 || s.alpha > 1.0) {
        throw mova::ConfigError("alpha must be in (0, 1]");
    }
    if (s.gamma < 0.0 || s.gamma > 1.0) {
        throw mova::ConfigError("gamma must be in [0, 1]");
    }
    if (s.online_epsilon < 0.0 || s.online_epsilon > 1.0 ||
        s.offline_epsilon < 0.0 || s.offline_epsilon > 1.0) {
        throw mova::ConfigError("exploration rates must be in [0, 1]");
    }
    if (s.transform_scale <= 0.0) {
        throw mova::ConfigError("c must be positive");
    }
}

// Run-settings flags shared by run and sweep. overlay() copies only the flags
// the user actually passed, so config-file values survive unless overridden.
struct RunSettingsCli {
    mova::RunSettings settings;
    std::vector<std::pair<CLI::Option*,
                          std::function<void(mova::RunSettings&, const mova::RunSettings&)>>>
        fields;

    void attach(CLI::App* cmd) {
        auto add = [&](CLI::Option* opt, auto copy) {
            fields.emplace_back(opt, copy);
        };
        add(cmd->add_option("--runs", settings.runs, "independent runs per condition")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.runs = src.runs; });
        add(cmd->add_option("--episodes", settings.online_episodes,
                            "learning episodes per run")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.online_episodes = src.online_episodes; });
        add(cmd->add_option("--offline", settings.offline_episodes,
                            "greedy evaluation episodes per run")
                ->capture_default_str(),
            [](auto& dst, const auto& src) {
                dst.offline_episodes = src.offline_episodes;
            });
        add(cmd->add_option("--seed", settings.base_seed,
                            "base seed; condition and run seeds derive from it")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.base_seed = src.base_seed; });
        add(cmd->add_option("--threads", settings.threads,
                            "worker threads (0 uses all hardware threads)")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.threads = src.threads; });
        add(cmd->add_option("--alpha", settings.alpha, "learning rate")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.alpha = src.alpha; });
        add(cmd->add_option("--gamma", settings.gamma, "discount")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.gamma = src.gamma; });
        add(cmd->add_option("--epsilon", settings.online_epsilon,
                            "online exploration rate")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.online_epsilon = src.online_epsilon; });
        add(cmd->add_option("--offline-epsilon", settings.offline_epsilon,
                            "offline exploration rate")
                ->capture_default_str(),
            [](auto& dst, const auto& src) {
                dst.offline_epsilon = src.offline_epsilon;
            });
        add(cmd->add_option("--threshold", settings.tloa_threshold,
                            "alignment threshold for the tloa agent")
                ->capture_default_str(),
            [](auto& dst, const auto& src) { dst.tloa_threshold = src.tloa_threshold; });
        add(cmd->add_option("--c", settings.transform_scale,
                            "scale constant inside every transform")
                ->capture_default_str(),
            [](auto& dst, const auto& src) {
                dst.transform_scale = src.transform_scale;
            });
    }

    void overlay(mova::RunSettings& target) const {
        for (const auto& [opt, copy] : fields) {
            if (opt->count() > 0) copy(target, settings);
        }
    }
};

// Splits "primary=10" into target name and value.
std::pair<std::string, double> parse_target_value(const std::string& text,
                                                  const std::string& flag) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
        throw mova::ConfigError(flag + " expects <target>=<value>, got '" + text + "'");
    }
    const std::string target = text.substr(0, eq);
    const std::string value_text = text.substr(eq + 1);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0') {
        throw mova::ConfigError(flag + ": bad numeric value '" + value_text + "'");
    }
    return {target, value};
}

struct CurveRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
};

CurveRange parse_range(const std::string& text) {
    CurveRange range;
    double* slots[3] = {&range.lo, &range.hi, &range.step};
    std::size_t begin = 0;
    for (int part = 0; part < 3; ++part) {
        const std::size_t end =
            part == 2 ? text.size() : text.find(':', begin);
        if (end == std::string::npos) {
            throw mova::ConfigError("--range expects lo:hi:step, got '" + text + "'");
        }
        const std::string piece = text.substr(begin, end - begin);
        char* stop = nullptr;
        *slots[part] = std::strtod(piece.c_str(), &stop);
        if (piece.empty() || stop != piece.c_str() + piece.size()) {
            throw mova::ConfigError("--range: bad numeric part '" + piece + "'");
        }
        begin = end + 1;
    }
    return range;
}

std::string quoted_command_line(int argc, char** argv) {
    std::string line;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) line += ' ';
        const std::string arg = argv[i];
        if (arg.find(' ') != std::string::npos) {
            line += '\'' + arg + '\'';
        } else {
            line += arg;
        }
    }
    return line;
}

void cmd_transform_curves(const std::string& kind_name, double scale,
                          const CurveRange& range, const std::string& out_dir,
                          const std::string& command_line) {
    const mova::TransformKind kind = mova::parse_transform_kind(kind_name);
    const auto samples = mova::curve_samples(kind, scale, range.lo, range.hi, range.step);
    const auto write_rows = [&](std::ostream& out) {
        out << "x,f,df_per_unit\n";
        for (const auto& s : samples) {
            out << mova::str_printf("%.6f,%.6f,%.6f", s.x, s.f, s.df) << '\n';
        }
    };
    if (out_dir.empty()) {
        write_rows(std::cout);
        return;
    }
    std::filesystem::create_directories(out_dir);
    const std::string file = kind_name + ".csv";
    std::ofstream out(out_dir + "/" + file);
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/" + file);
    write_rows(out);
    std::ofstream manifest(out_dir + "/manifest");
    if (!manifest) throw std::runtime_error("cannot write manifest in " + out_dir);
    manifest << nlohmann::json{{"tool", "mova"},
                               {"command", "transform-curves"},
                               {"command_line", command_line},
                               {"kind", kind_name},
                               {"c", scale},
                               {"range", {{"lo", range.lo},
                                          {"hi", range.hi},
                                          {"step", range.step}}},
                               {"rows", samples.size()},
                               {"outputs", {file}}}
                    .dump(2)
             << '\n';
    std::cout << out_dir << "\n";
}

void cmd_maps(const std::string& only_env) {
    for (const auto& name : mova::environment_names()) {
        if (!only_env.empty() && name != only_env) continue;
        const auto env = mova::make_environment(name);
        std::cout << "== " << name << " ==\n"
                  << mova::default_map_text(name) << "states: " << env->state_count()
                  << ", actions: " << env->action_count() << "\n\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular multi-objective benchmark: nonlinear value aggregation "
                 "against thresholded-lexicographic and linear baselines"};
    app.set_version_flag("--version", std::string("mova ") + kVersion);
    app.require_subcommand(1);
    const std::string command_line = quoted_command_line(argc, argv);

    // run
    auto* run = app.add_subcommand("run", "run a single condition");
    mova::SweepOptions run_options;
    RunSettingsCli run_settings;
    run->add_option("--env", run_options.condition.env, "environment")
        ->required()
        ->check(CLI::IsMember(mova::environment_names()));
    run->add_option("--agent", run_options.condition.agent, "agent")
        ->required()
        ->check(CLI::IsMember(mova::agent_names()));
    std::string run_mode = "q";
    run->add_option("--mode", run_mode, "update mode: q or reward")
        ->check(CLI::IsMember({"q", "reward"}))
        ->capture_default_str();
    std::string run_scale;
    run->add_option("--scale", run_scale,
                    "reward rescaling, <primary|alignment|both>=<factor>");
    std::string run_gran;
    run->add_option("--granularity", run_gran,
                    "value quantisation, <primary|alignment>=<grid step>");
    run->add_option("--experiment", run_options.condition.experiment,
                    "experiment label written to the records")
        ->capture_default_str();
    run->add_option("--map", run_options.map_path, "map file overriding the built-in map");
    run->add_option("--out", run_options.out_dir, "output directory")->required();
    run->add_option("--curve-window", run_options.curve_window, "rolling mean window")
        ->capture_default_str();
    run->add_flag("--dump-q", run_options.dump_q,
                  "write each run's learned Q-table under qtables/");
    run_settings.attach(run);
    run->callback([&] {
        run_options.condition.mode = mova::parse_update_mode(run_mode);
        if (!run_scale.empty()) {
            const auto [target, value] = parse_target_value(run_scale, "--scale");
            run_options.condition.scale_target = mova::parse_scale_target(target);
            if (run_options.condition.scale_target == mova::ScaleTarget::None) {
                throw mova::ConfigError("--scale target must be primary, alignment or both");
            }
            if (value <= 0.0) throw mova::ConfigError("--scale factor must be positive");
            run_options.condition.scale_factor = value;
        }
        if (!run_gran.empty()) {
            const auto [target, value] = parse_target_value(run_gran, "--granularity");
            run_options.condition.gran_target = mova::parse_gran_target(target);
            if (run_options.condition.gran_target == mova::GranTarget::None) {
                throw mova::ConfigError("--granularity target must be primary or alignment");
            }
            if (value < 0.0) {
                throw mova::ConfigError("--granularity grid step must be nonnegative");
            }
            run_options.condition.gran_size = value;
        }
        if (run_options.curve_window < 1) {
            throw mova::ConfigError("--curve-window must be at least 1");
        }
        validate_run_settings(run_settings.settings);
        run_options.settings = run_settings.settings;
        run_options.command_line = command_line;
        std::cerr << "running " << mova::condition_slug(run_options.condition) << "\n";
        mova::run_sweep(run_options, &std::cerr);
        std::cout << run_options.out_dir << "\n";
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run an experiment preset or config");
    mova::SweepOptions sweep_options;
    RunSettingsCli sweep_settings;
    std::string sweep_preset;
    std::string sweep_config;
    sweep->add_option("preset", sweep_preset, "table1, exp2 or table2")
        ->check(CLI::IsMember({"table1", "exp1", "exp2", "table2", "exp3"}));
    sweep->add_option("--config", sweep_config,
                      "JSON sweep config naming a preset or explicit conditions");
    sweep->add_option("--out", sweep_options.out_dir, "output directory")->required();
    auto* sweep_window_opt =
        sweep->add_option("--curve-window", sweep_options.curve_window,
                          "rolling mean window")
            ->capture_default_str();
    sweep->add_flag("--dump-q", sweep_options.dump_q,
                    "write each run's learned Q-table under qtables/");
    sweep_settings.attach(sweep);
    sweep->callback([&] {
        if (sweep_preset.empty() == sweep_config.empty()) {
            throw mova::ConfigError("sweep needs a preset name or --config, not both");
        }
        const int cli_window = sweep_options.curve_window;
        sweep_options.curve_window = 50;
        if (!sweep_config.empty()) {
            mova::apply_sweep_config(sweep_config, sweep_options);
        } else {
            sweep_options.preset = sweep_preset;
        }
        sweep_settings.overlay(sweep_options.settings);
        if (sweep_window_opt->count() > 0) sweep_options.curve_window = cli_window;
        if (sweep_options.curve_window < 1) {
            throw mova::ConfigError("--curve-window must be at least 1");
        }
        validate_run_settings(sweep_options.settings);
        sweep_options.command_line = command_line;
        const std::size_t n = mova::run_sweep(sweep_options, &std::cerr);
        std::cerr << n << " conditions done\n";
        std::cout << sweep_options.out_dir << "\n";
    });

    // report
    auto* report = app.add_subcommand("report", "summarise episode CSVs");
    std::vector<std::string> report_inputs;
    std::string report_out;
    int report_window = 50;
    report->add_option("--in", report_inputs, "episodes.csv files")->required();
    report->add_option("--out", report_out, "output directory")->required();
    report->add_option("--curve-window", report_window, "rolling mean window")
        ->capture_default_str();
    report->callback([&] {
        if (report_window < 1) throw mova::ConfigError("--curve-window must be at least 1");
        mova::write_report(report_inputs, report_out, report_window, &std::cerr);
        std::cout << report_out << "\n";
    });

    // curves
    auto* curves = app.add_subcommand("curves", "emit learning curves from episode CSVs");
    std::vector<std::string> curves_inputs;
    std::string curves_out;
    int curves_window = 50;
    curves->add_option("--in", curves_inputs, "episodes.csv files")->required();
    curves->add_option("--out", curves_out, "output directory")->required();
    curves->add_option("--curve-window", curves_window, "rolling mean window")
        ->capture_default_str();
    curves->callback([&] {
        if (curves_window < 1) throw mova::ConfigError("--curve-window must be at least 1");
        mova::write_curves_only(curves_inputs, curves_out, curves_window, &std::cerr);
        std::cout << curves_out << "\n";
    });

    // transform-curves
    auto* tcurves =
        app.add_subcommand("transform-curves", "sample a transform and its slope");
    std::string tc_kind;
    double tc_scale = 1.0;
    std::string tc_range;
    std::string tc_out;
    tcurves->add_option("--kind", tc_kind, "transform kind")
        ->required()
        ->check(CLI::IsMember({"linear", "sfella", "ela", "lela", "seba_performance",
                               "seba_alignment"}));
    tcurves->add_option("--c", tc_scale, "scale constant c")->capture_default_str();
    tcurves->add_option("--range", tc_range, "sample grid as lo:hi:step")->required();
    tcurves->add_option("--out", tc_out, "output directory (stdout when omitted)");
    tcurves->callback([&] {
        if (tc_scale <= 0.0) throw mova::ConfigError("--c must be positive");
        cmd_transform_curves(tc_kind, tc_scale, parse_range(tc_range), tc_out,
                             command_line);
    });

    // maps
    auto* maps = app.add_subcommand("maps", "print the built-in maps");
    std::string maps_env;
    maps->add_option("--env", maps_env, "print a single environment")
        ->check(CLI::IsMember(mova::environment_names()));
    maps->callback([&] { cmd_maps(maps_env); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mova::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

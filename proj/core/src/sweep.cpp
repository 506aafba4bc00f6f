#include "mova/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "mova/error.hpp"
#include "mova/strfmt.hpp"

namespace mova {

namespace {

int resolved_threads(const RunSettings& settings) {
    if (settings.threads > 0) return settings.threads;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? hw : 1;
}

nlohmann::json settings_json(const RunSettings& settings) {
    return {
        {"runs", settings.runs},
        {"online_episodes", settings.online_episodes},
        {"offline_episodes", settings.offline_episodes},
        {"base_seed", settings.base_seed},
        {"threads", resolved_threads(settings)},
        {"alpha", settings.alpha},
        {"gamma", settings.gamma},
        {"online_epsilon", settings.online_epsilon},
        {"offline_epsilon", settings.offline_epsilon},
        {"tloa_threshold", settings.tloa_threshold},
        {"transform_scale", settings.transform_scale},
    };
}

nlohmann::json condition_json(const ConditionSpec& cond) {
    return {
        {"experiment", cond.experiment},
        {"env", cond.env},
        {"agent", cond.agent},
        {"mode", update_mode_name(cond.mode)},
        {"scale_target", scale_target_name(cond.scale_target)},
        {"scale_factor", cond.scale_factor},
        {"gran_target", gran_target_name(cond.gran_target)},
        {"gran_size", cond.gran_size},
    };
}

void write_manifest(const std::string& out_dir, const nlohmann::json& manifest) {
    const std::string path = out_dir + "/manifest";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << manifest.dump(2) << '\n';
}

void emit_outputs(const SummaryAccumulator& acc, const std::string& out_dir,
                  int curve_window) {
    {
        std::ofstream out(out_dir + "/summary.csv");
        if (!out) throw std::runtime_error("cannot write summary.csv in " + out_dir);
        acc.write_summary_csv(out);
    }
    {
        std::ofstream out(out_dir + "/table.md");
        if (!out) throw std::runtime_error("cannot write table.md in " + out_dir);
        acc.write_table_markdown(out);
    }
    acc.write_curves(out_dir + "/curves", curve_window);
}

[[noreturn]] void config_fail(const std::string& file, const std::string& json_path,
                              const std::string& problem) {
    throw ConfigError("config " + file + ": " + json_path + " " + problem);
}

std::string config_string(const nlohmann::json& value, const std::string& file,
                          const std::string& json_path) {
    if (!value.is_string()) config_fail(file, json_path, "must be a string");
    return value.get<std::string>();
}

double config_number(const nlohmann::json& value, const std::string& file,
                     const std::string& json_path) {
    if (!value.is_number()) config_fail(file, json_path, "must be a number");
    return value.get<double>();
}

int config_int(const nlohmann::json& value, const std::string& file,
               const std::string& json_path) {
    if (!value.is_number_integer()) config_fail(file, json_path, "must be an integer");
    return value.get<int>();
}

ConditionSpec parse_condition_json(const nlohmann::json& entry, const std::string& file,
                                   const std::string& json_path) {
    if (!entry.is_object()) config_fail(file, json_path, "must be an object");
    ConditionSpec cond;
    bool saw_env = false;
    bool saw_agent = false;
    for (const auto& [key, value] : entry.items()) {
        const std::string where = json_path + "." + key;
        try {
            if (key == "experiment") {
                cond.experiment = config_string(value, file, where);
            } else if (key == "env") {
                cond.env = config_string(value, file, where);
                saw_env = true;
            } else if (key == "agent") {
                cond.agent = config_string(value, file, where);
                saw_agent = true;
            } else if (key == "mode") {
                cond.mode = parse_update_mode(config_string(value, file, where));
            } else if (key == "scale_target") {
                cond.scale_target = parse_scale_target(config_string(value, file, where));
            } else if (key == "scale_factor") {
                cond.scale_factor = config_number(value, file, where);
            } else if (key == "gran_target") {
                cond.gran_target = parse_gran_target(config_string(value, file, where));
            } else if (key == "gran_size") {
                cond.gran_size = config_number(value, file, where);
            } else {
                config_fail(file, where, "is not a recognised condition field");
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind("config ", 0) == 0) throw;
            config_fail(file, where, what);
        }
    }
    if (!saw_env) config_fail(file, json_path + ".env", "is required");
    if (!saw_agent) config_fail(file, json_path + ".agent", "is required");
    const auto& envs = environment_names();
    if (std::find(envs.begin(), envs.end(), cond.env) == envs.end()) {
        config_fail(file, json_path + ".env", "names no known environment");
    }
    const auto agents = agent_names();
    if (std::find(agents.begin(), agents.end(), cond.agent) == agents.end()) {
        config_fail(file, json_path + ".agent", "names no known agent");
    }
    if (cond.scale_factor <= 0.0) {
        config_fail(file, json_path + ".scale_factor", "must be positive");
    }
    if (cond.gran_size < 0.0) {
        config_fail(file, json_path + ".gran_size", "must be nonnegative");
    }
    return cond;
}

void parse_settings_json(const nlohmann::json& entry, const std::string& file,
                         RunSettings& settings) {
    if (!entry.is_object()) config_fail(file, "$.settings", "must be an object");
    for (const auto& [key, value] : entry.items()) {
        const std::string where = "$.settings." + key;
        if (key == "runs") {
            settings.runs = config_int(value, file, where);
        } else if (key == "online_episodes") {
            settings.online_episodes = config_int(value, file, where);
        } else if (key == "offline_episodes") {
            settings.offline_episodes = config_int(value, file, where);
        } else if (key == "base_seed") {
            if (!value.is_number_integer() && !value.is_number_unsigned()) {
                config_fail(file, where, "must be an integer");
            }
            settings.base_seed = value.get<uint64_t>();
        } else if (key == "threads") {
            settings.threads = config_int(value, file, where);
        } else if (key == "alpha") {
            settings.alpha = config_number(value, file, where);
        } else if (key == "gamma") {
            settings.gamma = config_number(value, file, where);
        } else if (key == "online_epsilon") {
            settings.online_epsilon = config_number(value, file, where);
        } else if (key == "offline_epsilon") {
            settings.offline_epsilon = config_number(value, file, where);
        } else if (key == "tloa_threshold") {
            settings.tloa_threshold = config_number(value, file, where);
        } else if (key == "transform_scale") {
            settings.transform_scale = config_number(value, file, where);
        } else {
            config_fail(file, where, "is not a recognised setting");
        }
    }
}

} // namespace

void apply_sweep_config(const std::string& path, SweepOptions& options) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": not valid JSON: " + e.what());
    }
    if (!doc.is_object()) config_fail(path, "$", "must be an object");

    bool saw_preset = false;
    bool saw_conditions = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "preset") {
            options.preset = config_string(value, path, "$.preset");
            const auto& names = preset_names();
            if (std::find(names.begin(), names.end(), options.preset) == names.end() &&
                options.preset != "exp1" && options.preset != "exp3") {
                config_fail(path, "$.preset", "names no known preset");
            }
            saw_preset = true;
        } else if (key == "conditions") {
            if (!value.is_array() || value.empty()) {
                config_fail(path, "$.conditions", "must be a non-empty array");
            }
            for (std::size_t i = 0; i < value.size(); ++i) {
                options.conditions.push_back(parse_condition_json(
                    value[i], path, "$.conditions[" + std::to_string(i) + "]"));
            }
            saw_conditions = true;
        } else if (key == "settings") {
            parse_settings_json(value, path, options.settings);
        } else if (key == "curve_window") {
            options.curve_window = config_int(value, path, "$.curve_window");
            if (options.curve_window < 1) {
                config_fail(path, "$.curve_window", "must be at least 1");
            }
        } else {
            config_fail(path, "$." + key, "is not a recognised key");
        }
    }
    if (saw_preset == saw_conditions) {
        config_fail(path, "$", "needs exactly one of preset or conditions");
    }
}

std::size_t run_sweep(const SweepOptions& options, std::ostream* progress) {
    std::vector<ConditionSpec> conditions;
    if (!options.preset.empty()) {
        conditions = preset_conditions(options.preset);
    } else if (!options.conditions.empty()) {
        conditions = options.conditions;
    } else {
        conditions.push_back(options.condition);
    }
    std::filesystem::create_directories(options.out_dir);

    const std::string episodes_path = options.out_dir + "/episodes.csv";
    std::ofstream episodes(episodes_path);
    if (!episodes) throw std::runtime_error("cannot write " + episodes_path);

    SummaryAccumulator acc;
    try {
        write_episode_csv_header(episodes);
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            const ConditionSpec& cond = conditions[i];
            const auto started = std::chrono::steady_clock::now();
            std::unique_ptr<Environment> env =
                options.map_path.empty()
                    ? make_environment(cond.env)
                    : make_environment(cond.env, MapSpec::load(options.map_path));
            const uint64_t seed = derive_condition_seed(options.settings.base_seed, i);
            std::vector<QTable> tables;
            const std::vector<EpisodeRecord> records =
                run_condition(*env, cond, options.settings, seed,
                              options.dump_q ? &tables : nullptr);
            write_episode_csv_rows(episodes, cond, records);
            if (!episodes) throw std::runtime_error("failed writing " + episodes_path);
            for (const EpisodeRecord& rec : records) acc.add(cond, rec);
            if (options.dump_q) {
                const std::string dir = options.out_dir + "/qtables";
                std::filesystem::create_directories(dir);
                for (std::size_t run = 0; run < tables.size(); ++run) {
                    const std::string path = dir + "/" + condition_slug(cond) + "_run" +
                                             std::to_string(run) + ".csv";
                    std::ofstream qout(path);
                    if (!qout) throw std::runtime_error("cannot write " + path);
                    write_qtable_csv(qout, tables[run]);
                }
            }
            if (progress != nullptr) {
                const double elapsed =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  started)
                        .count();
                *progress << str_printf("[%zu/%zu] %s (%.1fs)\n", i + 1,
                                        conditions.size(), condition_slug(cond).c_str(),
                                        elapsed);
            }
        }
        episodes.close();
        if (!episodes) throw std::runtime_error("failed writing " + episodes_path);
    } catch (...) {
        episodes.close();
        std::error_code ec;
        std::filesystem::remove(episodes_path, ec);
        throw;
    }

    emit_outputs(acc, options.out_dir, options.curve_window);

    nlohmann::json manifest = {
        {"tool", "mova"},
        {"command", options.preset.empty() && options.conditions.empty() ? "run" : "sweep"},
        {"conditions", conditions.size()},
        {"settings", settings_json(options.settings)},
        {"curve_window", options.curve_window},
        {"outputs", {"episodes.csv", "summary.csv", "table.md", "curves/"}},
    };
    if (!options.command_line.empty()) manifest["command_line"] = options.command_line;
    if (options.dump_q) manifest["outputs"].push_back("qtables/");
    if (!options.preset.empty()) {
        manifest["preset"] = options.preset;
    } else if (!options.conditions.empty()) {
        nlohmann::json list = nlohmann::json::array();
        for (const ConditionSpec& cond : options.conditions) {
            list.push_back(condition_json(cond));
        }
        manifest["condition_list"] = std::move(list);
    } else {
        manifest["condition"] = condition_json(options.condition);
        if (!options.map_path.empty()) {
            manifest["map_path"] = options.map_path;
            manifest["map"] = MapSpec::load(options.map_path).text();
        }
    }
    write_manifest(options.out_dir, manifest);
    return conditions.size();
}

namespace {

SummaryAccumulator accumulate_files(const std::vector<std::string>& episode_files,
                                    std::ostream* progress) {
    if (episode_files.empty()) throw ConfigError("no episode files given");
    SummaryAccumulator acc;
    for (const auto& path : episode_files) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open episode file: " + path);
        std::size_t rows = 0;
        read_episode_csv(in, path, [&](const ParsedEpisodeRow& row) {
            acc.add(row.cond, row.record);
            ++rows;
        });
        if (progress != nullptr) {
            *progress << path << ": " << rows << " rows\n";
        }
    }
    if (acc.empty()) throw ConfigError("episode files contain no records");
    return acc;
}

} // namespace

void write_report(const std::vector<std::string>& episode_files,
                  const std::string& out_dir, int curve_window,
                  std::ostream* progress) {
    const SummaryAccumulator acc = accumulate_files(episode_files, progress);
    std::filesystem::create_directories(out_dir);
    emit_outputs(acc, out_dir, curve_window);
    write_manifest(out_dir, nlohmann::json{
                                {"tool", "mova"},
                                {"command", "report"},
                                {"inputs", episode_files},
                                {"curve_window", curve_window},
                                {"outputs", {"summary.csv", "table.md", "curves/"}},
                            });
}

void write_curves_only(const std::vector<std::string>& episode_files,
                       const std::string& out_dir, int curve_window,
                       std::ostream* progress) {
    const SummaryAccumulator acc = accumulate_files(episode_files, progress);
    std::filesystem::create_directories(out_dir);
    acc.write_curves(out_dir + "/curves", curve_window);
    write_manifest(out_dir, nlohmann::json{
                                {"tool", "mova"},
                                {"command", "curves"},
                                {"inputs", episode_files},
                                {"curve_window", curve_window},
                                {"outputs", {"curves/"}},
                            });
}

} // namespace mova

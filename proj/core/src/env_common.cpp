#include "mova/error.hpp"
#include "mova/gridworld.hpp"

namespace mova {

namespace {

const std::string kBottlesMap =
    "#######\n"
    "#S...G#\n"
    "#######\n";

const std::string kSokobanMap =
    "######\n"
    "###S.#\n"
    "#..B.#\n"
    "#...##\n"
    "#G.###\n"
    "######\n";

const std::string kDoorsMap =
    "#####\n"
    "#S..#\n"
    "#.#.#\n"
    "#D#.#\n"
    "#.#.#\n"
    "#.#.#\n"
    "#.#.#\n"
    "#G..#\n"
    "#####\n";

} // namespace

const std::string& default_map_text(const std::string& env_name) {
    if (env_name == "bb" || env_name == "ub") return kBottlesMap;
    if (env_name == "sokoban") return kSokobanMap;
    if (env_name == "doors") return kDoorsMap;
    throw ConfigError("unknown environment: " + env_name);
}

const std::vector<std::string>& environment_names() {
    static const std::vector<std::string> names = {"bb", "ub", "sokoban", "doors"};
    return names;
}

std::unique_ptr<Environment> make_environment(const std::string& name, const MapSpec& map) {
    if (name == "bb") return std::make_unique<BottlesEnv>(map, true);
    if (name == "ub") return std::make_unique<BottlesEnv>(map, false);
    if (name == "sokoban") return std::make_unique<SokobanEnv>(map);
    if (name == "doors") return std::make_unique<DoorsEnv>(map);
    throw ConfigError("unknown environment: " + name);
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
    return make_environment(name, MapSpec::parse(default_map_text(name)));
}

} // namespace mova

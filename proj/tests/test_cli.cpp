#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "mova/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (const char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

// Runs the installed binary with output capture; doctest is a poor shell, so
// everything goes through files in a scratch directory.
CliResult run_cli(const std::string& args) {
    static int invocation = 0;
    const fs::path dir = fs::temp_directory_path() / "mova_cli_io";
    fs::create_directories(dir);
    const fs::path out_path = dir / ("out" + std::to_string(invocation));
    const fs::path err_path = dir / ("err" + std::to_string(invocation));
    ++invocation;

    const std::string command = std::string("\"") + MOVA_CLI_PATH + "\" " + args +
                                " > " + out_path.string() + " 2> " + err_path.string();
    const int status = std::system(command.c_str());
    CliResult result;
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    result.code = WEXITSTATUS(status);
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mova_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("cli reports its version") {
    const auto r = run_cli("--version");
    CHECK(r.code == 0);
    CHECK(r.out == "mova 1.0.0\n");
}

TEST_CASE("cli run produces the full output bundle") {
    const fs::path dir = fresh_dir("run_bundle");
    const auto r = run_cli("run --env bb --agent sfella --runs 2 --episodes 10 "
                           "--offline 2 --seed 7 --threads 1 --out " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out == dir.string() + "\n");

    const std::string episodes = read_file(dir / "episodes.csv");
    CHECK(count_lines(episodes) == 1 + 2 * (10 + 2));
    CHECK(episodes.rfind(mova::episode_csv_header() + "\n", 0) == 0);

    const std::string summary = read_file(dir / "summary.csv");
    CHECK(count_lines(summary) == 2); // header plus the single condition
    CHECK(summary.find("run,bb,sfella,q,") != std::string::npos);

    CHECK(fs::exists(dir / "table.md"));
    CHECK(fs::exists(dir / "curves" / "run_bb_sfella_q.csv"));

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest"));
    CHECK(manifest.at("tool") == "mova");
    CHECK(manifest.at("command") == "run");
    CHECK(manifest.at("conditions") == 1);
    CHECK(manifest.at("settings").at("runs") == 2);
    CHECK(manifest.at("settings").at("online_episodes") == 10);
    CHECK(manifest.at("settings").at("threads") == 1);
    CHECK(manifest.at("condition").at("env") == "bb");
    CHECK(manifest.at("condition").at("agent") == "sfella");
    const auto line = manifest.at("command_line").get<std::string>();
    CHECK(line.find("run --env bb") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli run accepts distortions and dumps q-tables") {
    const fs::path dir = fresh_dir("run_distort");
    const auto r = run_cli("run --env doors --agent linear --runs 2 --episodes 3 "
                           "--offline 1 --threads 1 --scale both=2 "
                           "--granularity primary=1 --dump-q --out " + dir.string());
    REQUIRE(r.code == 0);

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest"));
    CHECK(manifest.at("condition").at("scale_target") == "both");
    CHECK(manifest.at("condition").at("scale_factor") == 2.0);
    CHECK(manifest.at("condition").at("gran_target") == "primary");
    CHECK(manifest.at("condition").at("gran_size") == 1.0);

    const fs::path q0 = dir / "qtables" / "run_doors_linear_q_sb2_gp1_run0.csv";
    const fs::path q1 = dir / "qtables" / "run_doors_linear_q_sb2_gp1_run1.csv";
    REQUIRE(fs::exists(q0));
    REQUIRE(fs::exists(q1));
    const std::string table = read_file(q0);
    CHECK(table.rfind("state_id,action_id,q_p,q_a\n", 0) == 0);
    CHECK(count_lines(table) == 1 + 32 * 5); // one row per state-action pair
    fs::remove_all(dir);
}

TEST_CASE("cli rejects bad arguments with exit code 2") {
    const fs::path dir = fresh_dir("run_bad");
    CHECK(run_cli("run --env bb --agent nosuch --out " + dir.string()).code == 2);
    CHECK(run_cli("run --env nowhere --agent sfella --out " + dir.string()).code == 2);
    CHECK(run_cli("run --env bb --agent sfella").code == 2); // --out is required

    const auto scale = run_cli("run --env bb --agent sfella --scale sideways=2 --out " +
                               dir.string());
    CHECK(scale.code == 2);
    CHECK(scale.err.find("error:") != std::string::npos);
    CHECK(run_cli("run --env bb --agent sfella --scale primary=0 --out " + dir.string())
              .code == 2);
    CHECK(run_cli("run --env bb --agent sfella --scale primary --out " + dir.string())
              .code == 2);
    CHECK(run_cli("run --env bb --agent sfella --granularity both=1 --out " + dir.string())
              .code == 2);
    CHECK(run_cli("run --env bb --agent sfella --runs 0 --out " + dir.string()).code == 2);
    CHECK(run_cli("run --env bb --agent sfella --episodes 0 --offline 0 --out " +
                  dir.string())
              .code == 2);
    CHECK(run_cli("run --env bb --agent sfella --alpha 0 --out " + dir.string()).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli run fails with exit code 1 when the output cannot be created") {
    const auto r = run_cli("run --env bb --agent linear --runs 1 --episodes 1 "
                           "--out /proc/nope/x");
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cli sweep over a config is byte-stable across thread counts") {
    const fs::path dir = fresh_dir("sweep_config");
    fs::create_directories(dir);
    const fs::path cfg = dir / "sweep.json";
    {
        std::ofstream out(cfg);
        out << R"({
  "conditions": [
    {"env": "bb", "agent": "sfella", "scale_target": "primary", "scale_factor": 10},
    {"env": "bb", "agent": "tloa"}
  ],
  "settings": {"runs": 3, "online_episodes": 10, "offline_episodes": 2, "base_seed": 5}
})";
    }

    const fs::path d1 = dir / "serial";
    const fs::path d2 = dir / "pooled";
    const auto r1 = run_cli("sweep --config " + cfg.string() + " --threads 1 --out " +
                            d1.string());
    const auto r2 = run_cli("sweep --config " + cfg.string() + " --threads 3 --out " +
                            d2.string());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(read_file(d1 / "episodes.csv") == read_file(d2 / "episodes.csv"));
    CHECK(read_file(d1 / "summary.csv") == read_file(d2 / "summary.csv"));
    CHECK(count_lines(read_file(d1 / "episodes.csv")) == 1 + 2 * 3 * 12);

    const auto manifest = nlohmann::json::parse(read_file(d1 / "manifest"));
    CHECK(manifest.at("command") == "sweep");
    CHECK(manifest.at("conditions") == 2);
    CHECK(manifest.at("settings").at("base_seed") == 5);
    CHECK(manifest.at("condition_list").size() == 2);
    CHECK(manifest.at("condition_list")[0].at("scale_factor") == 10.0);
    CHECK(manifest.at("condition_list")[0].at("scale_target") == "primary");
    fs::remove_all(dir);
}

TEST_CASE("cli sweep runs the granularity preset end to end") {
    const fs::path dir = fresh_dir("sweep_preset");
    const auto r = run_cli("sweep table2 --runs 1 --episodes 2 --offline 1 "
                           "--threads 2 --out " + dir.string());
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest"));
    CHECK(manifest.at("preset") == "table2");
    CHECK(manifest.at("conditions") == 52);
    CHECK(count_lines(read_file(dir / "episodes.csv")) == 1 + 52 * 3);
    CHECK(count_lines(read_file(dir / "summary.csv")) == 1 + 52);
    fs::remove_all(dir);
}

TEST_CASE("cli sweep demands exactly one condition source") {
    const fs::path dir = fresh_dir("sweep_sources");
    fs::create_directories(dir);
    const fs::path cfg = dir / "cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"preset": "table2"})";
    }
    CHECK(run_cli("sweep --out " + dir.string()).code == 2);
    CHECK(run_cli("sweep table1 --config " + cfg.string() + " --out " + dir.string())
              .code == 2);
    CHECK(run_cli("sweep nosuch --out " + dir.string()).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli sweep config errors name the offending json path") {
    const fs::path dir = fresh_dir("sweep_badcfg");
    fs::create_directories(dir);
    const auto write_cfg = [&](const std::string& name, const std::string& body) {
        const fs::path path = dir / name;
        std::ofstream out(path);
        out << body;
        return path.string();
    };

    const auto preset = run_cli("sweep --config " +
                                write_cfg("a.json", R"({"preset": "nosuch"})") +
                                " --out " + dir.string() + "/o1");
    CHECK(preset.code == 2);
    CHECK(preset.err.find("$.preset") != std::string::npos);

    const auto key = run_cli("sweep --config " +
                             write_cfg("b.json", R"({"preset": "table1", "frobnicate": 1})") +
                             " --out " + dir.string() + "/o2");
    CHECK(key.code == 2);
    CHECK(key.err.find("$.frobnicate") != std::string::npos);

    const auto agent = run_cli(
        "sweep --config " +
        write_cfg("c.json", R"({"conditions": [{"env": "bb", "agent": "nosuch"}]})") +
        " --out " + dir.string() + "/o3");
    CHECK(agent.code == 2);
    CHECK(agent.err.find("$.conditions[0].agent") != std::string::npos);

    const auto broken = run_cli("sweep --config " +
                                write_cfg("d.json", "{nope") + " --out " + dir.string() +
                                "/o4");
    CHECK(broken.code == 2);
    CHECK(broken.err.find("not valid JSON") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli report rebuilds the summary a sweep wrote") {
    const fs::path dir = fresh_dir("report_roundtrip");
    const fs::path sweep_dir = dir / "sweep";
    const auto r = run_cli("run --env doors --agent sfella --runs 3 --episodes 20 "
                           "--offline 2 --threads 1 --seed 11 --out " + sweep_dir.string());
    REQUIRE(r.code == 0);

    const fs::path report_dir = dir / "report";
    const auto rep = run_cli("report --in " + (sweep_dir / "episodes.csv").string() +
                             " --out " + report_dir.string());
    REQUIRE(rep.code == 0);
    CHECK(read_file(report_dir / "summary.csv") == read_file(sweep_dir / "summary.csv"));
    CHECK(read_file(report_dir / "table.md") == read_file(sweep_dir / "table.md"));
    CHECK(read_file(report_dir / "curves" / "run_doors_sfella_q.csv") ==
          read_file(sweep_dir / "curves" / "run_doors_sfella_q.csv"));

    const fs::path curves_dir = dir / "curves_only";
    const auto cur = run_cli("curves --in " + (sweep_dir / "episodes.csv").string() +
                             " --out " + curves_dir.string());
    REQUIRE(cur.code == 0);
    CHECK(fs::exists(curves_dir / "curves" / "run_doors_sfella_q.csv"));
    CHECK_FALSE(fs::exists(curves_dir / "summary.csv"));

    CHECK(run_cli("report --in " + (dir / "missing.csv").string() + " --out " +
                  (dir / "r2").string())
              .code == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli transform-curves samples a transform onto stdout") {
    const auto r = run_cli("transform-curves --kind linear --range 0:2:1");
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "x,f,df_per_unit\n"
          "0.000000,0.000000,1.000000\n"
          "1.000000,1.000000,1.000000\n"
          "2.000000,2.000000,1.000000\n");

    const auto sfella = run_cli("transform-curves --kind sfella --c 1 --range -3:3:0.01");
    REQUIRE(sfella.code == 0);
    CHECK(count_lines(sfella.out) == 1 + 601);

    CHECK(run_cli("transform-curves --kind nosuch --range 0:1:0.5").code == 2);
    CHECK(run_cli("transform-curves --kind ela --range 3:1:0.5").code == 2);
    CHECK(run_cli("transform-curves --kind ela --range abc").code == 2);
    CHECK(run_cli("transform-curves --kind ela --c 0 --range 0:1:0.5").code == 2);
}

TEST_CASE("cli transform-curves writes a csv bundle when asked") {
    const fs::path dir = fresh_dir("tcurves");
    const auto r = run_cli("transform-curves --kind lela --c 2 --range -1:1:0.5 --out " +
                           dir.string());
    REQUIRE(r.code == 0);
    const std::string csv = read_file(dir / "lela.csv");
    CHECK(csv.rfind("x,f,df_per_unit\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 5);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest"));
    CHECK(manifest.at("command") == "transform-curves");
    CHECK(manifest.at("kind") == "lela");
    CHECK(manifest.at("c") == 2.0);
    CHECK(manifest.at("rows") == 5);
    fs::remove_all(dir);
}

TEST_CASE("cli maps prints the built-in layouts") {
    const auto all = run_cli("maps");
    REQUIRE(all.code == 0);
    for (const char* name : {"== bb ==", "== ub ==", "== sokoban ==", "== doors =="}) {
        CHECK(all.out.find(name) != std::string::npos);
    }
    CHECK(all.out.find("states: 1215, actions: 3") != std::string::npos);

    const auto one = run_cli("maps --env sokoban");
    REQUIRE(one.code == 0);
    CHECK(one.out.find("== sokoban ==") != std::string::npos);
    CHECK(one.out.find("== bb ==") == std::string::npos);
    CHECK(run_cli("maps --env nowhere").code == 2);
}

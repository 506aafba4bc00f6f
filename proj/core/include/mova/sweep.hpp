#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mova/analysis.hpp"
#include "mova/harness.hpp"

namespace mova {

// Inputs shared by the run and sweep commands.
struct SweepOptions {
    std::string preset;                    // one of preset_names(); empty otherwise
    std::vector<ConditionSpec> conditions; // explicit list (from a config file)
    ConditionSpec condition;               // used when both above are empty
    std::string map_path;                  // optional map override for single conditions
    RunSettings settings;
    std::string out_dir;
    int curve_window = 50;
    bool dump_q = false;       // write per-run learned Q-tables under qtables/
    std::string command_line;  // recorded in the manifest for reproduction
};

// Reads a JSON sweep config into `options`: either {"preset": name} or
// {"conditions": [...]} with condition objects mirroring the episodes.csv
// column names, plus optional "settings" and "curve_window". Unknown keys or
// bad values raise ConfigError naming the offending path ($.settings.runs).
void apply_sweep_config(const std::string& path, SweepOptions& options);

// Executes every condition, streaming episodes.csv and folding the records
// into summaries as it goes. Writes episodes.csv, summary.csv, table.md,
// curves/ and a manifest into out_dir. Progress lines go to `progress` when
// given. A write failure removes the partial episodes.csv before rethrowing.
// Returns the number of conditions executed.
std::size_t run_sweep(const SweepOptions& options, std::ostream* progress);

// Rebuilds summary.csv, table.md and curves/ from existing episode CSVs.
void write_report(const std::vector<std::string>& episode_files,
                  const std::string& out_dir, int curve_window,
                  std::ostream* progress);

// Rebuilds only the curve CSVs from existing episode files.
void write_curves_only(const std::vector<std::string>& episode_files,
                       const std::string& out_dir, int curve_window,
                       std::ostream* progress);

} // namespace mova

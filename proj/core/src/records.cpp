#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "mova/error.hpp"
#include "mova/harness.hpp"
#include "mova/strfmt.hpp"

namespace mova {

const std::string& episode_csv_header() {
    static const std::string header =
        "experiment,env,agent,mode,scale_target,scale_factor,"
        "gran_target,gran_size,run,episode,phase,steps,sum_rp,sum_ra,r_star";
    return header;
}

void write_episode_csv_header(std::ostream& out) {
    out << episode_csv_header() << '\n';
}

void write_episode_csv_rows(std::ostream& out, const ConditionSpec& cond,
                            const std::vector<EpisodeRecord>& records) {
    const std::string prefix = cond.experiment + ',' + cond.env + ',' + cond.agent +
                               ',' + update_mode_name(cond.mode) + ',' +
                               scale_target_name(cond.scale_target) + ',' +
                               format_compact(cond.scale_factor) + ',' +
                               gran_target_name(cond.gran_target) + ',' +
                               format_compact(cond.gran_size) + ',';
    std::string line;
    for (const auto& rec : records) {
        line = prefix;
        line += str_printf("%d,%d,%s,%d,%.6f,%.6f,%.6f", rec.run, rec.episode,
                           phase_name(rec.phase), rec.steps, rec.sum_primary,
                           rec.sum_alignment, rec.r_star);
        line += '\n';
        out << line;
    }
}

void write_qtable_csv(std::ostream& out, const QTable& table) {
    out << "state_id,action_id,q_p,q_a\n";
    for (int state = 0; state < table.states(); ++state) {
        for (int action = 0; action < table.actions(); ++action) {
            const double* q = table.at(state, action);
            out << str_printf("%d,%d,%.6f,%.6f", state, action, q[0], q[1]) << '\n';
        }
    }
}

namespace {

double parse_double_field(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
        throw ConfigError(where + ": bad numeric field '" + field + "'");
    }
    return value;
}

int parse_int_field(const std::string& field, const std::string& where) {
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ConfigError(where + ": bad integer field '" + field + "'");
    }
    return value;
}

} // namespace

void read_episode_csv(std::istream& in, const std::string& source_name,
                      const std::function<void(const ParsedEpisodeRow&)>& sink) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(source_name + ": empty episode file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != episode_csv_header()) {
        throw ConfigError(source_name + ": unexpected header: " + line);
    }
    std::size_t line_no = 1;
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 15) {
            throw ConfigError(source_name + " line " + std::to_string(line_no) +
                              ": expected 15 fields, got " + std::to_string(fields.size()));
        }
        const std::string where = source_name + " line " + std::to_string(line_no);
        ParsedEpisodeRow row;
        row.cond.experiment = fields[0];
        row.cond.env = fields[1];
        row.cond.agent = fields[2];
        row.cond.mode = parse_update_mode(fields[3]);
        row.cond.scale_target = parse_scale_target(fields[4]);
        row.cond.scale_factor = parse_double_field(fields[5], where);
        row.cond.gran_target = parse_gran_target(fields[6]);
        row.cond.gran_size = parse_double_field(fields[7], where);
        row.record.run = parse_int_field(fields[8], where);
        row.record.episode = parse_int_field(fields[9], where);
        row.record.phase = parse_phase(fields[10]);
        row.record.steps = parse_int_field(fields[11], where);
        row.record.sum_primary = parse_double_field(fields[12], where);
        row.record.sum_alignment = parse_double_field(fields[13], where);
        row.record.r_star = parse_double_field(fields[14], where);
        sink(row);
    }
}

} // namespace mova

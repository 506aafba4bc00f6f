#include "mova/gridworld.hpp"

#include <fstream>
#include <sstream>

#include "mova/error.hpp"

namespace mova {

MapSpec MapSpec::parse(const std::string& text) {
    MapSpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && spec.rows.empty()) continue; // leading blank lines
        if (line.empty()) break;                         // trailing blank ends the map
        spec.rows.push_back(line);
    }
    if (spec.rows.empty()) throw ConfigError("map is empty");
    const std::size_t width = spec.rows[0].size();
    for (const auto& row : spec.rows) {
        if (row.size() != width) throw ConfigError("map rows have unequal width");
    }
    for (int r = 0; r < spec.height(); ++r) {
        for (int c = 0; c < spec.width(); ++c) {
            if (r == 0 || c == 0 || r == spec.height() - 1 || c == spec.width() - 1) {
                if (!spec.is_wall(r, c)) {
                    throw ConfigError("map border must be walls");
                }
            }
        }
    }
    return spec;
}

MapSpec MapSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open map file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string MapSpec::text() const {
    std::string out;
    for (const auto& row : rows) {
        out += row;
        out += '\n';
    }
    return out;
}

} // namespace mova

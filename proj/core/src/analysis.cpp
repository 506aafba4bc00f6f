#include "mova/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <tuple>

#include "mova/error.hpp"
#include "mova/strfmt.hpp"

namespace mova {

int env_rank(const std::string& env) {
    const auto& names = environment_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == env) return static_cast<int>(i);
    }
    return static_cast<int>(names.size());
}

int agent_rank(const std::string& agent) {
    static const std::vector<std::string> order = {"seba", "sfella", "ela",
                                                   "lela", "linear", "tloa"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == agent) return static_cast<int>(i);
    }
    return static_cast<int>(order.size());
}

namespace {

auto condition_sort_key(const ConditionSpec& c) {
    return std::make_tuple(
        c.experiment, env_rank(c.env), c.env, static_cast<int>(c.mode),
        static_cast<int>(c.gran_target), c.gran_size,
        static_cast<int>(c.scale_target), c.scale_factor,
        agent_rank(c.agent), c.agent);
}

// Row identity inside a table: everything but the agent. When the group uses
// the granularity view, per-agent scaling differences stay within the row.
auto row_sort_key(const ConditionSpec& c, bool granularity_view) {
    if (granularity_view) {
        return std::make_tuple(static_cast<int>(c.gran_target), c.gran_size, 0, 0.0);
    }
    return std::make_tuple(static_cast<int>(c.gran_target), c.gran_size,
                           static_cast<int>(c.scale_target), c.scale_factor);
}

} // namespace

bool canonical_condition_less(const ConditionSpec& a, const ConditionSpec& b) {
    return condition_sort_key(a) < condition_sort_key(b);
}

bool condition_equal(const ConditionSpec& a, const ConditionSpec& b) {
    return condition_sort_key(a) == condition_sort_key(b);
}

void SummaryAccumulator::add(const ConditionSpec& cond, const EpisodeRecord& record) {
    ConditionStats& s = stats_[cond];
    const auto run = static_cast<std::size_t>(record.run);
    if (record.run < 0) throw ConfigError("negative run index in episode record");
    if (record.episode < 0) throw ConfigError("negative episode index in episode record");
    auto ensure = [&](auto& vec, std::size_t index) {
        if (vec.size() <= index) vec.resize(index + 1);
    };
    if (record.phase == Phase::Online) {
        ensure(s.run_online_sum, run);
        ensure(s.run_online_count, run);
        s.run_online_sum[run] += record.r_star;
        s.run_online_count[run] += 1;
        const auto ep = static_cast<std::size_t>(record.episode);
        ensure(s.episode_online_sum, ep);
        ensure(s.episode_online_rp, ep);
        ensure(s.episode_online_ra, ep);
        ensure(s.episode_online_count, ep);
        s.episode_online_sum[ep] += record.r_star;
        s.episode_online_rp[ep] += record.sum_primary;
        s.episode_online_ra[ep] += record.sum_alignment;
        s.episode_online_count[ep] += 1;
    } else {
        ensure(s.run_offline_sum, run);
        ensure(s.run_offline_count, run);
        s.run_offline_sum[run] += record.r_star;
        s.run_offline_count[run] += 1;
    }
}

std::vector<ConditionAggregate> SummaryAccumulator::aggregates() const {
    std::vector<ConditionAggregate> out;
    out.reserve(stats_.size());
    for (const auto& [cond, s] : stats_) {
        ConditionAggregate agg;
        agg.cond = cond;
        for (std::size_t run = 0; run < s.run_online_sum.size(); ++run) {
            if (s.run_online_count[run] > 0) {
                agg.run_online_means.push_back(
                    s.run_online_sum[run] / static_cast<double>(s.run_online_count[run]));
            }
        }
        for (std::size_t run = 0; run < s.run_offline_sum.size(); ++run) {
            if (s.run_offline_count[run] > 0) {
                agg.run_offline_means.push_back(
                    s.run_offline_sum[run] / static_cast<double>(s.run_offline_count[run]));
            }
        }
        out.push_back(std::move(agg));
    }
    return out;
}

std::vector<SummaryRow> SummaryAccumulator::summarize() const {
    const std::vector<ConditionAggregate> aggs = aggregates();

    auto find_baseline = [&](const ConditionSpec& cond) -> const ConditionAggregate* {
        ConditionSpec wanted = cond;
        wanted.agent = "tloa";
        for (const auto& agg : aggs) {
            if (condition_equal(agg.cond, wanted)) return &agg;
        }
        wanted.scale_target = ScaleTarget::None;
        wanted.scale_factor = 1.0;
        wanted.gran_target = GranTarget::None;
        wanted.gran_size = 0.0;
        for (const auto& agg : aggs) {
            if (condition_equal(agg.cond, wanted)) return &agg;
        }
        return nullptr;
    };

    auto group_has_baseline = [&](const ConditionSpec& cond) {
        return std::any_of(aggs.begin(), aggs.end(), [&](const ConditionAggregate& agg) {
            return agg.cond.agent == "tloa" && agg.cond.experiment == cond.experiment &&
                   agg.cond.env == cond.env && agg.cond.mode == cond.mode;
        });
    };

    std::vector<SummaryRow> rows;
    rows.reserve(aggs.size());
    for (const auto& agg : aggs) {
        SummaryRow row;
        row.cond = agg.cond;
        row.n = static_cast<int>(agg.run_online_means.size());
        if (row.n > 0) row.mean_r_star = mean(agg.run_online_means);
        row.sd_r_star = row.n >= 2 ? std::sqrt(sample_variance(agg.run_online_means)) : 0.0;

        if (agg.cond.agent != "tloa" && group_has_baseline(agg.cond)) {
            const ConditionAggregate* baseline = find_baseline(agg.cond);
            if (baseline == nullptr) {
                throw ConfigError("no tloa baseline for condition " + condition_slug(agg.cond));
            }
            if (row.n >= 2 && baseline->run_online_means.size() >= 2) {
                row.test = welch_t_test(agg.run_online_means, baseline->run_online_means);
                row.has_test = true;
                row.stars = significance_stars(row.test.p);
                if (!row.stars.empty()) {
                    row.direction =
                        row.mean_r_star > mean(baseline->run_online_means) ? "up" : "down";
                }
            }
        }
        rows.push_back(std::move(row));
    }

    // Flag every agent within 10% of the best mean in its table row.
    std::size_t i = 0;
    while (i < rows.size()) {
        const ConditionSpec& lead = rows[i].cond;
        bool gran_view = false;
        std::size_t group_end = i;
        while (group_end < rows.size() &&
               rows[group_end].cond.experiment == lead.experiment &&
               rows[group_end].cond.env == lead.env && rows[group_end].cond.mode == lead.mode) {
            if (rows[group_end].cond.gran_target != GranTarget::None) gran_view = true;
            ++group_end;
        }
        std::size_t j = i;
        while (j < group_end) {
            std::size_t row_end = j;
            double best = -std::numeric_limits<double>::infinity();
            while (row_end < group_end &&
                   row_sort_key(rows[row_end].cond, gran_view) ==
                       row_sort_key(rows[j].cond, gran_view)) {
                if (rows[row_end].n > 0) best = std::max(best, rows[row_end].mean_r_star);
                ++row_end;
            }
            for (std::size_t k = j; k < row_end; ++k) {
                rows[k].best = rows[k].n > 0 &&
                               rows[k].mean_r_star >= best - 0.1 * std::fabs(best);
            }
            j = row_end;
        }
        i = group_end;
    }
    return rows;
}

const std::string& summary_csv_header() {
    static const std::string header =
        "experiment,env,agent,mode,scale_target,scale_factor,gran_target,gran_size,"
        "n,mean_r_star,sd_r_star,t,df,p,stars,direction,best_flag";
    return header;
}

void SummaryAccumulator::write_summary_csv(std::ostream& out) const {
    out << summary_csv_header() << '\n';
    for (const SummaryRow& row : summarize()) {
        const ConditionSpec& c = row.cond;
        out << c.experiment << ',' << c.env << ',' << c.agent << ','
            << update_mode_name(c.mode) << ',' << scale_target_name(c.scale_target) << ','
            << format_compact(c.scale_factor) << ',' << gran_target_name(c.gran_target)
            << ',' << format_compact(c.gran_size) << ',' << row.n << ','
            << str_printf("%.6f,%.6f", row.mean_r_star, row.sd_r_star) << ',';
        if (row.has_test) {
            out << str_printf("%.6f,%.6f,%.6g", row.test.t, row.test.df, row.test.p);
        } else {
            out << ",,";
        }
        out << ',' << row.stars << ',' << row.direction << ',' << (row.best ? 1 : 0)
            << '\n';
    }
}

std::string condition_slug(const ConditionSpec& cond) {
    std::string slug =
        cond.experiment + '_' + cond.env + '_' + cond.agent + '_' + update_mode_name(cond.mode);
    if (cond.scale_target != ScaleTarget::None) {
        const char tag = cond.scale_target == ScaleTarget::Primary     ? 'p'
                         : cond.scale_target == ScaleTarget::Alignment ? 'a'
                                                                       : 'b';
        slug += "_s";
        slug += tag;
        slug += format_compact(cond.scale_factor);
    }
    if (cond.gran_target != GranTarget::None) {
        slug += "_g";
        slug += cond.gran_target == GranTarget::Primary ? 'p' : 'a';
        slug += format_compact(cond.gran_size);
    }
    return slug;
}

std::string condition_row_label(const ConditionSpec& cond, bool granularity_view) {
    if (granularity_view) {
        if (cond.gran_target == GranTarget::None) return "base";
        return std::string(gran_target_name(cond.gran_target)) + " g=" +
               format_compact(cond.gran_size);
    }
    if (cond.scale_target == ScaleTarget::None) return "base";
    return std::string(scale_target_name(cond.scale_target)) + " x" +
           format_compact(cond.scale_factor);
}

void SummaryAccumulator::write_table_markdown(std::ostream& out) const {
    const std::vector<SummaryRow> rows = summarize();
    std::size_t i = 0;
    bool first_group = true;
    while (i < rows.size()) {
        const ConditionSpec& lead = rows[i].cond;
        bool gran_view = false;
        std::size_t group_end = i;
        std::vector<std::string> agents;
        while (group_end < rows.size() &&
               rows[group_end].cond.experiment == lead.experiment &&
               rows[group_end].cond.env == lead.env && rows[group_end].cond.mode == lead.mode) {
            if (rows[group_end].cond.gran_target != GranTarget::None) gran_view = true;
            const std::string& agent = rows[group_end].cond.agent;
            if (std::find(agents.begin(), agents.end(), agent) == agents.end()) {
                agents.push_back(agent);
            }
            ++group_end;
        }
        std::sort(agents.begin(), agents.end(), [](const auto& a, const auto& b) {
            return std::make_pair(agent_rank(a), a) < std::make_pair(agent_rank(b), b);
        });

        if (!first_group) out << '\n';
        first_group = false;
        out << "## " << lead.experiment << " / " << lead.env << " (mode "
            << update_mode_name(lead.mode) << ")\n\n";
        out << "| condition |";
        for (const auto& agent : agents) out << ' ' << agent << " |";
        out << "\n|---|";
        for (std::size_t a = 0; a < agents.size(); ++a) out << "---|";
        out << '\n';

        std::size_t j = i;
        while (j < group_end) {
            std::size_t row_end = j;
            while (row_end < group_end &&
                   row_sort_key(rows[row_end].cond, gran_view) ==
                       row_sort_key(rows[j].cond, gran_view)) {
                ++row_end;
            }
            out << "| " << condition_row_label(rows[j].cond, gran_view) << " |";
            for (const auto& agent : agents) {
                const SummaryRow* cell = nullptr;
                for (std::size_t k = j; k < row_end; ++k) {
                    if (rows[k].cond.agent == agent) {
                        cell = &rows[k];
                        break;
                    }
                }
                if (cell == nullptr || cell->n == 0) {
                    out << "  |";
                    continue;
                }
                std::string text = str_printf("%.2f", cell->mean_r_star);
                if (cell->best) text = "**" + text + "**";
                for (std::size_t star = 0; star < cell->stars.size(); ++star) {
                    text += "\\*";
                }
                if (cell->direction == "up") text += "↑";
                if (cell->direction == "down") text += "↓";
                if (gran_view && cell->cond.scale_target != ScaleTarget::None) {
                    text += " (x" + format_compact(cell->cond.scale_factor) + " " +
                            scale_target_name(cell->cond.scale_target) + ")";
                }
                out << ' ' << text << " |";
            }
            out << '\n';
            j = row_end;
        }
        out << "\nScores are run-mean combined returns; \\* p<0.05, \\*\\* p<0.01, "
               "\\*\\*\\* p<0.001 against the tloa baseline with ↑/↓ giving "
               "the direction; bold marks agents within 10% of the row best.\n";
        i = group_end;
    }
}

void SummaryAccumulator::write_curves(const std::string& dir, int rolling_window) const {
    if (rolling_window < 1) throw ConfigError("rolling window must be at least 1");
    std::filesystem::create_directories(dir);
    for (const auto& [cond, s] : stats_) {
        const std::string path = dir + "/" + condition_slug(cond) + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write curve file: " + path);
        out << "episode,mean_rp,mean_ra,mean_r_star,rolling_r_star\n";
        double window_sum = 0.0;
        std::vector<double> window;
        std::size_t window_head = 0;
        for (std::size_t ep = 0; ep < s.episode_online_sum.size(); ++ep) {
            if (s.episode_online_count[ep] == 0) continue;
            const double runs = static_cast<double>(s.episode_online_count[ep]);
            const double m = s.episode_online_sum[ep] / runs;
            window.push_back(m);
            window_sum += m;
            if (window.size() - window_head > static_cast<std::size_t>(rolling_window)) {
                window_sum -= window[window_head];
                ++window_head;
            }
            const double rolling =
                window_sum / static_cast<double>(window.size() - window_head);
            out << str_printf("%zu,%.6f,%.6f,%.6f,%.6f", ep,
                              s.episode_online_rp[ep] / runs,
                              s.episode_online_ra[ep] / runs, m, rolling)
                << '\n';
        }
    }
}

} // namespace mova

#include <fstream>
#include <sstream>

#include "reachavoid/error.hpp"
#include "reachavoid/harness.hpp"
#include "reachavoid/kv.hpp"

#include "json.hpp"

namespace reachavoid {

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write: " + path);
}

// Quotes a CSV field only when it needs it (comma, quote, newline).
std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

void write_curve_csv(const std::string& path, const LearningCurve& curve) {
    std::ostringstream out;
    out << "episode,reward,running_avg,success_rate,failure_rate\n";
    for (std::size_t i = 0; i < curve.episode_reward.size(); ++i) {
        out << i << ',' << format_double(curve.episode_reward[i]) << ','
            << format_double(curve.running_average[i]) << ','
            << format_double(curve.success_rate[i]) << ','
            << format_double(curve.failure_rate[i]) << '\n';
    }
    write_text_file(path, out.str());
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ostringstream out;
    out << "episodes,successes,collisions,timeouts,success_pct,collision_pct,"
           "timeout_pct,seed,config_fingerprint\n";
    out << report.episodes << ',' << report.successes << ','
        << report.collisions << ',' << report.timeouts << ','
        << format_double(report.success_rate) << ','
        << format_double(report.collision_rate) << ','
        << format_double(report.timeout_rate) << ',' << report.seed << ','
        << report.config_fingerprint << '\n';
    write_text_file(path, out.str());
}

void write_outcome_log_csv(const std::string& path, const EvalReport& report) {
    std::ostringstream out;
    out << "episode,outcome\n";
    for (std::size_t i = 0; i < report.outcome_log.size(); ++i) {
        out << i << ',' << to_string(report.outcome_log[i]) << '\n';
    }
    write_text_file(path, out.str());
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
    std::ostringstream out;
    out << "threshold_mm,success_pct,collision_pct,timeout_pct\n";
    for (const SweepPoint& p : sweep.points) {
        if (p.failed) continue;  // failures live in the sweep JSON
        out << format_double(p.threshold * 1000.0) << ','
            << format_double(p.report.success_rate) << ','
            << format_double(p.report.collision_rate) << ','
            << format_double(p.report.timeout_rate) << '\n';
    }
    write_text_file(path, out.str());
}

void write_scenario_csv(const std::string& path, const ScenarioTable& table) {
    std::ostringstream out;
    out << "scenario,controller,repetitions,successes,collisions,timeouts,"
           "success_pct,collision_pct,timeout_pct\n";
    for (const ScenarioCell& cell : table.cells) {
        out << cell.scenario_id << ',' << csv_escape(cell.controller) << ','
            << cell.report.episodes << ',' << cell.report.successes << ','
            << cell.report.collisions << ',' << cell.report.timeouts << ','
            << format_double(cell.report.success_rate) << ','
            << format_double(cell.report.collision_rate) << ','
            << format_double(cell.report.timeout_rate) << '\n';
    }
    write_text_file(path, out.str());
}

void write_ablation_csv(const std::string& path, const AblationGrid& grid) {
    std::ostringstream out;
    out << "p_o,p_s,episodes,success_pct,collision_pct,timeout_pct,status,"
           "error\n";
    for (const AblationCell& cell : grid.cells) {
        out << format_double(cell.p_o) << ',' << format_double(cell.p_s)
            << ',';
        if (cell.failed) {
            out << "0,,,,failed," << csv_escape(cell.error) << '\n';
        } else {
            out << cell.report.episodes << ','
                << format_double(cell.report.success_rate) << ','
                << format_double(cell.report.collision_rate) << ','
                << format_double(cell.report.timeout_rate) << ",ok,\n";
        }
    }
    write_text_file(path, out.str());
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> rows) {
    std::ostringstream out;
    out << "step,q1,q2,q3,q4,q5,q6,q7,tip_x,tip_y,tip_z,obs_x,obs_y,obs_z,"
           "d_t,d_o,reward,active_policy,outcome\n";
    for (const TraceRow& row : rows) {
        out << row.step;
        for (double q : row.joints) out << ',' << format_double(q);
        out << ',' << format_double(row.tooltip_pos.x) << ','
            << format_double(row.tooltip_pos.y) << ','
            << format_double(row.tooltip_pos.z) << ','
            << format_double(row.obstacle.x) << ','
            << format_double(row.obstacle.y) << ','
            << format_double(row.obstacle.z) << ','
            << format_double(row.d_t) << ',' << format_double(row.d_o) << ','
            << format_double(row.reward) << ','
            << to_string(row.active_policy) << ','
            << to_string(row.outcome) << '\n';
    }
    write_text_file(path, out.str());
}

void write_curves_plot_json(const std::string& path,
                            std::span<const LearningCurve> curves) {
    nlohmann::json doc;
    doc["curves"] = nlohmann::json::array();
    for (const LearningCurve& curve : curves) {
        nlohmann::json entry;
        entry["seed"] = curve.seed;
        entry["window"] = curve.window;
        entry["diverged"] = curve.diverged;
        entry["divergence_note"] = curve.divergence_note;
        entry["episode_reward"] = curve.episode_reward;
        entry["running_average"] = curve.running_average;
        entry["success_rate"] = curve.success_rate;
        entry["failure_rate"] = curve.failure_rate;
        doc["curves"].push_back(std::move(entry));
    }
    write_text_file(path, doc.dump(2) + "\n");
}

void write_sweep_plot_json(const std::string& path, const SweepResult& sweep) {
    nlohmann::json doc;
    doc["eval_episodes"] = sweep.eval_episodes;
    doc["training_runs"] = sweep.training_runs;
    doc["points"] = nlohmann::json::array();
    for (const SweepPoint& p : sweep.points) {
        nlohmann::json entry;
        entry["threshold_mm"] = p.threshold * 1000.0;
        entry["failed"] = p.failed;
        if (p.failed) {
            entry["error"] = p.error;
        } else {
            entry["success_pct"] = p.report.success_rate;
            entry["collision_pct"] = p.report.collision_rate;
            entry["timeout_pct"] = p.report.timeout_rate;
        }
        doc["points"].push_back(std::move(entry));
    }
    write_text_file(path, doc.dump(2) + "\n");
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string config_fingerprint(const EnvConfig& cfg, std::string_view extra) {
    std::string payload = cfg.to_kv().to_text();
    payload += '\n';
    payload += extra;
    const std::uint64_t hash = fnv1a64(payload);
    static const char* digits = "0123456789abcdef";
    std::string hex(16, '0');
    for (int i = 0; i < 16; ++i) {
        hex[15 - i] = digits[(hash >> (4 * i)) & 0xF];
    }
    return hex;
}

}  // namespace reachavoid

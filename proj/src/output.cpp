#include "adbias/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "adbias/error.hpp"

namespace adbias {

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_trajectories(std::ostream& out, const BatchSummary& summary) {
    out << "experiment,arm,replication,t,design,risk\n";
    for (const auto& rep : summary.replications) {
        for (const auto& traj : rep.arms) {
            for (const auto& s : traj.steps) {
                out << summary.experiment << ',' << traj.arm << ',' << traj.replication << ',' << s.t << ','
                    << format_number(s.design) << ',' << format_number(s.risk) << '\n';
            }
        }
    }
}

void write_summary(std::ostream& out, const BatchSummary& summary) {
    out << "experiment,arm,t,mean_risk,stderr,theta_star_risk\n";
    for (const auto& arm : summary.arms) {
        for (std::size_t t = 0; t < arm.mean_risk.size(); ++t) {
            out << summary.experiment << ',' << arm.arm << ',' << t + 1 << ',' << format_number(arm.mean_risk[t]) << ','
                << format_number(arm.stderr_risk[t]) << ',' << format_number(summary.theta_star_risk) << '\n';
        }
    }
}

void write_histograms(std::ostream& out, const BatchSummary& summary) {
    out << "experiment,arm,bin_lo,bin_hi,count\n";
    for (const auto& h : summary.histograms) {
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            out << summary.experiment << ',' << h.arm << ',' << format_number(h.bin_lo[b]) << ','
                << format_number(h.bin_hi[b]) << ',' << h.counts[b] << '\n';
        }
    }
}

void write_alb_scatter(std::ostream& out, const BatchSummary& summary) {
    out << "experiment,replication,d_model,alb\n";
    for (const auto& r : summary.alb_records) {
        out << summary.experiment << ',' << r.replication << ',' << format_number(r.d_model) << ','
            << format_number(r.alb) << '\n';
    }
}

void write_alb_curve(std::ostream& out, const BatchSummary& summary) {
    out << "experiment,t,alb_vs_passive\n";
    for (std::size_t t = 0; t < summary.alb_vs_passive.size(); ++t) {
        out << summary.experiment << ',' << t + 1 << ',' << format_number(summary.alb_vs_passive[t]) << '\n';
    }
}

nlohmann::json run_manifest(const ExperimentConfig& config, const BatchSummary& summary, const RunInfo& info) {
    nlohmann::json stats = {
        {"theta_star_risk", summary.theta_star_risk},
        {"true_model_risk", summary.true_risk},
    };
    for (const auto& arm : summary.arms) {
        stats["final_mean_risk"][arm.arm] = arm.mean_risk.back();
        stats["final_stderr"][arm.arm] = arm.stderr_risk.back();
    }
    if (!summary.alb_vs_passive.empty()) stats["alb_vs_passive_final"] = summary.alb_vs_passive.back();
    return {
        {"config", to_json(config)},
        {"base_seed", config.base_seed},
        {"version", kVersion},
        {"started_at", info.started_at},
        {"wall_seconds", info.wall_seconds},
        {"jobs", info.jobs},
        {"statistics", stats},
    };
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& config, const BatchSummary& summary,
                                                 const std::filesystem::path& dir, const RunInfo& info) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::config, "cannot create output directory '" + dir.string() + "': " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, auto&& writer) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::config, "cannot write '" + path.string() + "'");
        writer(out);
        if (!out) throw Error(ErrorCode::config, "write failed for '" + path.string() + "'");
        written.push_back(path);
    };
    emit("trajectories.csv", [&](std::ostream& o) { write_trajectories(o, summary); });
    emit("summary.csv", [&](std::ostream& o) { write_summary(o, summary); });
    emit("designs_hist.csv", [&](std::ostream& o) { write_histograms(o, summary); });
    emit("alb_scatter.csv", [&](std::ostream& o) { write_alb_scatter(o, summary); });
    if (!summary.alb_vs_passive.empty()) {
        emit("alb_curve.csv", [&](std::ostream& o) { write_alb_curve(o, summary); });
    }
    emit("meta.json", [&](std::ostream& o) { o << run_manifest(config, summary, info).dump(2) << '\n'; });
    return written;
}

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::config, "CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double to_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::config, "line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
}

} // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw Error(ErrorCode::config, "line " + std::to_string(n) + ": expected " +
                                               std::to_string(table.header.size()) + " fields, found " +
                                               std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw Error(ErrorCode::config, "CSV input is empty");
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config, "cannot open '" + path.string() + "'");
    return read_csv(in);
}

std::vector<std::pair<std::string, DesignHistogram>> histogram_from_trajectories(const CsvTable& trajectories,
                                                                                 double lo, double hi, int bins,
                                                                                 bool discrete) {
    if (bins < 1) throw Error(ErrorCode::invalid_argument, "histogram needs at least one bin");
    if (!discrete && !(lo < hi)) throw Error(ErrorCode::invalid_argument, "histogram needs lo < hi");
    const std::size_t ce = trajectories.column("experiment");
    const std::size_t ca = trajectories.column("arm");
    const std::size_t cd = trajectories.column("design");
    const double width = discrete ? 1.0 : (hi - lo) / bins;
    const double origin = discrete ? 0.0 : lo;

    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::pair<std::string, DesignHistogram>> out;
    for (std::size_t r = 0; r < trajectories.rows.size(); ++r) {
        const auto& row = trajectories.rows[r];
        const auto key = std::make_pair(row[ce], row[ca]);
        auto it = index.find(key);
        if (it == index.end()) {
            DesignHistogram h;
            h.arm = row[ca];
            h.counts.assign(static_cast<std::size_t>(bins), 0);
            for (int b = 0; b < bins; ++b) {
                h.bin_lo.push_back(origin + width * b);
                h.bin_hi.push_back(b + 1 == bins && !discrete ? hi : origin + width * (b + 1));
            }
            it = index.emplace(key, out.size()).first;
            out.emplace_back(row[ce], std::move(h));
        }
        const double x = to_double(row[cd], r + 2);
        auto b = static_cast<long long>(std::floor((x - origin) / width));
        b = std::clamp<long long>(b, 0, bins - 1);
        ++out[it->second].second.counts[static_cast<std::size_t>(b)];
    }
    return out;
}

} // namespace adbias

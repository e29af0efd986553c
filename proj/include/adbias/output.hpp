#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "adbias/config.hpp"
#include "adbias/experiment.hpp"

namespace adbias {

inline constexpr const char* kVersion = "0.3.0";

/// Shortest round-trippable text for a double (%.17g).
std::string format_number(double value);

struct RunInfo {
    double wall_seconds = 0.0;
    int jobs = 1;
    std::string started_at;  // ISO-8601 UTC
};

void write_trajectories(std::ostream& out, const BatchSummary& summary);
void write_summary(std::ostream& out, const BatchSummary& summary);
void write_histograms(std::ostream& out, const BatchSummary& summary);
void write_alb_scatter(std::ostream& out, const BatchSummary& summary);
/// experiment,t,alb_vs_passive; written only when the batch has both reference arms.
void write_alb_curve(std::ostream& out, const BatchSummary& summary);
nlohmann::json run_manifest(const ExperimentConfig& config, const BatchSummary& summary, const RunInfo& info);

/// Writes every output file into `dir` (created if missing) and returns their paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& config, const BatchSummary& summary,
                                                 const std::filesystem::path& dir, const RunInfo& info);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Plain comma-separated values without quoting (the format written above).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Rebuilds per-(experiment, arm) design histograms from trajectory rows:
/// `bins` equal-width bins on [lo, hi], or one bin per index when `discrete`.
std::vector<std::pair<std::string, DesignHistogram>> histogram_from_trajectories(const CsvTable& trajectories,
                                                                                 double lo, double hi, int bins,
                                                                                 bool discrete);

} // namespace adbias

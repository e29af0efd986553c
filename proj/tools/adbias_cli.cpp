// Command-line front end: run configs and presets, validate configs, rebuild
// histograms and scatter statistics from written CSV files.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "adbias/config.hpp"
#include "adbias/error.hpp"
#include "adbias/experiment.hpp"
#include "adbias/metrics.hpp"
#include "adbias/output.hpp"
#include "adbias/presets.hpp"

namespace {

using namespace adbias;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

int execute(const ExperimentConfig& config, int jobs) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const BatchSummary summary = Experiment(config).run_batch(jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto files = write_outputs(config, summary, config.output_dir, RunInfo{wall, jobs, started});

    std::cout << config.name << ": " << config.replications << " replications x " << config.arms.size()
              << " arms x " << config.horizon << " steps in " << format_number(std::round(wall * 100) / 100) << " s\n";
    for (const auto& arm : summary.arms) {
        std::cout << "  " << arm.arm << " risk(t=" << config.horizon << ") = " << format_number(arm.mean_risk.back())
                  << " +/- " << format_number(arm.stderr_risk.back()) << '\n';
    }
    std::cout << "  theta* risk = " << format_number(summary.theta_star_risk) << '\n';
    for (const auto& f : files) std::cout << "  wrote " << f.string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian adaptive design simulations with active learning bias measurement"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a batch described by a JSON config");
    std::string run_config;
    std::optional<int> run_reps;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::string> run_out;
    int run_jobs = default_jobs();
    run->add_option("--config", run_config, "Config file")->required();
    run->add_option("--reps", run_reps, "Override the replication count")->check(CLI::PositiveNumber);
    run->add_option("--seed", run_seed, "Override the base seed");
    run->add_option("--out", run_out, "Override the output directory");
    run->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* pre = app.add_subcommand("preset", "Emit (and optionally run) a figure preset");
    std::string pre_name;
    std::optional<int> pre_reps;
    std::optional<std::uint64_t> pre_seed;
    bool pre_full = false;
    bool pre_list = false;
    bool pre_run = false;
    std::string pre_output;
    std::optional<std::string> pre_out;
    int pre_jobs = default_jobs();
    pre->add_option("--name", pre_name, "Preset id");
    pre->add_flag("--list", pre_list, "List preset ids");
    pre->add_option("--reps", pre_reps, "Replication count")->check(CLI::PositiveNumber);
    pre->add_option("--seed", pre_seed, "Base seed");
    pre->add_flag("--full", pre_full, "Use 1,000 replications");
    pre->add_option("--output", pre_output, "Write the config JSON to this file instead of stdout");
    pre->add_flag("--run", pre_run, "Run the preset after emitting it");
    pre->add_option("--out", pre_out, "Output directory for --run");
    pre->add_option("--jobs", pre_jobs, "Worker threads for --run")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "Check a config file");
    std::string val_config;
    val->add_option("--config", val_config, "Config file")->required();

    auto* hist = app.add_subcommand("histogram", "Rebuild design histograms from trajectories.csv");
    std::string hist_input;
    std::string hist_output;
    int hist_bins = 100;
    double hist_lo = 0.0;
    double hist_hi = 100.0;
    bool hist_discrete = false;
    hist->add_option("--trajectories", hist_input, "trajectories.csv")->required();
    hist->add_option("--bins", hist_bins, "Bin count (gamble count with --discrete)")->check(CLI::PositiveNumber);
    hist->add_option("--lo", hist_lo, "Design domain lower bound");
    hist->add_option("--hi", hist_hi, "Design domain upper bound");
    hist->add_flag("--discrete", hist_discrete, "One bin per design index");
    hist->add_option("--output", hist_output, "Write CSV here instead of stdout");

    auto* scat = app.add_subcommand("scatter", "Spearman correlation of D_model and ALB from alb_scatter.csv");
    std::string scat_input;
    int scat_perms = 10000;
    std::uint64_t scat_seed = kDefaultBaseSeed;
    scat->add_option("--input", scat_input, "alb_scatter.csv")->required();
    scat->add_option("--permutations", scat_perms, "Permutation count")->check(CLI::PositiveNumber);
    scat->add_option("--seed", scat_seed, "Permutation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*run) {
            ExperimentConfig config = load_config(run_config);
            if (run_reps) config.replications = *run_reps;
            if (run_seed) config.base_seed = *run_seed;
            if (run_out) config.output_dir = *run_out;
            config.validate();
            return execute(config, run_jobs);
        }
        if (*pre) {
            if (pre_list) {
                for (const auto& n : preset_names()) std::cout << n << '\n';
                return kExitOk;
            }
            if (pre_name.empty() || !is_preset(pre_name)) {
                std::cerr << "error: --name must be one of:";
                for (const auto& n : preset_names()) std::cerr << ' ' << n;
                std::cerr << "\n\n" << pre->help();
                return kExitUsage;
            }
            ExperimentConfig config = preset(pre_name, PresetOptions{pre_reps, pre_seed, pre_full});
            if (pre_out) config.output_dir = *pre_out;
            const std::string text = to_json(config).dump(2) + "\n";
            if (!pre_output.empty()) {
                std::ofstream out(pre_output);
                if (!out) throw Error(ErrorCode::config, "cannot write '" + pre_output + "'");
                out << text;
            } else if (!pre_run) {
                std::cout << text;
            }
            return pre_run ? execute(config, pre_jobs) : kExitOk;
        }
        if (*val) {
            const ExperimentConfig config = load_config(val_config);
            std::cout << "ok: " << config.name << " (" << config.arms.size() << " arms, " << config.replications
                      << " replications, horizon " << config.horizon << ")\n";
            return kExitOk;
        }
        if (*hist) {
            const CsvTable table = read_csv_file(hist_input);
            const auto hists = histogram_from_trajectories(table, hist_lo, hist_hi, hist_bins, hist_discrete);
            std::ofstream file;
            if (!hist_output.empty()) {
                file.open(hist_output);
                if (!file) throw Error(ErrorCode::config, "cannot write '" + hist_output + "'");
            }
            std::ostream& out = hist_output.empty() ? std::cout : file;
            out << "experiment,arm,bin_lo,bin_hi,count\n";
            for (const auto& [experiment, h] : hists) {
                for (std::size_t b = 0; b < h.counts.size(); ++b) {
                    out << experiment << ',' << h.arm << ',' << format_number(h.bin_lo[b]) << ','
                        << format_number(h.bin_hi[b]) << ',' << h.counts[b] << '\n';
                }
            }
            return kExitOk;
        }
        if (*scat) {
            const CsvTable table = read_csv_file(scat_input);
            const std::size_t cd = table.column("d_model");
            const std::size_t ca = table.column("alb");
            std::vector<double> d;
            std::vector<double> a;
            for (const auto& row : table.rows) {
                d.push_back(std::stod(row[cd]));
                a.push_back(std::stod(row[ca]));
            }
            const double rho = spearman(d, a);
            const double p = spearman_permutation_pvalue(d, a, scat_perms, scat_seed);
            std::cout << "n=" << d.size() << " spearman=" << format_number(rho) << " p=" << format_number(p) << '\n';
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

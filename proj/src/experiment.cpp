#include "adbias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "adbias/approx_posterior.hpp"
#include "adbias/binary_models.hpp"
#include "adbias/design_select.hpp"
#include "adbias/error.hpp"
#include "adbias/likelihood.hpp"
#include "adbias/linreg.hpp"
#include "adbias/posterior.hpp"
#include "adbias/seeding.hpp"

namespace adbias {

namespace {

// Tabulate per-point choice probabilities when the table stays under ~250 MB.
constexpr double kMaxTableCells = 6e6;

// D_model is always averaged over 1,001 evenly spaced designs (or the design list).
constexpr int kMetricGridPoints = 1001;

bool gamble_class(const ModelSpec& spec) { return spec.family == Family::eut || spec.family == Family::cpt; }

std::vector<double> scalar_xs(const std::vector<Design>& designs) {
    std::vector<double> xs;
    xs.reserve(designs.size());
    for (const auto& d : designs) xs.push_back(d.x());
    return xs;
}

std::vector<double> truth_logits(const TrueModel& truth, const std::vector<Design>& designs) {
    std::vector<double> z;
    z.reserve(designs.size());
    for (const auto& d : designs) z.push_back(binary_logit(truth.spec, truth.params, d));
    return z;
}

std::ptrdiff_t find_candidate(const std::vector<Design>& candidates, const Design& d) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].value.size() == d.value.size() && candidates[i].value == d.value) {
            return static_cast<std::ptrdiff_t>(i);
        }
    }
    return -1;
}

} // namespace

const ArmSummary& BatchSummary::arm(const std::string& name) const {
    for (const auto& a : arms) {
        if (a.arm == name) return a;
    }
    throw Error(ErrorCode::invalid_argument, "no arm named '" + name + "' in the summary");
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
    config_.validate();
    target_ = config_.target_distribution();
    candidates_ = design_grid(target_, config_.design_grid_points);

    if (gamble_class(config_.model)) {
        lattice_prior_ = GridPosterior::lattice(config_.model, config_.posterior.grid_points);
        const double cells = static_cast<double>(lattice_prior_->size()) * static_cast<double>(candidates_.size());
        if (cells <= kMaxTableCells) lattice_table_ = lattice_table(lattice_prior_->points, config_.model, candidates_);
    }

    const GeneratingSpec& gen = config_.truth.generating;
    if (gen.kind == GeneratingSpec::Kind::prior && gen.pool_size > 0) {
        // Keep the most misspecified draws, scored against the unit-sensitivity class.
        Rng rng(derive_seed(config_.base_seed, 0, "", "truth-pool"));
        const ModelSpec truth_spec = config_.truth.spec();
        ModelSpec unit = config_.model;
        unit.noise = 1.0;
        const std::vector<Design> grid = design_grid(target_, kMetricGridPoints);
        const std::vector<double> xs = scalar_xs(grid);
        std::vector<std::pair<double, std::size_t>> scored;
        std::vector<ParamVector> draws;
        for (int i = 0; i < gen.pool_size; ++i) {
            TrueModel truth{truth_spec, gen.prior.sample(rng)};
            const ParamVector fit = theta_star_logistic(xs, truth_logits(truth, grid), unit.degree, 1.0);
            scored.emplace_back(d_model(truth, fit, unit, target_, kMetricGridPoints), draws.size());
            draws.push_back(truth.params);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(gen.keep_fraction * static_cast<double>(gen.pool_size) - 1e-9)));
        for (std::size_t i = 0; i < keep; ++i) pool_.push_back(draws[scored[i].second]);
    }
}

TrueModel Experiment::draw_truth(int replication) const {
    const GeneratingSpec& gen = config_.truth.generating;
    TrueModel truth{config_.truth.spec(), {}};
    if (gen.kind == GeneratingSpec::Kind::fixed) {
        truth.params = gen.value;
        return truth;
    }
    Rng rng(derive_seed(config_.base_seed, static_cast<std::uint64_t>(replication), "", "truth"));
    if (!pool_.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
        truth.params = pool_[pick(rng)];
    } else {
        truth.params = gen.prior.sample(rng);
    }
    return truth;
}

ParamVector Experiment::theta_star(const TrueModel& truth) const {
    const ModelSpec& model = config_.model;
    switch (model.family) {
        case Family::gaussian_linear: return theta_star_ols(truth, model.degree, target_);
        case Family::logistic_poly:
            return theta_star_logistic(scalar_xs(candidates_), truth_logits(truth, candidates_), model.degree,
                                       model.noise);
        case Family::eut:
        case Family::cpt: return theta_star_grid(truth, model, lattice_prior_->points, candidates_);
    }
    throw Error(ErrorCode::invalid_argument, "unsupported model family");
}

RiskTrajectory Experiment::run_arm(const ArmConfig& arm, int replication, const TrueModel& truth,
                                   const EvalSet& eval) const {
    const ModelSpec& model = config_.model;
    const auto rep = static_cast<std::uint64_t>(replication);
    const std::uint64_t base = config_.base_seed;
    Rng design_rng(derive_seed(base, rep, arm.name, "design"));
    Rng outcome_rng(derive_seed(base, rep, arm.name, "outcome"));

    Posterior posterior = [&]() -> Posterior {
        switch (model.family) {
            case Family::gaussian_linear: return GaussianPosterior::from_prior(model.prior);
            case Family::logistic_poly:
                // Shared across arms: every arm starts from the same prior sample.
                return particle_init(model, config_.posterior.particles, derive_seed(base, rep, "", "particles"));
            default: return *lattice_prior_;
        }
    }();

    const bool binary = model.is_binary();
    const bool adaptive = arm.policy.kind == DesignPolicy::Kind::adaptive;
    const bool discrete = target_.kind == TargetDistribution::Kind::uniform_discrete;
    auto predictive = [&]() {
        if (const auto* g = std::get_if<GridPosterior>(&posterior)) {
            if (lattice_table_) return binary_predictive(*lattice_table_, g->log_weights, adaptive);
            return binary_predictive(g->points, g->log_weights, model, candidates_, adaptive);
        }
        const auto& p = std::get<ParticlePosterior>(posterior);
        return binary_predictive(p.samples, p.log_weights, model, candidates_, adaptive);
    };
    BinaryPredictive table;
    if (binary && adaptive) table = predictive();

    RiskTrajectory out;
    out.arm = arm.name;
    out.replication = replication;
    out.steps.reserve(static_cast<std::size_t>(config_.horizon));
    for (int t = 1; t <= config_.horizon; ++t) {
        try {
            SelectionState state{posterior, model, candidates_, target_, design_rng,
                                 binary && adaptive ? &table : nullptr};
            const DesignChoice choice = next_design(arm.policy, state, t - 1);
            const Outcome y = sample_outcome(truth, choice.design, outcome_rng);
            posterior = bayes_update(posterior, model, choice.design, y);

            if (auto* p = std::get_if<ParticlePosterior>(&posterior)) {
                const double fraction = config_.posterior.refresh_ess_fraction;
                if (fraction >= 1.0 || p->ess() < fraction * static_cast<double>(p->size())) {
                    *p = particle_refresh(*p, model, derive_seed(base, rep, arm.name, "refresh",
                                                                 static_cast<std::uint64_t>(t)));
                }
            }

            double risk;
            if (binary) {
                table = predictive();
                risk = risk_from_predictive(table, eval);
            } else {
                risk = risk_nll(posterior, model, eval);
            }

            double design_value;
            if (discrete) {
                const std::ptrdiff_t index =
                    choice.index >= 0 ? choice.index : find_candidate(candidates_, choice.design);
                design_value = static_cast<double>(index);
            } else {
                design_value = choice.design.x();
            }
            out.steps.push_back({t, design_value, risk});
        } catch (const Error& e) {
            throw e.annotate(ErrorContext{replication, arm.name, t});
        }
    }
    return out;
}

ReplicationResult Experiment::run_replication(int replication) const {
    if (replication < 0) throw Error(ErrorCode::invalid_argument, "replication index must be >= 0");
    ReplicationResult result;
    result.replication = replication;
    try {
        const TrueModel truth = draw_truth(replication);
        result.truth_params = truth.params;
        const EvalSet eval =
            config_.model.is_binary()
                ? make_binary_eval(truth, candidates_)
                : make_regression_eval(truth, target_, config_.eval_size,
                                       derive_seed(config_.base_seed, static_cast<std::uint64_t>(replication), "", "eval"));
        result.theta_star = theta_star(truth);
        result.risk_star = risk_nll(result.theta_star, config_.model, eval);
        result.true_risk = true_model_risk(truth, eval);
        result.d_model = d_model(truth, result.theta_star, config_.model, target_, kMetricGridPoints);

        for (const ArmConfig& arm : config_.arms) result.arms.push_back(run_arm(arm, replication, truth, eval));
        for (std::size_t i = 0; i < config_.arms.size(); ++i) {
            if (config_.arms[i].name == config_.alb_arm) {
                result.alb = alb(result.arms[i].steps.back().risk, result.risk_star);
            }
        }
    } catch (const Error& e) {
        throw e.annotate(ErrorContext{replication, std::nullopt, std::nullopt});
    }
    return result;
}

BatchSummary Experiment::run_batch(int jobs, const std::function<void(int)>& on_done) const {
    const int total = config_.replications;
    std::vector<std::optional<ReplicationResult>> results(static_cast<std::size_t>(total));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));
    std::atomic<int> next{0};
    std::atomic<bool> stop{false};
    std::mutex done_mutex;

    auto worker = [&]() {
        while (!stop.load()) {
            const int i = next.fetch_add(1);
            if (i >= total) return;
            try {
                results[static_cast<std::size_t>(i)] = run_replication(i);
                if (on_done) {
                    std::lock_guard lock(done_mutex);
                    on_done(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
                stop.store(true);
            }
        }
    };

    const int threads = std::clamp(jobs, 1, std::max(1, total));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<ReplicationResult> ordered;
    ordered.reserve(results.size());
    for (auto& r : results) ordered.push_back(std::move(*r));
    return summarize(config_, std::move(ordered));
}

BatchSummary summarize(const ExperimentConfig& config, std::vector<ReplicationResult> results) {
    if (results.empty()) throw Error(ErrorCode::invalid_argument, "cannot summarize an empty batch");
    std::sort(results.begin(), results.end(),
              [](const auto& a, const auto& b) { return a.replication < b.replication; });

    BatchSummary summary;
    summary.experiment = config.name;
    const auto n = static_cast<double>(results.size());
    const auto horizon = static_cast<std::size_t>(config.horizon);

    for (std::size_t a = 0; a < config.arms.size(); ++a) {
        ArmSummary arm;
        arm.arm = config.arms[a].name;
        arm.mean_risk.assign(horizon, 0.0);
        arm.stderr_risk.assign(horizon, 0.0);
        for (std::size_t t = 0; t < horizon; ++t) {
            double sum = 0.0;
            for (const auto& r : results) sum += r.arms[a].steps[t].risk;
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& r : results) {
                const double d = r.arms[a].steps[t].risk - mean;
                ss += d * d;
            }
            arm.mean_risk[t] = mean;
            arm.stderr_risk[t] = results.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        }
        summary.arms.push_back(std::move(arm));
    }

    double risk_star = 0.0;
    double true_risk = 0.0;
    for (const auto& r : results) {
        risk_star += r.risk_star;
        true_risk += r.true_risk;
        summary.alb_records.push_back({r.d_model, r.alb, r.replication});
    }
    summary.theta_star_risk = risk_star / n;
    summary.true_risk = true_risk / n;

    const bool discrete = config.target.kind == TargetConfig::Kind::gamble_space;
    const int bins = discrete ? config.target.gamble_count : 100;
    for (std::size_t a = 0; a < config.arms.size(); ++a) {
        DesignHistogram h;
        h.arm = config.arms[a].name;
        h.counts.assign(static_cast<std::size_t>(bins), 0);
        const double width = discrete ? 1.0 : (config.target.hi - config.target.lo) / bins;
        const double lo = discrete ? 0.0 : config.target.lo;
        for (int b = 0; b < bins; ++b) {
            h.bin_lo.push_back(lo + width * b);
            h.bin_hi.push_back(b + 1 == bins && !discrete ? config.target.hi : lo + width * (b + 1));
        }
        for (const auto& r : results) {
            for (const auto& s : r.arms[a].steps) {
                auto b = static_cast<long long>(std::floor((s.design - lo) / width));
                b = std::clamp<long long>(b, 0, bins - 1);
                ++h.counts[static_cast<std::size_t>(b)];
            }
        }
        summary.histograms.push_back(std::move(h));
    }

    const bool has_adaptive = std::any_of(summary.arms.begin(), summary.arms.end(),
                                          [](const auto& a) { return a.arm == "adaptive"; });
    const bool has_random = std::any_of(summary.arms.begin(), summary.arms.end(),
                                        [](const auto& a) { return a.arm == "random"; });
    if (has_adaptive && has_random) {
        const auto& ad = summary.arm("adaptive").mean_risk;
        const auto& rd = summary.arm("random").mean_risk;
        for (std::size_t t = 0; t < horizon; ++t) summary.alb_vs_passive.push_back(alb_vs_passive(ad[t], rd[t]));
    }

    summary.replications = std::move(results);
    return summary;
}

ReplicationResult run_replication(const ExperimentConfig& config, int replication) {
    return Experiment(config).run_replication(replication);
}

BatchSummary run_batch(const ExperimentConfig& config, int jobs) { return Experiment(config).run_batch(jobs); }

std::vector<Design> linear_adaptive_sequence(const ModelSpec& spec, const std::vector<Design>& grid, int horizon) {
    if (spec.family != Family::gaussian_linear) {
        throw Error(ErrorCode::invalid_argument, "closed-form design sequences need a gaussian-linear class");
    }
    GaussianPosterior post = GaussianPosterior::from_prior(spec.prior);
    std::vector<Design> seq;
    seq.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        const std::size_t i = select_linear_index(post, spec.degree, grid);
        seq.push_back(grid[i]);
        post = conjugate_update(post, spec.noise, poly_features(spec.degree, grid[i].x()), 0.0);
    }
    return seq;
}

} // namespace adbias

#include "adbias/config.hpp"

#include <fstream>
#include <sstream>

#include "adbias/binary_models.hpp"
#include "adbias/error.hpp"

namespace adbias {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw Error(ErrorCode::config, (path.empty() ? std::string("/") : path) + ": " + message);
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(child(path, key), "missing required field");
    return *it;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* name : allowed) known = known || it.key() == name;
        if (!known) fail(child(path, it.key()), "unknown field");
    }
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(path, "expected a non-negative integer seed");
    }
    return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vector get_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = get_number(v[i], child(path, i));
    return out;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Family get_family(const json& v, const std::string& path) {
    try {
        return family_from_string(get_string(v, path));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::config) throw;
        fail(path, "unknown family (expected gaussian-linear, logistic-poly, eut or cpt)");
    }
}

PriorSpec parse_prior(const json& v, const std::string& path) {
    const std::string kind = get_string(require(v, path, "kind"), child(path, "kind"));
    if (kind == "normal") {
        reject_unknown(v, path, {"kind", "mean", "cov_diag", "cov"});
        Vector mean = get_vector(require(v, path, "mean"), child(path, "mean"));
        Matrix cov;
        if (v.contains("cov")) {
            const json& rows = v["cov"];
            const std::string p = child(path, "cov");
            if (!rows.is_array() || rows.size() != static_cast<std::size_t>(mean.size())) {
                fail(p, "expected a square matrix matching the mean dimension");
            }
            cov.resize(mean.size(), mean.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                Vector row = get_vector(rows[r], child(p, r));
                if (row.size() != mean.size()) fail(child(p, r), "row length does not match the mean dimension");
                cov.row(static_cast<Eigen::Index>(r)) = row.transpose();
            }
        } else {
            Vector var = get_vector(require(v, path, "cov_diag"), child(path, "cov_diag"));
            if (var.size() != mean.size()) fail(child(path, "cov_diag"), "length does not match the mean dimension");
            cov = var.asDiagonal();
        }
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
            fail(path, "covariance must be symmetric");
        }
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() != Eigen::Success) fail(path, "covariance must be positive definite");
        return PriorSpec::normal(std::move(mean), std::move(cov));
    }
    if (kind == "uniform") {
        reject_unknown(v, path, {"kind", "lower", "upper"});
        Vector lower = get_vector(require(v, path, "lower"), child(path, "lower"));
        Vector upper = get_vector(require(v, path, "upper"), child(path, "upper"));
        if (lower.size() != upper.size()) fail(path, "lower and upper differ in length");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower(i) < upper(i))) fail(child(child(path, "upper"), static_cast<std::size_t>(i)), "must exceed lower");
        }
        return PriorSpec::uniform(std::move(lower), std::move(upper));
    }
    fail(child(path, "kind"), "expected 'normal' or 'uniform'");
}

json prior_json(const PriorSpec& prior) {
    if (prior.kind == PriorSpec::Kind::uniform) {
        return {{"kind", "uniform"}, {"lower", vector_json(prior.lower)}, {"upper", vector_json(prior.upper)}};
    }
    const bool diagonal = prior.cov.isDiagonal(0.0);
    json out = {{"kind", "normal"}, {"mean", vector_json(prior.mean)}};
    if (diagonal) {
        out["cov_diag"] = vector_json(prior.cov.diagonal());
    } else {
        json rows = json::array();
        for (Eigen::Index r = 0; r < prior.cov.rows(); ++r) rows.push_back(vector_json(prior.cov.row(r).transpose()));
        out["cov"] = rows;
    }
    return out;
}

ModelSpec parse_model(const json& v, const std::string& path) {
    reject_unknown(v, path, {"family", "degree", "noise", "prior"});
    const Family family = get_family(require(v, path, "family"), child(path, "family"));
    const double noise = get_number(require(v, path, "noise"), child(path, "noise"));
    if (!(noise > 0.0)) fail(child(path, "noise"), "must be positive");
    ModelSpec spec;
    switch (family) {
        case Family::eut: spec = ModelSpec::eut(noise); break;
        case Family::cpt: spec = ModelSpec::cpt(noise); break;
        default: {
            const int degree = get_int(require(v, path, "degree"), child(path, "degree"));
            if (degree < 0) fail(child(path, "degree"), "must be >= 0");
            PriorSpec prior = parse_prior(require(v, path, "prior"), child(path, "prior"));
            if (prior.dim() != degree + 1) fail(child(path, "prior"), "dimension must be degree + 1");
            spec = family == Family::gaussian_linear ? ModelSpec::gaussian_linear(degree, noise, std::move(prior))
                                                     : ModelSpec::logistic_poly(degree, noise, std::move(prior));
            return spec;
        }
    }
    if (v.contains("prior")) {
        PriorSpec prior = parse_prior(v["prior"], child(path, "prior"));
        if (prior.kind != PriorSpec::Kind::uniform) fail(child(path, "prior"), "gamble models take a uniform prior");
        if (prior.dim() != spec.param_dim()) fail(child(path, "prior"), "dimension does not match the family");
        spec.prior = std::move(prior);
        spec.space = spec.prior.support();
    }
    return spec;
}

json model_json(const ModelSpec& spec) {
    json out = {{"family", std::string(to_string(spec.family))}, {"noise", spec.noise}};
    if (spec.family == Family::gaussian_linear || spec.family == Family::logistic_poly) out["degree"] = spec.degree;
    out["prior"] = prior_json(spec.prior);
    return out;
}

Eigen::Index family_dim(Family family, int degree) {
    switch (family) {
        case Family::eut: return 1;
        case Family::cpt: return 3;
        default: return degree + 1;
    }
}

TruthConfig parse_truth(const json& v, const std::string& path) {
    reject_unknown(v, path, {"family", "degree", "noise", "generating", "selection"});
    TruthConfig truth;
    truth.family = get_family(require(v, path, "family"), child(path, "family"));
    if (truth.family == Family::gaussian_linear || truth.family == Family::logistic_poly) {
        truth.degree = get_int(require(v, path, "degree"), child(path, "degree"));
        if (truth.degree < 0) fail(child(path, "degree"), "must be >= 0");
    }
    truth.noise = get_number(require(v, path, "noise"), child(path, "noise"));
    if (!(truth.noise > 0.0)) fail(child(path, "noise"), "must be positive");

    const std::string gpath = child(path, "generating");
    const json& gen = require(v, path, "generating");
    const Eigen::Index dim = family_dim(truth.family, truth.degree);
    if (gen.is_object() && gen.contains("kind") && gen["kind"] == "fixed") {
        reject_unknown(gen, gpath, {"kind", "value"});
        truth.generating.kind = GeneratingSpec::Kind::fixed;
        truth.generating.value = get_vector(require(gen, gpath, "value"), child(gpath, "value"));
        if (truth.generating.value.size() != dim) fail(child(gpath, "value"), "dimension does not match the family");
    } else {
        truth.generating.kind = GeneratingSpec::Kind::prior;
        truth.generating.prior = parse_prior(gen, gpath);
        if (truth.generating.prior.dim() != dim) fail(gpath, "dimension does not match the family");
    }

    if (v.contains("selection")) {
        const std::string spath = child(path, "selection");
        const json& sel = v["selection"];
        reject_unknown(sel, spath, {"pool_size", "keep_fraction"});
        if (truth.family != Family::logistic_poly) fail(spath, "only logistic-poly truths support pool selection");
        truth.generating.pool_size = get_int(require(sel, spath, "pool_size"), child(spath, "pool_size"));
        truth.generating.keep_fraction = get_number(require(sel, spath, "keep_fraction"), child(spath, "keep_fraction"));
        if (truth.generating.pool_size < 1) fail(child(spath, "pool_size"), "must be >= 1");
        if (!(truth.generating.keep_fraction > 0.0 && truth.generating.keep_fraction <= 1.0)) {
            fail(child(spath, "keep_fraction"), "must lie in (0, 1]");
        }
    }
    return truth;
}

json truth_json(const TruthConfig& truth) {
    json out = {{"family", std::string(to_string(truth.family))}, {"noise", truth.noise}};
    if (truth.family == Family::gaussian_linear || truth.family == Family::logistic_poly) out["degree"] = truth.degree;
    if (truth.generating.kind == GeneratingSpec::Kind::fixed) {
        out["generating"] = {{"kind", "fixed"}, {"value", vector_json(truth.generating.value)}};
    } else {
        out["generating"] = prior_json(truth.generating.prior);
    }
    if (truth.generating.pool_size > 0) {
        out["selection"] = {{"pool_size", truth.generating.pool_size},
                            {"keep_fraction", truth.generating.keep_fraction}};
    }
    return out;
}

TargetConfig parse_target(const json& v, const std::string& path) {
    TargetConfig target;
    const std::string kind = get_string(require(v, path, "kind"), child(path, "kind"));
    if (kind == "uniform-continuous") {
        reject_unknown(v, path, {"kind", "lo", "hi"});
        target.kind = TargetConfig::Kind::uniform_continuous;
        target.lo = get_number(require(v, path, "lo"), child(path, "lo"));
        target.hi = get_number(require(v, path, "hi"), child(path, "hi"));
        if (!(target.lo < target.hi)) fail(child(path, "hi"), "must exceed lo");
    } else if (kind == "gamble-space") {
        reject_unknown(v, path, {"kind", "count", "seed"});
        target.kind = TargetConfig::Kind::gamble_space;
        target.gamble_count = get_int(require(v, path, "count"), child(path, "count"));
        if (target.gamble_count < 1) fail(child(path, "count"), "must be >= 1");
        target.gamble_seed = get_seed(require(v, path, "seed"), child(path, "seed"));
    } else {
        fail(child(path, "kind"), "expected 'uniform-continuous' or 'gamble-space'");
    }
    return target;
}

json target_json(const TargetConfig& target) {
    if (target.kind == TargetConfig::Kind::gamble_space) {
        return {{"kind", "gamble-space"}, {"count", target.gamble_count}, {"seed", target.gamble_seed}};
    }
    return {{"kind", "uniform-continuous"}, {"lo", target.lo}, {"hi", target.hi}};
}

ArmConfig parse_arm(const json& v, const std::string& path) {
    reject_unknown(v, path, {"name", "policy", "designs"});
    ArmConfig arm;
    arm.name = get_string(require(v, path, "name"), child(path, "name"));
    if (arm.name.empty()) fail(child(path, "name"), "must be non-empty");
    const std::string policy = get_string(require(v, path, "policy"), child(path, "policy"));
    if (policy == "adaptive") {
        arm.policy = DesignPolicy::adaptive();
    } else if (policy == "random") {
        arm.policy = DesignPolicy::random();
    } else if (policy == "replay") {
        const std::string dpath = child(path, "designs");
        const json& designs = require(v, path, "designs");
        if (!designs.is_array() || designs.empty()) fail(dpath, "expected a non-empty array");
        std::vector<Design> seq;
        seq.reserve(designs.size());
        for (std::size_t i = 0; i < designs.size(); ++i) {
            if (designs[i].is_array()) {
                seq.push_back(Design{get_vector(designs[i], child(dpath, i))});
            } else {
                seq.push_back(Design::scalar(get_number(designs[i], child(dpath, i))));
            }
        }
        arm.policy = DesignPolicy::replay(std::move(seq));
    } else {
        fail(child(path, "policy"), "expected 'adaptive', 'random' or 'replay'");
    }
    if (policy != "replay" && v.contains("designs")) fail(child(path, "designs"), "only replay arms take designs");
    return arm;
}

json arm_json(const ArmConfig& arm) {
    json out = {{"name", arm.name}};
    switch (arm.policy.kind) {
        case DesignPolicy::Kind::adaptive: out["policy"] = "adaptive"; break;
        case DesignPolicy::Kind::random: out["policy"] = "random"; break;
        case DesignPolicy::Kind::replay: {
            out["policy"] = "replay";
            json designs = json::array();
            for (const Design& d : arm.policy.sequence) {
                if (d.dim() == 1) {
                    designs.push_back(d.x());
                } else {
                    designs.push_back(vector_json(d.value));
                }
            }
            out["designs"] = designs;
            break;
        }
    }
    return out;
}

} // namespace

ModelSpec TruthConfig::spec() const {
    ModelSpec s;
    s.family = family;
    s.degree = degree;
    s.noise = noise;
    const Eigen::Index dim = family_dim(family, degree);
    if (generating.kind == GeneratingSpec::Kind::prior) {
        s.prior = generating.prior;
    } else {
        s.prior = PriorSpec::diag_normal(Vector::Zero(dim), Vector::Ones(dim));
    }
    s.space = ParamSpace::unbounded(dim);
    return s;
}

TargetDistribution ExperimentConfig::target_distribution() const {
    if (target.kind == TargetConfig::Kind::gamble_space) {
        return TargetDistribution::discrete(generate_gamble_space(target.gamble_seed, target.gamble_count).designs());
    }
    return TargetDistribution::continuous(target.lo, target.hi);
}

std::vector<Design> ExperimentConfig::candidates() const {
    return design_grid(target_distribution(), design_grid_points);
}

void ExperimentConfig::validate() const {
    if (name.empty()) fail("/name", "must be non-empty");
    if (horizon < 1) fail("/horizon", "must be >= 1");
    if (replications < 1) fail("/replications", "must be >= 1");
    if (eval_size < 1) fail("/eval_size", "must be >= 1");
    if (design_grid_points < 2) fail("/design_grid_points", "must be >= 2");
    if (arms.empty()) fail("/arms", "at least one arm is required");
    if (posterior.grid_points < 2) fail("/posterior/grid_points", "must be >= 2");
    if (posterior.particles < 2) fail("/posterior/particles", "must be >= 2");
    if (!(posterior.refresh_ess_fraction > 0.0 && posterior.refresh_ess_fraction <= 1.0)) {
        fail("/posterior/refresh_ess_fraction", "must lie in (0, 1]");
    }
    try {
        model.validate();
    } catch (const Error& e) {
        fail("/model", e.detail());
    }

    const bool gamble_target = target.kind == TargetConfig::Kind::gamble_space;
    const bool gamble_truth = truth.family == Family::eut || truth.family == Family::cpt;
    const bool gamble_model = model.family == Family::eut || model.family == Family::cpt;
    if (gamble_truth != gamble_target) fail("/target", "gamble truths need a gamble-space target and vice versa");
    if (gamble_model != gamble_target) fail("/model/family", "does not match the target's design type");
    if (truth.spec().is_binary() != model.is_binary()) fail("/model/family", "outcome type differs from the truth's");
    if (model.family == Family::logistic_poly && truth.family != Family::logistic_poly) {
        fail("/model/family", "logistic-poly models need a logistic-poly truth");
    }

    bool has_alb_arm = false;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const ArmConfig& arm = arms[i];
        const std::string path = "/arms/" + std::to_string(i);
        if (arm.name.empty()) fail(path + "/name", "must be non-empty");
        for (std::size_t j = 0; j < i; ++j) {
            if (arms[j].name == arm.name) fail(path + "/name", "duplicate arm name '" + arm.name + "'");
        }
        has_alb_arm = has_alb_arm || arm.name == alb_arm;
        if (arm.policy.kind == DesignPolicy::Kind::replay) {
            if (arm.policy.sequence.size() < static_cast<std::size_t>(horizon)) {
                fail(path + "/designs", "replay sequence is shorter than the horizon");
            }
            const Eigen::Index want = gamble_target ? 3 : 1;
            for (std::size_t k = 0; k < arm.policy.sequence.size(); ++k) {
                if (arm.policy.sequence[k].dim() != want) {
                    fail(path + "/designs/" + std::to_string(k), "design dimension does not match the target");
                }
            }
        }
    }
    if (!has_alb_arm) fail("/alb_arm", "names no configured arm");
}

json to_json(const ExperimentConfig& c) {
    json arms = json::array();
    for (const ArmConfig& arm : c.arms) arms.push_back(arm_json(arm));
    return {
        {"name", c.name},
        {"truth", truth_json(c.truth)},
        {"model", model_json(c.model)},
        {"target", target_json(c.target)},
        {"design_grid_points", c.design_grid_points},
        {"horizon", c.horizon},
        {"replications", c.replications},
        {"base_seed", c.base_seed},
        {"eval_size", c.eval_size},
        {"arms", arms},
        {"alb_arm", c.alb_arm},
        {"posterior",
         {{"grid_points", c.posterior.grid_points},
          {"particles", c.posterior.particles},
          {"refresh_ess_fraction", c.posterior.refresh_ess_fraction}}},
        {"output_dir", c.output_dir},
    };
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) fail("", "expected an object at the top level");
    reject_unknown(doc, "", {"name", "truth", "model", "target", "design_grid_points", "horizon", "replications",
                             "base_seed", "eval_size", "arms", "alb_arm", "posterior", "output_dir"});
    ExperimentConfig c;
    c.name = get_string(require(doc, "", "name"), "/name");
    c.truth = parse_truth(require(doc, "", "truth"), "/truth");
    c.model = parse_model(require(doc, "", "model"), "/model");
    c.target = parse_target(require(doc, "", "target"), "/target");
    c.base_seed = get_seed(require(doc, "", "base_seed"), "/base_seed");
    if (doc.contains("design_grid_points")) c.design_grid_points = get_int(doc["design_grid_points"], "/design_grid_points");
    if (doc.contains("horizon")) c.horizon = get_int(doc["horizon"], "/horizon");
    if (doc.contains("replications")) c.replications = get_int(doc["replications"], "/replications");
    if (doc.contains("eval_size")) c.eval_size = get_int(doc["eval_size"], "/eval_size");
    if (doc.contains("alb_arm")) c.alb_arm = get_string(doc["alb_arm"], "/alb_arm");
    if (doc.contains("output_dir")) c.output_dir = get_string(doc["output_dir"], "/output_dir");

    const json& arms = require(doc, "", "arms");
    if (!arms.is_array()) fail("/arms", "expected an array");
    for (std::size_t i = 0; i < arms.size(); ++i) c.arms.push_back(parse_arm(arms[i], child("/arms", i)));

    if (doc.contains("posterior")) {
        const json& p = doc["posterior"];
        reject_unknown(p, "/posterior", {"grid_points", "particles", "refresh_ess_fraction"});
        if (p.contains("grid_points")) c.posterior.grid_points = get_int(p["grid_points"], "/posterior/grid_points");
        if (p.contains("particles")) c.posterior.particles = get_int(p["particles"], "/posterior/particles");
        if (p.contains("refresh_ess_fraction")) {
            c.posterior.refresh_ess_fraction = get_number(p["refresh_ess_fraction"], "/posterior/refresh_ess_fraction");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw Error(ErrorCode::config, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
    }
    return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

} // namespace adbias

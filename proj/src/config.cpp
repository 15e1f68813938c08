#include "cbm/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cbm/errors.hpp"

namespace cbm::app {
namespace {

using nlohmann::json;

// Walks one object, remembers which keys were read and rejects the rest.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) detail::fail_validation("config", where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        if (!j_.contains(key)) return fallback;
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            detail::fail_validation("config", "field " + child(key) + " has the wrong type");
        }
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(j_.at(key), child(key));
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "top level" : path_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) detail::fail_validation("config", "unknown key " + child(it.key()));
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> read_grid(const json& j, const std::string& path) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) detail::fail_validation("config", path + " must hold numbers");
            v.push_back(x.get<double>());
        }
        if (v.empty()) detail::fail_validation("config", path + " is empty");
        return v;
    }
    Section s(j, path);
    const double from = s.get<double>("from", 0.0);
    const double to = s.get<double>("to", 0.0);
    const int points = s.get<int>("points", 0);
    const bool open = s.get<bool>("open", false);
    s.finish();
    if (points < 1) detail::fail_validation("config", path + ".points must be >= 1");
    return open ? open_linspace(from, to, points) : linspace(from, to, points);
}

json grid_json(double from, double to, int points) { return {{"from", from}, {"to", to}, {"points", points}}; }

GammaModel read_degradation(Section s) {
    const double alpha = s.get<double>("alpha", 1.0);
    GammaModel model;
    if (s.has("inverse_scale")) {
        if (s.has("beta")) detail::fail_validation("config", s.child("beta") + " conflicts with inverse_scale");
        Section r = s.sub("inverse_scale");
        const double lo = r.get<double>("lower", 0.0), hi = r.get<double>("upper", 0.0);
        r.finish();
        model = GammaModel::uniform_inverse(alpha, lo, hi);
    } else {
        model = GammaModel::deterministic(alpha, s.get<double>("beta", 1.0));
    }
    s.finish();
    return model;
}

SweepKind read_kind(const std::string& name) {
    if (name == "shape_and_rate") return SweepKind::shape_and_rate;
    if (name == "shape_and_scale_center") return SweepKind::shape_and_scale_center;
    if (name == "costs") return SweepKind::corrective_and_preventive;
    detail::fail_validation("config", "sensitivity.kind must be shape_and_rate, shape_and_scale_center or costs, got '" +
                                          name + "'");
}

std::string kind_name(SweepKind k) {
    switch (k) {
        case SweepKind::shape_and_rate: return "shape_and_rate";
        case SweepKind::shape_and_scale_center: return "shape_and_scale_center";
        case SweepKind::corrective_and_preventive: return "costs";
    }
    return "?";
}

json common_preset() {
    return {
        {"system",
         {{"arrivals", {{"lambda0", 1.0}, {"mu", 2.0}, {"delta", 0.5}}}, {"failure_threshold", 10.0}}},
        {"costs", {{"preventive", 100.0}, {"corrective", 200.0}, {"inspection", 50.0}, {"downtime", 60.0}}},
        {"grid", {{"T", grid_json(1.0, 25.0, 10)}, {"M", grid_json(1.0, 10.0, 8)}}},
        {"simulation", {{"n_cycles", 6000}, {"substeps", 16}, {"max_inspections", 200}}},
        {"sensitivity",
         {{"axis1", grid_json(1.0, 1.9, 7)}, {"axis2", grid_json(1.0, 1.9, 7)}, {"n_cycles", 1000}}},
        {"fit", {{"shape_rate", 1.5}, {"center", 1.0}, {"true_half_width", 0.3}, {"processes", 26},
                 {"horizon", 30.0}, {"dt", 1.0}, {"grid", grid_json(0.02, 0.98, 49)}}},
    };
}

}  // namespace

std::vector<std::string> preset_names() { return {"baseline_deterministic", "baseline_random_effects"}; }

json preset_json(const std::string& name) {
    json j = common_preset();
    if (name == "baseline_deterministic") {
        j["system"]["degradation"] = {{"alpha", 1.1}, {"beta", 1.4}};
        j["policy"] = {{"T", 1.0 + 2.0 * 24.0 / 9.0}, {"M", 1.0 + 4.0 * 9.0 / 7.0}};
        j["sensitivity"]["kind"] = "shape_and_rate";
    } else if (name == "baseline_random_effects") {
        j["system"]["degradation"] = {{"alpha", 1.1},
                                      {"inverse_scale", {{"lower", 1.0 / 1.4 - 0.1}, {"upper", 1.0 / 1.4 + 0.1}}}};
        j["policy"] = {{"T", 1.0 + 2.0 * 24.0 / 9.0}, {"M", 1.0 + 3.0 * 9.0 / 7.0}};
        j["sensitivity"]["kind"] = "shape_and_scale_center";
    } else {
        detail::fail_validation("config", "unknown preset '" + name + "'");
    }
    j["preset"] = name;
    return j;
}

ExperimentConfig parse_config(const json& input) {
    json doc = input;
    if (doc.is_object() && doc.contains("preset")) {
        if (!doc["preset"].is_string()) detail::fail_validation("config", "preset must be a string");
        json base = preset_json(doc["preset"].get<std::string>());
        base.merge_patch(doc);
        doc = std::move(base);
    }
    ExperimentConfig cfg;
    Section top(doc, "");
    cfg.preset = top.get<std::string>("preset", "");
    cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);

    if (top.has("system")) {
        Section s = top.sub("system");
        if (s.has("arrivals")) {
            Section a = s.sub("arrivals");
            cfg.system.arrivals.lambda0 = a.get<double>("lambda0", cfg.system.arrivals.lambda0);
            cfg.system.arrivals.mu = a.get<double>("mu", cfg.system.arrivals.mu);
            cfg.system.arrivals.delta = a.get<double>("delta", cfg.system.arrivals.delta);
            a.finish();
        }
        if (s.has("degradation")) cfg.system.growth = read_degradation(s.sub("degradation"));
        cfg.system.failure_threshold = s.get<double>("failure_threshold", cfg.system.failure_threshold);
        s.finish();
    }
    if (top.has("costs")) {
        Section c = top.sub("costs");
        cfg.costs.preventive = c.get<double>("preventive", cfg.costs.preventive);
        cfg.costs.corrective = c.get<double>("corrective", cfg.costs.corrective);
        cfg.costs.inspection = c.get<double>("inspection", cfg.costs.inspection);
        cfg.costs.downtime = c.get<double>("downtime", cfg.costs.downtime);
        c.finish();
    }
    if (top.has("policy")) {
        Section p = top.sub("policy");
        cfg.policy = PolicyParams{p.get<double>("T", 1.0), p.get<double>("M", 1.0)};
        p.finish();
    }
    if (top.has("grid")) {
        Section g = top.sub("grid");
        if (g.has("T")) cfg.t_grid = read_grid(g.raw("T"), "grid.T");
        if (g.has("M")) cfg.m_grid = read_grid(g.raw("M"), "grid.M");
        g.finish();
    }
    if (top.has("simulation")) {
        Section s = top.sub("simulation");
        cfg.n_cycles = s.get<std::int64_t>("n_cycles", cfg.n_cycles);
        cfg.sim.substeps = s.get<int>("substeps", cfg.sim.substeps);
        cfg.sim.max_inspections = s.get<int>("max_inspections", cfg.sim.max_inspections);
        cfg.sim.exact_crossing = s.get<bool>("exact_crossing", cfg.sim.exact_crossing);
        s.finish();
    }
    if (top.has("analytic")) {
        Section a = top.sub("analytic");
        cfg.analytic.k_max = a.get<int>("k_max", cfg.analytic.k_max);
        cfg.analytic.tol = a.get<double>("tol", cfg.analytic.tol);
        const std::string form = a.get<std::string>("form", "exact");
        if (form == "exact")
            cfg.analytic.form = PreventiveForm::exact;
        else if (form == "factorized")
            cfg.analytic.form = PreventiveForm::factorized;
        else
            detail::fail_validation("config", "analytic.form must be exact or factorized");
        cfg.analytic.scale_nodes = a.get<int>("scale_nodes", cfg.analytic.scale_nodes);
        a.finish();
    }
    if (top.has("arrivals")) {
        Section a = top.sub("arrivals");
        cfg.arrivals.horizon = a.get<double>("horizon", cfg.arrivals.horizon);
        cfg.arrivals.runs = a.get<std::int64_t>("runs", cfg.arrivals.runs);
        cfg.arrivals.check_times = a.get<std::vector<double>>("check_times", cfg.arrivals.check_times);
        cfg.arrivals.trajectories = a.get<int>("trajectories", cfg.arrivals.trajectories);
        a.finish();
    }
    if (top.has("reliability")) {
        Section r = top.sub("reliability");
        cfg.reliability.horizon = r.get<double>("horizon", cfg.reliability.horizon);
        cfg.reliability.points = r.get<int>("points", cfg.reliability.points);
        cfg.reliability.runs = r.get<std::int64_t>("runs", cfg.reliability.runs);
        r.finish();
    }
    if (top.has("fit")) {
        Section f = top.sub("fit");
        cfg.fit.data = f.get<std::string>("data", cfg.fit.data);
        cfg.fit.shape_rate = f.get<double>("shape_rate", cfg.fit.shape_rate);
        cfg.fit.center = f.get<double>("center", cfg.fit.center);
        cfg.fit.true_half_width = f.get<double>("true_half_width", cfg.fit.true_half_width);
        cfg.fit.processes = f.get<int>("processes", cfg.fit.processes);
        cfg.fit.horizon = f.get<double>("horizon", cfg.fit.horizon);
        cfg.fit.dt = f.get<double>("dt", cfg.fit.dt);
        if (f.has("grid")) cfg.fit.grid = read_grid(f.raw("grid"), "fit.grid");
        f.finish();
    }
    if (top.has("sensitivity")) {
        Section s = top.sub("sensitivity");
        cfg.sensitivity.kind = read_kind(s.get<std::string>("kind", "shape_and_rate"));
        if (s.has("axis1")) cfg.sensitivity.axis1 = read_grid(s.raw("axis1"), "sensitivity.axis1");
        if (s.has("axis2")) cfg.sensitivity.axis2 = read_grid(s.raw("axis2"), "sensitivity.axis2");
        cfg.sensitivity.n_cycles = s.get<std::int64_t>("n_cycles", cfg.sensitivity.n_cycles);
        s.finish();
    }
    if (top.has("validate")) {
        Section v = top.sub("validate");
        cfg.validate_run.cycles = v.get<std::int64_t>("cycles", cfg.validate_run.cycles);
        cfg.validate_run.sigma = v.get<double>("sigma", cfg.validate_run.sigma);
        cfg.validate_run.lifetime_runs = v.get<std::int64_t>("lifetime_runs", cfg.validate_run.lifetime_runs);
        v.finish();
    }
    top.finish();

    if (cfg.fit.grid.empty()) cfg.fit.grid = linspace(0.02, 0.98, 49);
    cfg.sensitivity.t_grid = cfg.t_grid;
    cfg.sensitivity.m_grid = cfg.m_grid;
    // Shape/scale sweeps re-optimize per cell; cost sweeps hold the policy.
    if (cfg.sensitivity.kind == SweepKind::corrective_and_preventive) cfg.sensitivity.fixed_policy = cfg.policy;
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    system.validate();
    costs.validate();
    sim.validate();
    if (policy) policy->validate(system.failure_threshold);
    for (double m : m_grid)
        detail::require(m > 0.0 && m <= system.failure_threshold, "config",
                        "grid.M values must lie in (0, failure_threshold]");
    for (double t : t_grid) detail::require(t > 0.0, "config", "grid.T values must be positive");
    detail::require(n_cycles >= 2, "config", "simulation.n_cycles must be >= 2");
    detail::require(arrivals.horizon > 0.0 && arrivals.runs >= 2 && arrivals.trajectories >= 0, "config",
                    "arrivals: horizon > 0, runs >= 2, trajectories >= 0 required");
    for (double t : arrivals.check_times)
        detail::require(t > 0.0 && t <= arrivals.horizon, "config", "arrivals.check_times must lie in (0, horizon]");
    detail::require(reliability.horizon > 0.0 && reliability.points >= 2 && reliability.runs >= 0, "config",
                    "reliability: horizon > 0, points >= 2, runs >= 0 required");
    detail::require(fit.processes >= 1 && fit.horizon > 0.0 && fit.dt > 0.0 && fit.dt <= fit.horizon, "config",
                    "fit: processes >= 1 and 0 < dt <= horizon required");
    detail::require(fit.shape_rate > 0.0 && fit.center > 0.0, "config", "fit: shape_rate and center must be positive");
    for (double w : fit.grid)
        detail::require(w > 0.0 && w < fit.center, "config", "fit.grid half-widths must lie in (0, center)");
    detail::require(fit.true_half_width > 0.0 && fit.true_half_width < fit.center, "config",
                    "fit.true_half_width must lie in (0, center)");
    detail::require(validate_run.cycles >= 100 && validate_run.sigma > 0.0 && validate_run.lifetime_runs >= 100,
                    "config", "validate: cycles >= 100, sigma > 0, lifetime_runs >= 100 required");
    detail::require(analytic.k_max >= 1 && analytic.tol > 0.0 && analytic.scale_nodes >= 1, "config",
                    "analytic: k_max >= 1, tol > 0, scale_nodes >= 1 required");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::fail_validation("config", "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        detail::fail_validation("config", path + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    if (!cfg.preset.empty()) j["preset"] = cfg.preset;
    j["seed"] = cfg.seed;
    json deg = {{"alpha", cfg.system.growth.shape_rate}};
    if (const auto* d = std::get_if<DeterministicScale>(&cfg.system.growth.scale))
        deg["beta"] = d->rate;
    else if (const auto* u = std::get_if<UniformInverseScale>(&cfg.system.growth.scale))
        deg["inverse_scale"] = {{"lower", u->lower}, {"upper", u->upper}};
    j["system"] = {{"arrivals",
                    {{"lambda0", cfg.system.arrivals.lambda0},
                     {"mu", cfg.system.arrivals.mu},
                     {"delta", cfg.system.arrivals.delta}}},
                   {"degradation", deg},
                   {"failure_threshold", cfg.system.failure_threshold}};
    j["costs"] = {{"preventive", cfg.costs.preventive},
                  {"corrective", cfg.costs.corrective},
                  {"inspection", cfg.costs.inspection},
                  {"downtime", cfg.costs.downtime}};
    if (cfg.policy) j["policy"] = {{"T", cfg.policy->inspection_period}, {"M", cfg.policy->preventive_threshold}};
    j["grid"] = {{"T", cfg.t_grid}, {"M", cfg.m_grid}};
    j["simulation"] = {{"n_cycles", cfg.n_cycles},
                       {"substeps", cfg.sim.substeps},
                       {"max_inspections", cfg.sim.max_inspections},
                       {"exact_crossing", cfg.sim.exact_crossing}};
    j["analytic"] = {{"k_max", cfg.analytic.k_max},
                     {"tol", cfg.analytic.tol},
                     {"form", cfg.analytic.form == PreventiveForm::exact ? "exact" : "factorized"},
                     {"scale_nodes", cfg.analytic.scale_nodes}};
    j["arrivals"] = {{"horizon", cfg.arrivals.horizon},
                     {"runs", cfg.arrivals.runs},
                     {"check_times", cfg.arrivals.check_times},
                     {"trajectories", cfg.arrivals.trajectories}};
    j["reliability"] = {{"horizon", cfg.reliability.horizon},
                        {"points", cfg.reliability.points},
                        {"runs", cfg.reliability.runs}};
    j["fit"] = {{"data", cfg.fit.data},          {"shape_rate", cfg.fit.shape_rate},
                {"center", cfg.fit.center},      {"true_half_width", cfg.fit.true_half_width},
                {"processes", cfg.fit.processes}, {"horizon", cfg.fit.horizon},
                {"dt", cfg.fit.dt},              {"grid", cfg.fit.grid}};
    j["sensitivity"] = {{"kind", kind_name(cfg.sensitivity.kind)},
                        {"axis1", cfg.sensitivity.axis1},
                        {"axis2", cfg.sensitivity.axis2},
                        {"n_cycles", cfg.sensitivity.n_cycles}};
    j["validate"] = {{"cycles", cfg.validate_run.cycles},
                     {"sigma", cfg.validate_run.sigma},
                     {"lifetime_runs", cfg.validate_run.lifetime_runs}};
    return j;
}

}  // namespace cbm::app

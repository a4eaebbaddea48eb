#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmelab/analysis.hpp"
#include "pmelab/barrier.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

struct CheckpointSchedule {
    double ratio = 4.0;
    std::optional<double> t_first;  ///< default 10 t0 (or 10 when t0 = 0)
    std::optional<int> count;       ///< default: fill up to t_end

    bool operator==(const CheckpointSchedule&) const = default;
};

/// Region/barrier parameters for the sandwich checks.
struct SandwichParams {
    double delta_fraction = 0.5;  ///< delta as a fraction of delta_bar
    double eps = 0.1;
    double a = 0.01;
    double k0 = 2.0;
    double c0 = 0.5;

    bool operator==(const SandwichParams&) const = default;
};

struct GridSpec {
    double dx = 0.01;
    std::optional<double> fixed_length;  ///< absent = auto sizing
    double margin = 1.5;                 ///< auto: L = margin xi_M t_end^beta

    bool operator==(const GridSpec&) const = default;
};

struct ExperimentConfig {
    double m = 0.0;
    InitialData initial;
    GridSpec grid;
    double cfl_safety = 0.9;
    double t0 = 0.0;
    double t_end = 0.0;
    CheckpointSchedule checkpoints;
    std::uint64_t max_steps = 200000000;
    SandwichParams sandwich;
    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, const char* where,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (key == k) ok = true;
        if (!ok)
            throw config_error(std::string(where) + ": unknown key '" + key + "'");
    }
}

inline double require_number(const json& j, const char* where, const char* key) {
    if (!j.contains(key))
        throw config_error(std::string(where) + ": missing field '" + key + "'");
    if (!j.at(key).is_number())
        throw config_error(std::string(where) + ": field '" + key +
                           "' must be a number");
    return j.at(key).get<double>();
}

inline InitialData parse_initial(const json& j) {
    if (!j.is_object() || j.size() != 1)
        throw config_error("initial: expected exactly one data kind");
    const auto& [kind, body] = *j.items().begin();
    if (kind == "box") {
        reject_unknown_keys(body, "initial.box", {"h", "x1", "x2"});
        return BoxData{require_number(body, "initial.box", "h"),
                       require_number(body, "initial.box", "x1"),
                       require_number(body, "initial.box", "x2")};
    }
    if (kind == "hat") {
        reject_unknown_keys(body, "initial.hat", {"peak", "x1", "x2"});
        return HatData{require_number(body, "initial.hat", "peak"),
                       require_number(body, "initial.hat", "x1"),
                       require_number(body, "initial.hat", "x2")};
    }
    if (kind == "samples") {
        reject_unknown_keys(body, "initial.samples", {"x", "u"});
        SampleData d;
        if (!body.contains("x") || !body.contains("u"))
            throw config_error("initial.samples: need arrays 'x' and 'u'");
        d.x = body.at("x").get<std::vector<double>>();
        d.u = body.at("u").get<std::vector<double>>();
        return d;
    }
    if (kind == "dipole") {
        reject_unknown_keys(body, "initial.dipole", {"M", "t0"});
        return DipoleData{require_number(body, "initial.dipole", "M"),
                          require_number(body, "initial.dipole", "t0")};
    }
    if (kind == "barenblatt") {
        reject_unknown_keys(body, "initial.barenblatt", {"C", "x0", "t0"});
        return BarenblattData{require_number(body, "initial.barenblatt", "C"),
                              require_number(body, "initial.barenblatt", "x0"),
                              require_number(body, "initial.barenblatt", "t0")};
    }
    throw config_error("initial: unknown data kind '" + kind + "'");
}

inline json initial_to_json(const InitialData& data) {
    json j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, BoxData>) {
                j["box"] = {{"h", d.height}, {"x1", d.x1}, {"x2", d.x2}};
            } else if constexpr (std::is_same_v<T, HatData>) {
                j["hat"] = {{"peak", d.peak}, {"x1", d.x1}, {"x2", d.x2}};
            } else if constexpr (std::is_same_v<T, SampleData>) {
                j["samples"] = {{"x", d.x}, {"u", d.u}};
            } else if constexpr (std::is_same_v<T, DipoleData>) {
                j["dipole"] = {{"M", d.M}, {"t0", d.t0}};
            } else {
                j["barenblatt"] = {{"C", d.C}, {"x0", d.x0}, {"t0", d.t0}};
            }
        },
        data);
    return j;
}

}  // namespace detail

/// Parses and validates an experiment configuration. Unknown keys are
/// rejected; every module-level precondition is checked here so a bad
/// config fails before any compute starts.
inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    using detail::reject_unknown_keys;
    using detail::require_number;
    if (!j.is_object()) throw config_error("config: expected a JSON object");
    reject_unknown_keys(j, "config",
                        {"m", "initial", "grid", "cfl_safety", "t0", "t_end",
                         "checkpoints", "max_steps", "sandwich", "out_dir"});

    ExperimentConfig cfg;
    cfg.m = require_number(j, "config", "m");
    if (!(cfg.m > 1.0)) throw config_error("config: m must exceed 1");

    if (!j.contains("initial")) throw config_error("config: missing 'initial'");
    cfg.initial = detail::parse_initial(j.at("initial"));
    try {
        validate_initial_data(cfg.initial);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: initial: ") + e.what());
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        reject_unknown_keys(g, "grid", {"dx", "domain", "margin"});
        if (g.contains("dx")) cfg.grid.dx = g.at("dx").get<double>();
        if (g.contains("margin")) cfg.grid.margin = g.at("margin").get<double>();
        if (g.contains("domain")) {
            const auto& dom = g.at("domain");
            if (dom.is_string()) {
                if (dom.get<std::string>() != "auto")
                    throw config_error("grid.domain: expected \"auto\" or a length");
            } else if (dom.is_number()) {
                cfg.grid.fixed_length = dom.get<double>();
            } else {
                throw config_error("grid.domain: expected \"auto\" or a length");
            }
        }
    }
    if (!(cfg.grid.dx > 0.0)) throw config_error("grid.dx must be positive");
    if (!(cfg.grid.margin > 1.0)) throw config_error("grid.margin must exceed 1");
    if (cfg.grid.fixed_length && !(*cfg.grid.fixed_length > 0.0))
        throw config_error("grid.domain length must be positive");

    if (j.contains("cfl_safety")) cfg.cfl_safety = j.at("cfl_safety").get<double>();
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety < 1.0))
        throw config_error("config: cfl_safety must lie in (0, 1)");

    cfg.t0 = j.contains("t0") ? j.at("t0").get<double>() : initial_time(cfg.initial);
    if (cfg.t0 < 0.0) throw config_error("config: t0 must be >= 0");
    const double intrinsic = initial_time(cfg.initial);
    if (intrinsic > 0.0 && cfg.t0 != intrinsic)
        throw config_error("config: t0 conflicts with the initial datum's t0");

    cfg.t_end = require_number(j, "config", "t_end");
    if (!(cfg.t_end > cfg.t0)) throw config_error("config: t_end must exceed t0");

    if (j.contains("checkpoints")) {
        const auto& c = j.at("checkpoints");
        reject_unknown_keys(c, "checkpoints", {"ratio", "t_first", "count"});
        if (c.contains("ratio")) cfg.checkpoints.ratio = c.at("ratio").get<double>();
        if (c.contains("t_first"))
            cfg.checkpoints.t_first = c.at("t_first").get<double>();
        if (c.contains("count")) cfg.checkpoints.count = c.at("count").get<int>();
        if (!(cfg.checkpoints.ratio > 1.0))
            throw config_error("checkpoints.ratio must exceed 1");
        if (cfg.checkpoints.t_first && !(*cfg.checkpoints.t_first > cfg.t0))
            throw config_error("checkpoints.t_first must exceed t0");
        if (cfg.checkpoints.count && *cfg.checkpoints.count < 1)
            throw config_error("checkpoints.count must be >= 1");
    }

    if (j.contains("max_steps")) {
        cfg.max_steps = j.at("max_steps").get<std::uint64_t>();
        if (cfg.max_steps == 0) throw config_error("config: max_steps must be >= 1");
    }

    if (j.contains("sandwich")) {
        const auto& s = j.at("sandwich");
        reject_unknown_keys(s, "sandwich", {"delta_fraction", "eps", "a", "k0", "c0"});
        auto& sw = cfg.sandwich;
        if (s.contains("delta_fraction"))
            sw.delta_fraction = s.at("delta_fraction").get<double>();
        if (s.contains("eps")) sw.eps = s.at("eps").get<double>();
        if (s.contains("a")) sw.a = s.at("a").get<double>();
        if (s.contains("k0")) sw.k0 = s.at("k0").get<double>();
        if (s.contains("c0")) sw.c0 = s.at("c0").get<double>();
        if (!(sw.delta_fraction > 0.0 && sw.delta_fraction < 1.0))
            throw config_error("sandwich.delta_fraction must lie in (0, 1)");
        if (!(sw.eps > 0.0)) throw config_error("sandwich.eps must be positive");
        if (!(sw.a > 0.0 && sw.a < 1.0))
            throw config_error("sandwich.a must lie in (0, 1)");
        if (!(sw.k0 > 1.0)) throw config_error("sandwich.k0 must exceed 1");
        if (!(sw.c0 > 0.0 && sw.c0 < 1.0))
            throw config_error("sandwich.c0 must lie in (0, 1)");
    }

    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return parse_config_json(j);
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["m"] = cfg.m;
    j["initial"] = detail::initial_to_json(cfg.initial);
    j["grid"]["dx"] = cfg.grid.dx;
    j["grid"]["margin"] = cfg.grid.margin;
    if (cfg.grid.fixed_length)
        j["grid"]["domain"] = *cfg.grid.fixed_length;
    else
        j["grid"]["domain"] = "auto";
    j["cfl_safety"] = cfg.cfl_safety;
    j["t0"] = cfg.t0;
    j["t_end"] = cfg.t_end;
    j["checkpoints"]["ratio"] = cfg.checkpoints.ratio;
    if (cfg.checkpoints.t_first) j["checkpoints"]["t_first"] = *cfg.checkpoints.t_first;
    if (cfg.checkpoints.count) j["checkpoints"]["count"] = *cfg.checkpoints.count;
    j["max_steps"] = cfg.max_steps;
    j["sandwich"] = {{"delta_fraction", cfg.sandwich.delta_fraction},
                     {"eps", cfg.sandwich.eps},
                     {"a", cfg.sandwich.a},
                     {"k0", cfg.sandwich.k0},
                     {"c0", cfg.sandwich.c0}};
    j["out_dir"] = cfg.out_dir;
    return j;
}

/// Geometric checkpoint schedule; t_end is always the final checkpoint.
inline std::vector<double> checkpoint_times(const ExperimentConfig& cfg) {
    std::vector<double> times;
    const double first = cfg.checkpoints.t_first
                             ? *cfg.checkpoints.t_first
                             : (cfg.t0 > 0.0 ? 10.0 * cfg.t0 : 10.0);
    double t = first;
    int k = 0;
    while (t <= cfg.t_end * (1.0 + 1e-12)) {
        if (cfg.checkpoints.count && k >= *cfg.checkpoints.count) break;
        times.push_back(std::min(t, cfg.t_end));
        ++k;
        t *= cfg.checkpoints.ratio;
    }
    if (times.empty() || times.back() < cfg.t_end) times.push_back(cfg.t_end);
    return times;
}

struct RunSummary {
    std::uint64_t steps = 0;
    double min_dt = 0.0;
    double wall_seconds = 0.0;
    double initial_mass = 0.0;
    double initial_moment = 0.0;
    double final_mass = 0.0;
    double final_moment = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    DipoleProfile profile;  ///< moment-matched to the discrete initial data
    std::vector<double> times;
    std::vector<SolverState> snapshots;
    ErrorSeries series;
    std::vector<double> profile_err;      ///< near-field profile error, K = 1
    std::vector<double> profile_err_alt;  ///< same with the alternative amplitude
    SandwichReport sandwich;
    RunSummary summary;
};

/// Called after each checkpoint is reached and analyzed; lets callers
/// persist partial output while the run is still in flight.
using CheckpointSink =
    std::function<void(std::size_t index, const SolverState&, const ErrorCheckpoint&)>;

/// Runs one experiment: initialize, march through the checkpoint schedule,
/// and evaluate every error metric at each checkpoint. The comparison
/// dipole takes its moment from the discrete initial data, which is what
/// the discrete flow actually conserves.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const CheckpointSink& sink = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    ExperimentResult result;
    result.config = cfg;

    SolverConfig scfg{cfg.m, cfg.cfl_safety, cfg.t_end, cfg.max_steps,
                      DomainPolicy{cfg.grid.fixed_length, cfg.grid.margin}};

    // Domain sizing needs xi_M, hence a profile for the continuum moment.
    const double moment0 = initial_moment(cfg.initial, cfg.m);
    if (!(moment0 > 0.0)) throw config_error("initial data must carry moment > 0");
    double length;
    if (cfg.grid.fixed_length) {
        length = *cfg.grid.fixed_length;
    } else {
        const DipoleProfile sizing = build_profile(cfg.m, moment0);
        length = cfg.grid.margin * sizing.xi_M *
                 std::pow(cfg.t_end, sizing.exponents.beta);
    }
    const Grid1D grid = grid_covering(cfg.grid.dx, length);

    SolverState state = init_state(grid, cfg.initial, cfg.t0, cfg.m);
    const Observables obs0 = observables(state);
    result.summary.initial_mass = obs0.mass;
    result.summary.initial_moment = obs0.moment;
    result.profile = build_profile(cfg.m, obs0.moment);

    result.times = checkpoint_times(cfg);
    RunStats total;
    for (double tc : result.times) {
        const RunStats stats = run_to(state, scfg, tc);
        total.steps += stats.steps;
        total.min_dt = std::min(total.min_dt, stats.min_dt);
        result.snapshots.push_back(state);

        const Observables obs = observables(state);
        const NearFieldError nf = near_field_error(state, result.profile);
        ErrorCheckpoint row{};
        row.t = state.t;
        row.e_far = far_field_error(state, result.profile);
        row.e_near = nf.e_near;
        row.e_signed_sup = nf.e_signed_sup;
        row.e_signed_inf = nf.e_signed_inf;
        row.front_dev = front_deviation(state, result.profile);
        row.mass = obs.mass;
        row.moment = obs.moment;
        row.umax = obs.umax;
        result.series.push_back(row);

        const double K = std::min(1.0, grid.length());
        result.profile_err.push_back(near_field_profile_error(
            state, result.profile, K, near_field_amplitude(result.profile)));
        result.profile_err_alt.push_back(near_field_profile_error(
            state, result.profile, K, near_field_amplitude_alt(result.profile)));
        if (sink) sink(result.snapshots.size() - 1, state, row);
    }

    const RegionParams rp = region_params(result.profile);
    const Region region{cfg.sandwich.delta_fraction * rp.delta_bar, rp.T_bar,
                        cfg.sandwich.a};
    const Barrier upper = make_barrier(BarrierKind::super, result.profile,
                                       cfg.sandwich.a, rp.T_bar, cfg.sandwich.k0);
    const Barrier lower = make_barrier(BarrierKind::sub, result.profile,
                                       cfg.sandwich.a, rp.T_bar, cfg.sandwich.c0);
    result.sandwich = barrier_sandwich_check(result.snapshots, upper, lower, region,
                                             cfg.sandwich.eps);

    const Observables obs_end = observables(state);
    result.summary.steps = total.steps;
    result.summary.min_dt = total.steps ? total.min_dt : 0.0;
    result.summary.final_mass = obs_end.mass;
    result.summary.final_moment = obs_end.moment;
    result.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return result;
}

inline nlohmann::json sandwich_to_json(const SandwichReport& report) {
    nlohmann::json j;
    j["c_delta"] = report.c_delta;
    j["eps"] = report.eps;
    j["slack"] = report.slack;
    j["nodes_checked"] = report.nodes_checked();
    j["violations"] = report.violations();
    j["violating_fraction"] = report.violating_fraction();
    j["pass"] = report.pass();
    auto& states = j["states"] = nlohmann::json::array();
    for (const auto& r : report.states) {
        nlohmann::json s;
        s["t"] = r.t;
        s["skipped"] = r.skipped;
        s["nodes"] = r.nodes;
        if (!r.skipped) {
            s["worst_upper_scaled"] = r.worst_upper;
            s["worst_lower_scaled"] = r.worst_lower;
            s["violations_upper"] = r.violations_upper;
            s["violations_lower"] = r.violations_lower;
        }
        states.push_back(s);
    }
    return j;
}

/// Constants file written by the profile command.
inline nlohmann::json profile_constants_json(const DipoleProfile& p) {
    nlohmann::json j;
    j["m"] = p.m;
    j["M"] = p.M;
    j["alpha"] = p.exponents.alpha;
    j["beta"] = p.exponents.beta;
    j["kappa_m"] = p.kappa;
    j["C_m"] = p.C;
    j["xi_1"] = p.xi1;
    j["xi_M"] = p.xi_M;
    j["xi_bar"] = p.xi_bar;
    j["moment_check"] = profile_moment(p);
    return j;
}

/// Writes snapshots, the error-series CSV, and the run summary JSON.
inline void write_experiment_outputs(const ExperimentResult& result,
                                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", k);
        write_snapshot_file((dir / name).string(), result.snapshots[k],
                            result.config.m);
    }
    {
        std::ofstream out(dir / "series.csv");
        if (!out) throw config_error("cannot write " + (dir / "series.csv").string());
        write_error_series(out, result.series);
    }
    nlohmann::json j;
    j["config"] = config_to_json(result.config);
    j["steps"] = result.summary.steps;
    j["min_dt"] = result.summary.min_dt;
    j["wall_seconds"] = result.summary.wall_seconds;
    j["initial_mass"] = result.summary.initial_mass;
    j["initial_moment"] = result.summary.initial_moment;
    j["final_mass"] = result.summary.final_mass;
    j["final_moment"] = result.summary.final_moment;
    j["checkpoints"] = result.times;
    j["analysis_moment"] = result.profile.M;
    j["near_field_profile_error"] = result.profile_err;
    j["near_field_profile_error_alt"] = result.profile_err_alt;
    j["sandwich"] = sandwich_to_json(result.sandwich);
    std::ofstream out(dir / "summary.json");
    if (!out) throw config_error("cannot write " + (dir / "summary.json").string());
    out << j.dump(2) << "\n";
}

}  // namespace pmelab

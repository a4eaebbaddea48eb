// Command-line surface of the PME laboratory: emit exact profiles, run
// checkpointed simulations, run the verification suite, and fit decay rates.
// Exit codes: 0 ok, 1 verification failure, 2 usage/config error,
// 3 runtime/numeric error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmelab/analysis.hpp"
#include "pmelab/experiment.hpp"
#include "pmelab/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pmelab::config_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_profile(double m, double M, const std::string& out, std::size_t points) {
    const pmelab::DipoleProfile p = pmelab::build_profile(m, M);
    fs::create_directories(out);
    const fs::path csv = fs::path(out) / "profile.csv";
    {
        std::ofstream f(csv);
        if (!f) throw pmelab::config_error("cannot write " + csv.string());
        pmelab::dump_profile(p, f, points);
    }
    const fs::path constants = fs::path(out) / "constants.json";
    {
        std::ofstream f(constants);
        if (!f) throw pmelab::config_error("cannot write " + constants.string());
        f << pmelab::profile_constants_json(p).dump(2) << "\n";
    }
    std::cout << "wrote " << csv.string() << " and " << constants.string() << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
    pmelab::ExperimentConfig cfg = pmelab::parse_config(read_file(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    // Persist snapshots and the series as checkpoints complete, so a failed
    // run leaves its partial outputs behind.
    pmelab::ErrorSeries partial;
    const auto sink = [&](std::size_t index, const pmelab::SolverState& s,
                          const pmelab::ErrorCheckpoint& row) {
        char name[32];
        std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", index);
        pmelab::write_snapshot_file((dir / name).string(), s, cfg.m);
        partial.push_back(row);
        std::ofstream series(dir / "series.csv");
        pmelab::write_error_series(series, partial);
    };
    const pmelab::ExperimentResult result = pmelab::run_experiment(cfg, sink);
    pmelab::write_experiment_outputs(result, dir);
    std::cout << "steps=" << result.summary.steps
              << " min_dt=" << result.summary.min_dt
              << " wall_s=" << result.summary.wall_seconds << " outputs in "
              << dir.string() << "\n";
    return 0;
}

int cmd_verify(const std::string& config_path, const std::string& report_path) {
    pmelab::VerifyOptions opts;
    if (!config_path.empty())
        opts.trend_config = pmelab::parse_config(read_file(config_path));
    const pmelab::AcceptanceReport report = pmelab::run_acceptance(opts);
    for (const auto& c : report.checks) {
        std::printf("%s  criterion %2d %-28s measured=%-12.6g tolerance=%-12.6g (%.2fs)\n",
                    c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.measured,
                    c.tolerance, c.seconds);
        if (!c.detail.empty()) std::printf("      %s\n", c.detail.c_str());
    }
    std::ofstream out(report_path);
    if (!out) throw pmelab::config_error("cannot write " + report_path);
    out << pmelab::acceptance_to_json(report).dump(2) << "\n";
    std::printf("%s: report written to %s\n",
                report.all_pass() ? "all checks passed" : "CHECKS FAILED",
                report_path.c_str());
    return report.all_pass() ? 0 : 1;
}

int cmd_rates(const std::string& series_path, const std::string& field) {
    std::ifstream in(series_path);
    if (!in) throw pmelab::config_error("cannot open " + series_path);
    const pmelab::ErrorSeries series = pmelab::read_error_series(in);
    const pmelab::RateFit fit = pmelab::fit_rate(series, field);
    json j;
    j["field"] = field;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["residual"] = fit.residual;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pme: dipole asymptotics laboratory for u_t = (u^m)_xx on the half-line"};
    app.require_subcommand(1);

    double m = 2.0, M = 1.0;
    std::size_t points = 512;
    std::string out_dir, config_path, report_path = "verify_report.json";
    std::string series_path, field;

    auto* profile = app.add_subcommand("profile", "write the exact dipole profile and its constants");
    profile->add_option("--m", m, "medium exponent (> 1)")->required();
    profile->add_option("--M", M, "first moment (> 0)")->required();
    profile->add_option("--out", out_dir, "output directory")->required();
    profile->add_option("--points", points, "profile grid points");

    auto* simulate = app.add_subcommand("simulate", "run a checkpointed experiment");
    simulate->add_option("--config", config_path, "experiment config (JSON)")->required();
    simulate->add_option("--out", out_dir, "output directory (overrides config)");

    auto* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("--config", config_path, "custom long-run config (JSON)");
    verify->add_option("--report", report_path, "where to write the JSON report");

    auto* rates = app.add_subcommand("rates", "fit a decay rate to an error-series column");
    rates->add_option("--series", series_path, "error series CSV")->required();
    rates->add_option("--field", field, "column to fit")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit cleanly, usage errors -> 2
    }

    try {
        if (profile->parsed()) return cmd_profile(m, M, out_dir, points);
        if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
        if (verify->parsed()) return cmd_verify(config_path, report_path);
        if (rates->parsed()) return cmd_rates(series_path, field);
    } catch (const pmelab::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

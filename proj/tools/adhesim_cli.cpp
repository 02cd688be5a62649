#include "adhesim/config.hpp"
#include "adhesim/output.hpp"
#include "adhesim/scenarios.hpp"
#include "adhesim/verify.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace adhesim;

namespace {

struct Globals {
    std::string out;
    bool verbose = false;
    int threads = 1;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw Error("cannot write " + p.string());
    return os;
}

std::string numbered(const char* stem, int k, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d%s", stem, k, ext);
    return buf;
}

fs::path output_dir(const Globals& g, const RunConfig& cfg) {
    fs::path dir = g.out.empty() ? fs::path(cfg.out_dir) : fs::path(g.out);
    fs::create_directories(dir);
    return dir;
}

// Optional ledger checks from the [verify] block.
void apply_checks(const RunConfig& cfg, const RunResult& r, RunReport& rep) {
    const VerifyToggles& v = cfg.verify;
    if (v.energy_balance) rep.checks.emplace_back("energy_balance", r.worst_mech_rel_residual <= v.balance_tol);
    if (v.total_energy) {
        bool ok = true;
        for (std::size_t k = 1; k < r.ledger.size(); ++k) {
            const LedgerRow& a = r.ledger[k - 1];
            const double scale = std::max(1e-300, a.M + std::abs(a.E) + a.H);
            if (r.ledger[k].total_slack < -v.slack_tol * scale) ok = false;
        }
        rep.checks.emplace_back("total_energy", ok);
    }
    if (v.entropy) rep.checks.emplace_back("entropy", r.min_entropy_term >= -v.entropy_tol);
}

int cmd_run(const Globals& g, const std::string& path) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load_run_config(path);
    const fs::path dir = output_dir(g, cfg);
    const StepContext ctx = prepare(cfg.scenario);

    RunReport rep;
    rep.scenario = cfg.scenario.name;
    rep.config = path;
    rep.steps = step_count(cfg.scenario);

    std::ofstream log = open_out(dir / "solver_log.csv");
    RunOptions ro;
    ro.diagnostics = &log;
    ro.snapshot_stride = cfg.snapshot_stride;
    if (cfg.snapshot_stride > 0) {
        fs::create_directories(dir / "snapshots");
        fs::create_directories(dir / "vtk");
        ro.on_snapshot = [&](int k, const SystemState& s) {
            std::ofstream snap = open_out(dir / "snapshots" / numbered("snapshot", k, ".txt"));
            write_snapshot(snap, s, ctx);
            std::ofstream vtk = open_out(dir / "vtk" / numbered("state", k, ".vtk"));
            write_vtk(vtk, s, ctx);
            if (g.verbose) std::clog << "step " << k << " t=" << s.t << "\n";
        };
    }

    std::optional<RunResult> result;
    try {
        result = run(ctx, ro);
    } catch (const InvariantError& e) {
        rep.violations.push_back(e.what());
        rep.error = e.what();
    } catch (const NonConvergenceError& e) {
        rep.error = e.what();
    }

    if (result) {
        const RunResult& r = *result;
        std::ofstream ledger = open_out(dir / "ledger.csv");
        write_ledger_csv(ledger, r.ledger);
        rep.completed = true;
        rep.steps_done = static_cast<int>(r.reports.size());
        rep.worst_mech_rel_residual = r.worst_mech_rel_residual;
        rep.min_theta = r.min_theta;
        rep.min_total_slack = r.min_total_slack;
        rep.min_entropy_term = r.min_entropy_term;
        rep.min_alpha = r.final_state.alpha.size() ? r.final_state.alpha.minCoeff() : 1.0;
        rep.max_alpha = r.final_state.alpha.size() ? r.final_state.alpha.maxCoeff() : 1.0;
        rep.R_cum = r.ledger.back().R_cum;
        rep.work_cum = r.ledger.back().work_cum;
        apply_checks(cfg, r, rep);
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream report = open_out(dir / "run_report.json");
    write_run_report(report, rep);

    const bool checks_ok = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.second; });
    if (!rep.error.empty()) std::cerr << "adhesim: " << rep.error << "\n";
    for (const auto& [name, ok] : rep.checks)
        if (!ok) std::cerr << "adhesim: check " << name << " failed\n";
    std::cout << rep.scenario << ": " << rep.steps_done << "/" << rep.steps << " steps, worst relative residual "
              << rep.worst_mech_rel_residual << ", output in " << dir.string() << "\n";
    return rep.completed && rep.violations.empty() && checks_ok ? 0 : 1;
}

// A time step in config units, or "T/n" for an exact fraction of the horizon.
double parse_tau(const std::string& text, const RunConfig& cfg) {
    char* end = nullptr;
    double tau = 0.0;
    if (text.rfind("T/", 0) == 0) {
        const double n = std::strtod(text.c_str() + 2, &end);
        if (end == text.c_str() + 2 || *end != '\0' || !(n >= 1.0) || n != std::floor(n))
            throw ConfigError("--tau-list: bad entry '" + text + "'");
        return cfg.scenario.T / n;
    }
    tau = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') throw ConfigError("--tau-list: bad entry '" + text + "'");
    if (!(tau > 0.0)) throw ConfigError("--tau-list: time steps must be positive");
    return tau / cfg.units.time;
}

int cmd_study(const Globals& g, const std::string& path, const std::vector<std::string>& tau_list) {
    const RunConfig cfg = load_run_config(path);
    const fs::path dir = output_dir(g, cfg);
    std::vector<double> taus;
    for (const auto& text : tau_list) taus.push_back(parse_tau(text, cfg));
    StudyOptions so;
    so.threads = g.threads;
    std::optional<ModalCase> modal;
    if (cfg.builtin == "kelvin_voigt_modal" && cfg.builtin_unchanged) {
        modal = kelvin_voigt_modal_case();
        so.exact_u = [&](double t) { return modal->exact_u(t); };
        so.exact_v = [&](double t) { return modal->exact_v(t); };
        if (g.verbose) std::clog << "errors measured against the exact damped mode\n";
    } else if (g.verbose) {
        std::clog << "errors measured against the finest time step\n";
    }
    const auto rows = convergence_study(cfg.scenario, taus, so);
    std::ofstream os = open_out(dir / "study.csv");
    write_study_csv(os, rows);
    for (const auto& r : rows)
        std::cout << "tau " << r.tau << ": err_u " << r.err_u << " err_v " << r.err_v << " order_u " << r.order_u
                  << " order_v " << r.order_v << "\n";
    return 0;
}

int cmd_verify(const Globals& g, bool no_poro) {
    VerifyOptions opt;
    opt.poro = !no_poro;
    opt.threads = g.threads;
    if (g.verbose) opt.log = &std::clog;
    const auto results = run_acceptance(opt);
    print_results(std::cout, results);
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adhesim: adhesive frictional thermo-visco-elastic contact"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--out", g.out, "output directory (overrides [output] dir)");
    app.add_flag("--verbose", g.verbose, "progress on stderr");
    app.add_option("--threads", g.threads, "worker threads for tau studies")->check(CLI::PositiveNumber);

    std::string run_cfg, study_cfg;
    std::vector<std::string> taus;
    bool no_poro = false;
    auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
    run_cmd->add_option("config", run_cfg, "configuration file")->required()->check(CLI::ExistingFile);
    auto* study_cmd = app.add_subcommand("study", "time-step convergence and stability study");
    study_cmd->add_option("config", study_cfg, "configuration file")->required()->check(CLI::ExistingFile);
    study_cmd->add_option("--tau-list", taus, "time steps, comma separated; T/n for a fraction of the horizon")->required()->delimiter(',');
    auto* verify_cmd = app.add_subcommand("verify", "acceptance suite");
    verify_cmd->add_flag("--no-poro", no_poro, "skip the diffusion criterion");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return cmd_run(g, run_cfg);
        if (*study_cmd) return cmd_study(g, study_cfg, taus);
        if (*verify_cmd) return cmd_verify(g, no_poro);
    } catch (const ConfigError& e) {
        std::cerr << "adhesim: configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "adhesim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

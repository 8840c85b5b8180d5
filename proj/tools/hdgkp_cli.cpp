// Command-line driver: single runs, convergence studies, peakon sections and
// the energy-decay diagnostic.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hdgkp.hpp"

namespace fs = std::filesystem;
using namespace hdgkp;

namespace {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_solver = 3, exit_io = 4 };

struct Overrides
{
    std::string config;
    std::map<std::string, std::string> values;
};

// Registers the RunConfig keys as --key options; only options given on the
// command line override the config file.
void add_common_options(CLI::App& app, Overrides& ov)
{
    app.add_option("--config", ov.config, "key = value config file");
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"scenario", "mms, peakon or energy"},
        {"k", "polynomial degree (1..3)"},
        {"N", "cells per direction"},
        {"dt", "time step"},
        {"T_final", "final time"},
        {"tau_zpu_plus", "stabilization tau_zpu^+"},
        {"tau_zpu_minus", "stabilization tau_zpu^-"},
        {"tau_zpv_minus", "stabilization tau_zpv^-"},
        {"tau_uqq", "stabilization tau_uqq"},
        {"tau_f", "constant tau_f"},
        {"adaptive_tau_f", "use the adaptive tau_f rule (true/false)"},
        {"tau_f_eps", "epsilon of the adaptive tau_f rule"},
        {"output_dir", "output directory"},
        {"solver", "condensed or monolithic"},
        {"output_every", "diagnostics cadence in steps"},
        {"newton_tol", "Newton tolerance"},
        {"newton_max_iter", "Newton iteration limit"},
        {"anchor_source", "peakon anchoring source term (true/false)"},
        {"levels", "study levels, e.g. 2..16 or 2,4,8"},
        {"sections", "cross sections, e.g. x=0,y=0"},
        {"times", "sampling times, e.g. 0,0.5,1"},
        {"samples", "points per cross section"},
    };
    for (const auto& [key, help] : keys) {
        std::string names = "--" + key;
        if (key == "output_dir")
            names += ",--out";
        else if (key == "T_final")
            names += ",--T";
        app.add_option_function<std::string>(
            names, [&ov, key = key](const std::string& v) { ov.values[key] = v; }, help);
    }
}

RunConfig build_config(const Overrides& ov, RunConfig cfg)
{
    if (!ov.config.empty())
        load_config_file(cfg, ov.config);
    for (const auto& [k, v] : ov.values)
        set_config_value(cfg, k, v);
    return cfg;
}

std::string number_tag(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void print_report(const ErrorReport& rep)
{
    std::printf("%3s %5s %12s %14s %14s %8s %8s\n", "k", "N", "h", "err_u", "err_q", "ord_u", "ord_q");
    for (const auto& r : rep.rows)
        std::printf("%3d %5d %12.6g %14.6e %14.6e %8.3f %8.3f\n", r.k, r.N, r.h, r.err_u, r.err_q, r.order_u,
                    r.order_q);
}

TimeStepper make_stepper(const RunConfig& cfg)
{
    const Scenario sc = cfg.make_scenario();
    return TimeStepper(Discretization(build_mesh(sc.domain, cfg.N, cfg.N), cfg.k), sc, cfg.tau,
                       cfg.newton_options());
}

void write_sections(const RunConfig& cfg, const TimeStepper& st, double t_label)
{
    for (const auto& sec : cfg.sections) {
        const auto samples =
            sample_cross_section(st.discretization(), st.state(), sec.axis, sec.value, cfg.samples);
        const std::string name = std::string("section_") + (sec.axis == SectionAxis::x_const ? "x" : "y") +
                                 number_tag(sec.value) + "_t" + number_tag(t_label) + ".csv";
        write_section_csv(fs::path(cfg.output_dir) / name, samples);
    }
}

int cmd_run(const RunConfig& cfg)
{
    cfg.validate();
    TimeStepper st = make_stepper(cfg);
    const auto recs = run(st, cfg.time_config());
    write_diagnostics_csv(fs::path(cfg.output_dir) / "diagnostics.csv", recs);
    write_sections(cfg, st, st.time());
    std::printf("%s k=%d N=%d steps=%d t=%.6g E_h=%.10e\n", to_string(cfg.scenario), cfg.k, cfg.N,
                st.step_index(), st.time(), st.energy());
    if (st.scenario().has_exact()) {
        const auto err = compute_errors(st.discretization(), st.state(), st.scenario(), st.time());
        std::printf("err_u=%.10e err_q=%.10e\n", err.u, err.q);
    }
    return exit_ok;
}

int cmd_study(const RunConfig& cfg)
{
    cfg.validate(true);
    StudyConfig sc;
    sc.scenario             = cfg.scenario;
    sc.k                    = cfg.k;
    sc.levels               = cfg.levels;
    sc.time                 = cfg.time_config();
    sc.tau                  = cfg.tau;
    sc.newton               = cfg.newton_options();
    sc.peakon_anchor_source = cfg.anchor_source;
    const fs::path out      = fs::path(cfg.output_dir) / "errors.csv";
    try {
        const ErrorReport rep = convergence_study(sc);
        print_report(rep);
        write_errors_csv(out, rep);
    } catch (const StudyFailure& f) {
        print_report(f.partial);
        write_errors_csv(out, f.partial);
        throw;
    }
    return exit_ok;
}

int cmd_peakon(RunConfig cfg)
{
    cfg.scenario = ScenarioKind::peakon;
    cfg.validate();
    TimeStepper st = make_stepper(cfg);
    const TimeConfig tc = cfg.time_config();
    const int n = tc.steps();
    std::vector<bool> done(cfg.times.size(), false);
    const auto sample_due = [&](double t, double dt) {
        for (std::size_t m = 0; m < cfg.times.size(); ++m)
            if (!done[m] && std::abs(cfg.times[m] - t) <= 0.5 * dt) {
                write_sections(cfg, st, cfg.times[m]);
                done[m] = true;
            }
    };
    std::vector<DiagnosticsRecord> recs{st.record()};
    sample_due(0.0, tc.effective_dt());
    for (int s = 1; s <= n; ++s) {
        st.step_to(tc.T_final * s / n);
        if (s % tc.output_every == 0 || s == n)
            recs.push_back(st.record());
        sample_due(st.time(), tc.effective_dt());
    }
    write_diagnostics_csv(fs::path(cfg.output_dir) / "diagnostics.csv", recs);
    for (std::size_t m = 0; m < cfg.times.size(); ++m)
        if (!done[m])
            std::fprintf(stderr, "warning: time %g not reached by the run\n", cfg.times[m]);
    std::printf("peakon k=%d N=%d dt=%g: %zu sampling times written to %s\n", cfg.k, cfg.N, tc.effective_dt(),
                cfg.times.size(), cfg.output_dir.c_str());
    return exit_ok;
}

int cmd_energy(RunConfig cfg)
{
    cfg.scenario = ScenarioKind::energy_decay;
    cfg.validate();
    TimeStepper st  = make_stepper(cfg);
    const auto recs = run(st, cfg.time_config());
    write_diagnostics_csv(fs::path(cfg.output_dir) / "diagnostics.csv", recs);
    int increases = 0;
    for (std::size_t r = 1; r < recs.size(); ++r)
        increases += recs[r].energy > recs[r - 1].energy * (1.0 + 1e-12);
    std::printf("energy k=%d N=%d: E_h %.10e -> %.10e, %d increases\n", cfg.k, cfg.N, recs.front().energy,
                recs.back().energy, increases);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HDG solver for the 2D Camassa-Holm-KP equation"};
    app.require_subcommand(1, 1);

    Overrides ov_run, ov_study, ov_peakon, ov_energy;
    auto* run_cmd    = app.add_subcommand("run", "single time-dependent run");
    auto* study_cmd  = app.add_subcommand("study", "convergence study over N");
    auto* peakon_cmd = app.add_subcommand("peakon", "peakon run with cross-section output");
    auto* energy_cmd = app.add_subcommand("energy", "energy-decay run with homogeneous data");
    add_common_options(*run_cmd, ov_run);
    add_common_options(*study_cmd, ov_study);
    add_common_options(*peakon_cmd, ov_peakon);
    add_common_options(*energy_cmd, ov_energy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(build_config(ov_run, RunConfig{}));
        if (study_cmd->parsed())
            return cmd_study(build_config(ov_study, RunConfig{}));
        if (peakon_cmd->parsed()) {
            RunConfig base;
            base.scenario = ScenarioKind::peakon;
            base.N        = 32;
            return cmd_peakon(build_config(ov_peakon, base));
        }
        RunConfig base;
        base.scenario = ScenarioKind::energy_decay;
        base.N        = 16;
        base.T_final  = 0.2;
        return cmd_energy(build_config(ov_energy, base));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return exit_io;
    } catch (const StudyFailure& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return exit_solver;
    } catch (const StepFailure& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return exit_solver;
    } catch (const AssumptionViolation& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}

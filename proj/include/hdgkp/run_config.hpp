#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdgkp/analysis.hpp"
#include "hdgkp/global_solver.hpp"
#include "hdgkp/scenarios.hpp"
#include "hdgkp/stabilization.hpp"
#include "hdgkp/timestep.hpp"

namespace hdgkp {

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Section
{
    SectionAxis axis = SectionAxis::y_const;
    double value     = 0.0;
};

/// Everything a run needs. The key=value config file uses the field names.
struct RunConfig
{
    ScenarioKind scenario = ScenarioKind::mms;
    int k       = 2;
    int N       = 8;
    double dt   = 1e-3;
    double T_final = 1.0;
    StabilizationParams tau;
    std::string output_dir = "out";
    SolverMode solver      = SolverMode::condensed;
    int output_every       = 1;
    double newton_tol      = 1e-10;
    int newton_max_iter    = 30;
    bool anchor_source     = true;
    std::vector<int> levels{2, 4, 8, 16};
    std::vector<Section> sections{{SectionAxis::x_const, 0.0}, {SectionAxis::y_const, 0.0}};
    std::vector<double> times{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int samples = 201;

    void validate(bool study_mode = false) const
    {
        if (k < 1 || k > 3)
            throw ConfigError("k must be 1, 2 or 3");
        if (N < 1)
            throw ConfigError("N must be positive");
        if (!(dt > 0.0))
            throw ConfigError("dt must be positive");
        if (!(T_final >= dt * (1.0 - 1e-12)))
            throw ConfigError("dt must not exceed T_final");
        if (output_every < 1)
            throw ConfigError("output_every must be at least 1");
        if (!(newton_tol > 0.0) || newton_max_iter < 1)
            throw ConfigError("newton_tol must be positive and newton_max_iter at least 1");
        if (samples < 2)
            throw ConfigError("samples must be at least 2");
        try {
            tau.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (study_mode) {
            if (levels.size() < 2)
                throw ConfigError("a study needs at least two levels");
            for (int n : levels)
                if (n < 1 || (n & (n - 1)) != 0)
                    throw ConfigError("study levels must be powers of two, got " + std::to_string(n));
        }
    }

    TimeConfig time_config() const { return {dt, T_final, output_every}; }

    NewtonOptions newton_options() const
    {
        NewtonOptions o;
        o.tol      = newton_tol;
        o.max_iter = newton_max_iter;
        o.mode     = solver;
        return o;
    }

    Scenario make_scenario() const
    {
        Scenario sc             = hdgkp::make_scenario(scenario);
        sc.T_final              = T_final;
        sc.peakon_anchor_source = anchor_source;
        return sc;
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d  = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d))
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "': not a number: '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const int i     = std::stoi(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "': not an integer: '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("'" + key + "': not a boolean: '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

} // namespace detail

/// "2..16" (powers of two between the bounds) or a comma list "2,4,8".
inline std::vector<int> parse_levels(const std::string& s)
{
    const auto dots = s.find("..");
    std::vector<int> out;
    if (dots != std::string::npos) {
        const int lo = detail::parse_int("levels", detail::trim(s.substr(0, dots)));
        const int hi = detail::parse_int("levels", detail::trim(s.substr(dots + 2)));
        if (lo < 1 || hi < lo)
            throw ConfigError("levels: bad range '" + s + "'");
        for (int n = lo; n <= hi; n *= 2)
            out.push_back(n);
    } else {
        for (const auto& item : detail::split(s, ','))
            out.push_back(detail::parse_int("levels", item));
    }
    if (out.empty())
        throw ConfigError("levels: empty list");
    return out;
}

/// "x=0,y=0.5"
inline std::vector<Section> parse_sections(const std::string& s)
{
    std::vector<Section> out;
    for (const auto& item : detail::split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("sections: expected x=value or y=value, got '" + item + "'");
        const std::string ax = detail::trim(item.substr(0, eq));
        Section sec;
        if (ax == "x")
            sec.axis = SectionAxis::x_const;
        else if (ax == "y")
            sec.axis = SectionAxis::y_const;
        else
            throw ConfigError("sections: axis must be x or y, got '" + ax + "'");
        sec.value = detail::parse_double("sections", detail::trim(item.substr(eq + 1)));
        out.push_back(sec);
    }
    return out;
}

inline std::vector<double> parse_times(const std::string& s)
{
    std::vector<double> out;
    for (const auto& item : detail::split(s, ','))
        out.push_back(detail::parse_double("times", item));
    return out;
}

/// Sets one RunConfig field from its textual value.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& raw)
{
    using namespace detail;
    const std::string v = trim(raw);
    try {
        if (key == "scenario")
            cfg.scenario = parse_scenario_kind(v);
        else if (key == "k")
            cfg.k = parse_int(key, v);
        else if (key == "N")
            cfg.N = parse_int(key, v);
        else if (key == "dt")
            cfg.dt = parse_double(key, v);
        else if (key == "T_final")
            cfg.T_final = parse_double(key, v);
        else if (key == "tau_zpu_plus")
            cfg.tau.tau_zpu_plus = parse_double(key, v);
        else if (key == "tau_zpu_minus")
            cfg.tau.tau_zpu_minus = parse_double(key, v);
        else if (key == "tau_zpv_minus")
            cfg.tau.tau_zpv_minus = parse_double(key, v);
        else if (key == "tau_uqq")
            cfg.tau.tau_uqq = parse_double(key, v);
        else if (key == "tau_f")
            cfg.tau.tau_f = parse_double(key, v);
        else if (key == "adaptive_tau_f")
            cfg.tau.adaptive_tau_f = parse_bool(key, v);
        else if (key == "tau_f_eps")
            cfg.tau.tau_f_eps = parse_double(key, v);
        else if (key == "output_dir")
            cfg.output_dir = v;
        else if (key == "solver")
            cfg.solver = parse_solver_mode(v);
        else if (key == "output_every")
            cfg.output_every = parse_int(key, v);
        else if (key == "newton_tol")
            cfg.newton_tol = parse_double(key, v);
        else if (key == "newton_max_iter")
            cfg.newton_max_iter = parse_int(key, v);
        else if (key == "anchor_source")
            cfg.anchor_source = parse_bool(key, v);
        else if (key == "levels")
            cfg.levels = parse_levels(v);
        else if (key == "sections")
            cfg.sections = parse_sections(v);
        else if (key == "times")
            cfg.times = parse_times(v);
        else if (key == "samples")
            cfg.samples = parse_int(key, v);
        else
            throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

/// Lines "key = value"; '#' starts a comment. Unknown keys are errors.
inline void load_config(RunConfig& cfg, std::istream& in, const std::string& name = "config")
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    load_config(cfg, in, path);
}

/// Scientific notation with 11 significant digits.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

class CsvWriter
{
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path)
    {
        std::error_code ec;
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path(), ec);
        out_.open(path);
        if (!out_)
            throw OutputError("cannot write '" + path.string() + "'");
        row(header);
    }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out_ << (c ? "," : "") << cells[c];
        out_ << '\n';
        if (!out_)
            throw OutputError("write to '" + path_.string() + "' failed");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& recs)
{
    CsvWriter w(path, {"step", "t", "E_h", "norm_u", "norm_q", "newton_iters"});
    for (const auto& r : recs)
        w.row({std::to_string(r.step), format_number(r.t), format_number(r.energy), format_number(r.norm_u),
               format_number(r.norm_q), std::to_string(r.newton_iters)});
}

inline void write_errors_csv(const std::filesystem::path& path, const ErrorReport& rep)
{
    CsvWriter w(path, {"k", "N", "h_reported", "err_u", "err_q", "order_u", "order_q"});
    for (const auto& r : rep.rows)
        w.row({std::to_string(r.k), std::to_string(r.N), format_number(r.h), format_number(r.err_u),
               format_number(r.err_q), format_number(r.order_u), format_number(r.order_q)});
}

inline void write_section_csv(const std::filesystem::path& path, const std::vector<SectionSample>& samples)
{
    CsvWriter w(path, {"coord", "value"});
    for (const auto& s : samples)
        w.row({format_number(s.coord), format_number(s.value)});
}

inline void write_surface_csv(const std::filesystem::path& path, const std::vector<SurfaceSample>& samples)
{
    CsvWriter w(path, {"x", "y", "value"});
    for (const auto& s : samples)
        w.row({format_number(s.x), format_number(s.y), format_number(s.value)});
}

} // namespace hdgkp

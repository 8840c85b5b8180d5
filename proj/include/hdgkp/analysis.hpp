#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hdgkp/global_solver.hpp"
#include "hdgkp/projection.hpp"
#include "hdgkp/scenarios.hpp"
#include "hdgkp/timestep.hpp"

namespace hdgkp {

struct FieldErrors
{
    double u = 0.0;
    double q = 0.0;
};

/// Broken L2 errors of u_h and q_h against the exact solution at time t,
/// using Gauss rules with `extra_points` more points per direction than the
/// solve rule.
inline FieldErrors compute_errors(const Discretization& d, const SolutionState& s, const Scenario& sc, double t,
                                  int extra_points = 2)
{
    if (!sc.has_exact())
        throw std::invalid_argument("compute_errors: scenario has no exact solution");
    const auto& mesh = d.mesh();
    const int k = d.k(), nb = d.ops().nb;
    const Quadrature1D rule = gauss_legendre(make_quadrature(k).size() + extra_points);
    const TensorBasis basis(k);
    double eu = 0.0, eq = 0.0;
    for (int j = 0; j < mesh.ny(); ++j)
        for (int i = 0; i < mesh.nx(); ++i) {
            const Rect K    = mesh.element_rect(i, j);
            const int e     = mesh.element_id(i, j);
            const Vector cu = s.field(e, field_u, nb);
            const Vector cq = s.field(e, field_q, nb);
            const double jac = 0.25 * K.area();
            for (std::size_t qy = 0; qy < rule.size(); ++qy)
                for (std::size_t qx = 0; qx < rule.size(); ++qx) {
                    const double x = K.x.from_reference(rule.nodes[qx]);
                    const double y = K.y.from_reference(rule.nodes[qy]);
                    const double w = rule.weights[qx] * rule.weights[qy] * jac;
                    const Vector phi = basis.values(K, x, y);
                    const ExactFields ex = exact_fields(sc, x, y, t);
                    const double du = phi.dot(cu) - ex.u;
                    const double dq = phi.dot(cq) - ex.q;
                    eu += w * du * du;
                    eq += w * dq * dq;
                }
        }
    return {std::sqrt(eu), std::sqrt(eq)};
}

/// log2(e_coarse / e_fine) for a halving of the mesh size.
inline double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

struct ErrorRow
{
    int k      = 0;
    int N      = 0;
    double h   = 0.0; // reported as 1/N
    double err_u = 0.0;
    double err_q = 0.0;
    double order_u = std::numeric_limits<double>::quiet_NaN();
    double order_q = std::numeric_limits<double>::quiet_NaN();
    double h_geometric = 0.0; // largest cell side
};

struct ErrorReport
{
    std::vector<ErrorRow> rows;

    /// Sorts by N and recomputes the orders from the error columns.
    void finalize()
    {
        std::sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
            return a.k != b.k ? a.k < b.k : a.N < b.N;
        });
        for (std::size_t r = 0; r < rows.size(); ++r) {
            rows[r].order_u = rows[r].order_q = std::numeric_limits<double>::quiet_NaN();
            if (r > 0 && rows[r - 1].k == rows[r].k) {
                const double ratio = static_cast<double>(rows[r].N) / rows[r - 1].N;
                rows[r].order_u = std::log(rows[r - 1].err_u / rows[r].err_u) / std::log(ratio);
                rows[r].order_q = std::log(rows[r - 1].err_q / rows[r].err_q) / std::log(ratio);
            }
        }
    }
};

struct StudyConfig
{
    ScenarioKind scenario = ScenarioKind::mms;
    int k = 2;
    std::vector<int> levels{2, 4, 8, 16};
    TimeConfig time;
    StabilizationParams tau;
    NewtonOptions newton;
    bool peakon_anchor_source = true;
};

class StudyFailure : public std::runtime_error
{
public:
    StudyFailure(const std::string& what, ErrorReport partial, bool non_convergence)
        : std::runtime_error(what)
        , partial(std::move(partial))
        , non_convergence(non_convergence)
    {
    }
    ErrorReport partial;
    bool non_convergence;
};

/// Runs the scenario on N x N meshes for every level and tabulates the
/// final-time errors. `on_step(N, stepper)` sees every accepted step.
inline ErrorReport convergence_study(const StudyConfig& cfg,
                                     const std::function<void(int, const TimeStepper&)>& on_step = {})
{
    if (cfg.levels.size() < 2)
        throw std::invalid_argument("convergence study needs at least two levels");
    ErrorReport rep;
    for (int N : cfg.levels) {
        Scenario sc             = make_scenario(cfg.scenario);
        sc.T_final              = cfg.time.T_final;
        sc.peakon_anchor_source = cfg.peakon_anchor_source;
        try {
            TimeStepper stepper(Discretization(build_mesh(sc.domain, N, N), cfg.k), sc, cfg.tau, cfg.newton);
            TimeConfig tc    = cfg.time;
            tc.output_every  = tc.steps();
            run(stepper, tc, on_step ? std::function<void(const TimeStepper&)>([&](const TimeStepper& s) { on_step(N, s); })
                                     : std::function<void(const TimeStepper&)>());
            const FieldErrors err = compute_errors(stepper.discretization(), stepper.state(), sc, stepper.time());
            ErrorRow row{cfg.k, N, 1.0 / N, err.u, err.q};
            row.h_geometric = stepper.discretization().mesh().h();
            rep.rows.push_back(row);
            rep.finalize();
        } catch (const StepFailure& f) {
            rep.finalize();
            throw StudyFailure("level N = " + std::to_string(N) + ": " + f.what(), rep, f.non_convergence);
        } catch (const std::exception& ex) {
            rep.finalize();
            throw StudyFailure("level N = " + std::to_string(N) + ": " + ex.what(), rep, false);
        }
    }
    return rep;
}

enum class SectionAxis { x_const, y_const };

struct SectionSample
{
    double coord = 0.0;
    double value = 0.0;
};

/// Value of field f of the solution at (x, y); points on interior grid lines
/// are owned by the element to the left (below).
inline double evaluate_solution(const Discretization& d, const SolutionState& s, Field f, double x, double y)
{
    const auto owner = d.mesh().locate(x, y);
    if (!owner)
        throw std::out_of_range("point outside the domain");
    const int e = d.mesh().element_id(*owner);
    return eval_field(s.field(e, f, d.ops().nb), d.mesh().element_rect(owner->i, owner->j), d.k(), x, y);
}

/// n_samples equispaced points (ends included) along x = value or y = value.
inline std::vector<SectionSample> sample_cross_section(const Discretization& d, const SolutionState& s,
                                                       SectionAxis axis, double value, int n_samples,
                                                       Field f = field_u)
{
    const Domain2D& dom = d.mesh().domain();
    const bool xc       = axis == SectionAxis::x_const;
    const double lo = xc ? dom.x_left : dom.y_bottom, hi = xc ? dom.x_right : dom.y_top;
    if (value < lo - 1e-12 * (hi - lo) || value > hi + 1e-12 * (hi - lo))
        throw std::out_of_range("section " + std::string(xc ? "x" : "y") + " = " + std::to_string(value) +
                                " lies outside the domain");
    if (n_samples < 2)
        throw std::invalid_argument("a section needs at least two samples");
    const double a = xc ? dom.y_bottom : dom.x_left, b = xc ? dom.y_top : dom.x_right;
    std::vector<SectionSample> out(n_samples);
    for (int m = 0; m < n_samples; ++m) {
        const double c = m + 1 == n_samples ? b : a + (b - a) * m / (n_samples - 1);
        out[m]         = {c, xc ? evaluate_solution(d, s, f, value, c) : evaluate_solution(d, s, f, c, value)};
    }
    return out;
}

struct SurfaceSample
{
    double x = 0.0, y = 0.0, value = 0.0;
};

inline std::vector<SurfaceSample> sample_surface(const Discretization& d, const SolutionState& s, int n,
                                                 Field f = field_u)
{
    if (n < 2)
        throw std::invalid_argument("a surface grid needs at least two points per direction");
    const Domain2D& dom = d.mesh().domain();
    std::vector<SurfaceSample> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = i + 1 == n ? dom.x_right : dom.x_left + (dom.x_right - dom.x_left) * i / (n - 1);
            const double y = j + 1 == n ? dom.y_top : dom.y_bottom + (dom.y_top - dom.y_bottom) * j / (n - 1);
            out.push_back({x, y, evaluate_solution(d, s, f, x, y)});
        }
    return out;
}

/// Largest sample and its coordinate.
inline SectionSample section_max(const std::vector<SectionSample>& s)
{
    if (s.empty())
        throw std::invalid_argument("empty section");
    SectionSample best = s.front();
    for (const auto& p : s)
        if (p.value > best.value)
            best = p;
    return best;
}

} // namespace hdgkp

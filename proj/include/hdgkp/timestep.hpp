#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdgkp/forms.hpp"
#include "hdgkp/global_solver.hpp"
#include "hdgkp/projection.hpp"
#include "hdgkp/scenarios.hpp"

namespace hdgkp {

struct TimeConfig
{
    double dt      = 1e-3;
    double T_final = 1.0;
    int output_every = 1; // diagnostics every n steps (the last step is always recorded)

    void validate() const
    {
        if (!(dt > 0.0))
            throw std::invalid_argument("dt must be positive");
        if (!(T_final >= dt * (1.0 - 1e-12)))
            throw std::invalid_argument("dt must not exceed T_final");
        if (output_every < 1)
            throw std::invalid_argument("output cadence must be at least 1");
    }

    /// round(T_final / dt); the step is then shortened to land on T_final.
    int steps() const { return static_cast<int>(std::lround(T_final / dt)); }
    double effective_dt() const { return T_final / steps(); }
};

struct DiagnosticsRecord
{
    int step            = 0;
    double t            = 0.0;
    double energy       = 0.0;
    double norm_u       = 0.0;
    double norm_q       = 0.0;
    int newton_iters    = 0;
    double tau_margin   = 0.0;
    std::array<double, trace_family_count> family_norms{};
};

class AssumptionViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Failure of an implicit step, with the time it was trying to reach.
class StepFailure : public std::runtime_error
{
public:
    StepFailure(const std::string& what, double t, bool non_convergence)
        : std::runtime_error(what)
        , time(t)
        , non_convergence(non_convergence)
    {
    }
    double time;
    bool non_convergence;
};

/// E_h = (||u_h||^2 + ||q_h||^2) / 2; the basis is orthonormal on each element.
inline double energy(const Discretization& d, const SolutionState& s)
{
    const int nb = d.ops().nb;
    double e     = 0.0;
    for (int el = 0; el < d.element_count(); ++el)
        e += s.field(el, field_u, nb).squaredNorm() + s.field(el, field_q, nb).squaredNorm();
    return 0.5 * e;
}

inline double field_norm(const Discretization& d, const SolutionState& s, Field f)
{
    const int nb = d.ops().nb;
    double e     = 0.0;
    for (int el = 0; el < d.element_count(); ++el)
        e += s.field(el, f, nb).squaredNorm();
    return std::sqrt(e);
}

/// u_h(0) = L2 projection of u0. Traces at t = 0 come from the boundary data
/// and, inside the domain, from the element traces of u_h(0); q_h, s_h, v_h
/// solve the linear local equations for q, s and v given u_h(0) and those
/// traces, and the upwind v_hat families then take the traces of v_h.
/// p_h, z_h, r_h start at zero.
inline SolutionState initialize(const Scenario& sc, const Discretization& d)
{
    const auto& mesh   = d.mesh();
    const auto& ops    = d.ops();
    const auto& layout = d.layout();
    const int k = d.k(), nb = ops.nb, nx = mesh.nx(), ny = mesh.ny();

    SolutionState st(d);
    const std::size_t n_points = sc.kind == ScenarioKind::peakon ? 4 * (k + 1) + 8 : 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            st.field(mesh.element_id(i, j), field_u, nb) = tensor_project(
                [&](double x, double y) { return initial_value(sc, x, y); }, mesh.element_rect(i, j), k,
                ProjectionKind::l2, n_points);
    apply_boundary_data(sc, mesh, layout, k, 0.0, st.traces);

    const auto trace_of = [&](int i, int j, Field f, Side side) {
        return face_trace_coeffs(st.field(mesh.element_id(i, j), f, nb), k, side, mesh.element_rect(i, j));
    };

    // u_hat^V: mean of the two element traces
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            st.traces[TraceFamily::uv].col(mesh.vertical_face_id(i, j)) =
                0.5 * (trace_of(i - 1, j, field_u, Side::right) + trace_of(i, j, field_u, Side::left));
    // u_hat^B: trace from below
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            st.traces[TraceFamily::ub].col(mesh.horizontal_face_id(i, j)) = trace_of(i, j - 1, field_u, Side::top);

    const int L = int(Side::left), R = int(Side::right), B = int(Side::bottom), T = int(Side::top);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int e    = mesh.element_id(i, j);
            const Vector u = st.field(e, field_u, nb);
            const Vector ul = st.traces[TraceFamily::uv].col(mesh.vertical_face_id(i, j));
            const Vector ur = st.traces[TraceFamily::uv].col(mesh.vertical_face_id(i + 1, j));
            const Vector ub = st.traces[TraceFamily::ub].col(mesh.horizontal_face_id(i, j));
            st.field(e, field_q, nb) = -ops.DxWE * u + ops.FWG[R] * ur - ops.FWG[L] * ul;
            st.field(e, field_s, nb) = -ops.DyWE * u - ops.FWG[B] * ub + ops.FWF[T] * u;
        }

    // q_hat^V: mean of the two q traces
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            st.traces[TraceFamily::qv].col(mesh.vertical_face_id(i, j)) =
                0.5 * (trace_of(i - 1, j, field_q, Side::right) + trace_of(i, j, field_q, Side::left));

    // v_h: upwind from the right boundary, one row at a time
    const Eigen::PartialPivLU<Matrix> vlu(Matrix(ops.DxWE + ops.FWF[L]));
    for (int j = 0; j < ny; ++j)
        for (int i = nx - 1; i >= 0; --i) {
            const int e     = mesh.element_id(i, j);
            const Vector vr = st.traces[TraceFamily::vr].col(mesh.vertical_face_id(i + 1, j));
            st.field(e, field_v, nb) = vlu.solve(Vector(-st.field(e, field_s, nb) + ops.FWG[R] * vr));
            if (i > 0)
                st.traces[TraceFamily::vr].col(mesh.vertical_face_id(i, j)) = trace_of(i, j, field_v, Side::left);
        }
    // v_hat^T: trace from above
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            st.traces[TraceFamily::vt].col(mesh.horizontal_face_id(i, j)) = trace_of(i, j, field_v, Side::bottom);
    return st;
}

/// Inputs of the implicit step from `state` (at t_new - dt) to t_new.
inline StepInputs make_step_inputs(const Discretization& d, const Scenario& sc, const StabilizationParams& tau,
                                   const SolutionState& state, double t_new, double dt)
{
    const auto& mesh = d.mesh();
    const int nb     = d.ops().nb;
    StepInputs in;
    in.problem = {sc.kappa, dt, tau};
    in.u_prev  = state.X.topRows(nb);
    in.uv_prev = state.traces[TraceFamily::uv];
    if (sc.has_source()) {
        in.source_load.resize(d.element_count());
        for (int e = 0; e < d.element_count(); ++e) {
            const auto [i, j] = mesh.element_index(e);
            in.source_load[e] = load_vector(d.ops(), mesh.element_rect(i, j),
                                            [&](double x, double y) { return source_value(sc, x, y, t_new); });
        }
    }
    return in;
}

/// Implicit Euler integrator of the HDG system.
class TimeStepper
{
public:
    TimeStepper(Discretization d, Scenario sc, StabilizationParams tau = {}, NewtonOptions newton = {})
        : disc_(std::move(d))
        , scenario_(std::move(sc))
        , tau_(tau)
        , newton_(newton)
    {
        tau_.validate();
        state_ = initialize(scenario_, disc_);
    }

    const Discretization& discretization() const { return disc_; }
    const Scenario& scenario() const { return scenario_; }
    const SolutionState& state() const { return state_; }
    SolutionState& state() { return state_; }
    double time() const { return t_; }
    int step_index() const { return step_; }
    const NewtonReport& last_report() const { return last_; }
    NewtonOptions& newton_options() { return newton_; }
    const StabilizationParams& stabilization() const { return tau_; }

    /// Advances by dt: boundary data and source at the new time, Newton from
    /// the current state.
    const NewtonReport& step(double dt) { return step_to(t_ + dt); }

    const NewtonReport& step_to(double t_new)
    {
        const double dt = t_new - t_;
        if (!(dt > 0.0))
            throw std::invalid_argument("time step must be positive");
        const StepInputs in = make_step_inputs(disc_, scenario_, tau_, state_, t_new, dt);
        apply_boundary_data(scenario_, disc_.mesh(), disc_.layout(), disc_.k(), t_new, state_.traces);

        try {
            last_ = newton_solve(disc_, in, state_, newton_, &workspace_);
        } catch (const NonConvergence& nc) {
            state_ = nc.last_iterate;
            throw StepFailure(std::string(nc.what()) + " at t = " + std::to_string(t_new), t_new, true);
        } catch (const SingularLocalBlock& sb) {
            throw StepFailure(std::string(sb.what()) + " at t = " + std::to_string(t_new), t_new, true);
        }
        if (!(last_.tau_margin > 0.0))
            throw AssumptionViolation("tau_f - tilde_tau = " + std::to_string(last_.tau_margin) +
                                      " <= 0 on a vertical face at t = " + std::to_string(t_new));
        t_ = t_new;
        ++step_;
        return last_;
    }

    double energy() const { return hdgkp::energy(disc_, state_); }

    DiagnosticsRecord record() const
    {
        DiagnosticsRecord r;
        r.step         = step_;
        r.t            = t_;
        r.energy       = energy();
        r.norm_u       = field_norm(disc_, state_, field_u);
        r.norm_q       = field_norm(disc_, state_, field_q);
        r.newton_iters = step_ ? last_.iterations : 0;
        r.tau_margin   = last_.tau_margin;
        r.family_norms = last_.family_norms;
        return r;
    }

private:
    Discretization disc_;
    Scenario scenario_;
    StabilizationParams tau_;
    NewtonOptions newton_;
    NewtonWorkspace workspace_;
    SolutionState state_;
    NewtonReport last_;
    double t_  = 0.0;
    int step_  = 0;
};

/// Marches to T_final with a fixed step. Records t = 0, then every
/// `output_every` steps and the final step. `on_step` (optional) sees every
/// accepted step.
inline std::vector<DiagnosticsRecord> run(TimeStepper& stepper, const TimeConfig& cfg,
                                          const std::function<void(const TimeStepper&)>& on_step = {})
{
    cfg.validate();
    const int n     = cfg.steps();
    const double t0 = stepper.time();
    std::vector<DiagnosticsRecord> out;
    out.push_back(stepper.record());
    for (int s = 1; s <= n; ++s) {
        stepper.step_to(t0 + cfg.T_final * s / n);
        if (on_step)
            on_step(stepper);
        if (s % cfg.output_every == 0 || s == n)
            out.push_back(stepper.record());
    }
    return out;
}

} // namespace hdgkp

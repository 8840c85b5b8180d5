#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#ifdef HDGKP_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "hdgkp/forms.hpp"
#include "hdgkp/mesh.hpp"
#include "hdgkp/trace_set.hpp"

namespace hdgkp {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet      = Eigen::Triplet<double>;

/// Mesh, degree and the derived dof layout. Elements must all have the same
/// size (the element operators are shared).
class Discretization
{
public:
    Discretization(CartesianMesh mesh, int k)
        : mesh_(std::move(mesh))
        , k_(k)
    {
        if (k < 1 || k > 3)
            throw std::invalid_argument("polynomial degree must be 1, 2 or 3");
        const double hx = mesh_.x_cell(0).length(), hy = mesh_.y_cell(0).length();
        for (int i = 0; i < mesh_.nx(); ++i)
            if (std::abs(mesh_.x_cell(i).length() - hx) > 1e-12 * hx)
                throw std::invalid_argument("Discretization: non-uniform x cells are not supported");
        for (int j = 0; j < mesh_.ny(); ++j)
            if (std::abs(mesh_.y_cell(j).length() - hy) > 1e-12 * hy)
                throw std::invalid_argument("Discretization: non-uniform y cells are not supported");
        ops_    = make_element_operators(k, hx, hy);
        layout_ = TraceLayout(mesh_, k);
        order_.resize(mesh_.element_count());
        std::iota(order_.begin(), order_.end(), 0);
    }

    const CartesianMesh& mesh() const { return mesh_; }
    int k() const { return k_; }
    const ElementOperators& ops() const { return ops_; }
    const TraceLayout& layout() const { return layout_; }

    int element_count() const { return mesh_.element_count(); }
    Eigen::Index block_size() const { return ops_.block_size(); }
    Eigen::Index bulk_dofs() const { return block_size() * element_count(); }
    Eigen::Index trace_dofs() const { return layout_.dof_count(); }
    Eigen::Index total_dofs() const { return bulk_dofs() + trace_dofs(); }

    /// Order in which element contributions are accumulated.
    const std::vector<int>& element_order() const { return order_; }
    void set_element_order(std::vector<int> order)
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (int e = 0; e < element_count(); ++e)
            if (static_cast<int>(sorted.size()) != element_count() || sorted[e] != e)
                throw std::invalid_argument("element order must be a permutation of the element ids");
        order_ = std::move(order);
    }

private:
    CartesianMesh mesh_;
    int k_;
    ElementOperators ops_;
    TraceLayout layout_;
    std::vector<int> order_;
};

/// Bulk coefficients (one column of 7 (k+1)^2 per element, fields stacked in
/// Field order) and traces.
struct SolutionState
{
    Matrix X;
    TraceSet traces;

    SolutionState() = default;
    explicit SolutionState(const Discretization& d)
        : X(Matrix::Zero(d.block_size(), d.element_count()))
        , traces(d.layout())
    {
    }

    auto field(int element, Field f, int nb) { return X.col(element).segment(int(f) * nb, nb); }
    auto field(int element, Field f, int nb) const { return X.col(element).segment(int(f) * nb, nb); }
};

/// Data of one implicit step that is not an unknown.
struct StepInputs
{
    LocalProblem problem;
    Matrix u_prev;                   // (k+1)^2 x elements
    Matrix uv_prev;                  // u_hat^V at the previous time, (k+1) x vertical faces
    std::vector<Vector> source_load; // per element, empty when there is no source
};

inline LocalTraces gather_local_traces(const Discretization& d, const TraceSet& traces, const Matrix& uv_prev, int i,
                                       int j)
{
    LocalTraces lt;
    const auto faces = element_slot_faces(d.mesh(), i, j);
    for (int s = 0; s < slot_count; ++s)
        lt.slot[s] = traces[faces[s].first].col(faces[s].second);
    lt.u_left_prev  = uv_prev.col(d.mesh().vertical_face_id(i, j));
    lt.u_right_prev = uv_prev.col(d.mesh().vertical_face_id(i + 1, j));
    return lt;
}

struct SystemEvaluation
{
    std::vector<LocalEvaluation> local;
    Vector bulk_residual;
    Vector trace_residual;
    double tau_margin = 0.0;

    double residual_norm() const
    {
        const double a = bulk_residual.size() ? bulk_residual.lpNorm<Eigen::Infinity>() : 0.0;
        const double b = trace_residual.size() ? trace_residual.lpNorm<Eigen::Infinity>() : 0.0;
        return std::max(a, b);
    }
};

/// Sums the per-element transmission contributions (and the identity terms
/// of the upwind families) into the rows of the free trace unknowns.
inline Vector transmission_residual(const Discretization& d, const std::vector<LocalEvaluation>& local,
                                    const TraceSet& traces)
{
    const auto& mesh   = d.mesh();
    const auto& layout = d.layout();
    const int nf       = layout.face_dofs();
    Vector r           = Vector::Zero(d.trace_dofs());
    for (int e : d.element_order()) {
        const auto [i, j] = mesh.element_index(e);
        const auto rows   = element_equation_faces(mesh, i, j);
        for (int q = 0; q < eq_count; ++q) {
            const int off = layout.offset(rows[q].first, rows[q].second);
            if (off >= 0)
                r.segment(off, nf) += local[e].transmission.segment(q * nf, nf);
        }
    }
    for (int f = 0; f < trace_family_count; ++f) {
        const auto fam = TraceFamily(f);
        if (!has_identity_term(fam))
            continue;
        for (int id = 0; id < layout.face_count(fam); ++id) {
            const int off = layout.offset(fam, id);
            if (off >= 0)
                r.segment(off, nf) += traces[fam].col(id);
        }
    }
    return r;
}

/// Infinity norm of the transmission residual restricted to each family.
inline std::array<double, trace_family_count> transmission_family_norms(const Discretization& d,
                                                                         const Vector& trace_residual)
{
    std::array<double, trace_family_count> out{};
    const auto& layout = d.layout();
    for (int f = 0; f < trace_family_count; ++f)
        for (int id = 0; id < layout.face_count(TraceFamily(f)); ++id) {
            const int off = layout.offset(TraceFamily(f), id);
            if (off >= 0)
                out[f] = std::max(out[f], trace_residual.segment(off, layout.face_dofs()).lpNorm<Eigen::Infinity>());
        }
    return out;
}

inline void evaluate_system(const Discretization& d, const StepInputs& in, const SolutionState& state,
                            bool with_jacobian, SystemEvaluation& out)
{
    const auto& mesh = d.mesh();
    const int ne     = d.element_count();
    out.local.resize(ne);
    out.bulk_residual.resize(d.bulk_dofs());
    out.tau_margin = std::numeric_limits<double>::infinity();
    for (int e : d.element_order()) {
        const auto [i, j]       = mesh.element_index(e);
        const LocalTraces lt    = gather_local_traces(d, state.traces, in.uv_prev, i, j);
        const Vector* src       = in.source_load.empty() ? nullptr : &in.source_load[e];
        evaluate_local(d.ops(), in.problem, state.X.col(e), in.u_prev.col(e), lt, src, with_jacobian, out.local[e]);
        out.bulk_residual.segment(e * d.block_size(), d.block_size()) = out.local[e].residual;
        out.tau_margin = std::min(out.tau_margin, out.local[e].tau_margin);
    }
    out.trace_residual = transmission_residual(d, out.local, state.traces);
}

/// Residual and sparse Jacobian over all free unknowns: element blocks first,
/// then the free trace dofs.
struct GlobalSystem
{
    SparseMatrix jacobian;
    Vector residual;
    Eigen::Index bulk_dofs  = 0;
    Eigen::Index trace_dofs = 0;
};

inline GlobalSystem assemble_newton_system(const Discretization& d, const SystemEvaluation& ev)
{
    const auto& mesh   = d.mesh();
    const auto& layout = d.layout();
    const int nf       = layout.face_dofs();
    const auto bs      = d.block_size();
    const auto nbulk   = d.bulk_dofs();
    if (static_cast<int>(ev.local.size()) != d.element_count() || ev.bulk_residual.size() != nbulk ||
        ev.trace_residual.size() != d.trace_dofs())
        throw std::invalid_argument("assemble_newton_system: evaluation does not match the layout");
    for (const auto& le : ev.local)
        if (le.res_state.rows() != bs)
            throw std::invalid_argument("assemble_newton_system: evaluation carries no Jacobian");

    GlobalSystem sys;
    sys.bulk_dofs  = nbulk;
    sys.trace_dofs = d.trace_dofs();
    sys.residual.resize(d.total_dofs());
    sys.residual << ev.bulk_residual, ev.trace_residual;

    std::vector<Triplet> trip;
    const auto add_block = [&](Eigen::Index r0, Eigen::Index c0, const auto& B) {
        for (Eigen::Index c = 0; c < B.cols(); ++c)
            for (Eigen::Index r = 0; r < B.rows(); ++r)
                trip.emplace_back(r0 + r, c0 + c, B(r, c));
    };
    for (int e : d.element_order()) {
        const auto [i, j]  = mesh.element_index(e);
        const auto& le     = ev.local[e];
        const auto slots   = element_slot_faces(mesh, i, j);
        const auto eqs     = element_equation_faces(mesh, i, j);
        const auto row0    = e * bs;
        add_block(row0, row0, le.res_state);
        for (int s = 0; s < slot_count; ++s) {
            const int col = layout.offset(slots[s].first, slots[s].second);
            if (col >= 0)
                add_block(row0, nbulk + col, le.res_trace.middleCols(s * nf, nf));
        }
        for (int q = 0; q < eq_count; ++q) {
            const int row = layout.offset(eqs[q].first, eqs[q].second);
            if (row < 0)
                continue;
            add_block(nbulk + row, row0, le.trans_state.middleRows(q * nf, nf));
            for (int s = 0; s < slot_count; ++s) {
                const int col = layout.offset(slots[s].first, slots[s].second);
                if (col >= 0)
                    add_block(nbulk + row, nbulk + col, le.trans_trace.block(q * nf, s * nf, nf, nf));
            }
        }
    }
    for (int f = 0; f < trace_family_count; ++f) {
        const auto fam = TraceFamily(f);
        if (!has_identity_term(fam))
            continue;
        for (int id = 0; id < layout.face_count(fam); ++id) {
            const int off = layout.offset(fam, id);
            if (off >= 0)
                for (int a = 0; a < nf; ++a)
                    trip.emplace_back(nbulk + off + a, nbulk + off + a, 1.0);
        }
    }
    sys.jacobian.resize(d.total_dofs(), d.total_dofs());
    sys.jacobian.setFromTriplets(trip.begin(), trip.end());
    sys.jacobian.makeCompressed();
    return sys;
}

class SingularLocalBlock : public std::runtime_error
{
public:
    SingularLocalBlock(ElementIndex e, double rcond)
        : std::runtime_error("singular local block on element (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                             "), rcond " + std::to_string(rcond))
        , element(e)
    {
    }
    ElementIndex element;
};

/// Trace-only system after eliminating the element unknowns:
///   S = sum_K (D_K - C_K A_K^{-1} B_K) + I_upwind,  S dL = rhs,
///   rhs = -T + sum_K C_K A_K^{-1} R_K,
/// and the data needed to recover dX_K = -A_K^{-1} (R_K + B_K dL_K).
struct CondensedSystem
{
    SparseMatrix schur;
    Vector rhs;
    std::vector<Vector> ainv_r;
    std::vector<Matrix> ainv_b; // columns of free slots only
    std::vector<std::vector<int>> slot_cols;
};

inline double local_block_rcond_threshold() { return 1e-14; }

inline CondensedSystem static_condense(const Discretization& d, const SystemEvaluation& ev)
{
    const auto& mesh   = d.mesh();
    const auto& layout = d.layout();
    const int nf       = layout.face_dofs();
    const int ne       = d.element_count();

    CondensedSystem cs;
    cs.ainv_r.resize(ne);
    cs.ainv_b.resize(ne);
    cs.slot_cols.resize(ne);
    cs.rhs = -ev.trace_residual;

    std::vector<Triplet> trip;
    for (int e : d.element_order()) {
        const auto [i, j] = mesh.element_index(e);
        const auto& le    = ev.local[e];
        const auto slots  = element_slot_faces(mesh, i, j);
        const auto eqs    = element_equation_faces(mesh, i, j);

        Eigen::PartialPivLU<Matrix> lu(le.res_state);
        const double rc = lu.rcond();
        if (!(rc > local_block_rcond_threshold()))
            throw SingularLocalBlock({i, j}, rc);

        // free slot columns of B and D
        std::vector<int> cols, free_slots;
        for (int s = 0; s < slot_count; ++s) {
            const int col = layout.offset(slots[s].first, slots[s].second);
            if (col >= 0) {
                cols.push_back(col);
                free_slots.push_back(s);
            }
        }
        const int nfree = static_cast<int>(free_slots.size());
        Matrix B(le.res_trace.rows(), nfree * nf);
        for (int c = 0; c < nfree; ++c)
            B.middleCols(c * nf, nf) = le.res_trace.middleCols(free_slots[c] * nf, nf);

        cs.ainv_r[e]    = lu.solve(le.residual);
        cs.ainv_b[e]    = lu.solve(B);
        cs.slot_cols[e] = cols;

        for (int q = 0; q < eq_count; ++q) {
            const int row = layout.offset(eqs[q].first, eqs[q].second);
            if (row < 0)
                continue;
            const auto C = le.trans_state.middleRows(q * nf, nf);
            cs.rhs.segment(row, nf) += C * cs.ainv_r[e];
            const Matrix CAB = C * cs.ainv_b[e];
            for (int c = 0; c < nfree; ++c) {
                const Matrix blk = le.trans_trace.block(q * nf, free_slots[c] * nf, nf, nf) - CAB.middleCols(c * nf, nf);
                for (int b = 0; b < nf; ++b)
                    for (int a = 0; a < nf; ++a)
                        trip.emplace_back(row + a, cols[c] + b, blk(a, b));
            }
        }
    }
    for (int f = 0; f < trace_family_count; ++f) {
        const auto fam = TraceFamily(f);
        if (!has_identity_term(fam))
            continue;
        for (int id = 0; id < layout.face_count(fam); ++id) {
            const int off = layout.offset(fam, id);
            if (off >= 0)
                for (int a = 0; a < nf; ++a)
                    trip.emplace_back(off + a, off + a, 1.0);
        }
    }
    cs.schur.resize(d.trace_dofs(), d.trace_dofs());
    cs.schur.setFromTriplets(trip.begin(), trip.end());
    cs.schur.makeCompressed();
    return cs;
}

/// Element updates from the trace update.
inline Matrix back_substitute(const Discretization& d, const CondensedSystem& cs, const Vector& dlambda)
{
    const int nf = d.layout().face_dofs();
    Matrix dX(d.block_size(), d.element_count());
    for (int e = 0; e < d.element_count(); ++e) {
        Vector dl(static_cast<Eigen::Index>(cs.slot_cols[e].size()) * nf);
        for (std::size_t c = 0; c < cs.slot_cols[e].size(); ++c)
            dl.segment(static_cast<Eigen::Index>(c) * nf, nf) = dlambda.segment(cs.slot_cols[e][c], nf);
        dX.col(e) = -cs.ainv_r[e];
        if (dl.size())
            dX.col(e) -= cs.ainv_b[e] * dl;
    }
    return dX;
}

/// Sparse direct solver that analyses the sparsity pattern once and only
/// refactorizes while the pattern stays the same.
class SparseDirectSolver
{
public:
    Vector solve(const SparseMatrix& A, const Vector& b)
    {
        if (A.rows() == 0)
            return Vector();
        if (!analyzed_ || A.rows() != rows_ || A.nonZeros() != nnz_) {
            solver_.analyzePattern(A);
            analyzed_ = true;
            rows_     = A.rows();
            nnz_      = A.nonZeros();
        }
        solver_.factorize(A);
        if (solver_.info() != Eigen::Success)
            throw std::runtime_error("sparse factorization failed");
        Vector x = solver_.solve(b);
        if (solver_.info() != Eigen::Success)
            throw std::runtime_error("sparse solve failed");
        return x;
    }

private:
#ifdef HDGKP_HAVE_UMFPACK
    Eigen::UmfPackLU<SparseMatrix> solver_;
#else
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> solver_;
#endif
    bool analyzed_      = false;
    Eigen::Index rows_  = -1;
    Eigen::Index nnz_   = -1;
};

enum class SolverMode { condensed, monolithic };

inline const char* to_string(SolverMode m) { return m == SolverMode::condensed ? "condensed" : "monolithic"; }

inline SolverMode parse_solver_mode(const std::string& s)
{
    if (s == "condensed")
        return SolverMode::condensed;
    if (s == "monolithic")
        return SolverMode::monolithic;
    throw std::invalid_argument("unknown solver mode '" + s + "' (expected condensed or monolithic)");
}

struct NewtonOptions
{
    double tol       = 1e-10;
    int max_iter     = 30;
    int max_halvings = 8;
    SolverMode mode  = SolverMode::condensed;
};

struct NewtonReport
{
    int iterations       = 0;
    double initial_norm  = 0.0;
    double final_norm    = 0.0;
    double tau_margin    = 0.0;
    std::array<double, trace_family_count> family_norms{};
};

class NonConvergence : public std::runtime_error
{
public:
    NonConvergence(const std::string& what, int iterations, double residual_norm, SolutionState last)
        : std::runtime_error(what)
        , iterations(iterations)
        , residual_norm(residual_norm)
        , last_iterate(std::move(last))
    {
    }
    int iterations;
    double residual_norm;
    SolutionState last_iterate;
};

/// Reusable buffers of the Newton driver.
struct NewtonWorkspace
{
    SystemEvaluation eval;
    SystemEvaluation trial_eval;
    SparseDirectSolver solver;
};

/// Newton update (dX, dLambda) for the current evaluation.
inline std::pair<Matrix, Vector> newton_direction(const Discretization& d, const SystemEvaluation& ev, SolverMode mode,
                                                  SparseDirectSolver& solver)
{
    if (mode == SolverMode::condensed) {
        const CondensedSystem cs = static_condense(d, ev);
        const Vector dl          = solver.solve(cs.schur, cs.rhs);
        return {back_substitute(d, cs, dl), dl};
    }
    const GlobalSystem sys = assemble_newton_system(d, ev);
    const Vector delta     = solver.solve(sys.jacobian, -sys.residual);
    Matrix dX              = Eigen::Map<const Matrix>(delta.data(), d.block_size(), d.element_count());
    return {dX, delta.tail(d.trace_dofs())};
}

/// Solves the implicit step by Newton's method starting from `state`, which
/// holds the converged iterate on return. Converged when the residual
/// infinity norm is at most tol * max(1, initial norm); a step that increases
/// the residual is halved up to max_halvings times.
inline NewtonReport newton_solve(const Discretization& d, const StepInputs& in, SolutionState& state,
                                 const NewtonOptions& opt = {}, NewtonWorkspace* workspace = nullptr)
{
    if (!(opt.tol > 0.0))
        throw std::invalid_argument("newton_solve: tol must be positive");
    NewtonWorkspace local_ws;
    NewtonWorkspace& ws = workspace ? *workspace : local_ws;

    NewtonReport rep;
    evaluate_system(d, in, state, true, ws.eval);
    double norm       = ws.eval.residual_norm();
    rep.initial_norm  = norm;
    const double goal = opt.tol * std::max(1.0, norm);

    while (!(norm <= goal)) {
        if (!std::isfinite(norm))
            throw NonConvergence("Newton residual is not finite", rep.iterations, norm, state);
        if (rep.iterations >= opt.max_iter)
            throw NonConvergence("Newton did not converge in " + std::to_string(opt.max_iter) +
                                     " iterations (residual " + std::to_string(norm) + ")",
                                 rep.iterations, norm, state);
        const auto [dX, dl] = newton_direction(d, ws.eval, opt.mode, ws.solver);

        double alpha = 1.0;
        SolutionState trial;
        double trial_norm = 0.0;
        for (int halving = 0;; ++halving) {
            trial = state;
            trial.X += alpha * dX;
            trial.traces.add_free(d.layout(), dl, alpha);
            evaluate_system(d, in, trial, true, ws.trial_eval);
            trial_norm = ws.trial_eval.residual_norm();
            if (trial_norm <= norm || trial_norm <= goal)
                break;
            if (halving == opt.max_halvings)
                throw NonConvergence("Newton step rejected after " + std::to_string(opt.max_halvings) +
                                         " halvings (residual " + std::to_string(norm) + ")",
                                     rep.iterations, norm, state);
            alpha *= 0.5;
        }
        state = std::move(trial);
        std::swap(ws.eval, ws.trial_eval);
        norm = trial_norm;
        ++rep.iterations;
    }
    rep.final_norm   = norm;
    rep.tau_margin   = ws.eval.tau_margin;
    rep.family_norms = transmission_family_norms(d, ws.eval.trace_residual);
    return rep;
}

} // namespace hdgkp

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "hdgkp/basis.hpp"
#include "hdgkp/mesh.hpp"
#include "hdgkp/quadrature.hpp"
#include "hdgkp/stabilization.hpp"

namespace hdgkp {

/// Unknown fields of the first-order system, in the order they are stacked
/// inside an element block.
enum Field : int { field_u = 0, field_q, field_p, field_s, field_v, field_z, field_r, field_count };

/// Trace inputs of one element: u_hat and q_hat on the left and right faces,
/// v_hat on the right face, u_hat on the bottom face, v_hat on the top face.
/// The remaining one-sided traces (v_hat on the left and bottom, u_hat on the
/// top) are the element's own values.
enum TraceSlot : int {
    slot_u_left = 0,
    slot_q_left,
    slot_u_right,
    slot_q_right,
    slot_v_right,
    slot_u_bottom,
    slot_v_top,
    slot_count
};

/// Transmission equations an element contributes to: the u_hat q_hat flux and
/// z_hat + f_hat - p_hat balances on its left and right faces, the v_hat
/// upwind conditions on its left and bottom faces, and the u_hat upwind
/// condition on its top face.
enum EquationSlot : int {
    eq_uq_left = 0,
    eq_g_left,
    eq_uq_right,
    eq_g_right,
    eq_v_left,
    eq_v_bottom,
    eq_u_top,
    eq_count
};

/// Quadrature tables of one element shape. Volume points are numbered
/// qx + nq * qy; basis functions a + (k+1) b.
struct ElementOperators
{
    int k  = 1;
    int nb = 4; // (k+1)^2
    int nf = 2; // k+1
    int nq = 4; // points per direction
    double hx = 1.0;
    double hy = 1.0;
    Quadrature1D rule;

    Matrix E;  // basis values at volume points
    Matrix Dx; // d/dx of basis
    Matrix Dy; // d/dy of basis
    Vector w;  // volume weights including the Jacobian

    std::array<Matrix, 4> F;  // element basis at face points, per Side
    std::array<Matrix, 4> G;  // face basis at face points
    std::array<Vector, 4> wf; // face weights

    // Products that do not depend on the state.
    Matrix DxWE, DyWE;
    std::array<Matrix, 4> FWF, FWG, GWF;

    Eigen::Index block_size() const { return field_count * nb; }
    Eigen::Index trace_size() const { return slot_count * nf; }
};

inline ElementOperators make_element_operators(int k, double hx, double hy)
{
    ElementOperators ops;
    ops.k    = k;
    ops.nf   = k + 1;
    ops.nb   = ops.nf * ops.nf;
    ops.rule = make_quadrature(k);
    ops.nq   = static_cast<int>(ops.rule.size());
    ops.hx   = hx;
    ops.hy   = hy;

    const Basis1D basis(k, ops.rule);
    const Matrix& V = basis.value_table();
    const Matrix& D = basis.derivative_table();
    const int nq = ops.nq, nf = ops.nf, nb = ops.nb;

    const double sx = std::sqrt(2.0 / hx), sy = std::sqrt(2.0 / hy);
    const double jx = 2.0 / hx, jy = 2.0 / hy;

    ops.E.resize(nq * nq, nb);
    ops.Dx.resize(nq * nq, nb);
    ops.Dy.resize(nq * nq, nb);
    ops.w.resize(nq * nq);
    for (int qy = 0; qy < nq; ++qy)
        for (int qx = 0; qx < nq; ++qx) {
            const int p = qx + nq * qy;
            ops.w(p)    = ops.rule.weights[qx] * ops.rule.weights[qy] * 0.25 * hx * hy;
            for (int b = 0; b < nf; ++b)
                for (int a = 0; a < nf; ++a) {
                    const int m = a + nf * b;
                    ops.E(p, m)  = V(qx, a) * sx * V(qy, b) * sy;
                    ops.Dx(p, m) = D(qx, a) * jx * sx * V(qy, b) * sy;
                    ops.Dy(p, m) = V(qx, a) * sx * D(qy, b) * jy * sy;
                }
        }

    const Vector& lo = basis.left_values();
    const Vector& hi = basis.right_values();
    for (int side = 0; side < 4; ++side) {
        const bool vertical = side == int(Side::left) || side == int(Side::right);
        ops.F[side].resize(nq, nb);
        ops.G[side].resize(nq, nf);
        ops.wf[side].resize(nq);
        for (int q = 0; q < nq; ++q) {
            ops.wf[side](q) = ops.rule.weights[q] * 0.5 * (vertical ? hy : hx);
            for (int b = 0; b < nf; ++b)
                for (int a = 0; a < nf; ++a) {
                    double vx = 0, vy = 0;
                    switch (Side(side)) {
                    case Side::left: vx = lo(a); vy = V(q, b); break;
                    case Side::right: vx = hi(a); vy = V(q, b); break;
                    case Side::bottom: vx = V(q, a); vy = lo(b); break;
                    case Side::top: vx = V(q, a); vy = hi(b); break;
                    }
                    ops.F[side](q, a + nf * b) = vx * sx * vy * sy;
                }
            for (int a = 0; a < nf; ++a)
                ops.G[side](q, a) = V(q, a) * (vertical ? sy : sx);
        }
    }

    ops.DxWE = ops.Dx.transpose() * ops.w.asDiagonal() * ops.E;
    ops.DyWE = ops.Dy.transpose() * ops.w.asDiagonal() * ops.E;
    for (int side = 0; side < 4; ++side) {
        ops.FWF[side] = ops.F[side].transpose() * ops.wf[side].asDiagonal() * ops.F[side];
        ops.FWG[side] = ops.F[side].transpose() * ops.wf[side].asDiagonal() * ops.G[side];
        ops.GWF[side] = ops.FWG[side].transpose();
    }
    return ops;
}

/// Physical coordinates of the volume quadrature points of an element.
inline void volume_points(const ElementOperators& ops, const Rect& K, Vector& x, Vector& y)
{
    x.resize(ops.nq * ops.nq);
    y.resize(ops.nq * ops.nq);
    for (int qy = 0; qy < ops.nq; ++qy)
        for (int qx = 0; qx < ops.nq; ++qx) {
            x(qx + ops.nq * qy) = K.x.from_reference(ops.rule.nodes[qx]);
            y(qx + ops.nq * qy) = K.y.from_reference(ops.rule.nodes[qy]);
        }
}

/// (S, phi_m)_K for every basis function.
inline Vector load_vector(const ElementOperators& ops, const Rect& K, const std::function<double(double, double)>& S)
{
    Vector x, y;
    volume_points(ops, K, x, y);
    Vector s(x.size());
    for (Eigen::Index p = 0; p < x.size(); ++p)
        s(p) = S(x(p), y(p));
    return ops.E.transpose() * ops.w.cwiseProduct(s);
}

struct LocalProblem
{
    double kappa = -0.5;
    double dt    = 1e-3;
    StabilizationParams tau;
};

struct LocalTraces
{
    std::array<Vector, slot_count> slot;
    // u_hat on the left/right faces at the previous time level (for r_hat).
    Vector u_left_prev;
    Vector u_right_prev;
};

/// Element residual, its transmission contributions and their derivatives
/// with respect to the element state and the seven trace slots.
struct LocalEvaluation
{
    Vector residual;     // 7 nb, blocks in Field order
    Vector transmission; // 7 nf, blocks in EquationSlot order
    Matrix res_state;
    Matrix res_trace;
    Matrix trans_state;
    Matrix trans_trace;
    // min over left/right face points of tau_f - tilde_tau
    double tau_margin = std::numeric_limits<double>::infinity();
};

/// Evaluates the local HDG equations of one element:
///   (q,phi) + (u,phi_x) - <u_hat n_x, phi>                                  = 0
///   (p,phi) + (u q,phi_x) - <(u q)^ n_x, phi>                               = 0
///   (s,phi) + (u,phi_y) - <u_hat n_y, phi>                                  = 0
///   (s,phi) + (v,phi_x) - <v_hat n_x, phi>                                  = 0
///   (z,phi) + (r,phi_x) - <r_hat n_x, phi>                                  = 0
///   (r,phi) + (z - p + f(u) + q^2/2, phi_x) + (v, phi_y)
///       - <z_hat - p_hat + f_hat + q_hat^2/2, n_x phi> - <v_hat n_y, phi> - (S, phi) = 0
///   ((u - u_prev)/dt, phi) + (r, phi)                                       = 0
/// with r_hat = -(u_hat - u_hat_prev)/dt. `source_load`, when given, is (S, phi).
inline void evaluate_local(const ElementOperators& ops, const LocalProblem& prob, const Vector& state,
                           const Vector& u_prev, const LocalTraces& tr, const Vector* source_load,
                           bool with_jacobian, LocalEvaluation& out)
{
    const int nb = ops.nb, nf = ops.nf;
    const double dt = prob.dt, kappa = prob.kappa;
    const StabilizationParams& tau = prob.tau;

    out.residual.setZero(ops.block_size());
    out.transmission.setZero(ops.trace_size());
    out.tau_margin = std::numeric_limits<double>::infinity();
    if (with_jacobian) {
        out.res_state.setZero(ops.block_size(), ops.block_size());
        out.res_trace.setZero(ops.block_size(), ops.trace_size());
        out.trans_state.setZero(ops.trace_size(), ops.block_size());
        out.trans_trace.setZero(ops.trace_size(), ops.trace_size());
    }

    const auto fld = [&](int f) { return state.segment(f * nb, nb); };
    const auto R   = [&](int f) { return out.residual.segment(f * nb, nb); };
    const auto T   = [&](int e) { return out.transmission.segment(e * nf, nf); };
    const auto Jss = [&](int rf, int cf) { return out.res_state.block(rf * nb, cf * nb, nb, nb); };
    const auto Jst = [&](int rf, int sl) { return out.res_trace.block(rf * nb, sl * nf, nb, nf); };
    const auto Jts = [&](int eq, int cf) { return out.trans_state.block(eq * nf, cf * nb, nf, nb); };
    const auto Jtt = [&](int eq, int sl) { return out.trans_trace.block(eq * nf, sl * nf, nf, nf); };

    // volume terms
    const Vector U  = ops.E * fld(field_u);
    const Vector Q  = ops.E * fld(field_q);
    const Vector P  = ops.E * fld(field_p);
    const Vector Vv = ops.E * fld(field_v);
    const Vector Z  = ops.E * fld(field_z);
    const Vector Rr = ops.E * fld(field_r);
    const auto& w   = ops.w;

    Vector fU(U.size()), dfU(U.size());
    for (Eigen::Index p = 0; p < U.size(); ++p) {
        fU(p)  = flux(U(p), kappa);
        dfU(p) = flux_derivative(U(p), kappa);
    }

    R(field_q) = fld(field_q) + ops.Dx.transpose() * w.cwiseProduct(U);
    R(field_p) = fld(field_p) + ops.Dx.transpose() * w.cwiseProduct(U.cwiseProduct(Q));
    R(field_s) = fld(field_s) + ops.Dy.transpose() * w.cwiseProduct(U);
    R(field_v) = fld(field_s) + ops.Dx.transpose() * w.cwiseProduct(Vv);
    R(field_z) = fld(field_z) + ops.Dx.transpose() * w.cwiseProduct(Rr);
    {
        const Vector g = Z - P + fU + 0.5 * Q.cwiseProduct(Q);
        R(field_r)     = fld(field_r) + ops.Dx.transpose() * w.cwiseProduct(g) + ops.Dy.transpose() * w.cwiseProduct(Vv);
        if (source_load)
            R(field_r) -= *source_load;
    }
    R(field_u) = (fld(field_u) - u_prev) / dt + fld(field_r);

    if (with_jacobian) {
        const Matrix I = Matrix::Identity(nb, nb);
        Jss(field_q, field_q) = I;
        Jss(field_p, field_p) = I;
        Jss(field_s, field_s) = I;
        Jss(field_v, field_s) = I;
        Jss(field_z, field_z) = I;
        Jss(field_r, field_r) = I;
        Jss(field_u, field_u) = I / dt;
        Jss(field_u, field_r) = I;

        const Matrix DxW = ops.Dx.transpose() * w.asDiagonal();
        Jss(field_q, field_u) += ops.DxWE;
        Jss(field_p, field_u) += DxW * Q.asDiagonal() * ops.E;
        Jss(field_p, field_q) += DxW * U.asDiagonal() * ops.E;
        Jss(field_s, field_u) += ops.DyWE;
        Jss(field_v, field_v) += ops.DxWE;
        Jss(field_z, field_r) += ops.DxWE;
        Jss(field_r, field_z) += ops.DxWE;
        Jss(field_r, field_p) -= ops.DxWE;
        Jss(field_r, field_u) += DxW * dfU.asDiagonal() * ops.E;
        Jss(field_r, field_q) += DxW * Q.asDiagonal() * ops.E;
        Jss(field_r, field_v) += ops.DyWE;
    }

    // vertical faces: only n_x terms
    for (const Side side : {Side::left, Side::right}) {
        const int sd      = int(side);
        const bool left   = side == Side::left;
        const double n    = left ? -1.0 : 1.0;
        const Matrix& F   = ops.F[sd];
        const Matrix& Gm  = ops.G[sd];
        const Vector& wf  = ops.wf[sd];
        const int slot_u  = left ? slot_u_left : slot_u_right;
        const int slot_q  = left ? slot_q_left : slot_q_right;
        const int eq_uq   = left ? eq_uq_left : eq_uq_right;
        const int eq_g    = left ? eq_g_left : eq_g_right;
        const double tzpu = left ? tau.tau_zpu_plus : tau.tau_zpu_minus;
        const double tzpv = left ? 0.0 : tau.tau_zpv_minus;

        const Vector uf = F * fld(field_u);
        const Vector qf = F * fld(field_q);
        const Vector pf = F * fld(field_p);
        const Vector zf = F * fld(field_z);
        const Vector vf = F * fld(field_v);
        const Vector uh = Gm * tr.slot[slot_u];
        const Vector qh = Gm * tr.slot[slot_q];
        const Vector uh_prev = Gm * (left ? tr.u_left_prev : tr.u_right_prev);
        const Vector vh = left ? vf : Vector(Gm * tr.slot[slot_v_right]);

        const int nq = ops.nq;
        Vector uqhat(nq), rhat(nq), gface(nq), H(nq);
        Vector a_u(nq), a_q(nq), a_qh(nq), dH_du(nq), dH_duh(nq);
        for (int q = 0; q < nq; ++q) {
            const double tf = tau.tau_for_flux(uh(q), uf(q), kappa);
            out.tau_margin  = std::min(out.tau_margin, tf - compute_tilde_tau(uh(q), uf(q), n, kappa));

            uqhat(q) = uf(q) * 0.5 * (qh(q) + qf(q)) + tau.tau_uqq * (qh(q) - qf(q)) * n;
            rhat(q)  = -(uh(q) - uh_prev(q)) / dt;
            const double zp   = zf(q) - pf(q) + tzpu * (uh(q) - uf(q)) * n + tzpv * (vh(q) - vf(q)) * n;
            const double fhat = flux(uf(q), kappa) - tf * (uh(q) - uf(q)) * n;
            gface(q) = zp + fhat;
            H(q)     = gface(q) + 0.5 * qh(q) * qh(q);

            if (with_jacobian) {
                double dtf_duh = 0.0, dtf_du = 0.0;
                if (tau.adaptive_tau_f)
                    std::tie(dtf_duh, dtf_du) = adaptive_tau_f_derivatives(uh(q), uf(q), kappa);
                a_u(q)    = 0.5 * (qh(q) + qf(q));
                a_q(q)    = 0.5 * uf(q) - tau.tau_uqq * n;
                a_qh(q)   = 0.5 * uf(q) + tau.tau_uqq * n;
                dH_du(q)  = -tzpu * n + flux_derivative(uf(q), kappa) + tf * n - n * (uh(q) - uf(q)) * dtf_du;
                dH_duh(q) = tzpu * n - tf * n - n * (uh(q) - uf(q)) * dtf_duh;
            }
        }

        const auto wfv = [&](const Vector& v) { return Vector(wf.cwiseProduct(v)); };
        R(field_q) -= n * F.transpose() * wfv(uh);
        R(field_p) -= n * F.transpose() * wfv(uqhat);
        R(field_v) -= n * F.transpose() * wfv(vh);
        R(field_z) -= n * F.transpose() * wfv(rhat);
        R(field_r) -= n * F.transpose() * wfv(H);
        T(eq_uq) += n * Gm.transpose() * wfv(uqhat);
        T(eq_g) += n * Gm.transpose() * wfv(gface);
        if (left)
            T(eq_v_left) -= Gm.transpose() * wfv(vf);

        if (!with_jacobian)
            continue;

        const Matrix FW = F.transpose() * wf.asDiagonal();
        const Matrix GW = Gm.transpose() * wf.asDiagonal();
        const Matrix& FWF = ops.FWF[sd];
        const Matrix& FWG = ops.FWG[sd];
        const Matrix& GWF = ops.GWF[sd];

        Jst(field_q, slot_u) -= n * FWG;

        Jss(field_p, field_u) -= n * FW * a_u.asDiagonal() * F;
        Jss(field_p, field_q) -= n * FW * a_q.asDiagonal() * F;
        Jst(field_p, slot_q) -= n * FW * a_qh.asDiagonal() * Gm;

        if (left)
            Jss(field_v, field_v) -= n * FWF;
        else
            Jst(field_v, slot_v_right) -= n * FWG;

        Jst(field_z, slot_u) += (n / dt) * FWG;

        Jss(field_r, field_u) -= n * FW * dH_du.asDiagonal() * F;
        Jst(field_r, slot_u) -= n * FW * dH_duh.asDiagonal() * Gm;
        Jss(field_r, field_z) -= n * FWF;
        Jss(field_r, field_p) += n * FWF;
        Jst(field_r, slot_q) -= n * FW * qh.asDiagonal() * Gm;
        if (!left) {
            Jss(field_r, field_v) += (n * tzpv * n) * FWF;
            Jst(field_r, slot_v_right) -= (n * tzpv * n) * FWG;
        }

        Jts(eq_uq, field_u) += n * GW * a_u.asDiagonal() * F;
        Jts(eq_uq, field_q) += n * GW * a_q.asDiagonal() * F;
        Jtt(eq_uq, slot_q) += n * GW * a_qh.asDiagonal() * Gm;

        Jts(eq_g, field_u) += n * GW * dH_du.asDiagonal() * F;
        Jtt(eq_g, slot_u) += n * GW * dH_duh.asDiagonal() * Gm;
        Jts(eq_g, field_z) += n * GWF;
        Jts(eq_g, field_p) -= n * GWF;
        if (!left) {
            Jts(eq_g, field_v) -= (n * tzpv * n) * GWF;
            Jtt(eq_g, slot_v_right) += (n * tzpv * n) * GW * Gm;
        } else {
            Jts(eq_v_left, field_v) -= GWF;
        }
    }

    // horizontal faces: only n_y terms
    {
        const int sd     = int(Side::bottom);
        const double n   = -1.0;
        const Matrix& F  = ops.F[sd];
        const Matrix& Gm = ops.G[sd];
        const Vector& wf = ops.wf[sd];
        const Vector uh  = Gm * tr.slot[slot_u_bottom];
        const Vector vf  = F * fld(field_v);
        R(field_s) -= n * F.transpose() * wf.cwiseProduct(uh);
        R(field_r) -= n * F.transpose() * wf.cwiseProduct(vf);
        T(eq_v_bottom) -= Gm.transpose() * wf.cwiseProduct(vf);
        if (with_jacobian) {
            Jst(field_s, slot_u_bottom) -= n * ops.FWG[sd];
            Jss(field_r, field_v) -= n * ops.FWF[sd];
            Jts(eq_v_bottom, field_v) -= ops.GWF[sd];
        }
    }
    {
        const int sd     = int(Side::top);
        const double n   = 1.0;
        const Matrix& F  = ops.F[sd];
        const Matrix& Gm = ops.G[sd];
        const Vector& wf = ops.wf[sd];
        const Vector uf  = F * fld(field_u);
        const Vector vh  = Gm * tr.slot[slot_v_top];
        R(field_s) -= n * F.transpose() * wf.cwiseProduct(uf);
        R(field_r) -= n * F.transpose() * wf.cwiseProduct(vh);
        T(eq_u_top) -= Gm.transpose() * wf.cwiseProduct(uf);
        if (with_jacobian) {
            Jss(field_s, field_u) -= n * ops.FWF[sd];
            Jst(field_r, slot_v_top) -= n * ops.FWG[sd];
            Jts(eq_u_top, field_u) -= ops.GWF[sd];
        }
    }
}

inline Vector local_residual(const ElementOperators& ops, const LocalProblem& prob, const Vector& state,
                             const Vector& u_prev, const LocalTraces& tr, const Vector* source_load = nullptr)
{
    LocalEvaluation ev;
    evaluate_local(ops, prob, state, u_prev, tr, source_load, false, ev);
    return ev.residual;
}

inline LocalEvaluation local_jacobian(const ElementOperators& ops, const LocalProblem& prob, const Vector& state,
                                      const Vector& u_prev, const LocalTraces& tr,
                                      const Vector* source_load = nullptr)
{
    LocalEvaluation ev;
    evaluate_local(ops, prob, state, u_prev, tr, source_load, true, ev);
    return ev;
}

} // namespace hdgkp

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hdgkp/forms.hpp"
#include "hdgkp/projection.hpp"

using namespace hdgkp;

namespace {

struct LocalSetup
{
    ElementOperators ops;
    LocalProblem prob;
    Vector state;
    Vector u_prev;
    LocalTraces tr;
};

LocalSetup random_setup(int k, double hx, double hy, unsigned seed, double scale = 0.5)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-scale, scale);
    LocalSetup s;
    s.ops        = make_element_operators(k, hx, hy);
    s.prob.kappa = -0.5;
    s.prob.dt    = 1e-2;
    s.state.resize(s.ops.block_size());
    for (auto& v : s.state)
        v = U(gen);
    s.u_prev.resize(s.ops.nb);
    for (auto& v : s.u_prev)
        v = U(gen);
    for (auto& sl : s.tr.slot) {
        sl.resize(s.ops.nf);
        for (auto& v : sl)
            v = U(gen);
    }
    s.tr.u_left_prev = Vector::Zero(s.ops.nf);
    s.tr.u_right_prev = Vector::Zero(s.ops.nf);
    for (auto& v : s.tr.u_left_prev)
        v = U(gen);
    for (auto& v : s.tr.u_right_prev)
        v = U(gen);
    return s;
}

Vector stack_outputs(const LocalSetup& s, const Vector& state, const LocalTraces& tr)
{
    LocalEvaluation ev;
    evaluate_local(s.ops, s.prob, state, s.u_prev, tr, nullptr, false, ev);
    Vector out(ev.residual.size() + ev.transmission.size());
    out << ev.residual, ev.transmission;
    return out;
}

LocalTraces perturb_traces(const LocalTraces& tr, const Vector& d, double eps)
{
    LocalTraces out = tr;
    const auto nf   = tr.slot[0].size();
    for (int sl = 0; sl < slot_count; ++sl)
        out.slot[sl] += eps * d.segment(sl * nf, nf);
    return out;
}

} // namespace

TEST(LocalResidual, ZeroStateZeroTracesGiveZero)
{
    for (int k = 1; k <= 3; ++k) {
        auto s = random_setup(k, 0.3, 0.4, 1);
        s.state.setZero();
        s.u_prev.setZero();
        for (auto& sl : s.tr.slot)
            sl.setZero();
        s.tr.u_left_prev.setZero();
        s.tr.u_right_prev.setZero();
        LocalEvaluation ev;
        evaluate_local(s.ops, s.prob, s.state, s.u_prev, s.tr, nullptr, true, ev);
        EXPECT_EQ(ev.residual.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(ev.transmission.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(LocalResidual, ConstantStateHasZeroQResidual)
{
    const int k     = 2;
    const Rect K    = {{0.0, 0.5}, {0.0, 0.25}};
    auto s          = random_setup(k, 0.5, 0.25, 2);
    const double c0 = 0.7;
    s.state.setZero();
    s.state.segment(0, s.ops.nb) = tensor_project([&](double, double) { return c0; }, K, k, ProjectionKind::l2);
    s.u_prev                     = s.state.segment(0, s.ops.nb);
    const Vector uhat = l2_project_1d([&](double) { return c0; }, K.y, k);
    s.tr.slot[slot_u_left] = s.tr.slot[slot_u_right] = uhat;
    s.tr.slot[slot_q_left] = s.tr.slot[slot_q_right] = Vector::Zero(k + 1);
    s.tr.u_left_prev = s.tr.u_right_prev = uhat;
    const Vector R = local_residual(s.ops, s.prob, s.state, s.u_prev, s.tr);
    EXPECT_LT(R.segment(field_q * s.ops.nb, s.ops.nb).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LocalResidual, ManufacturedPolynomialFieldsSatisfyAllEquations)
{
    // u = x, q = 1, p = 1, s = 0, v = 0, r = 2 kappa + 3 x, z = 3 with exact
    // traces; u_prev and u_hat_prev chosen so that u_t = -r and r_hat = r.
    const double kappa = -0.5, dt = 0.01;
    for (int k = 1; k <= 3; ++k) {
        const Rect K = {{0.3, 0.8}, {-0.2, 0.4}};
        LocalSetup s;
        s.ops        = make_element_operators(k, K.x.length(), K.y.length());
        s.prob.kappa = kappa;
        s.prob.dt    = dt;
        const auto P = [&](auto f) { return tensor_project(f, K, k, ProjectionKind::l2); };
        const int nb = s.ops.nb;
        s.state.setZero(s.ops.block_size());
        s.state.segment(field_u * nb, nb) = P([](double x, double) { return x; });
        s.state.segment(field_q * nb, nb) = P([](double, double) { return 1.0; });
        s.state.segment(field_p * nb, nb) = P([](double, double) { return 1.0; });
        s.state.segment(field_r * nb, nb) = P([&](double x, double) { return 2 * kappa + 3 * x; });
        s.state.segment(field_z * nb, nb) = P([](double, double) { return 3.0; });
        s.u_prev = P([&](double x, double) { return x + dt * (2 * kappa + 3 * x); });

        const auto Fy = [&](double c) { return l2_project_1d([&](double) { return c; }, K.y, k); };
        const auto Fx = [&](auto f) { return l2_project_1d(f, K.x, k); };
        s.tr.slot[slot_u_left]   = Fy(K.x.a);
        s.tr.slot[slot_u_right]  = Fy(K.x.b);
        s.tr.slot[slot_q_left]   = Fy(1.0);
        s.tr.slot[slot_q_right]  = Fy(1.0);
        s.tr.slot[slot_v_right]  = Fy(0.0);
        s.tr.slot[slot_u_bottom] = Fx([](double x) { return x; });
        s.tr.slot[slot_v_top]    = Fx([](double) { return 0.0; });
        // r_hat = -(u_hat - u_hat_prev)/dt = r on the face
        s.tr.u_left_prev  = Fy(K.x.a + dt * (2 * kappa + 3 * K.x.a));
        s.tr.u_right_prev = Fy(K.x.b + dt * (2 * kappa + 3 * K.x.b));

        const Vector R = local_residual(s.ops, s.prob, s.state, s.u_prev, s.tr);
        EXPECT_LT(R.cwiseAbs().maxCoeff(), 1e-11) << "k=" << k << "\n" << R.transpose();
    }
}

TEST(LocalJacobian, MatchesCentralFiniteDifferences)
{
    for (int k = 1; k <= 3; ++k)
        for (bool adaptive : {false, true})
            for (int trial = 0; trial < 20; ++trial) {
                auto s                   = random_setup(k, std::numbers::pi / 2, std::numbers::pi / 2, 100 * k + trial);
                s.prob.tau.adaptive_tau_f = adaptive;
                LocalEvaluation ev;
                evaluate_local(s.ops, s.prob, s.state, s.u_prev, s.tr, nullptr, true, ev);

                std::mt19937 gen(trial);
                std::normal_distribution<double> N01;
                Vector dx(s.ops.block_size()), dl(s.ops.trace_size());
                for (auto& v : dx)
                    v = N01(gen);
                for (auto& v : dl)
                    v = N01(gen);

                const double eps = 1e-6;
                const Vector fd  = (stack_outputs(s, s.state + eps * dx, perturb_traces(s.tr, dl, eps)) -
                                   stack_outputs(s, s.state - eps * dx, perturb_traces(s.tr, dl, -eps))) /
                                  (2 * eps);
                Vector jv(fd.size());
                jv << ev.res_state * dx + ev.res_trace * dl, ev.trans_state * dx + ev.trans_trace * dl;
                EXPECT_LE((jv - fd).norm(), 1e-6 * std::max(1.0, jv.norm()))
                    << "k=" << k << " adaptive=" << adaptive << " trial=" << trial;
            }
}

TEST(LocalJacobian, ZeroStateLeavesOnlyLinearFluxDerivative)
{
    // At the zero state d(f(u))/du = 2 kappa: the u-column of the r-equation
    // is 2 kappa times the kappa = 1/2 column.
    auto s = random_setup(2, 0.5, 0.5, 9);
    s.state.setZero();
    for (auto& sl : s.tr.slot)
        sl.setZero();
    s.prob.tau.tau_f = 0.0;
    s.prob.tau.tau_zpu_plus = s.prob.tau.tau_zpu_minus = 0.0;
    const int nb = s.ops.nb;
    s.prob.kappa = -0.5;
    const Matrix a = local_jacobian(s.ops, s.prob, s.state, s.u_prev, s.tr).res_state.block(field_r * nb, 0, nb, nb);
    s.prob.kappa = 0.5;
    const Matrix b = local_jacobian(s.ops, s.prob, s.state, s.u_prev, s.tr).res_state.block(field_r * nb, 0, nb, nb);
    EXPECT_LT((a + b).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_GT(a.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(LocalJacobian, AdvectionBlockMatchesDirectAssembly)
{
    // d R_p / d q = (u_h phi_j, d_x phi_i) - sum_{L,R} n <(u_h/2 - tau_uqq n) phi_j, phi_i>
    const int k  = 2;
    const Rect K = {{1.0, 1.4}, {0.0, 0.3}};
    auto s       = random_setup(k, K.x.length(), K.y.length(), 11);
    const int nb = s.ops.nb;
    const Matrix J = local_jacobian(s.ops, s.prob, s.state, s.u_prev, s.tr).res_state.block(field_p * nb, field_q * nb, nb, nb);

    const TensorBasis basis(k);
    const Vector cu = s.state.segment(0, nb);
    const auto rule = gauss_legendre(8);
    Matrix M        = Matrix::Zero(nb, nb);
    for (std::size_t a = 0; a < rule.size(); ++a) {
        for (std::size_t b = 0; b < rule.size(); ++b) {
            const double x = K.x.from_reference(rule.nodes[a]), y = K.y.from_reference(rule.nodes[b]);
            const double w = rule.weights[a] * rule.weights[b] * 0.25 * K.area();
            const Vector phi = basis.values(K, x, y);
            const Matrix g   = basis.gradients(K, x, y);
            M += w * phi.dot(cu) * g.col(0) * phi.transpose();
        }
        const double y  = K.y.from_reference(rule.nodes[a]);
        const double wf = rule.weights[a] * 0.5 * K.y.length();
        for (double n : {-1.0, 1.0}) {
            const double x   = n < 0 ? K.x.a : K.x.b;
            const Vector phi = basis.values(K, x, y);
            M -= wf * n * (0.5 * phi.dot(cu) - s.prob.tau.tau_uqq * n) * phi * phi.transpose();
        }
    }
    EXPECT_LT((J - M).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LocalResidual, NormalComponentMasking)
{
    // R_s has only n_y terms: it ignores the vertical traces; R_q and R_v
    // have only n_x terms: they ignore the horizontal ones.
    auto s      = random_setup(2, 0.4, 0.7, 21);
    const int nb = s.ops.nb;
    const Vector base = local_residual(s.ops, s.prob, s.state, s.u_prev, s.tr);
    auto moved        = s.tr;
    for (int sl : {slot_u_left, slot_q_left, slot_u_right, slot_q_right, slot_v_right})
        moved.slot[sl].array() += 1.0;
    const Vector r1 = local_residual(s.ops, s.prob, s.state, s.u_prev, moved);
    EXPECT_LT((r1 - base).segment(field_s * nb, nb).cwiseAbs().maxCoeff(), 1e-14);
    moved = s.tr;
    for (int sl : {slot_u_bottom, slot_v_top})
        moved.slot[sl].array() += 1.0;
    const Vector r2 = local_residual(s.ops, s.prob, s.state, s.u_prev, moved);
    EXPECT_LT((r2 - base).segment(field_q * nb, nb).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((r2 - base).segment(field_v * nb, nb).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((r2 - base).segment(field_p * nb, nb).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TildeTau, MatchesTrapezoidIntegral)
{
    const double kappa = -0.5, uh = 0.3, u = -0.2;
    const auto f       = [&](double s) { return flux(s, kappa); };
    const int n        = 10000;
    double integral    = 0.0;
    for (int m = 0; m <= n; ++m) {
        const double s = uh + (u - uh) * m / n;
        const double w = (m == 0 || m == n) ? 0.5 : 1.0;
        integral += w * (f(s) - f(u));
    }
    integral *= (u - uh) / n;
    for (double nx : {-1.0, 1.0}) {
        const double oracle = nx * integral / ((uh - u) * (uh - u));
        EXPECT_NEAR(compute_tilde_tau(uh, u, nx, kappa), oracle, 1e-8);
    }
}

TEST(TildeTau, LimitAndBound)
{
    const double kappa = -0.5;
    // at u_hat = u the closed form is -n_x f'(u) / 2
    for (double u : {-0.7, 0.0, 0.4})
        EXPECT_NEAR(compute_tilde_tau(u, u, 1.0, kappa), -0.5 * flux_derivative(u, kappa), 1e-15);
    EXPECT_NEAR(std::abs(compute_tilde_tau(0.0, 0.0, 1.0, kappa)), 0.5, 1e-15);

    StabilizationParams p;
    EXPECT_GE(tau_f_margin(p, 0.0, 0.0, 1.0, kappa), 3.5);
    EXPECT_GE(tau_f_margin(p, 0.0, 0.0, -1.0, kappa), 3.5);

    std::mt19937 gen(4);
    std::uniform_real_distribution<double> U(-2, 2);
    StabilizationParams ad;
    ad.adaptive_tau_f = true;
    for (int t = 0; t < 200; ++t) {
        const double a = U(gen), b = U(gen), n = t % 2 ? 1.0 : -1.0;
        const double sup = 0.5 * std::max(std::abs(flux_derivative(a, kappa)), std::abs(flux_derivative(b, kappa)));
        EXPECT_LE(std::abs(compute_tilde_tau(a, b, n, kappa)), sup + 1e-14);
        EXPECT_GE(tau_f_margin(ad, a, b, n, kappa), ad.tau_f_eps - 1e-14);
    }
}

TEST(Stabilization, DefaultsSatisfyAssumption)
{
    StabilizationParams p;
    EXPECT_NO_THROW(p.validate());
    p.tau_zpv_minus = 2.0; // 4 > -2 * (-1)
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p               = {};
    p.tau_uqq       = 0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p               = {};
    p.tau_zpu_plus  = 0.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p               = {};
    p.tau_f         = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ElementOperators, TablesAreConsistent)
{
    const auto ops = make_element_operators(2, 0.5, 0.25);
    // orthonormal basis: E^T W E = I
    const Matrix M = ops.E.transpose() * ops.w.asDiagonal() * ops.E;
    EXPECT_LT((M - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-13);
    // integration by parts: Dx^T W E + E^T W Dx = F_R^T W F_R - F_L^T W F_L
    const Matrix lhs = ops.DxWE + ops.DxWE.transpose();
    const Matrix rhs = ops.FWF[int(Side::right)] - ops.FWF[int(Side::left)];
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    // face basis orthonormal
    const Matrix Gm = ops.G[0].transpose() * ops.wf[0].asDiagonal() * ops.G[0];
    EXPECT_LT((Gm - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-13);
}

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hdgkp/projection.hpp"
#include "hdgkp/scenarios.hpp"

using namespace hdgkp;

namespace {

using ScalarFn3 = std::function<double(double, double, double)>;

// Fourth-order central differences.
double d1(const std::function<double(double)>& f, double x, double h)
{
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
double d2(const std::function<double(double)>& f, double x, double h)
{
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

// S = -u_t + u_txx - [f(u)_x - (u u_x)_xx + (u_x^2)_x / 2 + v_y] from u alone,
// with v = -int_x^{x_R} u_y and every derivative taken numerically.
double source_oracle(const ScalarFn3& u, double kappa, double x_right, double x, double y, double t)
{
    const double h  = 1e-3;
    const auto ux   = [&](double xx, double yy, double tt) { return d1([&](double s) { return u(s, yy, tt); }, xx, h); };
    const auto ut   = [&](double xx, double yy, double tt) { return d1([&](double s) { return u(xx, yy, s); }, tt, h); };
    const double utxx = d2([&](double s) { return ut(s, y, t); }, x, h);
    const double fx   = d1([&](double s) { const double w = u(s, y, t); return 2 * kappa * w + 1.5 * w * w; }, x, h);
    const double uuxx = d2([&](double s) { return u(s, y, t) * ux(s, y, t); }, x, h);
    const double qqx  = d1([&](double s) { const double w = ux(s, y, t); return 0.5 * w * w; }, x, h);
    const auto rule   = gauss_legendre(40);
    double vy         = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = 0.5 * (x + x_right) + 0.5 * (x_right - x) * rule.nodes[q];
        vy -= 0.5 * (x_right - x) * rule.weights[q] * d2([&](double yy) { return u(s, yy, t); }, y, h);
    }
    return -ut(x, y, t) + utxx - (fx - uuxx + qqx + vy);
}

} // namespace

TEST(Scenario, ParseAndDefaults)
{
    EXPECT_EQ(parse_scenario_kind("mms"), ScenarioKind::mms);
    EXPECT_EQ(parse_scenario_kind("energy"), ScenarioKind::energy_decay);
    EXPECT_THROW(parse_scenario_kind("kdv"), std::invalid_argument);
    const Scenario mms = make_scenario(ScenarioKind::mms);
    EXPECT_DOUBLE_EQ(mms.domain.x_right, 2 * std::numbers::pi);
    EXPECT_TRUE(mms.has_source());
    const Scenario en = make_scenario(ScenarioKind::energy_decay);
    EXPECT_FALSE(en.has_exact());
    EXPECT_FALSE(en.has_source());
    Scenario pk = make_scenario(ScenarioKind::peakon);
    EXPECT_TRUE(pk.has_source());
    pk.peakon_anchor_source = false;
    EXPECT_FALSE(pk.has_source());
}

TEST(Mms, ClosedFormValues)
{
    const Scenario sc = make_scenario(ScenarioKind::mms);
    const auto e      = exact_fields(sc, std::numbers::pi / 2, 0.0, 0.0);
    EXPECT_NEAR(e.u, 0.0, 1e-15);
    EXPECT_NEAR(e.q, 0.0, 1e-15);
    EXPECT_NEAR(e.v, 1.0, 1e-15);
    for (double y : {0.3, 2.0, 5.0})
        EXPECT_NEAR(exact_fields(sc, sc.domain.x_right, y, 0.7).v, 0.0, 1e-15);
}

TEST(Mms, AuxiliaryFieldsAreTheDerivatives)
{
    const Scenario sc = make_scenario(ScenarioKind::mms);
    const double h    = 1e-4;
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> X(0.1, 6.1), T(0.0, 1.0);
    for (int n = 0; n < 20; ++n) {
        const double x = X(gen), y = X(gen), t = T(gen);
        const auto at  = [&](double xx, double yy, double tt) { return exact_fields(sc, xx, yy, tt); };
        const auto e   = at(x, y, t);
        EXPECT_NEAR(e.q, (at(x + h, y, t).u - at(x - h, y, t).u) / (2 * h), 1e-7);
        EXPECT_NEAR(e.s, (at(x, y + h, t).u - at(x, y - h, t).u) / (2 * h), 1e-7);
        EXPECT_NEAR(e.s, (at(x + h, y, t).v - at(x - h, y, t).v) / (2 * h), 1e-7);
        EXPECT_NEAR(e.p, (at(x + h, y, t).u * at(x + h, y, t).q - at(x - h, y, t).u * at(x - h, y, t).q) / (2 * h), 1e-7);
        EXPECT_NEAR(e.r, -(at(x, y, t + h).u - at(x, y, t - h).u) / (2 * h), 1e-7);
        EXPECT_NEAR(e.z, (at(x + h, y, t).r - at(x - h, y, t).r) / (2 * h), 1e-7);
    }
}

TEST(Mms, SourceMatchesNumericalDerivation)
{
    const Scenario sc = make_scenario(ScenarioKind::mms);
    const auto u      = [](double x, double y, double t) { return std::exp(-t) * std::sin(x) * std::sin(y); };
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> X(0.0, 2 * std::numbers::pi), T(0.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        const double x = X(gen), y = X(gen), t = T(gen);
        EXPECT_NEAR(mms_source(x, y, t, sc.kappa), source_oracle(u, sc.kappa, sc.domain.x_right, x, y, t), 1e-6)
            << "at (" << x << ", " << y << ", " << t << ")";
    }
}

TEST(Mms, SourceKappaDependenceAndDecay)
{
    for (double x : {0.4, 2.2})
        for (double y : {1.0, 4.0}) {
            const double t = 0.3;
            EXPECT_NEAR(mms_source(x, y, t, -0.5) - mms_source(x, y, t, 0.0), std::exp(-t) * std::cos(x) * std::sin(y),
                        1e-14);
            EXPECT_LT(std::abs(mms_source(x, y, 40.0, -0.5)), 1e-15);
        }
}

TEST(Peakon, FieldIdentities)
{
    const Scenario sc = make_scenario(ScenarioKind::peakon);
    for (double x : {-0.8, -0.1, 0.5})
        for (double y : {-0.6, 0.3}) {
            const double t = 0.25;
            const auto e   = exact_fields(sc, x, y, t);
            const double xi = x + y - t;
            EXPECT_NEAR(e.u, std::exp(-std::abs(xi)), 1e-15);
            EXPECT_NEAR(e.q, -std::copysign(1.0, xi) * e.u, 1e-15);
            EXPECT_NEAR(e.s, e.q, 1e-15);
            EXPECT_NEAR(e.p, 2 * e.u * e.u, 1e-15);
            EXPECT_NEAR(e.z, sc.c * e.u, 1e-15);
            EXPECT_NEAR(exact_fields(sc, sc.domain.x_right, y, t).v, 0.0, 1e-15);
        }
}

TEST(Peakon, AuxiliaryFieldsAwayFromTheCrest)
{
    const Scenario sc = make_scenario(ScenarioKind::peakon);
    const double h    = 1e-5;
    const auto at     = [&](double xx, double yy, double tt) { return exact_fields(sc, xx, yy, tt); };
    for (auto [x, y, t] : {std::tuple{-0.7, -0.5, 0.1}, std::tuple{0.6, 0.2, 0.3}, std::tuple{0.9, -0.9, 0.5}}) {
        const auto e = at(x, y, t);
        EXPECT_NEAR(e.q, (at(x + h, y, t).u - at(x - h, y, t).u) / (2 * h), 1e-8);
        EXPECT_NEAR(e.s, (at(x + h, y, t).v - at(x - h, y, t).v) / (2 * h), 1e-8);
        EXPECT_NEAR(e.r, -(at(x, y, t + h).u - at(x, y, t - h).u) / (2 * h), 1e-8);
        EXPECT_NEAR(e.z, (at(x + h, y, t).r - at(x - h, y, t).r) / (2 * h), 1e-8);
        EXPECT_NEAR(e.p, (at(x + h, y, t).u * at(x + h, y, t).q - at(x - h, y, t).u * at(x - h, y, t).q) / (2 * h), 1e-8);
    }
}

TEST(Peakon, AnchorSourceClosesTheEquation)
{
    // With kappa = -1/2 the travelling wave solves the problem whose v is
    // anchored at infinity; anchoring at x_R leaves u_x(x_R, y, t).
    const Scenario sc = make_scenario(ScenarioKind::peakon);
    const auto u      = [&](double x, double y, double t) { return exact_fields(sc, x, y, t).u; };
    // Points right of the crest: the oracle integrates u_yy over (x, x_R) with
    // a smooth rule, which would miss the kink.
    for (auto [x, y, t] : {std::tuple{0.6, 0.2, 0.3}, std::tuple{0.3, 0.5, 0.2}, std::tuple{0.9, -0.5, 0.1}}) {
        const double oracle = source_oracle(u, sc.kappa, sc.domain.x_right, x, y, t);
        EXPECT_NEAR(peakon_anchor_source(sc, y, t), oracle, 1e-5);
        EXPECT_NEAR(source_value(sc, x, y, t), exact_fields(sc, sc.domain.x_right, y, t).q, 1e-15);
    }
    Scenario off            = sc;
    off.peakon_anchor_source = false;
    EXPECT_EQ(source_value(off, 0.1, 0.1, 0.1), 0.0);
}

TEST(EnergyBump, VanishesOnTheBoundary)
{
    const Scenario sc = make_scenario(ScenarioKind::energy_decay);
    for (double s : {-1.0, -0.3, 0.5, 1.0}) {
        EXPECT_NEAR(initial_value(sc, -1.0, s), 0.0, 1e-15);
        EXPECT_NEAR(initial_value(sc, 1.0, s), 0.0, 1e-15);
        EXPECT_NEAR(initial_value(sc, s, -1.0), 0.0, 1e-15);
        EXPECT_NEAR(initial_value(sc, s, 1.0), 0.0, 1e-15);
    }
    EXPECT_DOUBLE_EQ(initial_value(sc, 0.0, 0.0), 1.0);
    EXPECT_EQ(source_value(sc, 0.2, 0.2, 0.5), 0.0);
}

TEST(BoundaryData, DatumForFaces)
{
    EXPECT_EQ(datum_for(TraceFamily::uv, BoundaryTag::left), BoundaryDatum::u_D);
    EXPECT_EQ(datum_for(TraceFamily::qv, BoundaryTag::right), BoundaryDatum::q_R);
    EXPECT_EQ(datum_for(TraceFamily::vr, BoundaryTag::right), BoundaryDatum::v_R);
    EXPECT_EQ(datum_for(TraceFamily::ub, BoundaryTag::bottom), BoundaryDatum::u_D);
    EXPECT_EQ(datum_for(TraceFamily::vt, BoundaryTag::top), BoundaryDatum::v_T);
    EXPECT_THROW(datum_for(TraceFamily::vr, BoundaryTag::left), std::invalid_argument);
    EXPECT_THROW(datum_for(TraceFamily::uv, BoundaryTag::bottom), std::invalid_argument);
    EXPECT_THROW(datum_for(TraceFamily::ub, BoundaryTag::interior), std::invalid_argument);
}

TEST(BoundaryData, ProjectsTheExactTrace)
{
    const Scenario sc = make_scenario(ScenarioKind::mms);
    const auto mesh   = build_mesh(sc.domain, 4, 4);
    const TraceLayout layout(mesh, 2);
    TraceSet ts(layout);
    apply_boundary_data(sc, mesh, layout, 2, 0.5, ts);
    const int id   = mesh.vertical_face_id(4, 1);
    const Vector q = face_project([&](double x, double y) { return exact_fields(sc, x, y, 0.5).q; }, mesh,
                                  mesh.vertical_face(4, 1), 2);
    EXPECT_LT((ts[TraceFamily::qv].col(id) - q).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(ts[TraceFamily::vr].col(id).cwiseAbs().maxCoeff(), 1e-15); // v vanishes at x_R
    // interior faces are left alone
    EXPECT_EQ(ts[TraceFamily::uv].col(mesh.vertical_face_id(2, 1)).cwiseAbs().maxCoeff(), 0.0);
}

#include <random>

#include <gtest/gtest.h>

#include "hdgkp/trace_set.hpp"

using namespace hdgkp;

TEST(TraceStatus, BoundaryRules)
{
    using F = TraceFamily;
    using T = BoundaryTag;
    EXPECT_EQ(trace_status(F::uv, T::left), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::uv, T::right), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::qv, T::left), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::qv, T::right), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::vr, T::left), TraceStatus::unused);
    EXPECT_EQ(trace_status(F::vr, T::right), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::ub, T::bottom), TraceStatus::dirichlet);
    EXPECT_EQ(trace_status(F::ub, T::top), TraceStatus::unused);
    EXPECT_EQ(trace_status(F::vt, T::bottom), TraceStatus::unused);
    EXPECT_EQ(trace_status(F::vt, T::top), TraceStatus::dirichlet);
    for (int f = 0; f < trace_family_count; ++f)
        EXPECT_EQ(trace_status(F(f), T::interior), TraceStatus::free);
}

TEST(TraceLayout, SingleCellHasNoFreeTraces)
{
    const auto mesh = build_mesh({0, 1, 0, 1}, 1, 1);
    for (int k = 1; k <= 3; ++k) {
        const TraceLayout layout(mesh, k);
        EXPECT_EQ(layout.dof_count(), 0);
        EXPECT_EQ(layout.count(TraceFamily::vr, TraceStatus::unused), 1);
        EXPECT_EQ(layout.count(TraceFamily::vr, TraceStatus::dirichlet), 1);
    }
}

TEST(TraceLayout, TwoCellsShareThreeVerticalTraces)
{
    const auto mesh = build_mesh({0, 2, 0, 1}, 2, 1);
    for (int k = 1; k <= 3; ++k) {
        const TraceLayout layout(mesh, k);
        EXPECT_EQ(layout.dof_count(), 3 * (k + 1));
        EXPECT_EQ(layout.offset(TraceFamily::uv, 1), 0);
        EXPECT_EQ(layout.offset(TraceFamily::qv, 1), k + 1);
        EXPECT_EQ(layout.offset(TraceFamily::vr, 1), 2 * (k + 1));
        EXPECT_EQ(layout.offset(TraceFamily::uv, 0), -1);
    }
}

TEST(TraceLayout, CountsOnSquareMesh)
{
    const int N     = 4;
    const auto mesh = build_mesh({0, 1, 0, 1}, N, N);
    const TraceLayout layout(mesh, 2);
    const int interior_faces = (N - 1) * N;
    EXPECT_EQ(layout.free_face_count(), 5 * interior_faces);
    EXPECT_EQ(layout.count(TraceFamily::ub, TraceStatus::dirichlet), N);
    EXPECT_EQ(layout.count(TraceFamily::vt, TraceStatus::unused), N);
    EXPECT_EQ(layout.tag(TraceFamily::vt, mesh.horizontal_face_id(2, N)), BoundaryTag::top);
}

TEST(TraceSet, GatherScatterRoundTrip)
{
    const auto mesh = build_mesh({0, 1, 0, 1}, 3, 2);
    const TraceLayout layout(mesh, 2);
    std::mt19937 gen(1);
    std::normal_distribution<double> N01;
    Vector v(layout.dof_count());
    for (auto& x : v)
        x = N01(gen);
    TraceSet ts(layout);
    ts[TraceFamily::uv].col(0).setConstant(5.0); // Dirichlet face, untouched
    ts.scatter(layout, v);
    EXPECT_EQ((ts.gather(layout) - v).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ts[TraceFamily::uv](0, 0), 5.0);
    ts.add_free(layout, v, -1.0);
    EXPECT_EQ(ts.gather(layout).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ts[TraceFamily::uv](1, 0), 5.0);
}

TEST(ElementFaces, SlotAndEquationRows)
{
    const auto mesh  = build_mesh({0, 1, 0, 1}, 3, 3);
    const auto slots = element_slot_faces(mesh, 1, 2);
    EXPECT_EQ(slots[slot_u_left], std::make_pair(TraceFamily::uv, mesh.vertical_face_id(1, 2)));
    EXPECT_EQ(slots[slot_v_right], std::make_pair(TraceFamily::vr, mesh.vertical_face_id(2, 2)));
    EXPECT_EQ(slots[slot_u_bottom], std::make_pair(TraceFamily::ub, mesh.horizontal_face_id(1, 2)));
    EXPECT_EQ(slots[slot_v_top], std::make_pair(TraceFamily::vt, mesh.horizontal_face_id(1, 3)));
    const auto eqs = element_equation_faces(mesh, 1, 2);
    EXPECT_EQ(eqs[eq_v_left], std::make_pair(TraceFamily::vr, mesh.vertical_face_id(1, 2)));
    EXPECT_EQ(eqs[eq_v_bottom], std::make_pair(TraceFamily::vt, mesh.horizontal_face_id(1, 2)));
    EXPECT_EQ(eqs[eq_u_top], std::make_pair(TraceFamily::ub, mesh.horizontal_face_id(1, 3)));
    EXPECT_TRUE(has_identity_term(TraceFamily::vr));
    EXPECT_FALSE(has_identity_term(TraceFamily::uv));
}

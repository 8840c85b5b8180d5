#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hdgkp/basis.hpp"
#include "hdgkp/mesh.hpp"
#include "hdgkp/projection.hpp"
#include "hdgkp/trace_set.hpp"

namespace hdgkp {

enum class ScenarioKind { mms, peakon, energy_decay };

inline const char* to_string(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::mms: return "mms";
    case ScenarioKind::peakon: return "peakon";
    case ScenarioKind::energy_decay: return "energy";
    }
    return "?";
}

inline ScenarioKind parse_scenario_kind(const std::string& s)
{
    if (s == "mms")
        return ScenarioKind::mms;
    if (s == "peakon")
        return ScenarioKind::peakon;
    if (s == "energy" || s == "energy_decay")
        return ScenarioKind::energy_decay;
    throw std::invalid_argument("unknown scenario '" + s + "' (expected mms, peakon or energy)");
}

struct Scenario
{
    ScenarioKind kind = ScenarioKind::mms;
    Domain2D domain;
    double kappa   = -0.5;
    double c       = 1.0; // peakon speed
    double T_final = 1.0;
    // Adds u_x(x_R, y, t) to the r-equation so that the travelling wave, whose
    // nonlocal term is anchored at x = +inf, also solves the problem anchored
    // at x_R. Without it the peakon data are still exact but the PDE is not.
    bool peakon_anchor_source = true;

    bool has_exact() const { return kind != ScenarioKind::energy_decay; }
    bool has_source() const { return kind == ScenarioKind::mms || (kind == ScenarioKind::peakon && peakon_anchor_source); }
};

inline Scenario make_scenario(ScenarioKind kind)
{
    Scenario sc;
    sc.kind = kind;
    switch (kind) {
    case ScenarioKind::mms:
        sc.domain = {0.0, 2.0 * std::numbers::pi, 0.0, 2.0 * std::numbers::pi};
        break;
    case ScenarioKind::peakon:
    case ScenarioKind::energy_decay:
        sc.domain = {-1.0, 1.0, -1.0, 1.0};
        break;
    }
    return sc;
}

struct ExactFields
{
    double u = 0, q = 0, p = 0, s = 0, v = 0, z = 0, r = 0;
};

/// Exact u, q = u_x, p = (u q)_x, s = u_y, v (v_x = u_y, v(x_R, y) = 0),
/// r = -u_t and z = r_x. For the peakon p, z, r are the one-sided values
/// away from the crest.
inline ExactFields exact_fields(const Scenario& sc, double x, double y, double t)
{
    ExactFields e;
    switch (sc.kind) {
    case ScenarioKind::mms: {
        const double E = std::exp(-t);
        const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
        e.u = E * sx * sy;
        e.q = E * cx * sy;
        e.s = E * sx * cy;
        e.v = E * cy * (1.0 - cx);
        e.p = E * E * sy * sy * std::cos(2.0 * x);
        e.r = e.u;
        e.z = e.q;
        break;
    }
    case ScenarioKind::peakon: {
        const double c  = sc.c;
        const double xi = x + y - c * t;
        const double sg = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
        e.u = c * std::exp(-std::abs(xi));
        e.q = -sg * e.u;
        e.s = e.q;
        e.v = e.u - c * std::exp(-std::abs(sc.domain.x_right + y - c * t));
        e.p = 2.0 * e.u * e.u;
        e.r = -c * sg * e.u;
        e.z = c * e.u;
        break;
    }
    case ScenarioKind::energy_decay:
        break;
    }
    return e;
}

/// Source added to the r-equation for the manufactured solution
/// u = e^{-t} sin x sin y:
///   S_r = -u_t + u_txx - [f(u)_x - (u u_x)_xx + (u_x^2)_x / 2 + v_y].
inline double mms_source(double x, double y, double t, double kappa)
{
    const double E  = std::exp(-t);
    const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y);
    const double u  = E * sx * sy;
    return 2.0 * u - (2.0 * kappa * E * cx * sy + 6.0 * E * E * sx * cx * sy * sy - E * sy * (1.0 - cx));
}

/// u_x(x_R, y, t) for the travelling peakon.
inline double peakon_anchor_source(const Scenario& sc, double y, double t)
{
    const double xi = sc.domain.x_right + y - sc.c * t;
    const double sg = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
    return -sg * sc.c * std::exp(-std::abs(xi));
}

inline double source_value(const Scenario& sc, double x, double y, double t)
{
    switch (sc.kind) {
    case ScenarioKind::mms: return mms_source(x, y, t, sc.kappa);
    case ScenarioKind::peakon: return sc.peakon_anchor_source ? peakon_anchor_source(sc, y, t) : 0.0;
    case ScenarioKind::energy_decay: return 0.0;
    }
    return 0.0;
}

/// Squared-cosine bump on (-1,1)^2; it and its x-derivative vanish on the
/// boundary.
inline double energy_decay_initial(double x, double y)
{
    const double cx = std::cos(0.5 * std::numbers::pi * x);
    const double cy = std::cos(0.5 * std::numbers::pi * y);
    return cx * cx * cy * cy;
}

inline double initial_value(const Scenario& sc, double x, double y)
{
    if (sc.kind == ScenarioKind::energy_decay)
        return energy_decay_initial(x, y);
    return exact_fields(sc, x, y, 0.0).u;
}

enum class BoundaryDatum { u_D, q_L, q_R, v_R, v_T };

inline const char* to_string(BoundaryDatum d)
{
    switch (d) {
    case BoundaryDatum::u_D: return "u_D";
    case BoundaryDatum::q_L: return "q_L";
    case BoundaryDatum::q_R: return "q_R";
    case BoundaryDatum::v_R: return "v_R";
    case BoundaryDatum::v_T: return "v_T";
    }
    return "?";
}

inline double boundary_datum(const Scenario& sc, BoundaryDatum d, double x, double y, double t)
{
    if (sc.kind == ScenarioKind::energy_decay)
        return 0.0;
    const ExactFields e = exact_fields(sc, x, y, t);
    switch (d) {
    case BoundaryDatum::u_D: return e.u;
    case BoundaryDatum::q_L:
    case BoundaryDatum::q_R: return e.q;
    case BoundaryDatum::v_R:
    case BoundaryDatum::v_T: return e.v;
    }
    return 0.0;
}

/// The datum carried by a Dirichlet face trace.
inline BoundaryDatum datum_for(TraceFamily family, BoundaryTag tag)
{
    const auto fail = [&]() -> BoundaryDatum {
        throw std::invalid_argument(std::string("no boundary datum for ") + to_string(family) + " on " +
                                    to_string(tag) + " face");
    };
    switch (family) {
    case TraceFamily::uv:
        if (tag == BoundaryTag::left || tag == BoundaryTag::right)
            return BoundaryDatum::u_D;
        return fail();
    case TraceFamily::qv:
        if (tag == BoundaryTag::left)
            return BoundaryDatum::q_L;
        if (tag == BoundaryTag::right)
            return BoundaryDatum::q_R;
        return fail();
    case TraceFamily::vr:
        if (tag == BoundaryTag::right)
            return BoundaryDatum::v_R;
        return fail();
    case TraceFamily::ub:
        if (tag == BoundaryTag::bottom)
            return BoundaryDatum::u_D;
        return fail();
    case TraceFamily::vt:
        if (tag == BoundaryTag::top)
            return BoundaryDatum::v_T;
        return fail();
    }
    return fail();
}

/// Face L2 projection of the boundary datum carried by (family, face).
inline Vector boundary_values(const Scenario& sc, const CartesianMesh& mesh, int k, TraceFamily family, int face_id,
                              double t)
{
    const bool vert   = is_vertical_family(family);
    const Face face   = vert ? mesh.vertical_face(face_id % (mesh.nx() + 1), face_id / (mesh.nx() + 1))
                             : mesh.horizontal_face(face_id % mesh.nx(), face_id / mesh.nx());
    const auto datum  = datum_for(family, face.tag);
    // The peakon kink needs more points than the solve rule.
    const std::size_t n_points = sc.kind == ScenarioKind::peakon ? 4 * (k + 1) + 8 : 0;
    return face_project([&](double x, double y) { return boundary_datum(sc, datum, x, y, t); }, mesh, face, k,
                        n_points);
}

/// Writes the projected boundary data at time t into every Dirichlet face of
/// the trace set.
inline void apply_boundary_data(const Scenario& sc, const CartesianMesh& mesh, const TraceLayout& layout, int k,
                                double t, TraceSet& traces)
{
    for (int f = 0; f < trace_family_count; ++f) {
        const auto fam = TraceFamily(f);
        for (int id = 0; id < layout.face_count(fam); ++id)
            if (layout.status(fam, id) == TraceStatus::dirichlet)
                traces[fam].col(id) = boundary_values(sc, mesh, k, fam, id, t);
    }
}

} // namespace hdgkp

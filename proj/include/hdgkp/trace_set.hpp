#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hdgkp/basis.hpp"
#include "hdgkp/forms.hpp"
#include "hdgkp/mesh.hpp"

namespace hdgkp {

/// Trace unknowns: u_hat and q_hat on vertical faces, the upwind v_hat on
/// vertical faces (taken from the right), and on horizontal faces the upwind
/// u_hat (from below) and v_hat (from above).
enum class TraceFamily : int { uv = 0, qv, vr, ub, vt };
inline constexpr int trace_family_count = 5;

enum class TraceStatus { free, dirichlet, unused };

inline const char* to_string(TraceFamily f)
{
    switch (f) {
    case TraceFamily::uv: return "u_hat^V";
    case TraceFamily::qv: return "q_hat^V";
    case TraceFamily::vr: return "v_hat^R";
    case TraceFamily::ub: return "u_hat^B";
    case TraceFamily::vt: return "v_hat^T";
    }
    return "?";
}

inline bool is_vertical_family(TraceFamily f)
{
    return f == TraceFamily::uv || f == TraceFamily::qv || f == TraceFamily::vr;
}

inline TraceStatus trace_status(TraceFamily f, BoundaryTag tag)
{
    if (tag == BoundaryTag::interior)
        return TraceStatus::free;
    switch (f) {
    case TraceFamily::uv:
    case TraceFamily::qv: return TraceStatus::dirichlet;
    case TraceFamily::vr: return tag == BoundaryTag::right ? TraceStatus::dirichlet : TraceStatus::unused;
    case TraceFamily::ub: return tag == BoundaryTag::bottom ? TraceStatus::dirichlet : TraceStatus::unused;
    case TraceFamily::vt: return tag == BoundaryTag::top ? TraceStatus::dirichlet : TraceStatus::unused;
    }
    return TraceStatus::unused;
}

/// Numbering of the free trace unknowns. Free face traces are numbered family
/// by family, faces in id order; each contributes k+1 consecutive dofs.
class TraceLayout
{
public:
    TraceLayout() = default;

    TraceLayout(const CartesianMesh& mesh, int k)
        : nf_(k + 1)
    {
        int next = 0;
        for (int f = 0; f < trace_family_count; ++f) {
            const auto fam = TraceFamily(f);
            const bool vert = is_vertical_family(fam);
            const int count = vert ? mesh.vertical_face_count() : mesh.horizontal_face_count();
            status_[f].resize(count);
            index_[f].assign(count, -1);
            tags_[f].resize(count);
            for (int id = 0; id < count; ++id) {
                const Face face = vert ? mesh.vertical_face(id % (mesh.nx() + 1), id / (mesh.nx() + 1))
                                       : mesh.horizontal_face(id % mesh.nx(), id / mesh.nx());
                tags_[f][id]   = face.tag;
                status_[f][id] = trace_status(fam, face.tag);
                if (status_[f][id] == TraceStatus::free)
                    index_[f][id] = next++;
            }
        }
        free_faces_ = next;
    }

    int face_dofs() const { return nf_; }
    int face_count(TraceFamily f) const { return static_cast<int>(status_[int(f)].size()); }
    int free_face_count() const { return free_faces_; }
    int dof_count() const { return free_faces_ * nf_; }

    TraceStatus status(TraceFamily f, int face_id) const { return status_[int(f)][face_id]; }
    BoundaryTag tag(TraceFamily f, int face_id) const { return tags_[int(f)][face_id]; }

    /// First dof of a free face trace, -1 otherwise.
    int offset(TraceFamily f, int face_id) const
    {
        const int idx = index_[int(f)][face_id];
        return idx < 0 ? -1 : idx * nf_;
    }

    int count(TraceFamily f, TraceStatus s) const
    {
        int c = 0;
        for (auto v : status_[int(f)])
            c += v == s;
        return c;
    }

private:
    int nf_ = 0;
    int free_faces_ = 0;
    std::array<std::vector<TraceStatus>, trace_family_count> status_;
    std::array<std::vector<int>, trace_family_count> index_;
    std::array<std::vector<BoundaryTag>, trace_family_count> tags_;
};

/// Values of every trace family on every face (free, Dirichlet and unused
/// alike); column `id` holds the face coefficients.
struct TraceSet
{
    std::array<Matrix, trace_family_count> values;

    TraceSet() = default;
    TraceSet(const TraceLayout& layout)
    {
        for (int f = 0; f < trace_family_count; ++f)
            values[f] = Matrix::Zero(layout.face_dofs(), layout.face_count(TraceFamily(f)));
    }

    Matrix& operator[](TraceFamily f) { return values[int(f)]; }
    const Matrix& operator[](TraceFamily f) const { return values[int(f)]; }

    /// Free values flattened in layout order.
    Vector gather(const TraceLayout& layout) const
    {
        Vector out(layout.dof_count());
        for (int f = 0; f < trace_family_count; ++f)
            for (int id = 0; id < layout.face_count(TraceFamily(f)); ++id) {
                const int off = layout.offset(TraceFamily(f), id);
                if (off >= 0)
                    out.segment(off, layout.face_dofs()) = values[f].col(id);
            }
        return out;
    }

    void scatter(const TraceLayout& layout, const Vector& free_values)
    {
        for (int f = 0; f < trace_family_count; ++f)
            for (int id = 0; id < layout.face_count(TraceFamily(f)); ++id) {
                const int off = layout.offset(TraceFamily(f), id);
                if (off >= 0)
                    values[f].col(id) = free_values.segment(off, layout.face_dofs());
            }
    }

    void add_free(const TraceLayout& layout, const Vector& delta, double scale = 1.0)
    {
        for (int f = 0; f < trace_family_count; ++f)
            for (int id = 0; id < layout.face_count(TraceFamily(f)); ++id) {
                const int off = layout.offset(TraceFamily(f), id);
                if (off >= 0)
                    values[f].col(id) += scale * delta.segment(off, layout.face_dofs());
            }
    }
};

/// Family and face id behind each trace slot of element (i, j).
inline std::array<std::pair<TraceFamily, int>, slot_count> element_slot_faces(const CartesianMesh& mesh, int i,
                                                                               int j)
{
    const int vl = mesh.vertical_face_id(i, j);
    const int vr = mesh.vertical_face_id(i + 1, j);
    const int hb = mesh.horizontal_face_id(i, j);
    const int ht = mesh.horizontal_face_id(i, j + 1);
    return {{
        {TraceFamily::uv, vl},
        {TraceFamily::qv, vl},
        {TraceFamily::uv, vr},
        {TraceFamily::qv, vr},
        {TraceFamily::vr, vr},
        {TraceFamily::ub, hb},
        {TraceFamily::vt, ht},
    }};
}

/// Row (family, face id) of the global system receiving each transmission
/// contribution of element (i, j). The u_hat q_hat flux balance on a vertical
/// face is the u_hat^V row, the z_hat + f_hat - p_hat balance the q_hat^V row;
/// the upwind conditions are the rows of the unknown they define.
inline std::array<std::pair<TraceFamily, int>, eq_count> element_equation_faces(const CartesianMesh& mesh, int i,
                                                                                 int j)
{
    const int vl = mesh.vertical_face_id(i, j);
    const int vr = mesh.vertical_face_id(i + 1, j);
    const int hb = mesh.horizontal_face_id(i, j);
    const int ht = mesh.horizontal_face_id(i, j + 1);
    return {{
        {TraceFamily::uv, vl},
        {TraceFamily::qv, vl},
        {TraceFamily::uv, vr},
        {TraceFamily::qv, vr},
        {TraceFamily::vr, vl},
        {TraceFamily::vt, hb},
        {TraceFamily::ub, ht},
    }};
}

/// True for the families whose equation carries the identity term
/// (lambda, mu)_F from the trace itself.
inline bool has_identity_term(TraceFamily f)
{
    return f == TraceFamily::vr || f == TraceFamily::ub || f == TraceFamily::vt;
}

} // namespace hdgkp

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "forms.hpp"
#include "systems.hpp"
#include "weakcalc.hpp"

namespace wgstokes
{

/// Interior-velocity condensation of one element. The local unknowns are
/// split into the interior block u0 and the retained block r = (ub, p), in
/// the local layout of LocalDims followed by the pressure coefficients.
class CondensedElement
{
public:
    CondensedElement() = default;

    CondensedElement(const LocalForms& lf, const LocalDims& d, Eigen::VectorXd load) : m_load(std::move(load))
    {
        const auto ni = Eigen::Index(d.interior()), nb = Eigen::Index(d.boundary()), np = Eigen::Index(d.pressure());
        const Eigen::MatrixXd K = detail::saddle_block(lf);
        const Eigen::MatrixXd A00 = K.topLeftCorner(ni, ni);
        m_llt.compute(A00);
        if (m_llt.info() != Eigen::Success)
            throw std::runtime_error("CondensedElement: interior block is not positive definite");
        m_K0r = K.block(0, ni, ni, nb + np);
        m_Krr = K.bottomRightCorner(nb + np, nb + np);
        m_map = -m_llt.solve(m_K0r);
        m_offset = m_llt.solve(m_load);
        m_schur = m_Krr + m_K0r.transpose() * m_map;
        m_schur = 0.5 * (m_schur + m_schur.transpose()).eval();
        m_rhs = -m_K0r.transpose() * m_offset;
    }

    /// u0 = D(r): interior velocity solving the local problem against all
    /// interior test functions. With `with_load` false the load is dropped.
    Eigen::VectorXd lift(const Eigen::VectorXd& r, bool with_load = true) const
    {
        Eigen::VectorXd u0 = m_map * r;
        if (with_load)
            u0 += m_offset;
        return u0;
    }

    const Eigen::VectorXd& load() const { return m_load; }
    const Eigen::MatrixXd& coupling() const { return m_K0r; }
    /// Recovery map u0 = matrix * r + offset.
    const Eigen::MatrixXd& recovery_matrix() const { return m_map; }
    const Eigen::VectorXd& recovery_offset() const { return m_offset; }
    /// K_rr - K_r0 A00^{-1} K_0r.
    const Eigen::MatrixXd& schur() const { return m_schur; }
    /// -K_r0 A00^{-1} F.
    const Eigen::VectorXd& condensed_load() const { return m_rhs; }

private:
    Eigen::LLT<Eigen::MatrixXd> m_llt;
    Eigen::MatrixXd             m_K0r, m_Krr, m_map, m_schur;
    Eigen::VectorXd             m_load, m_offset, m_rhs;
};

/// Condensed elements for a whole mesh and one load f.
class Condenser
{
public:
    Condenser(const FormCache& forms, const VectorField& f) : m_forms(&forms)
    {
        const auto& space = forms.space();
        m_elements.reserve(forms.size());
        for (std::size_t t = 0; t < forms.size(); ++t)
            m_elements.emplace_back(forms[t], space.dims(), element_load(space, t, f));
    }

    /// Zero load.
    explicit Condenser(const FormCache& forms) : m_forms(&forms)
    {
        const auto& d = forms.space().dims();
        m_elements.reserve(forms.size());
        for (std::size_t t = 0; t < forms.size(); ++t)
            m_elements.emplace_back(forms[t], d, Eigen::VectorXd::Zero(Eigen::Index(d.interior())));
    }

    const FormCache& forms() const { return *m_forms; }
    const CondensedElement& operator[](std::size_t t) const { return m_elements.at(t); }
    std::size_t size() const { return m_elements.size(); }

private:
    const FormCache*              m_forms;
    std::vector<CondensedElement> m_elements;
};

namespace detail
{
inline Eigen::VectorXd retained(const LocalDims& d, const std::array<Eigen::VectorXd, 3>& wb, const Eigen::VectorXd& p)
{
    Eigen::VectorXd r(Eigen::Index(d.boundary() + d.pressure()));
    for (std::size_t l = 0; l < 3; ++l)
        r.segment(Eigen::Index(l * d.side()), Eigen::Index(d.side())) = wb[l];
    r.tail(Eigen::Index(d.pressure())) = p;
    return r;
}

inline std::array<Eigen::VectorXd, 3> sides_of(const TriMesh& mesh, std::size_t t, const std::vector<Eigen::VectorXd>& wb)
{
    std::array<Eigen::VectorXd, 3> out;
    for (std::size_t l = 0; l < 3; ++l)
        out[l] = wb.at(mesh.element_edges(t)[l]);
    return out;
}
} // namespace detail

/// D_f(wb; p) on element t.
inline Eigen::VectorXd local_lift(const Condenser& c, std::size_t t, const std::array<Eigen::VectorXd, 3>& wb,
                                  const Eigen::VectorXd& p, bool with_load = true)
{
    return c[t].lift(detail::retained(c.forms().space().dims(), wb, p), with_load);
}

/// L(w; p) on element t: zeta with c_T(v, zeta) = a_T(w, v) - b_T(v, p) for
/// every v = {0, vb}.
inline std::array<Eigen::VectorXd, 3> local_multiplier(const FormCache& forms, std::size_t t, const LocalWeakFunction& w,
                                                       const Eigen::VectorXd& p)
{
    const auto&                    d = forms.space().dims();
    const Eigen::VectorXd          r = forms[t].A * w.flat() - forms[t].B * p;
    std::array<Eigen::VectorXd, 3> out;
    for (std::size_t l = 0; l < 3; ++l)
        out[l] = r.segment(Eigen::Index(d.side_offset(l)), Eigen::Index(d.side()));
    return out;
}

/// S_f(wb; p): similarity of the local multipliers of {D_f(wb; p), wb} on
/// interior edges, zero on boundary edges. `wb` is single-valued, one
/// coefficient vector per edge; `p` one vector per element.
inline std::vector<Eigen::VectorXd> schur_operator(const Condenser& c, const std::vector<Eigen::VectorXd>& wb,
                                                   const std::vector<Eigen::VectorXd>& p, bool with_load = true)
{
    const auto& forms = c.forms();
    const auto& mesh = forms.space().mesh();
    const auto& d = forms.space().dims();
    if (wb.size() != mesh.num_edges() || p.size() != mesh.num_elements())
        throw std::invalid_argument("schur_operator: data does not match the mesh");

    SideField zeta = SideField::zero(mesh, d.side());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        LocalWeakFunction w;
        w.vb = detail::sides_of(mesh, t, wb);
        w.v0 = local_lift(c, t, w.vb, p[t], with_load);
        const auto z = local_multiplier(forms, t, w, p[t]);
        for (std::size_t l = 0; l < 3; ++l)
            zeta.at(t, l) = z[l];
    }
    std::vector<Eigen::VectorXd> out(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        out[e] = similarity(mesh, zeta, e);
    return out;
}

/// Reduced system in (ub, p) together with the element condensations used
/// to build it.
struct ReducedSystem
{
    SaddleSystem system;
    Condenser    condenser;
};

/// Condenses the interior velocity out of the weak Galerkin system.
inline ReducedSystem build_reduced(const FormCache& forms, const VectorField& f, const VectorField& g,
                                   AssemblyOptions opts = {})
{
    const auto& space = forms.space();
    const auto& mesh = space.mesh();
    const auto& d = space.dims();

    ReducedSystem red{SaddleSystem{SparseMatrix(), Eigen::VectorXd(),
                                   DofLayout(Scheme::reduced, mesh, d, opts.mean_constraint), {}},
                      Condenser(forms, f)};
    auto& sys = red.system;
    sys.rhs = Eigen::VectorXd::Zero(Eigen::Index(sys.layout.size()));

    std::vector<Triplet> trips;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const auto                     all = sys.layout.element_dofs(t);
        const std::vector<std::size_t> dofs(all.begin() + std::ptrdiff_t(d.interior()), all.end());
        const auto&                    ce = red.condenser[t];
        detail::scatter_element(trips, ce.schur(), dofs);
        for (std::size_t i = 0; i < dofs.size(); ++i)
            sys.rhs(Eigen::Index(dofs[i])) += ce.condensed_load()(Eigen::Index(i));
    }
    detail::append_mean_row(trips, space, sys.layout);

    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        if (mesh.is_boundary(e))
        {
            const Eigen::VectorXd gb = project_edge(space, e, g);
            for (std::size_t i = 0; i < d.side(); ++i)
                sys.fixed_values.emplace_back(sys.layout.velocity_edge(e, i), gb(Eigen::Index(i)));
        }
    detail::finalize(sys, trips);
    return red;
}

/// Rebuilds the full weak Galerkin solution from a reduced solution vector.
inline StokesSolution recover_full(const ReducedSystem& red, const Eigen::VectorXd& x)
{
    const auto&    layout = red.system.layout;
    const auto&    mesh = layout.mesh();
    const auto&    d = layout.dims();
    StokesSolution out;
    out.interior.resize(mesh.num_elements());
    out.pressure.resize(mesh.num_elements());
    out.sides = SideField::zero(mesh, d.side());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        out.pressure[t] = x.segment(Eigen::Index(layout.pressure(t, 0)), Eigen::Index(d.pressure()));
        std::array<Eigen::VectorXd, 3> wb;
        for (std::size_t l = 0; l < 3; ++l)
        {
            wb[l] = x.segment(Eigen::Index(layout.velocity_side(t, l, 0)), Eigen::Index(d.side()));
            out.sides.at(t, l) = wb[l];
        }
        out.interior[t] = red.condenser[t].lift(detail::retained(d, wb, out.pressure[t]));
    }
    return out;
}

inline StokesSolution solve(const ReducedSystem& red)
{
    const auto res = solve_saddle(red.system);
    auto        out = recover_full(red, res.x);
    out.residual = res.residual;
    return out;
}

} // namespace wgstokes

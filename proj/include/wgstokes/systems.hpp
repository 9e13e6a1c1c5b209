#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "forms.hpp"
#include "weakcalc.hpp"

namespace wgstokes
{

enum class Scheme
{
    wg,     ///< single-valued edge velocity
    hwg,    ///< per-side edge velocity plus interior-edge multipliers
    reduced ///< edge velocity and pressure only (interior velocity condensed)
};

inline const char* to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::wg: return "wg";
    case Scheme::hwg: return "hwg";
    case Scheme::reduced: return "schur";
    }
    return "?";
}

/// Global numbering of the unknowns of one scheme. Blocks are stored in the
/// order interior velocity, edge velocity, pressure, multiplier, followed by
/// the optional zero-mean constraint row.
class DofLayout
{
public:
    static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    DofLayout(Scheme scheme, const TriMesh& mesh, const LocalDims& dims, bool mean_constraint = true)
      : m_scheme(scheme), m_dims(dims), m_mesh(&mesh)
    {
        const std::size_t nt = mesh.num_elements(), ne = mesh.num_edges();
        m_n_interior = scheme == Scheme::reduced ? 0 : nt * dims.interior();
        m_n_edge = scheme == Scheme::hwg ? 3 * nt * dims.side() : ne * dims.side();
        m_n_pressure = nt * dims.pressure();
        m_n_multiplier = scheme == Scheme::hwg ? ne * dims.side() : 0;

        m_edge_offset = m_n_interior;
        m_pressure_offset = m_edge_offset + m_n_edge;
        m_multiplier_offset = m_pressure_offset + m_n_pressure;
        m_mean_row = mean_constraint ? m_multiplier_offset + m_n_multiplier : none;

        for (std::size_t e = 0; e < ne; ++e)
        {
            if (!mesh.is_boundary(e))
                continue;
            const auto sides = mesh.edge_elements(e);
            const auto l = mesh.local_index(sides.owner, e);
            for (std::size_t i = 0; i < dims.side(); ++i)
                m_fixed.push_back(velocity_side(sides.owner, l, i));
            if (scheme == Scheme::hwg)
                for (std::size_t i = 0; i < dims.side(); ++i)
                    m_fixed.push_back(multiplier(e, i));
        }
    }

    Scheme scheme() const { return m_scheme; }
    const LocalDims& dims() const { return m_dims; }
    const TriMesh& mesh() const { return *m_mesh; }

    std::size_t num_interior() const { return m_n_interior; }
    std::size_t num_edge_velocity() const { return m_n_edge; }
    std::size_t num_pressure() const { return m_n_pressure; }
    std::size_t num_multiplier() const { return m_n_multiplier; }

    /// Unknowns before boundary elimination, not counting the mean constraint.
    std::size_t unknowns() const { return m_n_interior + m_n_edge + m_n_pressure + m_n_multiplier; }
    /// Dimension of the assembled matrix.
    std::size_t size() const { return unknowns() + (has_mean_constraint() ? 1 : 0); }
    /// Unknowns actually solved for (boundary values eliminated).
    std::size_t free_unknowns() const { return unknowns() - m_fixed.size(); }

    bool has_mean_constraint() const { return m_mean_row != none; }
    std::size_t mean_row() const { return m_mean_row; }

    /// Boundary-eliminated dofs: boundary edge velocities, and boundary
    /// multipliers in hybridized mode.
    const std::vector<std::size_t>& fixed() const { return m_fixed; }

    std::size_t interior(std::size_t t, std::size_t i) const
    {
        if (m_scheme == Scheme::reduced)
            throw std::logic_error("reduced layout has no interior velocity");
        return t * m_dims.interior() + i;
    }

    /// Edge velocity dof i of side l of element t.
    std::size_t velocity_side(std::size_t t, std::size_t l, std::size_t i) const
    {
        if (m_scheme == Scheme::hwg)
            return m_edge_offset + (3 * t + l) * m_dims.side() + i;
        return m_edge_offset + m_mesh->element_edges(t)[l] * m_dims.side() + i;
    }

    /// Single-valued edge velocity dof (not available in hybridized mode).
    std::size_t velocity_edge(std::size_t e, std::size_t i) const
    {
        if (m_scheme == Scheme::hwg)
            throw std::logic_error("hybridized layout has per-side edge velocity");
        return m_edge_offset + e * m_dims.side() + i;
    }

    std::size_t pressure(std::size_t t, std::size_t i) const { return m_pressure_offset + t * m_dims.pressure() + i; }

    std::size_t multiplier(std::size_t e, std::size_t i) const
    {
        if (m_scheme != Scheme::hwg)
            throw std::logic_error("only the hybridized layout carries multipliers");
        return m_multiplier_offset + e * m_dims.side() + i;
    }

    /// Global indices of the local velocity layout of element t followed by
    /// its pressure dofs. Interior entries are `none` in reduced mode.
    std::vector<std::size_t> element_dofs(std::size_t t) const
    {
        std::vector<std::size_t> out;
        out.reserve(m_dims.velocity() + m_dims.pressure());
        for (std::size_t i = 0; i < m_dims.interior(); ++i)
            out.push_back(m_scheme == Scheme::reduced ? none : interior(t, i));
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t i = 0; i < m_dims.side(); ++i)
                out.push_back(velocity_side(t, l, i));
        for (std::size_t i = 0; i < m_dims.pressure(); ++i)
            out.push_back(pressure(t, i));
        return out;
    }

    /// Human-readable identity of a global dof.
    std::string describe(std::size_t dof) const
    {
        const auto comp = [](std::size_t i, std::size_t block) {
            return std::string(i / block == 0 ? "x" : "y") + " coefficient " + std::to_string(i % block);
        };
        if (dof == m_mean_row)
            return "zero-mean pressure constraint";
        if (dof < m_edge_offset)
            return "interior velocity of element " + std::to_string(dof / m_dims.interior()) + ", "
                   + comp(dof % m_dims.interior(), m_dims.scalar_k);
        if (dof < m_pressure_offset)
        {
            const std::size_t r = dof - m_edge_offset;
            if (m_scheme == Scheme::hwg)
                return "edge velocity of element " + std::to_string(r / m_dims.side() / 3) + " side "
                       + std::to_string((r / m_dims.side()) % 3) + ", " + comp(r % m_dims.side(), m_dims.edge);
            return "edge velocity of edge " + std::to_string(r / m_dims.side()) + ", " + comp(r % m_dims.side(), m_dims.edge);
        }
        if (dof < m_multiplier_offset)
        {
            const std::size_t r = dof - m_pressure_offset;
            return "pressure of element " + std::to_string(r / m_dims.pressure()) + ", coefficient "
                   + std::to_string(r % m_dims.pressure());
        }
        if (dof < m_multiplier_offset + m_n_multiplier)
        {
            const std::size_t r = dof - m_multiplier_offset;
            return "multiplier of edge " + std::to_string(r / m_dims.side()) + ", " + comp(r % m_dims.side(), m_dims.edge);
        }
        return "dof " + std::to_string(dof) + " (out of range)";
    }

private:
    Scheme                   m_scheme;
    LocalDims                m_dims;
    const TriMesh*           m_mesh;
    std::size_t              m_n_interior = 0, m_n_edge = 0, m_n_pressure = 0, m_n_multiplier = 0;
    std::size_t              m_edge_offset = 0, m_pressure_offset = 0, m_multiplier_offset = 0;
    std::size_t              m_mean_row = none;
    std::vector<std::size_t> m_fixed;
};

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Symmetric indefinite system with boundary values already eliminated:
/// fixed rows/columns are replaced by identity rows carrying the prescribed
/// value.
struct SaddleSystem
{
    SparseMatrix                               matrix;
    Eigen::VectorXd                            rhs;
    DofLayout                                  layout;
    std::vector<std::pair<std::size_t, double>> fixed_values;
};

struct AssemblyOptions
{
    /// Append the zero-mean pressure constraint. Without it the system is
    /// singular (constant pressure mode).
    bool mean_constraint = true;
};

namespace detail
{
/// Zero-mean row coefficients: integral over T of each pressure basis function.
inline Eigen::VectorXd pressure_means(const WeakSpace& space, std::size_t t)
{
    const auto&     data = space.element(t);
    const auto      nq = Eigen::Index(space.dims().pressure());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nq);
    for (std::size_t q = 0; q < data.rule.size(); ++q)
        out += data.rule.weights[q] * data.basis.eval(data.rule.points[q]).head(nq);
    return out;
}

/// Element block [A, -B; -B^T, 0] scattered through `dofs`; entries mapped
/// to DofLayout::none are skipped.
inline void scatter_element(std::vector<Triplet>& trips, const Eigen::MatrixXd& K, const std::vector<std::size_t>& dofs)
{
    for (Eigen::Index i = 0; i < K.rows(); ++i)
    {
        if (dofs[i] == DofLayout::none)
            continue;
        for (Eigen::Index j = 0; j < K.cols(); ++j)
            if (dofs[j] != DofLayout::none && K(i, j) != 0.0)
                trips.emplace_back(Eigen::Index(dofs[i]), Eigen::Index(dofs[j]), K(i, j));
    }
}

inline Eigen::MatrixXd saddle_block(const LocalForms& lf)
{
    const auto      nv = lf.A.rows(), np = lf.B.cols();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv + np, nv + np);
    K.topLeftCorner(nv, nv) = lf.A;
    K.topRightCorner(nv, np) = -lf.B;
    K.bottomLeftCorner(np, nv) = -lf.B.transpose();
    return K;
}

/// Builds the sparse matrix and eliminates fixed dofs symmetrically.
inline void finalize(SaddleSystem& sys, const std::vector<Triplet>& trips)
{
    const auto n = Eigen::Index(sys.layout.size());
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(trips.begin(), trips.end());

    std::vector<char>   fixed(std::size_t(n), 0);
    Eigen::VectorXd     values = Eigen::VectorXd::Zero(n);
    for (const auto& [dof, v] : sys.fixed_values)
    {
        fixed[dof] = 1;
        values(Eigen::Index(dof)) = v;
    }
    for (Eigen::Index j = 0; j < sys.matrix.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(sys.matrix, j); it; ++it)
            if (fixed[std::size_t(j)] && !fixed[std::size_t(it.row())])
                sys.rhs(it.row()) -= it.value() * values(j);
    sys.matrix.prune([&](Eigen::Index r, Eigen::Index c, double) { return !fixed[std::size_t(r)] && !fixed[std::size_t(c)]; });

    std::vector<Triplet> diag;
    for (const auto& [dof, v] : sys.fixed_values)
    {
        diag.emplace_back(Eigen::Index(dof), Eigen::Index(dof), 1.0);
        sys.rhs(Eigen::Index(dof)) = v;
    }
    SparseMatrix I(n, n);
    I.setFromTriplets(diag.begin(), diag.end());
    sys.matrix += I;
    sys.matrix.makeCompressed();
}

inline void append_mean_row(std::vector<Triplet>& trips, const WeakSpace& space, const DofLayout& layout)
{
    if (!layout.has_mean_constraint())
        return;
    const auto m = Eigen::Index(layout.mean_row());
    for (std::size_t t = 0; t < space.mesh().num_elements(); ++t)
    {
        const Eigen::VectorXd c = pressure_means(space, t);
        for (Eigen::Index i = 0; i < c.size(); ++i)
        {
            if (c(i) == 0.0)
                continue;
            const auto p = Eigen::Index(layout.pressure(t, std::size_t(i)));
            trips.emplace_back(m, p, c(i));
            trips.emplace_back(p, m, c(i));
        }
    }
}
} // namespace detail

/// Full weak Galerkin system: find (u0, ub, p) with ub = Q_b g on the
/// boundary, a(u, v) - b(v, p) = (f, v0) and -b(u, q) = 0.
inline SaddleSystem assemble_wg(const FormCache& forms, const VectorField& f, const VectorField& g,
                                AssemblyOptions opts = {})
{
    const auto& space = forms.space();
    const auto& mesh = space.mesh();
    const auto& d = space.dims();

    SaddleSystem sys{SparseMatrix(), Eigen::VectorXd(), DofLayout(Scheme::wg, mesh, d, opts.mean_constraint), {}};
    sys.rhs = Eigen::VectorXd::Zero(Eigen::Index(sys.layout.size()));

    std::vector<Triplet> trips;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const auto dofs = sys.layout.element_dofs(t);
        detail::scatter_element(trips, detail::saddle_block(forms[t]), dofs);
        const Eigen::VectorXd load = element_load(space, t, f);
        for (std::size_t i = 0; i < d.interior(); ++i)
            sys.rhs(Eigen::Index(dofs[i])) += load(Eigen::Index(i));
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
    return sys;
}

/// Hybridized system: per-side edge velocity, plus one multiplier per
/// interior edge and basis component. The multiplier enters side T1 with
/// sign +1 and side T2 with sign -1, so every admissible multiplier has
/// zero similarity; boundary multipliers are fixed to zero.
inline SaddleSystem assemble_hwg(const FormCache& forms, const VectorField& f, const VectorField& g,
                                 AssemblyOptions opts = {})
{
    const auto& space = forms.space();
    const auto& mesh = space.mesh();
    const auto& d = space.dims();

    SaddleSystem sys{SparseMatrix(), Eigen::VectorXd(), DofLayout(Scheme::hwg, mesh, d, opts.mean_constraint), {}};
    sys.rhs = Eigen::VectorXd::Zero(Eigen::Index(sys.layout.size()));

    std::vector<Triplet> trips;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const auto dofs = sys.layout.element_dofs(t);
        detail::scatter_element(trips, detail::saddle_block(forms[t]), dofs);
        const Eigen::VectorXd load = element_load(space, t, f);
        for (std::size_t i = 0; i < d.interior(); ++i)
            sys.rhs(Eigen::Index(dofs[i])) += load(Eigen::Index(i));

        // -c(v, lambda) and -c(u, mu); C_T is the identity on side blocks
        for (std::size_t l = 0; l < 3; ++l)
        {
            const std::size_t e = mesh.element_edges(t)[l];
            if (mesh.is_boundary(e))
                continue;
            const double sign = mesh.edge_elements(e).owner == t ? 1.0 : -1.0;
            for (std::size_t i = 0; i < d.side(); ++i)
            {
                const auto v = Eigen::Index(sys.layout.velocity_side(t, l, i));
                const auto m = Eigen::Index(sys.layout.multiplier(e, i));
                trips.emplace_back(v, m, -sign);
                trips.emplace_back(m, v, -sign);
            }
        }
    }
    detail::append_mean_row(trips, space, sys.layout);

    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        if (mesh.is_boundary(e))
        {
            const Eigen::VectorXd gb = project_edge(space, e, g);
            const auto            owner = mesh.edge_elements(e).owner;
            const auto            l = mesh.local_index(owner, e);
            for (std::size_t i = 0; i < d.side(); ++i)
            {
                sys.fixed_values.emplace_back(sys.layout.velocity_side(owner, l, i), gb(Eigen::Index(i)));
                sys.fixed_values.emplace_back(sys.layout.multiplier(e, i), 0.0);
            }
        }
    detail::finalize(sys, trips);
    return sys;
}

class SingularSystemError : public std::runtime_error
{
public:
    SingularSystemError(const std::string& what, std::size_t dof) : std::runtime_error(what), m_dof(dof) {}
    std::size_t dof() const { return m_dof; }

private:
    std::size_t m_dof;
};

namespace detail
{
/// SparseLU exposing the diagonal of U (stored in the supernodes of L).
class PivotLU : public Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>
{
public:
    /// Smallest |U(j,j)| and the original column it belongs to.
    std::pair<double, Eigen::Index> smallest_pivot() const
    {
        double       best = std::numeric_limits<double>::infinity();
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < cols(); ++j)
        {
            double diag = 0.0;
            for (SCMatrix::InnerIterator it(m_Lstore, j); it; ++it)
                if (it.row() == j)
                {
                    diag = std::abs(it.value());
                    break;
                }
            if (diag < best)
            {
                best = diag;
                col = j;
            }
        }
        if (col >= 0 && m_perm_c.size())
        {
            const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> inv = m_perm_c.inverse();
            col = inv.indices()(col);
        }
        return {best, col};
    }
};
} // namespace detail

struct LinearSolveResult
{
    Eigen::VectorXd x;
    double          residual = 0; ///< ||b - Ax|| / ||b||, or ||b - Ax|| when b = 0
};

inline constexpr double pivot_tolerance = 1e-12;
inline constexpr double residual_tolerance = 1e-10;

/// Direct sparse LU, factorized once, with iterative refinement per solve.
/// Throws SingularSystemError naming the dof of the offending pivot.
class SparseSolver
{
public:
    SparseSolver(const SparseMatrix& A, const std::function<std::string(std::size_t)>& describe = {}) : m_A(&A)
    {
        m_lu.analyzePattern(A);
        m_lu.factorize(A);
        if (m_lu.info() != Eigen::Success)
            throw SingularSystemError("sparse factorization failed: " + m_lu.lastErrorMessage(), DofLayout::none);

        double scale = 0;
        for (Eigen::Index j = 0; j < A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(A, j); it; ++it)
                scale = std::max(scale, std::abs(it.value()));

        const auto [pivot, col] = m_lu.smallest_pivot();
        if (!(pivot > pivot_tolerance * scale))
        {
            const std::string name = describe ? describe(std::size_t(col)) : "dof " + std::to_string(col);
            throw SingularSystemError("singular system: pivot " + std::to_string(pivot) + " at " + name, std::size_t(col));
        }
    }

    LinearSolveResult solve(const Eigen::VectorXd& b) const
    {
        const auto&       A = *m_A;
        LinearSolveResult out;
        const double      bnorm = b.norm();
        out.x = m_lu.solve(b);
        Eigen::VectorXd r = b - A * out.x;
        for (int it = 0; it < 5 && r.norm() > residual_tolerance * bnorm; ++it)
        {
            out.x += m_lu.solve(r);
            r = b - A * out.x;
        }
        out.residual = bnorm > 0 ? r.norm() / bnorm : r.norm();
        if (!(out.residual <= residual_tolerance) && bnorm > 0)
            throw std::runtime_error("linear solve did not reach residual tolerance: " + std::to_string(out.residual));
        return out;
    }

private:
    const SparseMatrix* m_A;
    detail::PivotLU     m_lu;
};

inline LinearSolveResult solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b,
                                      const std::function<std::string(std::size_t)>& describe = {})
{
    return SparseSolver(A, describe).solve(b);
}

/// Discrete velocity, pressure and (optionally) multiplier, stored per
/// element / per element side regardless of the scheme that produced them.
struct StokesSolution
{
    std::vector<Eigen::VectorXd> interior; ///< u0 per element
    SideField                    sides;    ///< ub per element side
    std::vector<Eigen::VectorXd> pressure; ///< p per element
    std::optional<SideField>     multiplier;
    double                       residual = 0;

    LocalWeakFunction local(std::size_t t) const
    {
        LocalWeakFunction out;
        out.v0 = interior.at(t);
        for (std::size_t l = 0; l < 3; ++l)
            out.vb[l] = sides.at(t, l);
        return out;
    }
};

/// Unpacks a solution vector of a WG or HWG system.
inline StokesSolution unpack(const DofLayout& layout, const Eigen::VectorXd& x)
{
    if (layout.scheme() == Scheme::reduced)
        throw std::logic_error("unpack: reduced systems are recovered by the reduction module");
    const auto&    mesh = layout.mesh();
    const auto&    d = layout.dims();
    StokesSolution out;
    out.interior.resize(mesh.num_elements());
    out.pressure.resize(mesh.num_elements());
    out.sides = SideField::zero(mesh, d.side());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        out.interior[t] = x.segment(Eigen::Index(layout.interior(t, 0)), Eigen::Index(d.interior()));
        out.pressure[t] = x.segment(Eigen::Index(layout.pressure(t, 0)), Eigen::Index(d.pressure()));
        for (std::size_t l = 0; l < 3; ++l)
            out.sides.at(t, l) = x.segment(Eigen::Index(layout.velocity_side(t, l, 0)), Eigen::Index(d.side()));
    }
    if (layout.scheme() == Scheme::hwg)
    {
        SideField lam = SideField::zero(mesh, d.side());
        for (std::size_t t = 0; t < mesh.num_elements(); ++t)
            for (std::size_t l = 0; l < 3; ++l)
            {
                const std::size_t e = mesh.element_edges(t)[l];
                if (mesh.is_boundary(e))
                    continue;
                const double sign = mesh.edge_elements(e).owner == t ? 1.0 : -1.0;
                lam.at(t, l) = sign * x.segment(Eigen::Index(layout.multiplier(e, 0)), Eigen::Index(d.side()));
            }
        out.multiplier = std::move(lam);
    }
    return out;
}

/// Solves a saddle system. With a zero-mean row the border is dense, which
/// ruins the sparse LU fill, so the row is handled separately: one pressure
/// dof is pinned, the kernel vector z of the unbordered matrix is recovered
/// from the border coefficients c (z = c unless multipliers are present),
/// and the border multiplier and the shift along z are restored afterwards.
inline LinearSolveResult solve_saddle(const SaddleSystem& sys)
{
    const auto describe = [&](std::size_t dof) { return sys.layout.describe(dof); };
    if (!sys.layout.has_mean_constraint())
        return solve_linear(sys.matrix, sys.rhs, describe);

    const auto      m = Eigen::Index(sys.layout.mean_row());
    const auto      n = Eigen::Index(sys.layout.unknowns());
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (SparseMatrix::InnerIterator it(sys.matrix, m); it; ++it)
        if (it.row() != m)
            c(it.row()) = it.value();
    if (!(c.squaredNorm() > 0))
        throw SingularSystemError("zero-mean row is empty", std::size_t(m));
    Eigen::Index pin = 0;
    c.cwiseAbs().maxCoeff(&pin);

    std::vector<Triplet> trips;
    trips.reserve(std::size_t(sys.matrix.nonZeros()));
    double scale = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (SparseMatrix::InnerIterator it(sys.matrix, j); it; ++it)
            if (it.row() < n)
            {
                scale = std::max(scale, std::abs(it.value()));
                if (it.row() != pin && j != pin)
                    trips.emplace_back(it.row(), j, it.value());
            }
    trips.emplace_back(pin, pin, 1.0);
    SparseMatrix K(n, n);
    K.setFromTriplets(trips.begin(), trips.end());
    const SparseSolver solver(K, describe);

    // z = c - y with y_pin = 0 and K y = K c
    Eigen::VectorXd Kc = sys.matrix.topLeftCorner(n, n) * c;
    Eigen::VectorXd z = c;
    if (Kc.norm() > 1e-12 * scale * c.norm())
    {
        Kc(pin) = 0;
        z -= solver.solve(Kc).x;
    }

    const Eigen::VectorXd b = sys.rhs.head(n);
    const double          mu = z.dot(b) / z.dot(c);
    Eigen::VectorXd       rhs = b - mu * c;
    rhs(pin) = 0;
    const auto inner = solver.solve(rhs);

    LinearSolveResult out;
    out.x.resize(n + 1);
    out.x.head(n) = inner.x + (sys.rhs(m) - c.dot(inner.x)) / c.dot(z) * z;
    out.x(m) = mu;
    const double bnorm = sys.rhs.norm();
    const double r = (sys.rhs - sys.matrix * out.x).norm();
    out.residual = bnorm > 0 ? r / bnorm : r;
    if (!(out.residual <= residual_tolerance))
        throw std::runtime_error("saddle solve did not reach residual tolerance: " + std::to_string(out.residual));
    return out;
}

inline StokesSolution solve(const SaddleSystem& sys)
{
    const auto res = solve_saddle(sys);
    auto       out = unpack(sys.layout, res.x);
    out.residual = res.residual;
    return out;
}

/// Per-element multiplier zeta_T with c_T(v, zeta) = a_T(u, v) - b_T(v, p)
/// for all v = {0, vb}. Edge mass matrices are identities, so this is the
/// side block of A_T u - B_T p.
inline SideField recover_multiplier(const FormCache& forms, const StokesSolution& sol)
{
    const auto& space = forms.space();
    const auto& d = space.dims();
    SideField   out = SideField::zero(space.mesh(), d.side());
    for (std::size_t t = 0; t < forms.size(); ++t)
    {
        const Eigen::VectorXd r = forms[t].A * sol.local(t).flat() - forms[t].B * sol.pressure[t];
        for (std::size_t l = 0; l < 3; ++l)
            out.at(t, l) = r.segment(Eigen::Index(d.side_offset(l)), Eigen::Index(d.side()));
    }
    return out;
}

} // namespace wgstokes

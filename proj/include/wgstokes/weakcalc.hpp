#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"
#include "polybasis.hpp"
#include "quadrature.hpp"

namespace wgstokes
{

using VectorField = std::function<Eigen::Vector2d(const Point&)>;
using ScalarField = std::function<double(const Point&)>;
using TensorField = std::function<Eigen::Matrix2d(const Point&)>;

/// Sizes of the local spaces for polynomial degree k.
///
/// Local velocity layout: interior x block, interior y block, then one block
/// per element side (in element_edges order), each side holding its x block
/// followed by its y block.
struct LocalDims
{
    int         k = 1;
    std::size_t scalar_k = 0;   // dim P_k(T)
    std::size_t scalar_km1 = 0; // dim P_{k-1}(T)
    std::size_t edge = 0;       // dim P_{k-1}(e)

    explicit LocalDims(int degree = 1)
      : k(degree), scalar_k(dim_p2(degree)), scalar_km1(dim_p2(degree - 1)), edge(std::size_t(degree))
    {
        if (degree < 1)
            throw std::invalid_argument("polynomial degree k must be >= 1");
    }

    std::size_t interior() const { return 2 * scalar_k; }
    std::size_t side() const { return 2 * edge; }
    std::size_t boundary() const { return 3 * side(); }
    std::size_t velocity() const { return interior() + boundary(); }
    std::size_t side_offset(std::size_t l) const { return interior() + l * side(); }
    std::size_t tensor() const { return 4 * scalar_km1; }
    std::size_t pressure() const { return scalar_km1; }
};

/// Weak function on one element: v0 in [P_k(T)]^2 and vb in [P_{k-1}(e)]^2
/// on each of the three sides.
struct LocalWeakFunction
{
    Eigen::VectorXd                v0;
    std::array<Eigen::VectorXd, 3> vb;

    static LocalWeakFunction zero(const LocalDims& d)
    {
        LocalWeakFunction f;
        f.v0 = Eigen::VectorXd::Zero(Eigen::Index(d.interior()));
        for (auto& s : f.vb)
            s = Eigen::VectorXd::Zero(Eigen::Index(d.side()));
        return f;
    }

    static LocalWeakFunction from_flat(const LocalDims& d, const Eigen::VectorXd& flat)
    {
        if (std::size_t(flat.size()) != d.velocity())
            throw std::invalid_argument("LocalWeakFunction: wrong coefficient count");
        LocalWeakFunction f;
        f.v0 = flat.head(Eigen::Index(d.interior()));
        for (std::size_t l = 0; l < 3; ++l)
            f.vb[l] = flat.segment(Eigen::Index(d.side_offset(l)), Eigen::Index(d.side()));
        return f;
    }

    Eigen::VectorXd flat() const
    {
        Eigen::VectorXd out(v0.size() + 3 * vb[0].size());
        out << v0, vb[0], vb[1], vb[2];
        return out;
    }
};

/// Precomputed per-element data: basis, quadrature and the linear maps of
/// the weak calculus.
struct ElementData
{
    ElementBasis basis;
    PhysicalRule rule;      // exact to 2k+2
    PhysicalRule data_rule; // high order, for non-polynomial data

    /// Discrete weak gradient: local velocity -> [P_{k-1}]^{2x2}, component
    /// (i,j) = d v_i / d x_j in block 2i+j.
    Eigen::MatrixXd weak_gradient;
    /// Discrete weak divergence: local velocity -> P_{k-1}.
    Eigen::MatrixXd weak_divergence;
    /// Q_b of the interior trace on each side: interior coeffs -> side coeffs.
    std::array<Eigen::MatrixXd, 3> trace;
};

inline constexpr int data_quadrature_exactness = 10;
inline constexpr int data_edge_points = 8;

/// Degree-k weak Galerkin spaces on a mesh with all element/edge operators
/// built up front. Holds a reference to the mesh, which must outlive it.
class WeakSpace
{
public:
    WeakSpace(const TriMesh& mesh, int k) : m_mesh(&mesh), m_dims(k)
    {
        m_edge_rule = gauss_legendre(k + 2);
        m_edge_data_rule = gauss_legendre(std::max(data_edge_points, k + 3));
        const auto ref_rule = triangle_quadrature(2 * k + 2);
        const auto ref_data = triangle_quadrature(std::max(data_quadrature_exactness, 2 * k + 4));

        m_edges.reserve(mesh.num_edges());
        for (std::size_t e = 0; e < mesh.num_edges(); ++e)
            m_edges.emplace_back(k - 1, mesh.edge_length(e));

        m_elements.resize(mesh.num_elements());
        for (std::size_t t = 0; t < mesh.num_elements(); ++t)
        {
            const auto& el = mesh.element(t);
            auto&       data = m_elements[t];
            data.rule = map_rule(ref_rule, mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2]));
            data.data_rule = map_rule(ref_data, mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2]));
            data.basis = ElementBasis(k, mesh.centroid(t), mesh.diameter(t), data.rule);
            build_operators(t);
        }
    }

    const TriMesh& mesh() const { return *m_mesh; }
    const LocalDims& dims() const { return m_dims; }
    int degree() const { return m_dims.k; }

    const ElementData& element(std::size_t t) const { return m_elements.at(t); }
    const EdgeBasis& edge_basis(std::size_t e) const { return m_edges.at(e); }

    /// Gauss rule on [0,1] exact to 2k+3, for polynomial edge integrands.
    const QuadRule& edge_rule() const { return m_edge_rule; }
    /// Higher-order Gauss rule on [0,1] for non-polynomial edge data.
    const QuadRule& edge_data_rule() const { return m_edge_data_rule; }

private:
    void build_operators(std::size_t t)
    {
        const auto& mesh = *m_mesh;
        const auto& d = m_dims;
        auto&       data = m_elements[t];
        const auto  nk = Eigen::Index(d.scalar_k);
        const auto  nq = Eigen::Index(d.scalar_km1);
        const auto  ne = Eigen::Index(d.edge);

        data.weak_gradient = Eigen::MatrixXd::Zero(Eigen::Index(d.tensor()), Eigen::Index(d.velocity()));
        data.weak_divergence = Eigen::MatrixXd::Zero(nq, Eigen::Index(d.velocity()));

        // -(v0, div q)_T and -(v0, grad phi)_T
        for (std::size_t q = 0; q < data.rule.size(); ++q)
        {
            const auto&           x = data.rule.points[q];
            const double          w = data.rule.weights[q];
            const Eigen::VectorXd phi = data.basis.eval(x);
            const Eigen::MatrixXd dphi = data.basis.grad(x);
            for (Eigen::Index i = 0; i < 2; ++i)
                for (Eigen::Index j = 0; j < 2; ++j)
                    data.weak_gradient.block((2 * i + j) * nq, i * nk, nq, nk).noalias()
                      -= w * dphi.col(j).head(nq) * phi.transpose();
            for (Eigen::Index i = 0; i < 2; ++i)
                data.weak_divergence.block(0, i * nk, nq, nk).noalias() -= w * dphi.col(i).head(nq) * phi.transpose();
        }

        // <v_b, q n>_{dT}, <v_b . n, phi>_{dT} and the trace projections
        const auto& edges = mesh.element_edges(t);
        for (std::size_t l = 0; l < 3; ++l)
        {
            const std::size_t e = edges[l];
            const Point&      n = mesh.normal(t, l);
            const auto&       eb = m_edges[e];
            const double      len = mesh.edge_length(e);
            const auto        off = Eigen::Index(d.side_offset(l));
            data.trace[l] = Eigen::MatrixXd::Zero(Eigen::Index(d.side()), Eigen::Index(d.interior()));
            for (std::size_t q = 0; q < m_edge_rule.size(); ++q)
            {
                const double          s = m_edge_rule.points[q].x();
                const double          w = m_edge_rule.weights[q] * len;
                const Point           x = mesh.edge_point(e, s);
                const Eigen::VectorXd psi = eb.eval(s);
                const Eigen::VectorXd phi = data.basis.eval(x);
                for (Eigen::Index i = 0; i < 2; ++i)
                {
                    for (Eigen::Index j = 0; j < 2; ++j)
                        data.weak_gradient.block((2 * i + j) * nq, off + i * ne, nq, ne).noalias()
                          += (w * n(j)) * phi.head(nq) * psi.transpose();
                    data.weak_divergence.block(0, off + i * ne, nq, ne).noalias()
                      += (w * n(i)) * phi.head(nq) * psi.transpose();
                    data.trace[l].block(i * ne, i * nk, ne, nk).noalias() += w * psi * phi.transpose();
                }
            }
        }
    }

    const TriMesh*           m_mesh;
    LocalDims                m_dims;
    QuadRule                 m_edge_rule;
    QuadRule                 m_edge_data_rule;
    std::vector<EdgeBasis>   m_edges;
    std::vector<ElementData> m_elements;
};

/// Q_0: L2 projection of a vector field onto [P_k(T)]^2.
inline Eigen::VectorXd project_interior(const WeakSpace& space, std::size_t t, const VectorField& f)
{
    const auto& data = space.element(t);
    const auto  nk = Eigen::Index(space.dims().scalar_k);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * nk);
    for (std::size_t q = 0; q < data.data_rule.size(); ++q)
    {
        const auto&           x = data.data_rule.points[q];
        const Eigen::VectorXd phi = data.basis.eval(x);
        const Eigen::Vector2d fx = f(x);
        out.head(nk) += data.data_rule.weights[q] * fx.x() * phi;
        out.tail(nk) += data.data_rule.weights[q] * fx.y() * phi;
    }
    return out;
}

/// Q_b: L2 projection of a vector field onto [P_{k-1}(e)]^2.
inline Eigen::VectorXd project_edge(const WeakSpace& space, std::size_t e, const VectorField& f)
{
    const auto& rule = space.edge_data_rule();
    const auto& eb = space.edge_basis(e);
    const auto  ne = Eigen::Index(space.dims().edge);
    const auto& mesh = space.mesh();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * ne);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
        const double          s = rule.points[q].x();
        const double          w = rule.weights[q] * mesh.edge_length(e);
        const Eigen::VectorXd psi = eb.eval(s);
        const Eigen::Vector2d fx = f(mesh.edge_point(e, s));
        out.head(ne) += w * fx.x() * psi;
        out.tail(ne) += w * fx.y() * psi;
    }
    return out;
}

/// L2 projection of a scalar field onto P_{k-1}(T).
inline Eigen::VectorXd project_scalar(const WeakSpace& space, std::size_t t, const ScalarField& p)
{
    const auto& data = space.element(t);
    const auto  nq = Eigen::Index(space.dims().scalar_km1);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nq);
    for (std::size_t q = 0; q < data.data_rule.size(); ++q)
    {
        const auto& x = data.data_rule.points[q];
        out += data.data_rule.weights[q] * p(x) * data.basis.eval(x).head(nq);
    }
    return out;
}

/// L2 projection of a tensor field onto [P_{k-1}(T)]^{2x2}, in weak-gradient layout.
inline Eigen::VectorXd project_tensor(const WeakSpace& space, std::size_t t, const TensorField& g)
{
    const auto& data = space.element(t);
    const auto  nq = Eigen::Index(space.dims().scalar_km1);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(4 * nq);
    for (std::size_t q = 0; q < data.data_rule.size(); ++q)
    {
        const auto&           x = data.data_rule.points[q];
        const Eigen::VectorXd phi = data.basis.eval(x).head(nq);
        const Eigen::Matrix2d gx = g(x);
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 2; ++j)
                out.segment((2 * i + j) * nq, nq) += data.data_rule.weights[q] * gx(i, j) * phi;
    }
    return out;
}

/// Q_h v = {Q_0 v, Q_b v} restricted to element t.
inline LocalWeakFunction project_weak(const WeakSpace& space, std::size_t t, const VectorField& f)
{
    LocalWeakFunction out;
    out.v0 = project_interior(space, t, f);
    const auto& edges = space.mesh().element_edges(t);
    for (std::size_t l = 0; l < 3; ++l)
        out.vb[l] = project_edge(space, edges[l], f);
    return out;
}

inline Eigen::VectorXd weak_gradient(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v)
{
    return space.element(t).weak_gradient * v.flat();
}

inline Eigen::VectorXd weak_divergence(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v)
{
    return space.element(t).weak_divergence * v.flat();
}

/// Values living on element sides, indexed by 3*t + l.
struct SideField
{
    std::vector<Eigen::VectorXd> values;

    static SideField zero(const TriMesh& mesh, std::size_t side_size)
    {
        return SideField{std::vector<Eigen::VectorXd>(3 * mesh.num_elements(),
                                                      Eigen::VectorXd::Zero(Eigen::Index(side_size)))};
    }

    Eigen::VectorXd&       at(std::size_t t, std::size_t l) { return values.at(3 * t + l); }
    const Eigen::VectorXd& at(std::size_t t, std::size_t l) const { return values.at(3 * t + l); }
};

/// Value of a side field on edge e as seen from element t.
inline const Eigen::VectorXd& side_value(const TriMesh& mesh, const SideField& field, std::size_t e, std::size_t t)
{
    return field.at(t, mesh.local_index(t, e));
}

/// [[v]]_e: v|T1 - v|T2 on interior edges, v itself on boundary edges.
inline Eigen::VectorXd jump(const TriMesh& mesh, const SideField& field, std::size_t e)
{
    const auto sides = edge_sides(mesh, e);
    const Eigen::VectorXd& v1 = side_value(mesh, field, e, sides.owner);
    if (!sides.neighbor)
        return v1;
    return v1 - side_value(mesh, field, e, *sides.neighbor);
}

/// <<lambda>>_e: lambda|T1 + lambda|T2 on interior edges, zero on boundary edges.
inline Eigen::VectorXd similarity(const TriMesh& mesh, const SideField& field, std::size_t e)
{
    const auto sides = edge_sides(mesh, e);
    const Eigen::VectorXd& v1 = side_value(mesh, field, e, sides.owner);
    if (!sides.neighbor)
        return Eigen::VectorXd::Zero(v1.size());
    return v1 + side_value(mesh, field, e, *sides.neighbor);
}

} // namespace wgstokes

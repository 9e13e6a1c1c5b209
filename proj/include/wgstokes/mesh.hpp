#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wgstokes
{

using Point = Eigen::Vector2d;

/// The two elements seen from an edge. `owner` has the smaller global index.
struct EdgeSides
{
    std::size_t                owner;
    std::optional<std::size_t> neighbor;
};

/// Immutable 2D triangulation with the edge connectivity needed by the
/// weak Galerkin schemes.
///
/// Local edge `l` of an element joins its local vertices `l` and `(l+1)%3`.
/// Global edges are stored with their vertex pair sorted ascending, which
/// fixes the parametrisation used by the edge bases.
class TriMesh
{
public:
    TriMesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> elements)
      : m_vertices(std::move(vertices)), m_elements(std::move(elements))
    {
        build_connectivity();
    }

    std::size_t num_vertices() const { return m_vertices.size(); }
    std::size_t num_elements() const { return m_elements.size(); }
    std::size_t num_edges() const { return m_edges.size(); }
    std::size_t num_interior_edges() const { return m_num_interior_edges; }

    const Point& vertex(std::size_t v) const { return m_vertices.at(v); }
    const std::vector<Point>& vertices() const { return m_vertices; }
    const std::array<std::size_t, 3>& element(std::size_t t) const { return m_elements.at(t); }
    const std::array<std::size_t, 2>& edge(std::size_t e) const { return m_edges.at(e); }

    const std::array<std::size_t, 3>& element_edges(std::size_t t) const { return m_element_edges.at(t); }
    const Point& normal(std::size_t t, std::size_t local) const { return m_normals.at(t)[local]; }
    const EdgeSides& edge_elements(std::size_t e) const { return m_edge_elements.at(e); }

    /// Local slot of edge `e` inside element `t`; throws when `t` does not touch `e`.
    std::size_t local_index(std::size_t t, std::size_t e) const
    {
        const auto& ee = element_edges(t);
        for (std::size_t l = 0; l < 3; ++l)
            if (ee[l] == e)
                return l;
        throw std::out_of_range("element does not contain edge");
    }

    bool is_boundary(std::size_t e) const { return m_boundary.at(e); }
    double diameter(std::size_t t) const { return m_h_T.at(t); }
    double edge_length(std::size_t e) const { return m_h_e.at(e); }
    double area(std::size_t t) const { return m_area.at(t); }

    Point centroid(std::size_t t) const
    {
        const auto& el = element(t);
        return (m_vertices[el[0]] + m_vertices[el[1]] + m_vertices[el[2]]) / 3.0;
    }

    Point edge_midpoint(std::size_t e) const
    {
        return 0.5 * (m_vertices[m_edges[e][0]] + m_vertices[m_edges[e][1]]);
    }

    /// Point on edge `e` at parameter t in [0,1], measured from its first vertex.
    Point edge_point(std::size_t e, double t) const
    {
        const Point& a = m_vertices[m_edges[e][0]];
        const Point& b = m_vertices[m_edges[e][1]];
        return a + t * (b - a);
    }

    double mesh_size() const { return *std::max_element(m_h_T.begin(), m_h_T.end()); }

private:
    void build_connectivity()
    {
        const std::size_t nt = m_elements.size();
        if (nt == 0)
            throw std::invalid_argument("mesh has no elements");

        m_element_edges.resize(nt);
        m_normals.resize(nt);
        m_h_T.resize(nt);
        m_area.resize(nt);

        std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
        for (std::size_t t = 0; t < nt; ++t)
        {
            auto& el = m_elements[t];
            for (auto v : el)
                if (v >= m_vertices.size())
                    throw std::invalid_argument("element references a missing vertex");

            const Point& p0 = m_vertices[el[0]];
            const Point& p1 = m_vertices[el[1]];
            const Point& p2 = m_vertices[el[2]];
            double twice_area = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
            if (twice_area < 0)
            {
                std::swap(el[1], el[2]);
                twice_area = -twice_area;
            }
            if (!(twice_area > 0))
                throw std::invalid_argument("degenerate element " + std::to_string(t));
            m_area[t] = 0.5 * twice_area;

            double diam = 0;
            for (std::size_t l = 0; l < 3; ++l)
            {
                const std::size_t a = el[l], b = el[(l + 1) % 3];
                const auto key = std::minmax(a, b);
                auto [it, inserted] = lookup.try_emplace({key.first, key.second}, m_edges.size());
                if (inserted)
                {
                    m_edges.push_back({key.first, key.second});
                    m_edge_elements.push_back({t, std::nullopt});
                }
                else
                {
                    auto& sides = m_edge_elements[it->second];
                    if (sides.neighbor)
                        throw std::invalid_argument("edge shared by more than two elements");
                    sides.neighbor = t;
                }
                m_element_edges[t][l] = it->second;

                const Point d = m_vertices[b] - m_vertices[a];
                m_normals[t][l] = Point(d.y(), -d.x()) / d.norm();
                diam = std::max(diam, d.norm());
            }
            m_h_T[t] = diam;
        }

        m_boundary.resize(m_edges.size());
        m_h_e.resize(m_edges.size());
        m_num_interior_edges = 0;
        for (std::size_t e = 0; e < m_edges.size(); ++e)
        {
            m_boundary[e] = !m_edge_elements[e].neighbor.has_value();
            if (!m_boundary[e])
                ++m_num_interior_edges;
            m_h_e[e] = (m_vertices[m_edges[e][1]] - m_vertices[m_edges[e][0]]).norm();
        }
    }

    std::vector<Point>                      m_vertices;
    std::vector<std::array<std::size_t, 3>> m_elements;
    std::vector<std::array<std::size_t, 2>> m_edges;
    std::vector<std::array<std::size_t, 3>> m_element_edges;
    std::vector<std::array<Point, 3>>       m_normals;
    std::vector<EdgeSides>                  m_edge_elements;
    std::vector<bool>                       m_boundary;
    std::vector<double>                     m_h_T;
    std::vector<double>                     m_h_e;
    std::vector<double>                     m_area;
    std::size_t                             m_num_interior_edges = 0;
};

/// Uniform triangulation of the unit square: n x n cells, each split along
/// the diagonal from (i/n, j/n) to ((i+1)/n, (j+1)/n). Cells are numbered
/// lexicographically by (j, i), lower triangle first.
inline TriMesh build_uniform_square(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("build_uniform_square: n must be positive");

    std::vector<Point> vertices;
    vertices.reserve((n + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i)
            vertices.emplace_back(double(i) / double(n), double(j) / double(n));

    auto vid = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };

    std::vector<std::array<std::size_t, 3>> elements;
    elements.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
        {
            elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    return TriMesh(std::move(vertices), std::move(elements));
}

/// Owner/neighbor pair of edge `e`; the owner always has the smaller index.
inline EdgeSides edge_sides(const TriMesh& mesh, std::size_t e)
{
    if (e >= mesh.num_edges())
        throw std::out_of_range("edge_sides: edge index out of range");
    return mesh.edge_elements(e);
}

/// Reads the plain-text mesh format:
///   V E T
///   x y        (V lines)
///   i j k      (T lines, 0-based vertex indices)
/// E must equal the number of edges derived from the elements.
inline TriMesh read_mesh(std::istream& in)
{
    std::size_t nv = 0, ne = 0, nt = 0;
    if (!(in >> nv >> ne >> nt))
        throw std::runtime_error("mesh file: bad header");

    std::vector<Point> vertices(nv);
    for (auto& p : vertices)
        if (!(in >> p.x() >> p.y()))
            throw std::runtime_error("mesh file: truncated vertex list");

    std::vector<std::array<std::size_t, 3>> elements(nt);
    for (auto& el : elements)
        if (!(in >> el[0] >> el[1] >> el[2]))
            throw std::runtime_error("mesh file: truncated element list");

    TriMesh mesh(std::move(vertices), std::move(elements));
    if (mesh.num_edges() != ne)
        throw std::runtime_error("mesh file: header declares " + std::to_string(ne) + " edges, elements define "
                                 + std::to_string(mesh.num_edges()));
    return mesh;
}

inline TriMesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open mesh file " + path);
    return read_mesh(in);
}

inline void write_mesh(std::ostream& out, const TriMesh& mesh)
{
    out.precision(17);
    out << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_elements() << '\n';
    for (const auto& p : mesh.vertices())
        out << p.x() << ' ' << p.y() << '\n';
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const auto& el = mesh.element(t);
        out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
    }
}

} // namespace wgstokes

#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <wgstokes/analysis.hpp>
#include <wgstokes/forms.hpp>
#include <wgstokes/mesh.hpp>
#include <wgstokes/systems.hpp>
#include <wgstokes/weakcalc.hpp>

namespace wgtest
{

using namespace wgstokes;

inline std::mt19937_64& rng()
{
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform() { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng()); }

inline Eigen::VectorXd random_vector(Eigen::Index n)
{
    Eigen::VectorXd v(n);
    for (auto& x : v)
        x = uniform();
    return v;
}

inline LocalWeakFunction random_weak(const LocalDims& d)
{
    return LocalWeakFunction::from_flat(d, random_vector(Eigen::Index(d.velocity())));
}

/// Random polynomial vector field of total degree <= k with its gradient.
struct PolyField
{
    int                                   k;
    std::vector<std::pair<int, int>>      exps;
    Eigen::VectorXd                       cx, cy;

    explicit PolyField(int degree) : k(degree)
    {
        for (int d = 0; d <= k; ++d)
            for (int b = 0; b <= d; ++b)
                exps.emplace_back(d - b, b);
        cx = random_vector(Eigen::Index(exps.size()));
        cy = random_vector(Eigen::Index(exps.size()));
    }

    Eigen::Vector2d operator()(const Point& x) const
    {
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < exps.size(); ++i)
        {
            const double m = std::pow(x.x(), exps[i].first) * std::pow(x.y(), exps[i].second);
            v += m * Eigen::Vector2d(cx(Eigen::Index(i)), cy(Eigen::Index(i)));
        }
        return v;
    }

    Eigen::Matrix2d grad(const Point& x) const
    {
        Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
        for (std::size_t i = 0; i < exps.size(); ++i)
        {
            const auto [a, b] = exps[i];
            const double dx = a == 0 ? 0.0 : a * std::pow(x.x(), a - 1) * std::pow(x.y(), b);
            const double dy = b == 0 ? 0.0 : b * std::pow(x.x(), a) * std::pow(x.y(), b - 1);
            g(0, 0) += cx(Eigen::Index(i)) * dx;
            g(0, 1) += cx(Eigen::Index(i)) * dy;
            g(1, 0) += cy(Eigen::Index(i)) * dx;
            g(1, 1) += cy(Eigen::Index(i)) * dy;
        }
        return g;
    }
};

/// Degree-4 six-point rule applied on a uniform subdivision of a triangle;
/// independent of the library's collapsed Gauss rules.
struct SimpleRule
{
    std::vector<Point>  points;
    std::vector<double> weights;
};

inline SimpleRule subdivided_rule(const Point& p0, const Point& p1, const Point& p2, int m)
{
    static const double a = 0.445948490915965, wa = 0.223381589678011;
    static const double b = 0.091576213509771, wb = 0.109951743655322;
    const std::array<std::array<double, 3>, 6> bary{{{a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
                                                     {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}}};
    const std::array<double, 6> w{wa, wa, wa, wb, wb, wb};
    const double                area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
    const auto   at = [&](double s, double t) -> Point { return p0 + s * (p1 - p0) + t * (p2 - p0); };

    SimpleRule r;
    const auto add = [&](const Point& q0, const Point& q1, const Point& q2) {
        for (std::size_t i = 0; i < 6; ++i)
        {
            r.points.push_back(bary[i][0] * q0 + bary[i][1] * q1 + bary[i][2] * q2);
            r.weights.push_back(w[i] * area / (m * m));
        }
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; i + j < m; ++j)
        {
            const double s = double(i) / m, t = double(j) / m, h = 1.0 / m;
            add(at(s, t), at(s + h, t), at(s, t + h));
            if (i + j + 1 < m)
                add(at(s + h, t), at(s + h, t + h), at(s, t + h));
        }
    return r;
}

/// Composite Simpson rule on [0,1] with `m` (even) panels.
inline std::vector<std::pair<double, double>> simpson(int m)
{
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i <= m; ++i)
    {
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        out.emplace_back(double(i) / m, w / (3.0 * m));
    }
    return out;
}

/// Dense global matrix of an assembled system (small meshes only).
inline Eigen::MatrixXd dense(const SparseMatrix& A) { return Eigen::MatrixXd(A); }

/// Per-side copy of a single-valued side field so tests can build
/// WeakSpace-shaped data from per-edge values.
inline SideField sides_from_edges(const TriMesh& mesh, const std::vector<Eigen::VectorXd>& edge_values)
{
    SideField out{std::vector<Eigen::VectorXd>(3 * mesh.num_elements())};
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
        for (std::size_t l = 0; l < 3; ++l)
            out.at(t, l) = edge_values[mesh.element_edges(t)[l]];
    return out;
}

inline double max_abs_diff(const StokesSolution& a, const StokesSolution& b)
{
    double d = 0;
    for (std::size_t t = 0; t < a.interior.size(); ++t)
    {
        d = std::max(d, (a.interior[t] - b.interior[t]).cwiseAbs().maxCoeff());
        d = std::max(d, (a.pressure[t] - b.pressure[t]).cwiseAbs().maxCoeff());
        for (std::size_t l = 0; l < 3; ++l)
            d = std::max(d, (a.sides.at(t, l) - b.sides.at(t, l)).cwiseAbs().maxCoeff());
    }
    return d;
}

} // namespace wgtest

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wgstokes
{

/// Quadrature rule. For triangles, points are in reference coordinates on
/// (0,0),(1,0),(0,1) and weights sum to 1/2. For segments, points are
/// parameters in [0,1] stored in x() and weights sum to 1.
struct QuadRule
{
    std::vector<Eigen::Vector2d> points;
    std::vector<double>          weights;
    int                          exactness = 0;

    std::size_t size() const { return weights.size(); }
};

inline constexpr int max_triangle_exactness = 41;

/// Gauss-Legendre rule with `npts` points on [0,1], exact to degree 2*npts-1.
inline QuadRule gauss_legendre(int npts)
{
    if (npts < 1)
        throw std::invalid_argument("gauss_legendre: need at least one point");

    QuadRule rule;
    rule.exactness = 2 * npts - 1;
    rule.points.resize(npts);
    rule.weights.resize(npts);

    const int n = npts;
    for (int i = 0; i < n; ++i)
    {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j)
            {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        {
            // derivative at the converged node, for the weight
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j)
            {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[n - 1 - i] = Eigen::Vector2d(0.5 * (x + 1.0), 0.0);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

/// Collapsed (Duffy) product rule on the reference triangle, exact for all
/// bivariate polynomials of total degree <= `exactness`. All points are
/// interior and all weights positive.
inline QuadRule triangle_quadrature(int exactness)
{
    if (exactness < 0)
        throw std::invalid_argument("triangle_quadrature: negative exactness");
    if (exactness > max_triangle_exactness)
        throw std::invalid_argument("triangle_quadrature: exactness " + std::to_string(exactness)
                                    + " above supported maximum " + std::to_string(max_triangle_exactness));

    // the (1-u) Jacobian adds one degree in u
    const int  n = (exactness + 3) / 2;
    const auto gl = gauss_legendre(n);

    QuadRule rule;
    rule.exactness = exactness;
    for (int i = 0; i < n; ++i)
    {
        const double u = gl.points[i].x();
        for (int j = 0; j < n; ++j)
        {
            const double v = gl.points[j].x();
            rule.points.emplace_back(u, (1.0 - u) * v);
            rule.weights.push_back(gl.weights[i] * gl.weights[j] * (1.0 - u));
        }
    }
    return rule;
}

/// Quadrature points and weights mapped onto a physical triangle.
struct PhysicalRule
{
    std::vector<Eigen::Vector2d> points;
    std::vector<double>          weights;

    std::size_t size() const { return weights.size(); }
};

inline PhysicalRule map_rule(const QuadRule& ref, const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                             const Eigen::Vector2d& p2)
{
    const Eigen::Vector2d d1 = p1 - p0, d2 = p2 - p0;
    const double          jac = std::abs(d1.x() * d2.y() - d1.y() * d2.x());
    PhysicalRule          out;
    out.points.reserve(ref.size());
    out.weights.reserve(ref.size());
    for (std::size_t q = 0; q < ref.size(); ++q)
    {
        out.points.push_back(p0 + ref.points[q].x() * d1 + ref.points[q].y() * d2);
        out.weights.push_back(ref.weights[q] * jac);
    }
    return out;
}

} // namespace wgstokes

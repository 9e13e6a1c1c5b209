#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forms.hpp"
#include "systems.hpp"
#include "weakcalc.hpp"

namespace wgstokes
{

/// Closed-form Stokes solution with synthesised data f = -Lap u + grad p,
/// g = u on the boundary.
struct ManufacturedCase
{
    std::string name;
    VectorField u;
    TensorField grad_u; ///< (i,j) = d u_i / d x_j
    ScalarField p;
    VectorField f;

    VectorField g() const { return u; }

    /// Flux grad(u) n - p n on a side with outward normal n.
    Eigen::Vector2d lambda(const Point& x, const Eigen::Vector2d& n) const { return grad_u(x) * n - p(x) * n; }
};

inline ManufacturedCase make_case(int id)
{
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;

    ManufacturedCase c;
    if (id == 1)
    {
        c.name = "sin(2 pi x) cos(2 pi y) vortex, p = x^2 y^2 - 1/9";
        c.u = [](const Point& x) {
            return Eigen::Vector2d(sin(2 * pi * x.x()) * cos(2 * pi * x.y()), -cos(2 * pi * x.x()) * sin(2 * pi * x.y()));
        };
        c.grad_u = [](const Point& x) {
            const double sx = sin(2 * pi * x.x()), cx = cos(2 * pi * x.x());
            const double sy = sin(2 * pi * x.y()), cy = cos(2 * pi * x.y());
            Eigen::Matrix2d g;
            g << 2 * pi * cx * cy, -2 * pi * sx * sy, 2 * pi * sx * sy, -2 * pi * cx * cy;
            return g;
        };
        c.p = [](const Point& x) { return x.x() * x.x() * x.y() * x.y() - 1.0 / 9.0; };
        // -Lap u = 8 pi^2 u
        c.f = [u = c.u](const Point& x) {
            return Eigen::Vector2d(8 * pi * pi * u(x)
                                   + Eigen::Vector2d(2 * x.x() * x.y() * x.y(), 2 * x.x() * x.x() * x.y()));
        };
        return c;
    }
    if (id == 2)
    {
        // u = (-X(x) Y'(y), X'(x) Y(y)) with X(s) = Y(s) = s^2 (s-1)^2
        struct Q
        {
            static double v(double s) { return s * s * (s - 1) * (s - 1); }
            static double d1(double s) { return 2 * s * (s - 1) * (2 * s - 1); }
            static double d2(double s) { return 12 * s * s - 12 * s + 2; }
            static double d3(double s) { return 24 * s - 12; }
        };
        c.name = "polynomial stream function x^2(x-1)^2 y^2(y-1)^2, p = x^4 + y^4 - 2/5";
        c.u = [](const Point& x) {
            return Eigen::Vector2d(-Q::v(x.x()) * Q::d1(x.y()), Q::d1(x.x()) * Q::v(x.y()));
        };
        c.grad_u = [](const Point& x) {
            Eigen::Matrix2d g;
            g << -Q::d1(x.x()) * Q::d1(x.y()), -Q::v(x.x()) * Q::d2(x.y()), Q::d2(x.x()) * Q::v(x.y()),
              Q::d1(x.x()) * Q::d1(x.y());
            return g;
        };
        c.p = [](const Point& x) { return std::pow(x.x(), 4) + std::pow(x.y(), 4) - 0.4; };
        c.f = [](const Point& x) {
            const double a = x.x(), b = x.y();
            const double lap1 = -(Q::d2(a) * Q::d1(b) + Q::v(a) * Q::d3(b));
            const double lap2 = Q::d3(a) * Q::v(b) + Q::d1(a) * Q::d2(b);
            return Eigen::Vector2d(-lap1 + 4 * a * a * a, -lap2 + 4 * b * b * b);
        };
        return c;
    }
    throw std::invalid_argument("make_case: unknown example id " + std::to_string(id));
}

/// Errors of one refinement level, measured against the projections Q_h u,
/// Q_h p and Q_b lambda.
struct ErrorRow
{
    double h = 0;
    double triple = 0; ///< |||Q_h u - u_h|||
    double l2u = 0;    ///< ||Q_0 u - u_0||
    double p = 0;      ///< ||Q_h p - p_h||
    double lambda = 0; ///< (sum over interior edges of h_e ||Q_b lambda - lambda_h||_e^2)^{1/2}
};

/// |||v|||^2 = sum_T a_T(v, v) for a velocity stored per element side.
inline double norm_triple(const FormCache& forms, const StokesSolution& v)
{
    double sum = 0;
    for (std::size_t t = 0; t < forms.size(); ++t)
    {
        const Eigen::VectorXd x = v.local(t).flat();
        sum += x.dot(forms[t].A * x);
    }
    return std::sqrt(std::max(sum, 0.0));
}

/// ||v||_{V_h^0}^2 = |||v|||^2 + sum over interior edges of h_e^{-1} ||[[v]]||_e^2.
inline double norm_Vh0(const FormCache& forms, const StokesSolution& v)
{
    const auto& mesh = forms.space().mesh();
    const double t = norm_triple(forms, v);
    double       sum = t * t;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        if (!mesh.is_boundary(e))
            sum += jump(mesh, v.sides, e).squaredNorm() / mesh.edge_length(e);
    return std::sqrt(sum);
}

/// ||lambda||_{Xi_h}^2 = sum over interior edges of h_e ||lambda||_e^2,
/// taking the value seen from the owner element.
inline double norm_Xi(const TriMesh& mesh, const SideField& lambda)
{
    double sum = 0;
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        if (!mesh.is_boundary(e))
            sum += mesh.edge_length(e) * side_value(mesh, lambda, e, mesh.edge_elements(e).owner).squaredNorm();
    return std::sqrt(sum);
}

/// Q_h of a manufactured solution as a StokesSolution (multiplier = Q_b lambda).
inline StokesSolution project_case(const WeakSpace& space, const ManufacturedCase& c)
{
    const auto&    mesh = space.mesh();
    StokesSolution out;
    out.interior.resize(mesh.num_elements());
    out.pressure.resize(mesh.num_elements());
    out.sides = SideField::zero(mesh, space.dims().side());
    SideField lam = SideField::zero(mesh, space.dims().side());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const auto w = project_weak(space, t, c.u);
        out.interior[t] = w.v0;
        for (std::size_t l = 0; l < 3; ++l)
        {
            out.sides.at(t, l) = w.vb[l];
            const Eigen::Vector2d n = mesh.normal(t, l);
            lam.at(t, l) = project_edge(space, mesh.element_edges(t)[l], [&](const Point& x) { return c.lambda(x, n); });
        }
        out.pressure[t] = project_scalar(space, t, c.p);
    }
    out.multiplier = std::move(lam);
    return out;
}

/// The four error norms of a discrete solution. The multiplier is taken from
/// the solution when present, otherwise recovered element by element.
inline ErrorRow error_norms(const FormCache& forms, const StokesSolution& sol, const ManufacturedCase& c)
{
    const auto& space = forms.space();
    const auto& mesh = space.mesh();
    if (sol.interior.size() != mesh.num_elements() || sol.sides.values.size() != 3 * mesh.num_elements())
        throw std::invalid_argument("error_norms: solution does not belong to this mesh");

    const StokesSolution exact = project_case(space, c);
    const SideField      lam_h = sol.multiplier ? *sol.multiplier : recover_multiplier(forms, sol);

    ErrorRow row;
    row.h = mesh.mesh_size();
    double triple = 0, l2u = 0, p = 0, lam = 0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
    {
        const Eigen::VectorXd e = exact.local(t).flat() - sol.local(t).flat();
        triple += e.dot(forms[t].A * e);
        l2u += (exact.interior[t] - sol.interior[t]).squaredNorm();
        p += (exact.pressure[t] - sol.pressure[t]).squaredNorm();
    }
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    {
        if (mesh.is_boundary(e))
            continue;
        const auto owner = mesh.edge_elements(e).owner;
        lam += mesh.edge_length(e)
               * (side_value(mesh, *exact.multiplier, e, owner) - side_value(mesh, lam_h, e, owner)).squaredNorm();
    }
    row.triple = std::sqrt(std::max(triple, 0.0));
    row.l2u = std::sqrt(l2u);
    row.p = std::sqrt(p);
    row.lambda = std::sqrt(lam);
    return row;
}

/// log2(err_{i-1} / err_i) for consecutive halvings; the first entry, and
/// any entry involving a zero or non-finite error, is NaN.
inline std::vector<double> orders(const std::vector<double>& errors)
{
    std::vector<double> out(errors.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > 0 && errors[i - 1] > 0 && std::isfinite(errors[i]) && std::isfinite(errors[i - 1]))
            out[i] = std::log2(errors[i - 1] / errors[i]);
    return out;
}

/// A sequence of levels with their order columns.
struct ConvergenceRecord
{
    std::vector<std::size_t> n;
    std::vector<ErrorRow>    rows;

    std::vector<double> column(double ErrorRow::*field) const
    {
        std::vector<double> out;
        for (const auto& r : rows)
            out.push_back(r.*field);
        return out;
    }
    std::vector<double> order(double ErrorRow::*field) const { return orders(column(field)); }
};

} // namespace wgstokes

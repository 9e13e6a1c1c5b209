#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"
#include "quadrature.hpp"

namespace wgstokes
{

/// dim P_k in two variables.
constexpr std::size_t dim_p2(int k) { return k < 0 ? 0 : std::size_t(k + 1) * std::size_t(k + 2) / 2; }

/// Exponent pairs (a, b) of x^a y^b in graded order: by total degree, then by
/// decreasing power of x.
inline std::vector<std::pair<int, int>> graded_exponents(int degree)
{
    std::vector<std::pair<int, int>> out;
    for (int d = 0; d <= degree; ++d)
        for (int b = 0; b <= d; ++b)
            out.emplace_back(d - b, b);
    return out;
}

class LinearDependenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Modified Gram-Schmidt of a raw basis against a discrete inner product.
///
/// `raw` holds the raw functions sampled at quadrature points (one column per
/// function), `weights` the quadrature weights. Returns the lower-triangular
/// matrix L with orthonormal_i = sum_j L(i,j) raw_j. Column order is kept, so
/// the first m orthonormal functions span the first m raw functions.
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& raw, const std::vector<double>& weights)
{
    const auto n = raw.cols();
    if (raw.rows() != Eigen::Index(weights.size()))
        throw std::invalid_argument("orthonormalize: sample/weight count mismatch");

    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), Eigen::Index(weights.size()));
    auto inner = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) { return (w.array() * f.array() * g.array()).sum(); };

    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd values = raw;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double raw_norm = std::sqrt(std::max(inner(raw.col(i), raw.col(i)), 0.0));
        // twice is enough
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < i; ++j)
            {
                const double c = inner(values.col(i), values.col(j));
                values.col(i) -= c * values.col(j);
                L.row(i) -= c * L.row(j);
            }
        const double pivot = std::sqrt(std::max(inner(values.col(i), values.col(i)), 0.0));
        if (pivot < 1e-13 * std::max(1.0, raw_norm))
            throw LinearDependenceError("orthonormalize: basis function " + std::to_string(i)
                                        + " is numerically dependent (pivot " + std::to_string(pivot) + ")");
        values.col(i) /= pivot;
        L.row(i) /= pivot;
    }
    return L;
}

/// L2(T)-orthonormal basis of P_k(T), built from monomials centred at the
/// centroid and scaled by the element diameter. The first dim P_{k-1}
/// functions form an orthonormal basis of P_{k-1}(T).
class ElementBasis
{
public:
    ElementBasis() = default;

    ElementBasis(int degree, const Point& center, double scale, const PhysicalRule& rule)
      : m_degree(degree), m_center(center), m_scale(scale), m_exponents(graded_exponents(degree))
    {
        if (degree < 0)
            throw std::invalid_argument("ElementBasis: negative degree");
        Eigen::MatrixXd raw(rule.size(), size());
        for (std::size_t q = 0; q < rule.size(); ++q)
            raw.row(q) = monomials(rule.points[q]).transpose();
        m_coeffs = orthonormalize(raw, rule.weights);
    }

    int degree() const { return m_degree; }
    std::size_t size() const { return m_exponents.size(); }

    Eigen::VectorXd eval(const Point& x) const { return m_coeffs * monomials(x); }

    /// Rows are basis functions, columns d/dx and d/dy.
    Eigen::MatrixXd grad(const Point& x) const
    {
        const Eigen::Vector2d s = (x - m_center) / m_scale;
        Eigen::MatrixXd       g(size(), 2);
        for (std::size_t i = 0; i < size(); ++i)
        {
            const auto [a, b] = m_exponents[i];
            g(i, 0) = a == 0 ? 0.0 : a * ipow(s.x(), a - 1) * ipow(s.y(), b) / m_scale;
            g(i, 1) = b == 0 ? 0.0 : b * ipow(s.x(), a) * ipow(s.y(), b - 1) / m_scale;
        }
        return m_coeffs * g;
    }

    const Eigen::MatrixXd& coefficients() const { return m_coeffs; }

private:
    static double ipow(double x, int p)
    {
        double r = 1.0;
        for (int i = 0; i < p; ++i)
            r *= x;
        return r;
    }

    Eigen::VectorXd monomials(const Point& x) const
    {
        const Eigen::Vector2d s = (x - m_center) / m_scale;
        Eigen::VectorXd       m(size());
        for (std::size_t i = 0; i < size(); ++i)
            m(i) = ipow(s.x(), m_exponents[i].first) * ipow(s.y(), m_exponents[i].second);
        return m;
    }

    int                              m_degree = 0;
    Point                            m_center = Point::Zero();
    double                           m_scale = 1.0;
    std::vector<std::pair<int, int>> m_exponents;
    Eigen::MatrixXd                  m_coeffs;
};

/// L2(e)-orthonormal basis of P_m(e) in the edge parameter t in [0,1],
/// t = 0 at the edge's first vertex.
class EdgeBasis
{
public:
    EdgeBasis() = default;

    EdgeBasis(int degree, double length) : m_degree(degree), m_length(length)
    {
        if (degree < 0)
            throw std::invalid_argument("EdgeBasis: negative degree");
        const auto      rule = gauss_legendre(degree + 2);
        Eigen::MatrixXd raw(rule.size(), size());
        std::vector<double> w(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            raw.row(q) = monomials(rule.points[q].x()).transpose();
            w[q] = rule.weights[q] * length;
        }
        m_coeffs = orthonormalize(raw, w);
    }

    int degree() const { return m_degree; }
    std::size_t size() const { return std::size_t(m_degree + 1); }
    double length() const { return m_length; }

    Eigen::VectorXd eval(double t) const { return m_coeffs * monomials(t); }

    const Eigen::MatrixXd& coefficients() const { return m_coeffs; }

private:
    Eigen::VectorXd monomials(double t) const
    {
        Eigen::VectorXd m(size());
        double          v = 1.0;
        for (std::size_t i = 0; i < size(); ++i, v *= (t - 0.5))
            m(i) = v;
        return m;
    }

    int             m_degree = 0;
    double          m_length = 1.0;
    Eigen::MatrixXd m_coeffs;
};

} // namespace wgstokes

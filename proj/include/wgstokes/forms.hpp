#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "weakcalc.hpp"

namespace wgstokes
{

/// Element matrices of the bilinear forms, in the local velocity layout of
/// LocalDims.
struct LocalForms
{
    Eigen::MatrixXd A; ///< a_T(v, w) = v^T A w, includes S
    Eigen::MatrixXd B; ///< b_T(v, q) = v^T B q
    Eigen::MatrixXd C; ///< c_T(v, lambda) = v^T C lambda, lambda per side
    Eigen::MatrixXd S; ///< stabilizer part of A
};

/// Builds the element matrices. Mass matrices of the orthonormal bases are
/// identities, so every form reduces to products of the weak-calculus maps.
inline LocalForms assemble_local(const WeakSpace& space, std::size_t t)
{
    const auto& d = space.dims();
    const auto& data = space.element(t);
    if (std::size_t(data.weak_gradient.cols()) != d.velocity() || std::size_t(data.weak_gradient.rows()) != d.tensor()
        || std::size_t(data.weak_divergence.rows()) != d.pressure())
        throw std::logic_error("assemble_local: basis dimension mismatch");

    const auto nv = Eigen::Index(d.velocity());
    const auto ns = Eigen::Index(d.side());

    LocalForms out;
    out.S = Eigen::MatrixXd::Zero(nv, nv);
    for (std::size_t l = 0; l < 3; ++l)
    {
        // (Q_b v0 - vb) on side l
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ns, nv);
        P.leftCols(Eigen::Index(d.interior())) = data.trace[l];
        P.block(0, Eigen::Index(d.side_offset(l)), ns, ns) -= Eigen::MatrixXd::Identity(ns, ns);
        out.S.noalias() += P.transpose() * P;
    }
    out.S /= space.mesh().diameter(t);

    out.A = data.weak_gradient.transpose() * data.weak_gradient + out.S;
    out.B = data.weak_divergence.transpose();
    out.C = Eigen::MatrixXd::Zero(nv, Eigen::Index(d.boundary()));
    out.C.bottomRows(Eigen::Index(d.boundary())).setIdentity();
    return out;
}

/// (f, v0)_T for all interior test functions, local interior layout.
inline Eigen::VectorXd element_load(const WeakSpace& space, std::size_t t, const VectorField& f)
{
    return project_interior(space, t, f);
}

namespace detail
{
// Evaluates a [P_{k-1}]^{2x2} coefficient vector at x.
inline Eigen::Matrix2d eval_tensor(const WeakSpace& space, std::size_t t, const Eigen::VectorXd& coeffs, const Point& x)
{
    const auto            nq = Eigen::Index(space.dims().scalar_km1);
    const Eigen::VectorXd phi = space.element(t).basis.eval(x).head(nq);
    Eigen::Matrix2d       out;
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            out(i, j) = coeffs.segment((2 * i + j) * nq, nq).dot(phi);
    return out;
}

inline Eigen::Vector2d eval_interior(const WeakSpace& space, std::size_t t, const Eigen::VectorXd& v0, const Point& x)
{
    const auto            nk = Eigen::Index(space.dims().scalar_k);
    const Eigen::VectorXd phi = space.element(t).basis.eval(x);
    return {v0.head(nk).dot(phi), v0.tail(nk).dot(phi)};
}

inline Eigen::Vector2d eval_side(const WeakSpace& space, std::size_t e, const Eigen::VectorXd& vb, double s)
{
    const auto            ne = Eigen::Index(space.dims().edge);
    const Eigen::VectorXd psi = space.edge_basis(e).eval(s);
    return {vb.head(ne).dot(psi), vb.tail(ne).dot(psi)};
}
} // namespace detail

/// s_T(v, w) = h_T^{-1} <Q_b v0 - vb, Q_b w0 - wb>_{dT}, evaluated by quadrature.
inline double stabilizer(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v, const LocalWeakFunction& w)
{
    const auto& mesh = space.mesh();
    const auto& data = space.element(t);
    const auto& rule = space.edge_rule();
    double      sum = 0;
    for (std::size_t l = 0; l < 3; ++l)
    {
        const std::size_t     e = mesh.element_edges(t)[l];
        const Eigen::VectorXd dv = data.trace[l] * v.v0 - v.vb[l];
        const Eigen::VectorXd dw = data.trace[l] * w.v0 - w.vb[l];
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            const double s = rule.points[q].x();
            sum += rule.weights[q] * mesh.edge_length(e)
                   * detail::eval_side(space, e, dv, s).dot(detail::eval_side(space, e, dw, s));
        }
    }
    return sum / mesh.diameter(t);
}

/// a_T(v, w) = (grad_w v, grad_w w)_T + s_T(v, w).
inline double form_a(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v, const LocalWeakFunction& w)
{
    const Eigen::VectorXd gv = weak_gradient(space, t, v);
    const Eigen::VectorXd gw = weak_gradient(space, t, w);
    const auto&           rule = space.element(t).rule;
    double                sum = 0;
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
        const auto& x = rule.points[q];
        sum += rule.weights[q]
               * (detail::eval_tensor(space, t, gv, x).array() * detail::eval_tensor(space, t, gw, x).array()).sum();
    }
    return sum + stabilizer(space, t, v, w);
}

/// b_T(v, q) = (div_w v, q)_T with q given by its P_{k-1}(T) coefficients.
inline double form_b(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v, const Eigen::VectorXd& q)
{
    const Eigen::VectorXd dv = weak_divergence(space, t, v);
    const auto&           data = space.element(t);
    const auto            nq = Eigen::Index(space.dims().scalar_km1);
    double                sum = 0;
    for (std::size_t i = 0; i < data.rule.size(); ++i)
    {
        const Eigen::VectorXd phi = data.basis.eval(data.rule.points[i]).head(nq);
        sum += data.rule.weights[i] * dv.dot(phi) * q.dot(phi);
    }
    return sum;
}

/// c_T(v, lambda) = <vb, lambda>_{dT}, lambda given per side.
inline double form_c(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v,
                     const std::array<Eigen::VectorXd, 3>& lambda)
{
    const auto& mesh = space.mesh();
    const auto& rule = space.edge_rule();
    double      sum = 0;
    for (std::size_t l = 0; l < 3; ++l)
    {
        const std::size_t e = mesh.element_edges(t)[l];
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            const double s = rule.points[q].x();
            sum += rule.weights[q] * mesh.edge_length(e)
                   * detail::eval_side(space, e, v.vb[l], s).dot(detail::eval_side(space, e, lambda[l], s));
        }
    }
    return sum;
}

/// Element matrices for every element of a space.
class FormCache
{
public:
    explicit FormCache(const WeakSpace& space) : m_space(&space)
    {
        m_forms.reserve(space.mesh().num_elements());
        for (std::size_t t = 0; t < space.mesh().num_elements(); ++t)
            m_forms.push_back(assemble_local(space, t));
    }

    const WeakSpace& space() const { return *m_space; }
    const LocalForms& operator[](std::size_t t) const { return m_forms.at(t); }
    std::size_t size() const { return m_forms.size(); }

private:
    const WeakSpace*        m_space;
    std::vector<LocalForms> m_forms;
};

} // namespace wgstokes

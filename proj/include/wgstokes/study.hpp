#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "forms.hpp"
#include "mesh.hpp"
#include "reduction.hpp"
#include "systems.hpp"
#include "weakcalc.hpp"

namespace wgstokes
{

/// Solves a manufactured case with one of the three schemes.
inline StokesSolution solve_scheme(const FormCache& forms, Scheme scheme, const ManufacturedCase& c)
{
    switch (scheme)
    {
    case Scheme::wg: return solve(assemble_wg(forms, c.f, c.g()));
    case Scheme::hwg: return solve(assemble_hwg(forms, c.f, c.g()));
    case Scheme::reduced: return solve(build_reduced(forms, c.f, c.g()));
    }
    throw std::logic_error("solve_scheme: unknown scheme");
}

/// Error row of one mesh. `h` overrides the reported mesh size.
inline ErrorRow run_level(const TriMesh& mesh, int k, Scheme scheme, const ManufacturedCase& c,
                          std::optional<double> h = std::nullopt)
{
    const WeakSpace space(mesh, k);
    const FormCache forms(space);
    ErrorRow        row = error_norms(forms, solve_scheme(forms, scheme, c), c);
    if (h)
        row.h = *h;
    return row;
}

/// Convergence study on uniform n x n meshes of the unit square, reporting
/// h = 1/n.
inline ConvergenceRecord run_study(int example, int k, const std::vector<std::size_t>& levels, Scheme scheme)
{
    const auto        c = make_case(example);
    ConvergenceRecord rec;
    for (const auto n : levels)
    {
        rec.n.push_back(n);
        rec.rows.push_back(run_level(build_uniform_square(n), k, scheme, c, 1.0 / double(n)));
    }
    return rec;
}

/// Observed orders log(err_{i-1}/err_i) / log(h_{i-1}/h_i); reduces to
/// orders() when h halves.
inline std::vector<double> observed_orders(const ConvergenceRecord& rec, double ErrorRow::*field)
{
    std::vector<double> out = rec.order(field);
    for (std::size_t i = 1; i < out.size(); ++i)
    {
        const double ratio = rec.rows[i - 1].h / rec.rows[i].h;
        if (std::isfinite(out[i]) && ratio > 0 && ratio != 1.0)
            out[i] *= std::log(2.0) / std::log(ratio);
        else if (ratio == 1.0)
            out[i] = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

inline constexpr double ErrorRow::*error_fields[4] = {&ErrorRow::triple, &ErrorRow::l2u, &ErrorRow::p, &ErrorRow::lambda};

inline void write_csv(std::ostream& os, const ConvergenceRecord& rec)
{
    const auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::vector<std::vector<double>> ord;
    for (const auto f : error_fields)
        ord.push_back(observed_orders(rec, f));

    os << "h,err_triple,ord_triple,err_l2u,ord_l2u,err_p,ord_p,err_lambda,ord_lambda\n";
    for (std::size_t i = 0; i < rec.rows.size(); ++i)
    {
        os << num(rec.rows[i].h);
        for (std::size_t j = 0; j < 4; ++j)
        {
            os << ',' << num(rec.rows[i].*error_fields[j]) << ',';
            if (i > 0)
                os << num(ord[j][i]);
        }
        os << '\n';
    }
}

/// Plain-text table, errors in 4-significant-digit scientific notation.
inline void write_table(std::ostream& os, const ConvergenceRecord& rec)
{
    const auto sci = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return std::string(buf);
    };
    const auto ord = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    const auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    std::vector<std::vector<double>> orders;
    for (const auto f : error_fields)
        orders.push_back(observed_orders(rec, f));

    os << pad("h", 10);
    for (const char* name : {"|||e_h|||", "||e_h||", "||eps_h||", "||Qb lam - lam_h||"})
        os << pad(name, 20) << pad("order", 9);
    os << '\n';
    for (std::size_t i = 0; i < rec.rows.size(); ++i)
    {
        const bool uniform = i < rec.n.size() && rec.n[i] > 0;
        os << pad(uniform ? "1/" + std::to_string(rec.n[i]) : sci(rec.rows[i].h), 10);
        for (std::size_t j = 0; j < 4; ++j)
            os << pad(sci(rec.rows[i].*error_fields[j]), 20) << pad(i == 0 ? "" : ord(orders[j][i]), 9);
        os << '\n';
    }
}

/// Largest relative difference over all levels and the four norms.
inline double max_relative_difference(const ConvergenceRecord& a, const ConvergenceRecord& ref)
{
    if (a.rows.size() != ref.rows.size())
        throw std::invalid_argument("max_relative_difference: level counts differ");
    double worst = 0;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (const auto f : error_fields)
        {
            const double r = ref.rows[i].*f;
            const double d = std::abs(a.rows[i].*f - r);
            worst = std::max(worst, r != 0 ? d / std::abs(r) : d);
        }
    return worst;
}

struct CheckResult
{
    std::string name;
    double      value = 0;
    std::string bound;
    bool        pass = false;
};

/// Finest-pair order criteria of the two manufactured cases.
inline std::vector<CheckResult> check_orders(int example, const ConvergenceRecord& rec)
{
    std::vector<CheckResult> out;
    const auto last = [&](double ErrorRow::*f) {
        const auto o = observed_orders(rec, f);
        return o.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : o.back();
    };
    const auto near = [&](const char* name, double v, double target) {
        out.push_back({name, v, "within 0.05 of " + std::to_string(target).substr(0, 3), std::abs(v - target) <= 0.05});
    };
    const auto atleast = [&](const char* name, double v, double lo) {
        out.push_back({name, v, ">= " + std::to_string(lo).substr(0, 3), v >= lo});
    };
    near("ord_triple", last(&ErrorRow::triple), 1.0);
    near("ord_l2u", last(&ErrorRow::l2u), 2.0);
    if (example == 1)
    {
        near("ord_p", last(&ErrorRow::p), 1.0);
        atleast("ord_lambda", last(&ErrorRow::lambda), 1.9);
    }
    else
    {
        atleast("ord_p", last(&ErrorRow::p), 1.5);
        atleast("ord_lambda", last(&ErrorRow::lambda), 1.6);
    }
    return out;
}

/// Random-data checks of the reduction operators on one mesh: superposition
/// S_f(w; p) = S_0(w; p) + S_f(0; 0), and
/// <S_0(w; p), q> = a(w_h, q_h) - b(q_h, p) for w, q vanishing on the boundary.
inline std::vector<CheckResult> check_schur_identities(const FormCache& forms, const VectorField& f, unsigned seed,
                                                       int samples = 10)
{
    const auto& space = forms.space();
    const auto& mesh = space.mesh();
    const auto& d = space.dims();
    const Condenser loaded(forms, f), homogeneous(forms);

    std::mt19937_64                        gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto random_vec = [&](std::size_t n) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (auto& x : v)
            x = U(gen);
        return v;
    };
    const auto random_edges = [&](bool interior_only) {
        std::vector<Eigen::VectorXd> v(mesh.num_edges());
        for (std::size_t e = 0; e < mesh.num_edges(); ++e)
            v[e] = interior_only && mesh.is_boundary(e) ? Eigen::VectorXd::Zero(Eigen::Index(d.side())) : random_vec(d.side());
        return v;
    };

    double sup = 0, lemma = 0;
    for (int s = 0; s < samples; ++s)
    {
        const auto                   w = random_edges(false);
        std::vector<Eigen::VectorXd> p(mesh.num_elements()), zp(mesh.num_elements());
        for (std::size_t t = 0; t < mesh.num_elements(); ++t)
        {
            p[t] = random_vec(d.pressure());
            zp[t] = Eigen::VectorXd::Zero(Eigen::Index(d.pressure()));
        }
        const std::vector<Eigen::VectorXd> zw(mesh.num_edges(), Eigen::VectorXd::Zero(Eigen::Index(d.side())));
        const auto sf = schur_operator(loaded, w, p);
        const auto s0 = schur_operator(loaded, w, p, false);
        const auto sf00 = schur_operator(loaded, zw, zp);
        double     diff = 0, scale = 1;
        for (std::size_t e = 0; e < mesh.num_edges(); ++e)
        {
            diff = std::max(diff, (sf[e] - s0[e] - sf00[e]).cwiseAbs().maxCoeff());
            scale = std::max(scale, sf[e].cwiseAbs().maxCoeff());
        }
        sup = std::max(sup, diff / scale);

        const auto wi = random_edges(true), qi = random_edges(true);
        const auto s00 = schur_operator(homogeneous, wi, p);
        double     lhs = 0, rhs = 0;
        for (std::size_t e = 0; e < mesh.num_edges(); ++e)
            lhs += s00[e].dot(qi[e]);
        for (std::size_t t = 0; t < mesh.num_elements(); ++t)
        {
            LocalWeakFunction wt, qt;
            wt.vb = detail::sides_of(mesh, t, wi);
            wt.v0 = local_lift(homogeneous, t, wt.vb, p[t]);
            qt.vb = detail::sides_of(mesh, t, qi);
            qt.v0 = random_vec(d.interior());
            rhs += qt.flat().dot(forms[t].A * wt.flat()) - qt.flat().dot(forms[t].B * p[t]);
        }
        lemma = std::max(lemma, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return {{"schur superposition", sup, "<= 1e-9", sup <= 1e-9}, {"schur energy identity", lemma, "<= 1e-9", lemma <= 1e-9}};
}

} // namespace wgstokes

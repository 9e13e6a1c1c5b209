// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance          all criteria
//   acceptance 3        criterion 3 only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <wgstokes/study.hpp>

#include "support.hpp"

using namespace wgstokes;

namespace
{

struct Line
{
    bool        pass;
    std::string text;
};

const std::vector<std::size_t> full_levels{4, 8, 16, 32, 64, 128};

const ConvergenceRecord& study(int example)
{
    static std::map<int, ConvergenceRecord> cache;
    auto                                    it = cache.find(example);
    if (it == cache.end())
        it = cache.emplace(example, run_study(example, 1, full_levels, Scheme::reduced)).first;
    return it->second;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Line orders_line(int example, const std::vector<std::string>& names)
{
    bool        ok = true;
    std::string text;
    for (const auto& c : check_orders(example, study(example)))
        for (const auto& n : names)
            if (c.name == n)
            {
                ok = ok && c.pass;
                text += c.name + " = " + fmt("%.4f", c.value) + " (" + c.bound + ")" + (c.pass ? "" : " [miss]") + "; ";
            }
    return {ok, text};
}

Line criterion1() { return orders_line(1, {"ord_triple", "ord_l2u"}); }

Line criterion2()
{
    const auto   mesh = build_uniform_square(8);
    const auto   row = run_level(mesh, 1, Scheme::reduced, make_case(1));
    const double rt = row.triple / 2.9253 - 1, rl = row.l2u / 2.3750e-01 - 1;
    const bool   ok_t = std::abs(rt) <= 0.20, ok_l = std::abs(rl) <= 0.20;
    return {ok_t && ok_l, "|||e_h||| = " + fmt("%.5g", row.triple) + " (" + fmt("%+.1f%%", 100 * rt) + ")" + (ok_t ? "" : " [miss]")
                            + "; ||e_h|| = " + fmt("%.5g", row.l2u) + " (" + fmt("%+.1f%%", 100 * rl) + ")"
                            + (ok_l ? "" : " [miss]") + "; bound +-20% at h = 1/8"};
}

Line criterion3() { return orders_line(1, {"ord_p", "ord_lambda"}); }

Line criterion4() { return orders_line(2, {"ord_triple", "ord_l2u", "ord_p", "ord_lambda"}); }

Line criterion5()
{
    double worst = 0;
    for (int ex : {1, 2})
    {
        const std::vector<std::size_t> levels{4, 8, 16};
        const auto                     wg = run_study(ex, 1, levels, Scheme::wg);
        for (Scheme s : {Scheme::hwg, Scheme::reduced})
            worst = std::max(worst, max_relative_difference(run_study(ex, 1, levels, s), wg));
    }
    return {worst <= 1e-6, "max relative discrepancy vs wg = " + fmt("%.3e", worst) + " (<= 1e-6)"};
}

Line criterion6()
{
    const auto      mesh = build_uniform_square(4);
    const LocalDims d(1);
    const auto      wg = DofLayout(Scheme::wg, mesh, d).unknowns();
    const auto      red = DofLayout(Scheme::reduced, mesh, d).unknowns();
    return {wg == 336 && red == 144,
            "WG = " + std::to_string(wg) + " (336), reduced = " + std::to_string(red) + " (144)"};
}

// (grad_w v, q)_T + (v0, div q)_T - <vb, q n>_dT and the divergence analogue,
// with q random in [P_{k-1}]^{2x2} / P_{k-1}, by direct quadrature.
std::pair<double, double> defining_residuals(const WeakSpace& space, std::size_t t, const LocalWeakFunction& v)
{
    const auto&     mesh = space.mesh();
    const auto&     d = space.dims();
    const auto&     data = space.element(t);
    const auto      nq = Eigen::Index(d.pressure());
    const auto&     el = mesh.element(t);
    const auto      rule = map_rule(triangle_quadrature(2 * d.k + 2), mesh.vertex(el[0]), mesh.vertex(el[1]), mesh.vertex(el[2]));
    const auto      qg = wgtest::random_vector(4 * nq);
    const auto      qd = wgtest::random_vector(nq);
    const auto      gv = weak_gradient(space, t, v);
    const auto      dv = weak_divergence(space, t, v);
    const auto      Q = [&](const Point& x) { return detail::eval_tensor(space, t, qg, x); };
    const auto      divQ = [&](const Point& x) {
        const Eigen::MatrixXd g = data.basis.grad(x).topRows(nq);
        Eigen::Vector2d       out;
        for (Eigen::Index i = 0; i < 2; ++i)
            out(i) = qg.segment((2 * i) * nq, nq).dot(g.col(0)) + qg.segment((2 * i + 1) * nq, nq).dot(g.col(1));
        return out;
    };
    const auto qs = [&](const Point& x) { return qd.dot(data.basis.eval(x).head(nq)); };
    const auto grad_qs = [&](const Point& x) -> Eigen::Vector2d {
        return data.basis.grad(x).topRows(nq).transpose() * qd;
    };

    double rg = 0, rd = 0;
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        const auto&           x = rule.points[i];
        const Eigen::Vector2d v0 = detail::eval_interior(space, t, v.v0, x);
        rg += rule.weights[i] * ((detail::eval_tensor(space, t, gv, x).array() * Q(x).array()).sum() + v0.dot(divQ(x)));
        rd += rule.weights[i] * (dv.dot(data.basis.eval(x).head(nq)) * qs(x) + v0.dot(grad_qs(x)));
    }
    const auto edge_rule = gauss_legendre(d.k + 2);
    for (std::size_t l = 0; l < 3; ++l)
    {
        const std::size_t e = mesh.element_edges(t)[l];
        const Point&      n = mesh.normal(t, l);
        for (std::size_t i = 0; i < edge_rule.size(); ++i)
        {
            const double          s = edge_rule.points[i].x();
            const double          w = edge_rule.weights[i] * mesh.edge_length(e);
            const Point           x = mesh.edge_point(e, s);
            const Eigen::Vector2d vb = detail::eval_side(space, e, v.vb[l], s);
            rg -= w * vb.dot(Q(x) * n);
            rd -= w * vb.dot(n) * qs(x);
        }
    }
    return {std::abs(rg), std::abs(rd)};
}

Line criterion7()
{
    const auto                start = std::chrono::steady_clock::now();
    std::vector<std::string>  parts;
    bool                      ok = true;
    const auto record = [&](const std::string& name, double value, double bound) {
        const bool pass = value <= bound;
        ok = ok && pass;
        parts.push_back(name + " " + fmt("%.2e", value) + (pass ? "" : " [miss]"));
    };

    // commutativity over 200 random polynomial fields
    {
        const auto mesh = build_uniform_square(3);
        double     worst = 0;
        for (int k : {1, 2})
        {
            const WeakSpace space(mesh, k);
            for (int i = 0; i < 100; ++i)
            {
                const wgtest::PolyField u(k + 1);
                const std::size_t       t = std::size_t(i * 7) % mesh.num_elements();
                const auto v = project_weak(space, t, [&](const Point& x) { return u(x); });
                const auto g = project_tensor(space, t, [&](const Point& x) { return u.grad(x); });
                const auto dd = project_scalar(space, t, [&](const Point& x) { return u.grad(x).trace(); });
                worst = std::max(worst, (weak_gradient(space, t, v) - g).cwiseAbs().maxCoeff());
                worst = std::max(worst, (weak_divergence(space, t, v) - dd).cwiseAbs().maxCoeff());
            }
        }
        record("commutativity", worst, 1e-9);
    }

    const auto      mesh = build_uniform_square(4);
    const WeakSpace space(mesh, 1);
    const FormCache forms(space);
    const auto&     d = space.dims();

    // a(v,v) = |||v|||^2 over 100 random v
    {
        double worst = 0;
        for (int i = 0; i < 100; ++i)
        {
            StokesSolution s;
            s.sides = SideField::zero(mesh, d.side());
            double sum = 0;
            for (std::size_t t = 0; t < mesh.num_elements(); ++t)
            {
                const auto v = wgtest::random_weak(d);
                s.interior.push_back(v.v0);
                s.pressure.push_back(Eigen::VectorXd::Zero(Eigen::Index(d.pressure())));
                for (std::size_t l = 0; l < 3; ++l)
                    s.sides.at(t, l) = v.vb[l];
                sum += form_a(space, t, v, v);
            }
            const double n = norm_triple(forms, s);
            worst = std::max(worst, std::abs(n * n - sum) / sum);
        }
        record("a(v,v)=|||v|||^2", worst, 1e-10);
    }

    // defining identities of the weak gradient and divergence
    {
        double wg = 0, wd = 0;
        for (int k : {1, 2})
        {
            const WeakSpace sp(mesh, k);
            for (int i = 0; i < 20; ++i)
            {
                const auto [rg, rd] = defining_residuals(sp, std::size_t(i * 3) % mesh.num_elements(), wgtest::random_weak(sp.dims()));
                wg = std::max(wg, rg);
                wd = std::max(wd, rd);
            }
        }
        record("weak gradient identity", wg, 1e-10);
        record("weak divergence identity", wd, 1e-10);
    }

    // superposition and the energy identity over 50 random inputs
    {
        double sup = 0, lemma = 0;
        for (const auto& r : check_schur_identities(forms, make_case(1).f, 2024, 50))
            (r.name == "schur superposition" ? sup : lemma) = r.value;
        record("S_f superposition", sup, 1e-9);
        record("S_0 energy identity", lemma, 1e-9);
    }

    // zero data gives the zero solution, and HWG traces are continuous
    {
        const VectorField zero = [](const Point&) -> Eigen::Vector2d { return Eigen::Vector2d::Zero(); };
        double           zmax = 0;
        for (Scheme s : {Scheme::wg, Scheme::hwg, Scheme::reduced})
        {
            ManufacturedCase z;
            z.f = zero;
            z.u = zero;
            const auto sol = solve_scheme(forms, s, z);
            for (std::size_t t = 0; t < mesh.num_elements(); ++t)
            {
                zmax = std::max(zmax, sol.interior[t].cwiseAbs().maxCoeff());
                zmax = std::max(zmax, sol.pressure[t].cwiseAbs().maxCoeff());
                for (std::size_t l = 0; l < 3; ++l)
                    zmax = std::max(zmax, sol.sides.at(t, l).cwiseAbs().maxCoeff());
            }
        }
        record("zero data", zmax, 1e-10);

        double jmax = 0;
        for (int ex : {1, 2})
        {
            const auto h = solve(assemble_hwg(forms, make_case(ex).f, make_case(ex).g()));
            for (std::size_t e = 0; e < mesh.num_edges(); ++e)
                if (!mesh.is_boundary(e))
                    jmax = std::max(jmax, jump(mesh, h.sides, e).cwiseAbs().maxCoeff());
        }
        record("HWG trace jump", jmax, 1e-8);
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record("time [s]", secs, 30.0);
    std::string text;
    for (const auto& p : parts)
        text += p + "; ";
    return {ok, text};
}

Line criterion8()
{
    ManufacturedCase c;
    c.u = [](const Point& x) -> Eigen::Vector2d { return {x.x() + 2 * x.y() + 0.5, 3 * x.x() - x.y() - 1}; };
    c.grad_u = [](const Point&) {
        Eigen::Matrix2d g;
        g << 1, 2, 3, -1;
        return g;
    };
    c.p = [](const Point&) { return 0.0; };
    c.f = [](const Point&) -> Eigen::Vector2d { return Eigen::Vector2d::Zero(); };

    double worst = 0;
    for (std::size_t n : {2u, 4u, 8u})
        for (Scheme s : {Scheme::wg, Scheme::hwg, Scheme::reduced})
        {
            const auto e = run_level(build_uniform_square(n), 1, s, c);
            worst = std::max({worst, e.triple, e.l2u, e.p, e.lambda});
        }
    return {worst <= 1e-9, "largest error over all schemes and norms = " + fmt("%.2e", worst) + " (<= 1e-9)"};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<Line()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
    std::vector<int> which;
    if (argc > 1)
        which.push_back(std::atoi(argv[1]));
    else
        for (int i = 1; i <= int(criteria.size()); ++i)
            which.push_back(i);

    bool all = true;
    for (int i : which)
    {
        if (i < 1 || i > int(criteria.size()))
        {
            std::fprintf(stderr, "no criterion %d\n", i);
            return 2;
        }
        Line l;
        try
        {
            l = criteria[std::size_t(i - 1)]();
        }
        catch (const std::exception& e)
        {
            l = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d: %s\n", l.pass ? "PASS" : "FAIL", i, l.text.c_str());
        std::fflush(stdout);
        all = all && l.pass;
    }
    return all ? 0 : 1;
}

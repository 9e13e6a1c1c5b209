// Convergence studies for the weak Galerkin Stokes schemes.
//
//   wgstokes --example 1 --levels 4,8,16,32 --method wg --out ex1.csv
//   wgstokes --example 2 --method schur --levels 4,8,16,32,64 --check orders

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <wgstokes/study.hpp>

using namespace wgstokes;

namespace
{

constexpr int exit_check_failed = 1;
constexpr int exit_bad_flags = 2;
constexpr int exit_solver = 3;

struct RunConfig
{
    int                      example = 1;
    int                      k = 1;
    std::vector<std::size_t> levels{4, 8, 16, 32};
    Scheme                   method = Scheme::wg;
    std::optional<Scheme>    compare;
    std::string              out;
    std::string              check;
    std::string              mesh;
    std::optional<TriMesh>   imported;
    unsigned                 seed = 1;
};

ConvergenceRecord run(const RunConfig& cfg, Scheme scheme)
{
    if (!cfg.imported)
        return run_study(cfg.example, cfg.k, cfg.levels, scheme);
    ConvergenceRecord rec;
    rec.n.push_back(0);
    rec.rows.push_back(run_level(*cfg.imported, cfg.k, scheme, make_case(cfg.example)));
    return rec;
}

bool report(const std::vector<CheckResult>& checks)
{
    bool ok = true;
    for (const auto& c : checks)
    {
        std::printf("%s  %-24s %.6g (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.bound.c_str());
        ok = ok && c.pass;
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    CLI::App  app{"Weak Galerkin Stokes convergence studies"};

    const std::map<std::string, Scheme> schemes{{"wg", Scheme::wg}, {"hwg", Scheme::hwg}, {"schur", Scheme::reduced}};
    Scheme compare = Scheme::wg;

    app.add_option("--example", cfg.example, "manufactured solution")->check(CLI::IsMember({1, 2}));
    app.add_option("--k", cfg.k, "polynomial degree")->check(CLI::PositiveNumber);
    auto* levels = app.add_option("--levels", cfg.levels, "mesh divisions n, comma separated")->delimiter(',');
    app.add_option("--method", cfg.method, "wg, hwg or schur")->transform(CLI::CheckedTransformer(schemes));
    auto* cmp = app.add_option("--compare", compare, "second method to compare against")
                  ->transform(CLI::CheckedTransformer(schemes));
    app.add_option("--out", cfg.out, "CSV output path");
    app.add_option("--check", cfg.check, "orders, equivalence or all")
      ->check(CLI::IsMember({"orders", "equivalence", "all"}));
    auto* mesh = app.add_option("--mesh", cfg.mesh, "mesh file (V E T header, vertices, triangles)")
                   ->check(CLI::ExistingFile);
    app.add_option("--seed", cfg.seed, "seed for the random operator checks");
    mesh->excludes(levels);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_bad_flags;
    }
    if (cmp->count())
        cfg.compare = compare;
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        if (cfg.levels[i] == 0 || (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]))
        {
            std::cerr << "--levels must be positive and strictly increasing\n";
            return exit_bad_flags;
        }
    if (!cfg.mesh.empty())
    {
        try
        {
            cfg.imported = read_mesh_file(cfg.mesh);
        }
        catch (const std::exception& e)
        {
            std::cerr << cfg.mesh << ": " << e.what() << '\n';
            return exit_bad_flags;
        }
    }

    bool ok = true;
    try
    {
        const auto rec = run(cfg, cfg.method);
        std::printf("example %d, k = %d, method %s\n", cfg.example, cfg.k, to_string(cfg.method));
        write_table(std::cout, rec);
        std::cout.flush();

        if (!cfg.out.empty())
        {
            std::ofstream os(cfg.out, std::ios::binary);
            if (!os)
            {
                std::cerr << "cannot write " << cfg.out << '\n';
                return exit_bad_flags;
            }
            write_csv(os, rec);
        }

        if (cfg.compare)
        {
            const double d = max_relative_difference(rec, run(cfg, *cfg.compare));
            std::printf("max relative discrepancy %s vs %s: %.3e\n", to_string(cfg.method), to_string(*cfg.compare), d);
        }

        if (cfg.check == "orders" || cfg.check == "all")
            ok = report(check_orders(cfg.example, rec)) && ok;

        if (cfg.check == "equivalence" || cfg.check == "all")
        {
            std::vector<CheckResult> checks;
            for (const auto& [name, s] : schemes)
                if (s != cfg.method)
                {
                    const double d = max_relative_difference(run(cfg, s), rec);
                    checks.push_back({name + " vs " + to_string(cfg.method), d, "<= 1e-6", d <= 1e-6});
                }
            const TriMesh coarse = cfg.imported ? *cfg.imported : build_uniform_square(cfg.levels.front());
            const WeakSpace space(coarse, cfg.k);
            const FormCache forms(space);
            for (auto& c : check_schur_identities(forms, make_case(cfg.example).f, cfg.seed))
                checks.push_back(std::move(c));
            ok = report(checks) && ok;
        }
    }
    catch (const SingularSystemError& e)
    {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    }
    catch (const std::runtime_error& e)
    {
        std::cerr << "solver failure: " << e.what() << '\n';
        return exit_solver;
    }
    return ok ? 0 : exit_check_failed;
}

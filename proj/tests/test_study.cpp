#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <wgstokes/study.hpp>

using namespace wgstokes;

namespace
{

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream       is(s);
    for (std::string l; std::getline(is, l);)
        out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::string              cur;
    for (char ch : s)
        if (ch == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else
            cur += ch;
    out.push_back(cur);
    return out;
}

ConvergenceRecord synthetic(const std::vector<double>& h, double c1, double c2)
{
    ConvergenceRecord rec;
    for (double hi : h)
    {
        rec.n.push_back(std::size_t(std::lround(1 / hi)));
        ErrorRow r;
        r.h = hi;
        r.triple = c1 * hi;
        r.l2u = c2 * hi * hi;
        r.p = hi;
        r.lambda = hi * hi;
        rec.rows.push_back(r);
    }
    return rec;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(WGSTOKES_CLI) + " " + args + " > /dev/null 2>&1";
    const int         status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("wgstokes_test_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST(Study, CsvLayoutAndDeterminism)
{
    const auto        rec = run_study(2, 1, {2, 4}, Scheme::reduced);
    std::ostringstream a, b;
    write_csv(a, rec);
    write_csv(b, run_study(2, 1, {2, 4}, Scheme::reduced));
    EXPECT_EQ(a.str(), b.str());

    const auto ls = lines(a.str());
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "h,err_triple,ord_triple,err_l2u,ord_l2u,err_p,ord_p,err_lambda,ord_lambda");
    const auto first = split(ls[1]), second = split(ls[2]);
    ASSERT_EQ(first.size(), 9u);
    ASSERT_EQ(second.size(), 9u);
    EXPECT_EQ(std::stod(first[0]), 0.5);
    for (int j : {2, 4, 6, 8})
    {
        EXPECT_TRUE(first[std::size_t(j)].empty());
        EXPECT_FALSE(second[std::size_t(j)].empty());
    }
    // full precision round trip
    EXPECT_EQ(std::stod(second[1]), rec.rows[1].triple);
    EXPECT_NEAR(std::stod(second[2]), std::log2(rec.rows[0].triple / rec.rows[1].triple), 1e-15);
}

TEST(Study, TableShowsFractionalMeshSizes)
{
    std::ostringstream os;
    write_table(os, synthetic({0.25, 0.125}, 1, 1));
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[1].rfind("1/4", 0), 0u);
    EXPECT_EQ(ls[2].rfind("1/8", 0), 0u);
    EXPECT_NE(ls[1].find("2.500e-01"), std::string::npos);
    EXPECT_NE(ls[2].find("2.0000"), std::string::npos);
}

TEST(Study, ObservedOrdersUseMeshRatio)
{
    auto rec = synthetic({0.3, 0.1}, 2, 5);
    const auto o = observed_orders(rec, &ErrorRow::l2u);
    EXPECT_NEAR(o[1], 2.0, 1e-12);
    EXPECT_NEAR(observed_orders(rec, &ErrorRow::triple)[1], 1.0, 1e-12);
}

TEST(Study, OrderChecks)
{
    const auto good = synthetic({0.25, 0.125, 0.0625}, 3, 7);
    for (const auto& c : check_orders(1, good))
        EXPECT_TRUE(c.pass) << c.name;

    auto bad = good;
    bad.rows.back().l2u *= 2;
    bool l2_failed = false;
    for (const auto& c : check_orders(1, bad))
        if (c.name == "ord_l2u")
            l2_failed = !c.pass;
    EXPECT_TRUE(l2_failed);

    // example 2 pressure and multiplier bounds are one-sided lower bounds
    bool slow_p = false;
    for (const auto& c : check_orders(2, good))
        if (c.name == "ord_p")
            slow_p = !c.pass;
    EXPECT_TRUE(slow_p);
    auto fast = good;
    fast.rows.back().p /= 2;
    for (const auto& c : check_orders(2, fast))
        EXPECT_TRUE(c.pass) << c.name;
    bool p_failed = false;
    for (const auto& c : check_orders(1, fast))
        if (c.name == "ord_p")
            p_failed = !c.pass;
    EXPECT_TRUE(p_failed);
}

TEST(Study, RelativeDifference)
{
    const auto a = synthetic({0.5, 0.25}, 1, 1);
    auto       b = a;
    EXPECT_EQ(max_relative_difference(a, b), 0.0);
    b.rows[1].lambda *= 1.001;
    EXPECT_NEAR(max_relative_difference(b, a), 1e-3, 1e-12);
    b.rows.pop_back();
    EXPECT_THROW(max_relative_difference(a, b), std::invalid_argument);
}

TEST(Study, SchurMatchesWeakGalerkin)
{
    for (int ex : {1, 2})
    {
        const auto wg = run_study(ex, 1, {4, 8}, Scheme::wg);
        EXPECT_LT(max_relative_difference(run_study(ex, 1, {4, 8}, Scheme::reduced), wg), 1e-7);
        EXPECT_LT(max_relative_difference(run_study(ex, 1, {4, 8}, Scheme::hwg), wg), 1e-7);
    }
}

TEST(Cli, SuccessWritesCsv)
{
    const auto out = scratch("ok.csv");
    EXPECT_EQ(run_cli("--example 2 --levels 2,4 --method schur --out " + out.string()), 0);
    std::ifstream is(out);
    std::string   header;
    std::getline(is, header);
    EXPECT_EQ(header, "h,err_triple,ord_triple,err_l2u,ord_l2u,err_p,ord_p,err_lambda,ord_lambda");
    std::filesystem::remove(out);
}

TEST(Cli, EquivalenceCheckPasses)
{
    EXPECT_EQ(run_cli("--example 1 --levels 2,4 --method schur --compare wg --check equivalence"), 0);
}

TEST(Cli, FailedCheckExitsOne)
{
    // far too coarse for the asymptotic orders
    EXPECT_EQ(run_cli("--example 1 --levels 1,2 --check orders"), 1);
}

TEST(Cli, BadFlagsExitTwo)
{
    EXPECT_EQ(run_cli("--example 3"), 2);
    EXPECT_EQ(run_cli("--method lu"), 2);
    EXPECT_EQ(run_cli("--levels 8,4"), 2);
    EXPECT_EQ(run_cli("--levels 0,4"), 2);
    EXPECT_EQ(run_cli("--k 0"), 2);
    EXPECT_EQ(run_cli("--no-such-flag"), 2);
    EXPECT_EQ(run_cli("--check nothing"), 2);
    EXPECT_EQ(run_cli("--mesh /no/such/file.msh"), 2);
    EXPECT_EQ(run_cli("--levels 2 --out /no/such/dir/out.csv"), 2);
}

TEST(Cli, ImportedMesh)
{
    const auto path = scratch("square.msh");
    {
        std::ofstream os(path);
        write_mesh(os, build_uniform_square(3));
    }
    EXPECT_EQ(run_cli("--example 2 --mesh " + path.string()), 0);
    EXPECT_EQ(run_cli("--example 2 --mesh " + path.string() + " --levels 4"), 2);
    {
        std::ofstream os(path);
        os << "3 4 1\n0 0\n1 0\n0 1\n0 1 2\n";
    }
    EXPECT_EQ(run_cli("--mesh " + path.string()), 2);
    std::filesystem::remove(path);
}

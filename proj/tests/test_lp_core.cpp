#include "helpers.hpp"
#include "oracles.hpp"
#include "trussrob/linear_program.hpp"
#include "trussrob/truss_opt.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace trussrob;
using namespace trussrob::lp;

namespace {

// Random bounded LP: box bounds on every variable plus a few <= and = rows
// built around a known feasible point.
struct RandomLp {
    LinearProgram lp;
    oracle::DenseLp dense;
};

RandomLp random_lp(std::mt19937_64& rng, int n, int m_le, int m_eq) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    RandomLp out;
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0[j] = u(rng);

    out.dense.c.resize(n);
    out.dense.a.resize(2 * n + m_le, n);
    out.dense.b.resize(2 * n + m_le);
    out.dense.a.setZero();
    out.dense.a_eq.resize(m_eq, n);
    out.dense.b_eq.resize(m_eq);

    for (int j = 0; j < n; ++j) {
        const double c = u(rng);
        const double lo = x0[j] - pos(rng);
        const double hi = x0[j] + pos(rng);
        out.lp.add_variable(c, lo, hi);
        out.dense.c[j] = c;
        out.dense.a(2 * j, j) = 1.0;
        out.dense.b[2 * j] = hi;
        out.dense.a(2 * j + 1, j) = -1.0;
        out.dense.b[2 * j + 1] = -lo;
    }
    for (int i = 0; i < m_le; ++i) {
        std::vector<Term> terms;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        for (int j = 0; j < n; ++j) {
            row[j] = u(rng);
            terms.push_back({j, row[j]});
        }
        const double rhs = row.dot(x0) + pos(rng) * 0.5;
        out.lp.add_inequality(terms, rhs);
        out.dense.a.row(2 * n + i) = row;
        out.dense.b[2 * n + i] = rhs;
    }
    for (int i = 0; i < m_eq; ++i) {
        std::vector<Term> terms;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        for (int j = 0; j < n; ++j) {
            row[j] = u(rng);
            terms.push_back({j, row[j]});
        }
        const double rhs = row.dot(x0);
        out.lp.add_equality(terms, rhs);
        out.dense.a_eq.row(i) = row;
        out.dense.b_eq[i] = rhs;
    }
    return out;
}

}  // namespace

TEST_CASE("textbook LPs") {
    SUBCASE("optimal vertex") {
        LinearProgram lp;
        lp.add_variable(-1.0);
        lp.add_variable(-1.0);
        lp.add_inequality({{0, 1.0}, {1, 1.0}}, 1.0);
        const LpSolution sol = solve_simplex(lp);
        CHECK(sol.status == LpStatus::Optimal);
        CHECK(sol.objective_value == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("empty feasible set") {
        LinearProgram lp;
        lp.add_variable(0.0);
        lp.add_inequality({{0, 1.0}}, -1.0);
        CHECK(solve_simplex(lp).status == LpStatus::Infeasible);
    }
    SUBCASE("unbounded") {
        LinearProgram lp;
        lp.add_variable(-1.0);
        lp.add_variable(0.0);
        lp.add_inequality({{0, 1.0}, {1, -1.0}}, 1.0);
        CHECK(solve_simplex(lp).status == LpStatus::Unbounded);
    }
    SUBCASE("free variables and equalities") {
        // min x + 2y  s.t.  x - y = 1, y >= -3, x free
        LinearProgram lp;
        lp.add_variable(1.0, -kInf, kInf);
        lp.add_variable(2.0, -3.0, kInf);
        lp.add_equality({{0, 1.0}, {1, -1.0}}, 1.0);
        const LpSolution sol = solve_simplex(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.x[0] == doctest::Approx(-2.0));
        CHECK(sol.x[1] == doctest::Approx(-3.0));
        CHECK(sol.objective_value == doctest::Approx(-8.0));
    }
}

TEST_CASE("iteration limit") {
    std::mt19937_64 rng(3);
    RandomLp r = random_lp(rng, 8, 6, 2);
    SimplexConfig cfg;
    cfg.max_iters = 1;
    CHECK_THROWS_WITH_AS(solve_simplex(r.lp, cfg), doctest::Contains("iteration limit"), LpError);
}

TEST_CASE("malformed LPs are rejected") {
    LinearProgram lp;
    lp.add_variable(1.0, 2.0, 1.0);
    CHECK_THROWS_AS(lp.validate(), LpError);
    LinearProgram lp2;
    lp2.add_variable(1.0);
    lp2.add_inequality({{3, 1.0}}, 1.0);
    CHECK_THROWS_AS(solve_simplex(lp2), LpError);
}

TEST_CASE("random LPs agree with vertex enumeration") {
    std::mt19937_64 rng(20240611);
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + t % 4;
        const int m_le = 1 + t % 3;
        const int m_eq = t % 2;
        RandomLp r = random_lp(rng, n, m_le, m_eq);
        const auto expected = oracle::vertex_enumeration(r.dense);
        REQUIRE(expected.has_value());
        const LpSolution sol = solve_simplex(r.lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective_value == doctest::Approx(*expected).epsilon(1e-9));

        // optimality certificate
        CHECK(check_primal_feasibility(r.lp, sol.x).max() <= 1e-9);
        CHECK(dual_objective(r.lp, sol) == doctest::Approx(sol.objective_value).epsilon(1e-7));

        // basic solution: at least (variables - rows) variables sit on a bound
        int at_bound = 0;
        for (int j = 0; j < r.lp.num_vars(); ++j) {
            const double x = sol.x[static_cast<std::size_t>(j)];
            if (std::abs(x - r.lp.lower()[static_cast<std::size_t>(j)]) < 1e-9 ||
                std::abs(x - r.lp.upper()[static_cast<std::size_t>(j)]) < 1e-9) {
                ++at_bound;
            }
        }
        CHECK(at_bound >= r.lp.num_vars() - r.lp.num_equalities() - r.lp.num_inequalities());
    }
}

TEST_CASE("solves are deterministic") {
    std::mt19937_64 rng(11);
    RandomLp r = random_lp(rng, 6, 5, 1);
    const LpSolution a = solve_simplex(r.lp);
    const LpSolution b = solve_simplex(r.lp);
    CHECK(a.iterations == b.iterations);
    CHECK(a.x == b.x);
    CHECK(a.basis == b.basis);
}

TEST_CASE("three-bar nominal LP") {
    const GroundStructure gs = testing_support::three_bar();
    const TrussProblem p =
        make_truss_problem(gs, MaterialLimits{}, nominal_vertex_set(testing_support::three_bar_load(gs, 1e4, 0)));
    const LinearProgram lp = build_topology_lp(p);
    CHECK(lp.num_vars() == 6);
    CHECK(lp.num_equalities() == 2);
    CHECK(lp.num_inequalities() == 6);

    const LpSolution sol = solve_simplex(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(1e-4).epsilon(1e-9));

    SUBCASE("feasibility report") {
        const FeasibilityViolation zero = check_primal_feasibility(lp, std::vector<double>(6, 0.0));
        CHECK(zero.equality == doctest::Approx(1e4));
        CHECK(zero.inequality == 0.0);
        CHECK(zero.bounds == 0.0);

        std::vector<double> x = sol.x;
        const double tol = 1e-9;
        x[0] = -2 * tol;  // s_1 sits on its lower bound
        CHECK(check_primal_feasibility(lp, x).bounds == doctest::Approx(2 * tol));
    }
}

TEST_CASE("text dump") {
    LinearProgram lp;
    lp.add_variable(1.5, 0.0, kInf, "s0");
    lp.add_equality({{0, 2.0}}, 3.0, "eq0");
    std::ostringstream os;
    write_lp_text(lp, os);
    const std::string text = os.str();
    CHECK(text.find("var 0 s0 cost 1.5 lo 0 hi inf") != std::string::npos);
    CHECK(text.find("eq 0 eq0 rhs 3 : 0:2") != std::string::npos);
}

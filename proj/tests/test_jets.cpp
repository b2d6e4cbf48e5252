#include "fixtures.hpp"

#include <doctest.h>

using namespace relalg;

namespace {

VarTable jet_table(const JetSystem& j, int maxord) {
    VarTable vt;
    for (const auto& v : j.indep) vt.add(v, VarRole::base);
    for (const auto& c : j.coords_up_to(maxord)) vt.add(j.coord_name(c), VarRole::jet);
    return vt;
}

} // namespace

TEST_CASE("total derivatives") {
    auto full = fixture_pde("full_j1.pde");
    VarTable vt = jet_table(full, 1);
    CHECK(total_derivative(full, Expr::variable("u"), 0) == Expr::variable("u_x"));
    CHECK(total_derivative(full, parse_expr("x*u", vt), 0) == parse_expr("u_x*x + u", vt));

    auto uxy = fixture_pde("uxy.pde");
    CHECK(total_derivative(uxy, Expr::variable("u"), 1) == Expr::variable("u_y"));
    CHECK(total_derivative(uxy, Expr::variable("u"), 0) == Expr::variable("y"));

    // order overflow names the missing coordinate
    try {
        total_derivative(full, Expr::variable("u_y"), 1);
        CHECK(false);
    } catch (const StructureError& e) {
        CHECK(std::string(e.what()).find("u_yy") != std::string::npos);
    }
}

TEST_CASE("total derivatives commute below the substitution order") {
    JetSystem j2 = load_pde("indep x y\ndep u\norder 2\n");
    VarTable vt = jet_table(j2, 2);
    for (const char* text : {"x*u + y**2", "u**2 - x*y", "sin(x)*u"}) {
        Expr f = parse_expr(text, vt);
        Expr dxy = total_derivative(j2, total_derivative(j2, f, 0), 1);
        Expr dyx = total_derivative(j2, total_derivative(j2, f, 1), 0);
        CHECK(dxy == dyx);
    }
}

TEST_CASE("pde_to_algebroid") {
    {
        auto j = fixture_pde("uxy.pde");
        auto a = pde_to_algebroid(j);
        CHECK(a.frame == std::vector<std::string>{"theta1", "theta2"});
        CHECK(a.base_vars == std::vector<std::string>{"x", "y", "u"});
        CHECK(a.fiber_vars == std::vector<std::string>{"u_y"});
        VarTable vt = a.var_table();
        CHECK(a.dbase[0] == parse_form("theta1", a.frame, vt));
        CHECK(a.dbase[1] == parse_form("theta2", a.frame, vt));
        CHECK(a.dbase[2] == parse_form("y * theta1 + u_y * theta2", a.frame, vt));
        for (const auto& f : a.dtheta) CHECK(f.is_zero());
    }
    {
        auto j = fixture_pde("full_j1.pde");
        auto a = pde_to_algebroid(j);
        CHECK(a.fiber_vars == std::vector<std::string>{"u_x", "u_y"});
    }
    {
        auto j = fixture_pde("ode_exp.pde");
        auto a = pde_to_algebroid(j);
        CHECK(a.base_vars == std::vector<std::string>{"x", "u"});
        CHECK(a.fiber_vars.empty());
        CHECK(a.dbase[1] == parse_form("u * theta1", a.frame, a.var_table()));
    }
}

TEST_CASE("solved-form validation") {
    CHECK_THROWS_AS(load_pde("indep x y\ndep u\norder 1\neq u = y\n"), StructureError);
    CHECK_THROWS_AS(load_pde("indep x y\ndep u\norder 1\neq u_x = u_x\n"), StructureError);
    CHECK_THROWS_AS(load_pde("indep x y\ndep u\norder 1\neq u_x = y\neq u_x = x\n"),
                    StructureError);
    CHECK_THROWS_AS(load_pde("indep x y\ndep u\norder 1\neq u_x = u_y\neq u_y = x\n"),
                    StructureError); // rhs mentions a solved coordinate
    CHECK_THROWS_AS(load_pde("indep x y\ndep u\norder 1\neq u_x = w\n"), Error);
}

TEST_CASE("substitution idempotence of the solved form") {
    auto j = fixture_pde("uxy.pde");
    VarTable vt = jet_table(j, 1);
    std::map<std::string, Expr> sub;
    for (const auto& [lhs, rhs] : j.equations) sub[lhs] = rhs;
    Expr f = parse_expr("u_x**2 + u_y - x", vt);
    Expr once = f.substitute(sub);
    CHECK(once.substitute(sub) == once);
}

TEST_CASE("empty PDE prolongs to the next-order empty PDE") {
    for (int n = 1; n <= 2; ++n) {
        std::string header = n == 1 ? "indep x\ndep u\n" : "indep x y\ndep u\n";
        auto j1 = load_pde(header + "order 1\n");
        auto j2 = load_pde(header + "order 2\n");
        auto a1 = pde_to_algebroid(j1);
        auto a2 = pde_to_algebroid(j2);
        ProlongationStep st = solve_prolongation(a1, Rng(15));
        CHECK(!st.obstructed());
        CHECK(st.prolonged.base_vars == a2.base_vars);
        CHECK(st.prolonged.fiber_vars == a2.fiber_vars);
        for (std::size_t m = 0; m < a2.dbase.size(); ++m)
            CHECK(st.prolonged.dbase[m] == a2.dbase[m]);
        // and one more level, depth 2
        auto j3 = load_pde(header + "order 3\n");
        auto a3 = pde_to_algebroid(j3);
        ProlongationStep st2 = solve_prolongation(st.prolonged, Rng(16));
        CHECK(st2.prolonged.fiber_vars == a3.fiber_vars);
    }
}

TEST_CASE("pde_prolong_compare") {
    {
        auto j = fixture_pde("uxy.pde");
        PdeCompareReport rep = pde_prolong_compare(j, 1, Rng(17));
        CHECK(rep.match);
        REQUIRE(rep.levels.size() == 1);
        CHECK(rep.levels[0].algebroid_new_vars == 1);
        CHECK(rep.levels[0].jet_parametric_total == 2); // u_y, u_yy
        bool saw_uxy = false;
        for (const auto& [name, val] : rep.levels[0].jet_constraints)
            if (name == "u_xy") {
                saw_uxy = true;
                CHECK(val == Expr::constant(1));
            }
        CHECK(saw_uxy);
    }
    {
        auto j = fixture_pde("full_j1.pde");
        PdeCompareReport rep = pde_prolong_compare(j, 1, Rng(18));
        CHECK(rep.match);
        CHECK(rep.levels[0].algebroid_new_vars == 3);
        CHECK(rep.levels[0].jet_constraints.empty());
    }
    {
        auto j = fixture_pde("transport.pde");
        PdeCompareReport rep = pde_prolong_compare(j, 2, Rng(19));
        CHECK(rep.match);
        REQUIRE(rep.levels.size() == 2);
        CHECK(rep.levels[0].algebroid_new_vars == 1);
        CHECK(rep.levels[1].algebroid_new_vars == 1);
        CHECK(rep.levels[0].jet_parametric_total == 2); // pure y-derivatives
        CHECK(rep.levels[1].jet_parametric_total == 3);
    }
}

#include "fixtures.hpp"

#include <relalg/prolong.hpp>

#include <doctest.h>

using namespace relalg;

TEST_CASE("torsion system of the finite-type fixture") {
    auto a = fixture_algebroid("finite_type.alg");
    TorsionSystem sys = torsion_system(a);
    REQUIRE(sys.unknowns.size() == 2); // u_z_1, u_z_2
    // D~(Dx): z - u_z_2 = 0; D~(Dy): u_z_1 = 0
    REQUIRE(sys.equations.size() == 2);
    auto eq_for = [&](const std::string& target) -> const TorsionEquation& {
        for (const auto& eq : sys.equations)
            if (eq.slot.kind == ComponentKey::Kind::function &&
                a.base_vars[eq.slot.target] == target)
                return eq;
        throw std::runtime_error("missing equation");
    };
    const auto& ex = eq_for("x");
    CHECK(ex.constant == Expr::variable("z"));
    CHECK(ex.coeffs[0].is_zero_structural());
    CHECK(ex.coeffs[1] == Expr::constant(-1)); // z - beta = 0
    const auto& ey = eq_for("y");
    CHECK(ey.constant.is_zero_structural());
    CHECK(ey.coeffs[0] == Expr::constant(1)); // alpha = 0
    CHECK(ey.coeffs[1].is_zero_structural());
}

TEST_CASE("torsion system with no fiber variables squares the derivation") {
    auto a = fixture_algebroid("nonint.alg");
    ProlongationStep st = solve_prolongation(a, Rng(1));
    TorsionSystem sys = torsion_system(st.prolonged);
    CHECK(sys.unknowns.empty());
    REQUIRE(sys.equations.size() == 1);
    CHECK(sys.equations[0].constant == Expr::constant(2));
    CHECK(sys.equations[0].slot.args == std::vector<int>{1, 2});
}

TEST_CASE("surfaces torsion system forces the theta3 coefficient") {
    auto a = fixture_algebroid("surfaces.alg");
    TorsionSystem sys = torsion_system(a);
    CHECK(sys.unknowns.size() == 3);
    ProlongationStep st = solve_prolongation(a, Rng(2));
    REQUIRE(st.new_vars.size() == 1);
    CHECK(st.lift[0].coefficient({3}) == Expr::constant(1));
}

TEST_CASE("solve_prolongation micro-examples") {
    VarTable dummy;
    {
        auto a = fixture_algebroid("finite_type.alg");
        ProlongationStep st = solve_prolongation(a, Rng(3));
        CHECK(st.new_vars.empty());
        CHECK(!st.obstructed());
        CHECK(st.lift[0] == parse_form("z * theta2", a.frame, a.var_table()));
        for (const auto& f : curvature(st)) CHECK(f.is_zero());
    }
    {
        auto a = fixture_algebroid("nonint.alg");
        ProlongationStep st = solve_prolongation(a, Rng(4));
        CHECK(st.lift[0] == parse_form("theta1 + z * theta2", a.frame, a.var_table()));
        auto curv = curvature(st);
        CHECK(curv[0] == parse_form("2 * theta1 ^ theta2", a.frame, a.var_table()));
    }
    {
        auto a = fixture_algebroid("torsion_tableau.alg");
        ProlongationStep st = solve_prolongation(a, Rng(5));
        CHECK(st.new_vars.empty());
        CHECK(!st.obstructed());
        CHECK(st.lift[0] ==
              parse_form("x**2 * theta1 + x**2 * theta2 + x**2 * theta3", a.frame,
                         a.var_table()));
        // curvature proportional to theta12 + theta23 + theta31, vanishing only at x=0
        auto curv = curvature(st);
        VarTable vt = a.var_table();
        Expr x3 = parse_expr("x**3", vt);
        CHECK(curv[0].coefficient({1, 2}) == x3);
        CHECK(curv[0].coefficient({2, 3}) == x3);
        CHECK(curv[0].coefficient({1, 3}) == -x3); // theta3 ^ theta1 slot
    }
}

TEST_CASE("towers") {
    {
        auto a = fixture_algebroid("finite_type.alg");
        TowerReport tw = prolongation_tower(a, 5, Rng(6));
        CHECK(tw.finite_type);
        CHECK(tw.levels.size() == 1);
        CHECK(tw.levels[0].finite_type_here);
    }
    {
        auto a = fixture_algebroid("nonint.alg");
        TowerReport tw = prolongation_tower(a, 5, Rng(7));
        CHECK(tw.obstructed_level == 2);
        REQUIRE(!tw.levels.empty());
        const auto& obs = tw.levels.back().step.obstructions;
        REQUIRE(obs.size() == 1);
        CHECK(obs[0].second == Expr::constant(2));
        CHECK(obs[0].first.args == std::vector<int>{1, 2});
    }
    {
        auto a = fixture_algebroid("surfaces.alg");
        TowerReport tw = prolongation_tower(a, 3, Rng(8));
        REQUIRE(tw.levels.size() == 3);
        for (const auto& lv : tw.levels) {
            CHECK(lv.step.new_vars.size() == 1);
            CHECK(lv.cartan.characters.s == std::vector<int>{1, 0, 0});
            CHECK(lv.cartan.involutive == Verdict::Yes);
        }
        CHECK(tw.formal_certificate);
        CHECK(tw.certificate_level == 1);
        CHECK(!tw.finite_type);
    }
}

TEST_CASE("post-solve identity: D1 after D vanishes") {
    for (const char* name : {"surfaces.alg", "finite_type.alg", "torsion_tableau.alg"}) {
        auto a = fixture_algebroid(name);
        ProlongationStep st = solve_prolongation(a, Rng(9));
        REQUIRE(!st.obstructed());
        Derivation d1(st.prolonged);
        for (int i = 0; i < a.rank(); ++i) CHECK(d1.apply(a.dtheta[i]).is_zero());
        for (const auto& db : a.dbase) CHECK(d1.apply(db).is_zero());
    }
}

TEST_CASE("new variable count equals the prolongation rank") {
    Rng rng(10);
    for (const char* name : {"surfaces.alg", "finite_type.alg", "nonint.alg"}) {
        auto a = fixture_algebroid(name);
        ProlongationStep st = solve_prolongation(a, rng.fork());
        ProlongationInfo pi = prolongation_rank(tableau_map(a), rng.fork());
        CHECK(static_cast<int>(st.new_vars.size()) == pi.kernel_dim_src);
        CHECK(pi.kernel_dim_src == pi.rank); // these fixtures are standard
    }
}

TEST_CASE("curvature is rejected on obstructed steps") {
    auto a = fixture_algebroid("nonint.alg");
    ProlongationStep st1 = solve_prolongation(a, Rng(11));
    ProlongationStep st2 = solve_prolongation(st1.prolonged, Rng(12));
    CHECK(st2.obstructed());
    CHECK_THROWS_AS(curvature(st2), StructureError);
}

TEST_CASE("tower levels chain: level k+1 input is level k output") {
    auto a = fixture_algebroid("surfaces.alg");
    TowerReport tw = prolongation_tower(a, 3, Rng(13));
    RelativeAlgebroid cur = a;
    for (const auto& lv : tw.levels) {
        ProlongationStep st = solve_prolongation(cur, Rng(14));
        // the tower's recorded new variables must match a fresh solve of the
        // same level input (solve is deterministic in the seed only through
        // pivot certification; the solved lift itself is seed-independent here)
        CHECK(st.new_vars == lv.step.new_vars);
        for (std::size_t r = 0; r < st.lift.size(); ++r) CHECK(st.lift[r] == lv.step.lift[r]);
        cur = lv.step.prolonged;
    }
}

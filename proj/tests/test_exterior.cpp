#include <relalg/dform.hpp>

#include <doctest.h>

using namespace relalg;

namespace {

VarTable table() {
    VarTable vt;
    vt.add("phi", VarRole::fiber);
    vt.add("K", VarRole::base);
    vt.add("x", VarRole::base);
    vt.add("x3", VarRole::jet);
    return vt;
}

const std::vector<std::string> FRAME = {"theta1", "theta2", "theta3"};

} // namespace

TEST_CASE("wedge basics") {
    DForm t1 = DForm::theta(3, 1), t2 = DForm::theta(3, 2);
    CHECK(t1.wedge(t2).coefficient({1, 2}) == Expr::constant(1));
    CHECK(t2.wedge(t1).coefficient({1, 2}) == Expr::constant(-1));
    VarTable vt = table();
    DForm a = parse_form("cos(phi) * theta1 + sin(phi) * theta2", FRAME, vt);
    DForm w = a.wedge(t1);
    CHECK(w == parse_form("-sin(phi) * theta1 ^ theta2", FRAME, vt));
}

TEST_CASE("add and scale") {
    VarTable vt = table();
    DForm w = parse_form("theta1 ^ theta2", FRAME, vt);
    CHECK((w + w.scaled(Expr::constant(-1))).is_zero());
    DForm kw = w.scaled(Expr::variable("K"));
    CHECK(kw == parse_form("K * theta1 ^ theta2", FRAME, vt));
    DForm f = DForm::scalar(3, Expr::variable("K"));
    DForm g = DForm::scalar(3, Expr::variable("x"));
    CHECK((f + g).coefficient({}) == parse_expr("K + x", vt));
    CHECK_THROWS_AS(w + DForm::theta(3, 1), StructureError);
    CHECK_THROWS_AS(w.wedge(DForm::theta(2, 1)), StructureError);
}

TEST_CASE("coefficient extraction") {
    VarTable vt = table();
    DForm w = parse_form("2 * theta1 ^ theta2", FRAME, vt);
    CHECK(w.coefficient({1, 2}) == Expr::constant(2));
    CHECK(w.coefficient({1, 3}).is_zero_structural());
    DForm v = parse_form("(x3 - x**2) * theta1 ^ theta2 ^ theta3", FRAME, vt);
    CHECK(v.coefficient({1, 2, 3}) == parse_expr("x3 - x**2", vt));
    CHECK_THROWS_AS(w.coefficient({2, 1}), StructureError);
    CHECK_THROWS_AS(w.coefficient({1}), StructureError);
    CHECK_THROWS_AS(w.coefficient({1, 4}), StructureError);
}

TEST_CASE("graded commutativity, associativity, odd squares") {
    Rng rng(42);
    VarTable vt = table();
    auto random_form = [&](int n, int deg) {
        DForm f(n, deg);
        std::vector<int> idx(deg);
        // fill a few random slots
        for (int t = 0; t < 3; ++t) {
            std::set<int> s;
            while (static_cast<int>(s.size()) < deg)
                s.insert(static_cast<int>(rng.uniform(1, n)));
            std::vector<int> key(s.begin(), s.end());
            f.set_coefficient(key, Expr::constant(rng.rational_or_zero()));
        }
        return f;
    };
    for (int trial = 0; trial < 30; ++trial) {
        int n = 4;
        int p = static_cast<int>(rng.uniform(1, 2));
        int q = static_cast<int>(rng.uniform(1, 2));
        DForm a = random_form(n, p), b = random_form(n, q), c = random_form(n, 1);
        // a ^ b = (-1)^{pq} b ^ a
        DForm lhs = a.wedge(b);
        DForm rhs = b.wedge(a);
        if ((p * q) % 2 == 1) rhs = -rhs;
        CHECK(lhs == rhs);
        CHECK(a.wedge(b).wedge(c) == a.wedge(b.wedge(c)));
    }
    DForm odd = random_form(4, 1);
    CHECK(odd.wedge(odd).is_zero());
}

TEST_CASE("form printing round trips") {
    VarTable vt = table();
    for (const char* text :
         {"2 * theta1 ^ theta2", "-theta3 ^ theta2", "cos(phi) * theta1 + sin(phi) * theta2",
          "(K + 1) * theta1 ^ theta2 ^ theta3", "K"}) {
        DForm f = parse_form(text, FRAME, vt);
        CHECK(parse_form(f.str(FRAME), FRAME, vt) == f);
    }
}

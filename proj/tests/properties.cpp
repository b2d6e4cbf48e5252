#include "property_suites.hpp"

#include <doctest.h>

using namespace relalg;
using namespace relalg::props;

namespace {

void check_suite(const SuiteResult& r, int expected_cases) {
    INFO(r.name << ": " << r.failures << " failures out of " << r.cases
                << (r.first_failure.empty() ? "" : " (first: " + r.first_failure + ")"));
    CHECK(r.cases >= expected_cases);
    CHECK(r.failures == 0);
}

} // namespace

TEST_CASE("graded Leibniz of derive") { check_suite(leibniz_suite(101), 200); }

TEST_CASE("Spencer differential squares to zero") { check_suite(spencer_dd_suite(102), 200); }

TEST_CASE("Cartan's bound never violated") { check_suite(cartan_bound_suite(103), 200); }

TEST_CASE("Koszul roundtrip") { check_suite(koszul_suite(104), 200); }

TEST_CASE("torsion difference law") { check_suite(torsion_difference_suite(105), 200); }

TEST_CASE("differentiate vs finite differences") {
    check_suite(finite_difference_suite(106), 200);
}

TEST_CASE("parse/print round trip on random expressions") {
    Rng rng(107);
    VarTable vt;
    vt.add("x", VarRole::base);
    vt.add("y", VarRole::base);
    vt.add("z", VarRole::base);
    std::vector<std::string> vars{"x", "y", "z"};
    int done = 0;
    std::function<Expr(int)> random_expr = [&](int depth) -> Expr {
        long pick = rng.uniform(0, depth <= 0 ? 2 : 6);
        switch (pick) {
        case 0: return Expr::constant(rng.rational_or_zero(5, 3));
        case 1:
        case 2: return Expr::variable(vars[rng.uniform(0, 2)]);
        case 3: return random_expr(depth - 1) + random_expr(depth - 1);
        case 4: return random_expr(depth - 1) * random_expr(depth - 1);
        case 5: {
            Expr lin = Expr::constant(rng.rational(2, 2)) * Expr::variable(vars[rng.uniform(0, 2)]);
            return rng.uniform(0, 1) ? Expr::sin_of(lin) : Expr::cos_of(lin);
        }
        default: {
            Expr den = random_expr(depth - 1);
            if (den.is_zero_structural()) return Expr::constant(1);
            return random_expr(depth - 1) / den;
        }
        }
    };
    while (done < 200) {
        Expr e = random_expr(3);
        ++done;
        CHECK(parse_expr(e.str(), vt) == e);
    }
}

TEST_CASE("eval commutes with canonicalization") {
    Rng rng(108);
    VarTable vt;
    vt.add("x", VarRole::base);
    vt.add("y", VarRole::base);
    std::vector<std::string> vars{"x", "y"};
    for (int c = 0; c < 200; ++c) {
        // build the same value along two algebraic routes
        Expr a = props::random_poly(rng, vars, 3, 2);
        Expr b = props::random_poly(rng, vars, 3, 2);
        Expr lhs = (a + b) * (a - b);
        Expr rhs = a * a - b * b;
        CHECK(lhs == rhs);
        std::map<std::string, double> pt{{"x", to_double(rng.rational())},
                                         {"y", to_double(rng.rational())}};
        double va = lhs.eval(pt), vb = (a.eval(pt) + b.eval(pt)) * (a.eval(pt) - b.eval(pt));
        CHECK(std::abs(va - vb) <= 1e-9 * std::max(1.0, std::abs(vb)));
    }
}

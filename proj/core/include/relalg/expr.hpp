#ifndef RELALG_EXPR_HPP
#define RELALG_EXPR_HPP

#include <relalg/error.hpp>
#include <relalg/rational.hpp>
#include <relalg/rng.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace relalg {

// ---------------------------------------------------------------------------
// Variable table: ordered names with roles. The order is load-bearing; it
// fixes matrix column layouts everywhere downstream.
// ---------------------------------------------------------------------------

enum class VarRole { base, fiber, lift, jet };

class VarTable {
public:
    int add(const std::string& name, VarRole role);
    bool contains(const std::string& name) const;
    int index_of(const std::string& name) const; // -1 when absent
    VarRole role(const std::string& name) const;
    std::size_t size() const { return names_.size(); }
    const std::string& name(int i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    std::vector<std::string> with_role(VarRole r) const;

private:
    std::vector<std::string> names_;
    std::vector<VarRole> roles_;
};

// ---------------------------------------------------------------------------
// Canonical scalar expressions.
//
// The supported class is quotients P/Q of polynomials over Q in
//   - named variables,
//   - atoms sin(l), cos(l), exp(l) with l an affine form with rational
//     coefficients.
// Normal form: sin-degree per argument <= 1 (sin^2 -> 1 - cos^2), exp factors
// merged additively per monomial, terms sorted by a fixed monomial order,
// gcd(P, Q) = 1, Q monic, Q = 1 when P = 0. Within this class structural
// equality of normal forms decides equality; cross-argument trig identities
// fall outside and are delegated to numeric probing (Truth::Undetermined).
// ---------------------------------------------------------------------------

// Affine form sum q_i * x_i + c with rational q_i, c.
struct LinForm {
    std::vector<std::pair<std::string, Rat>> terms; // sorted by name, q_i != 0
    Rat constant{0};

    bool is_zero() const { return terms.empty() && constant == 0; }
    bool is_constant() const { return terms.empty(); }
    LinForm negated() const;
    void add(const std::string& var, const Rat& coeff);
    void add(const LinForm& other, const Rat& scale = Rat(1));
    double eval(const std::map<std::string, double>& point) const;
    std::string str() const;
};

bool operator==(const LinForm&, const LinForm&);
bool operator<(const LinForm&, const LinForm&);

enum class TrigKind { sin, cos };

struct TrigAtom {
    TrigKind kind;
    LinForm arg;
    std::string str() const;
};

bool operator==(const TrigAtom&, const TrigAtom&);
bool operator<(const TrigAtom&, const TrigAtom&);

struct Monomial {
    std::vector<std::pair<std::string, int>> vars;  // sorted, exponents >= 1
    std::vector<std::pair<TrigAtom, int>> trig;     // sorted, exponents >= 1
    LinForm exp_arg;                                // exp(exp_arg); zero form = none

    bool is_one() const { return vars.empty() && trig.empty() && exp_arg.is_zero(); }
    int total_degree() const;
};

bool operator==(const Monomial&, const Monomial&);
bool operator<(const Monomial&, const Monomial&);

struct Polynomial {
    // Terms sorted by descending monomial order, coefficients != 0.
    std::vector<std::pair<Monomial, Rat>> terms;

    bool is_zero() const { return terms.empty(); }
    bool is_constant() const;
    Rat constant_value() const; // requires is_constant()
    int total_degree() const;

    static Polynomial zero() { return {}; }
    static Polynomial constant(const Rat& c);
    static Polynomial variable(const std::string& name);

    void collect_vars(std::set<std::string>& out) const;
};

bool operator==(const Polynomial&, const Polynomial&);

Polynomial operator+(const Polynomial&, const Polynomial&);
Polynomial operator-(const Polynomial&, const Polynomial&);
Polynomial operator*(const Polynomial&, const Polynomial&);
Polynomial neg(const Polynomial&);
Polynomial derivative(const Polynomial&, const std::string& var);
double eval(const Polynomial&, const std::map<std::string, double>& point);

// Multivariate gcd over the atom-polynomial ring; exp factors are treated as
// units. Returns 1 when the exp arguments do not lie on a rank-1 lattice.
Polynomial poly_gcd(const Polynomial&, const Polynomial&);
std::optional<Polynomial> poly_exact_div(const Polynomial& num, const Polynomial& den);

enum class Truth { Zero, NonZero, Undetermined };

class Expr {
public:
    Expr() : num_(Polynomial::zero()), den_(Polynomial::constant(1)) {}

    static Expr constant(const Rat& c);
    static Expr constant(long c) { return constant(Rat(c)); }
    static Expr variable(const std::string& name);
    // Argument must be affine with rational coefficients; throws StructureError.
    static Expr sin_of(const Expr& arg);
    static Expr cos_of(const Expr& arg);
    static Expr exp_of(const Expr& arg);
    static Expr from_quotient(Polynomial num, Polynomial den);

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }

    bool is_zero_structural() const { return num_.is_zero(); }
    bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
    Rat rational_value() const; // requires is_rational()

    Expr operator+(const Expr&) const;
    Expr operator-(const Expr&) const;
    Expr operator*(const Expr&) const;
    Expr operator/(const Expr&) const; // throws DomainError on division by 0
    Expr operator-() const;
    Expr pow(long k) const;

    bool operator==(const Expr& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Expr& o) const { return !(*this == o); }

    Expr differentiate(const std::string& var) const;
    Expr substitute(const std::map<std::string, Expr>& bindings) const;
    double eval(const std::map<std::string, double>& point) const;

    std::set<std::string> variables() const;
    bool depends_on(const std::string& var) const;
    // Degree measure used for pivot preference in elimination.
    int complexity() const { return num_.total_degree() + den_.total_degree(); }

    std::string str() const;

private:
    Polynomial num_, den_;
    void normalize();
};

inline Expr operator*(const Rat& c, const Expr& e) { return Expr::constant(c) * e; }

// The spec-level simplify: construction already canonicalizes, so this is the
// identity on Expr values. Kept for API symmetry and tests.
inline Expr simplify(const Expr& e) { return e; }

// Zero test with generic-point fallback. `probes` random rational points,
// |value| <= tol everywhere with a nonzero normal form => Undetermined.
Truth is_zero(const Expr& e, Rng rng, int probes = 8, double tol = 1e-9);

// Evaluation at a rational point (spec: eval_numeric).
double eval_numeric(const Expr& e, const std::map<std::string, double>& point);

// Expression grammar parser (see README / .alg format). Identifiers must be
// declared in `vars`; sin/cos/exp are the only function names.
Expr parse_expr(const std::string& text, const VarTable& vars);

std::string to_string(const Expr& e);

// Attempts to view e as an affine-rational form (used by trig/exp arguments
// and restriction right-hand sides).
std::optional<LinForm> as_linform(const Expr& e);

} // namespace relalg

#endif

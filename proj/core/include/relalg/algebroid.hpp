#ifndef RELALG_ALGEBROID_HPP
#define RELALG_ALGEBROID_HPP

#include <relalg/dform.hpp>
#include <relalg/linsolve.hpp>

#include <map>
#include <string>
#include <vector>

namespace relalg {

// Coordinate model of a relative algebroid: a trivialized bundle over a
// single chart, presented by the structure 2-forms D theta^i and the anchor
// 1-forms D x^mu. Structure functions may depend on base and fiber variables.
struct RelativeAlgebroid {
    std::vector<std::string> frame;     // covector names theta^1..theta^n
    std::vector<std::string> base_vars; // x^mu
    std::vector<std::string> fiber_vars;// y^rho
    std::vector<DForm> dtheta;          // degree-2 forms, one per frame element
    std::vector<DForm> dbase;           // degree-1 forms, one per base variable

    int level = 0;                          // prolongation depth that produced it
    std::vector<std::string> provenance;    // human-readable history
    std::vector<std::string> jet_frame;     // independent-variable names, when
                                            // the frame came from a jet space

    int rank() const { return static_cast<int>(frame.size()); }
    VarTable var_table() const; // base then fiber, declaration order

    // c^i_jk for 1-based frame indices, j < k  (D theta^i = -sum c^i_jk theta^j^theta^k)
    Expr structure_c(int i, int j, int k) const;
    // F^mu_i: coefficient of theta^i in D x^mu (mu 0-based, i 1-based)
    Expr anchor_entry(int mu, int i) const;
    int base_index(const std::string& name) const;
    int fiber_index(const std::string& name) const;

    void validate() const; // shape and variable-domain invariants
};

RelativeAlgebroid load_algebroid(const std::string& text);
RelativeAlgebroid load_algebroid_file(const std::string& path);
std::string to_alg_text(const RelativeAlgebroid& a);

// The relative derivation as an executable operator, optionally extended by
// prescribed images of the fiber variables (the lift D-tilde).
class Derivation {
public:
    explicit Derivation(const RelativeAlgebroid& a);
    Derivation(const RelativeAlgebroid& a, std::map<std::string, DForm> fiber_images);

    // D f as a 1-form; throws StructureError when f depends on a variable
    // with no prescribed image (e.g. a fiber variable of the plain D).
    DForm d_scalar(const Expr& f) const;
    // Graded Leibniz extension to forms.
    DForm apply(const DForm& alpha) const;

private:
    const RelativeAlgebroid* a_;
    std::map<std::string, DForm> dvar_;
};

// Spec operation: applies D to a form with base-only coefficients.
DForm derive(const RelativeAlgebroid& a, const DForm& alpha);

// Sections written in the frame e_i dual to theta^i.
struct SectionExpr {
    std::vector<Expr> coeffs; // length n
};

SectionExpr bracket(const RelativeAlgebroid& a, const SectionExpr& x, const SectionExpr& y);
Expr anchor_apply(const RelativeAlgebroid& a, const SectionExpr& x, const Expr& f);

enum class Verdict { Yes, No, Undetermined };

// Jacobian of the structure data (c, F) with respect to the fiber variables;
// rows indexed by fiber variables, columns by structure coefficients in a
// fixed layout. This is the classifying map's vertical derivative.
ExprMatrix classifying_data(const RelativeAlgebroid& a);
Verdict is_standard(const RelativeAlgebroid& a, Rng rng);

struct SystaticInfo {
    int kernel_dim = 0;   // generic kernel dimension of the tableau map
    bool stable = true;
    DblMatrix basis;      // kernel vectors over the fiber variables
    std::vector<std::string> unused_fiber_vars; // coordinate-aligned directions
};

SystaticInfo systatic_directions(const RelativeAlgebroid& a, Rng rng);

// Drops fiber variables that appear in no structure function. Refuses (with a
// diagnostic) when the systatic kernel is bigger than the coordinate-aligned
// part.
RelativeAlgebroid reduce(const RelativeAlgebroid& a, Rng rng);

// Restriction to a solved-form locus {var = expr}. Base-variable eliminations
// are checked for invariance (the residual of D x on the locus must vanish);
// fiber-variable eliminations are always allowed. Undetermined invariance
// residuals are reported through `warnings`.
RelativeAlgebroid restrict_algebroid(const RelativeAlgebroid& a,
                                     const std::vector<std::pair<std::string, Expr>>& solved,
                                     Rng rng, std::vector<std::string>* warnings = nullptr);

} // namespace relalg

#endif

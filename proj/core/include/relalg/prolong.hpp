#ifndef RELALG_PROLONG_HPP
#define RELALG_PROLONG_HPP

#include <relalg/tableau.hpp>

#include <string>
#include <vector>

namespace relalg {

// One affine-linear torsion equation: sum_u coeff_u * u + constant = 0, where
// the unknowns u^rho_i parametrize the lift D~ y^rho = u^rho_i theta^i. The
// slot records which coefficient of D~(D .) produced the row.
struct TorsionEquation {
    ComponentKey slot;
    std::vector<Expr> coeffs; // dense over the unknown layout
    Expr constant;
};

struct TorsionSystem {
    int frame_rank = 0;
    std::vector<std::pair<int, int>> unknowns; // (fiber index, frame index 1-based), (rho,i) lex
    std::vector<std::string> unknown_names;    // for reporting
    std::vector<TorsionEquation> equations;

    int unknown_index(int rho, int i) const;
};

// Assembles the vanishing conditions of D~(D x^mu) (2-forms) and D~(D theta^i)
// (3-forms). Linearity in the unknowns holds by construction: the lift enters
// a coefficient only through theta^i ^ (d alpha / d y^rho).
TorsionSystem torsion_system(const RelativeAlgebroid& a);

struct ProlongationStep {
    bool aborted = false;
    std::string abort_note;

    std::vector<std::string> new_vars;
    std::vector<DForm> lift; // D^(1) y^rho, indexed like the input's fiber_vars
    std::vector<std::pair<ComponentKey, Expr>> obstructions;
    std::vector<std::string> warnings;
    RelativeAlgebroid prolonged; // valid when !aborted

    bool obstructed() const { return !obstructions.empty(); }
};

// Exact elimination of the torsion system over the function field. The free
// directions become new fiber variables (named v<level>_<k>, or jet-style when
// the kernel direction is a single jet slot); the particular solution is made
// orthogonal to the kernel so the lift parametrization is canonical.
ProlongationStep solve_prolongation(const RelativeAlgebroid& a, Rng rng);

// Curvature representatives: D~ D^(1) y^rho computed with the new fiber
// variables held constant. For steps without new variables this is the direct
// square; in general it is the lift-independent part of the next level's
// torsion, a representative of the curvature class.
std::vector<DForm> curvature(const ProlongationStep& step);

struct LevelReport {
    int level = 0; // 1-based
    CartanTestResult cartan;            // of the level input's tableau
    ProlongationStep step;
    std::vector<DForm> curvature_forms; // per fiber variable of the level input
    bool finite_type_here = false;
    bool certificate_here = false;      // involutive tableau + vanishing torsion
};

struct TowerReport {
    std::vector<LevelReport> levels;
    bool finite_type = false;
    int obstructed_level = 0;   // 0 = never obstructed
    bool aborted = false;
    std::string abort_note;
    bool formal_certificate = false;
    int certificate_level = 0;
    std::vector<std::string> warnings;
};

// Iterates solve_prolongation up to max_depth; stops early on an obstruction
// or once finite type is reached (no new variables, zero curvature).
TowerReport prolongation_tower(const RelativeAlgebroid& a, int max_depth, Rng rng);

} // namespace relalg

#endif

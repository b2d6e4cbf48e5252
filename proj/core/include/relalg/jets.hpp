#ifndef RELALG_JETS_HPP
#define RELALG_JETS_HPP

#include <relalg/prolong.hpp>

#include <map>
#include <string>
#include <vector>

namespace relalg {

// Jet coordinate: dependent index + sorted (non-decreasing) multi-index of
// 0-based independent positions; symmetry of mixed partials is built into the
// sorted representation.
struct JetCoord {
    int dep = 0;
    std::vector<int> idx;

    int order() const { return static_cast<int>(idx.size()); }
    bool operator<(const JetCoord& o) const {
        if (order() != o.order()) return order() < o.order();
        if (dep != o.dep) return dep < o.dep;
        return idx < o.idx;
    }
    bool operator==(const JetCoord& o) const { return dep == o.dep && idx == o.idx; }
};

// A PDE in solved (orthonomic) form on J^order: a set of order-`order`
// coordinates expressed over the remaining coordinates.
struct JetSystem {
    std::vector<std::string> indep;
    std::vector<std::string> dep;
    int order = 1;
    std::vector<std::pair<std::string, Expr>> equations; // solved coord -> rhs

    std::string coord_name(const JetCoord& c) const;
    std::vector<JetCoord> coords_up_to(int maxorder) const; // deterministic order
    bool is_solved(const std::string& name) const;
    const Expr* solved_rhs(const std::string& name) const;

    void validate() const;
};

JetSystem load_pde(const std::string& text);
JetSystem load_pde_file(const std::string& path);
std::string to_pde_text(const JetSystem& j);

// Total derivative D_j f with solved-form substitutions applied to generated
// order-`order` coordinates. Throws StructureError (naming the coordinate)
// when a coordinate beyond the jet order would be required.
Expr total_derivative(const JetSystem& j, const Expr& f, int xj);

// The relative algebroid of the PDE: frame dx^1..dx^n with D theta = 0, base
// = coordinates of the projection to order-1 lower, fiber = parametric
// top-order coordinates, D(coordinate) = sum_j (total derivative) theta^j.
RelativeAlgebroid pde_to_algebroid(const JetSystem& j);

struct PdeCompareLevel {
    int level = 0;
    int algebroid_new_vars = 0;
    int jet_new_parametric = 0;
    int jet_parametric_total = 0; // non-solved coordinates of order >= 1
    bool counts_match = false;
    bool constraints_match = false;
    std::vector<std::string> mismatches;
    std::vector<std::pair<std::string, Expr>> jet_constraints; // newly solved coords
    std::vector<std::string> jet_obstructions;                 // failed consistency rows
    bool algebroid_obstructed = false;
};

struct PdeCompareReport {
    bool match = true;
    std::vector<PdeCompareLevel> levels;
    std::vector<std::string> warnings;
};

// Runs the algebroid-side prolongation tower and an independent jet-side
// prolongation (total-derivative consistency closure) side by side.
PdeCompareReport pde_prolong_compare(const JetSystem& j, int depth, Rng rng);

} // namespace relalg

#endif

#ifndef RELALG_TABLEAU_HPP
#define RELALG_TABLEAU_HPP

#include <relalg/algebroid.hpp>

#include <map>
#include <string>
#include <vector>

namespace relalg {

// One coordinate on the bundle of relative k-derivations: the action on a
// frame covector theta^i (a (k+1)-form slot) or on a base variable (a k-form
// slot). `args` is the strictly increasing frame multi-index of the slot.
struct ComponentKey {
    enum class Kind { covector, function };
    Kind kind;
    int target;             // 1-based frame index, or 0-based base index
    std::vector<int> args;

    bool operator==(const ComponentKey& o) const {
        return kind == o.kind && target == o.target && args == o.args;
    }
    bool operator<(const ComponentKey& o) const {
        if (kind != o.kind) return kind == Kind::covector && o.kind == Kind::function;
        if (target != o.target) return target < o.target;
        return args < o.args;
    }
};

// Tableau map tau: fiber directions -> relative k-derivations, as a matrix.
// Bracket entries hold dc^i_jk/dy (sign convention c = minus the raw stored
// form coefficient); symbol entries hold dF^mu_i/dy raw.
struct TableauData {
    int frame_rank = 0;
    int deg = 1;                            // derivation degree k
    std::vector<std::string> row_names;     // fiber directions
    std::vector<std::string> base_names;    // function targets
    std::vector<std::string> frame_names;   // for printing only
    std::vector<ComponentKey> cols;
    ExprMatrix entries;                     // rows() x cols.size()

    int rows() const { return static_cast<int>(row_names.size()); }

    // Deterministic component layout of D^deg relative derivations.
    static std::vector<ComponentKey> derivation_components(int n, int nbase, int deg);

    // Raw coefficient of the derivation tau(row) on the given component
    // (bracket components carry the minus sign).
    Expr raw_entry(int row, std::size_t col) const;

    // Square sub-block [dF^mu_i/dy^rho] of symbol columns.
    ExprMatrix symbol_block() const;
};

TableauData tableau_map(const RelativeAlgebroid& a);

// Hom(Lambda^k W, V) with rk V = m, as a tableau of k-derivations with m
// function targets. Every flag is regular for it.
TableauData tautological_tableau(int n, int m, int k);

// The full derivation bundle D^deg as a tableau (identity map).
TableauData full_derivation_tableau(int n, int nbase, int deg);

// Element of D^(deg+l) by components, the Spencer differential's value.
struct SpencerImage {
    std::vector<ComponentKey> comps;
    std::vector<Expr> values;

    Expr value_of(const ComponentKey& key) const;
};

// delta_tau(xi) for xi in Hom(W, T): xi has one row per fiber direction and
// one column per frame element.
SpencerImage spencer_differential(const TableauData& t, const ExprMatrix& xi);

// Matrix of delta_tau on Hom(Lambda^l W, T): rows are D^(deg+l) components,
// columns are (multi-index K, tableau row) pairs, K major.
ExprMatrix spencer_matrix(const TableauData& t, int l);

// Frame change: substitutes theta^j = sum_l M[j][l] theta'^l in all structure
// forms. M must be invertible over Q.
TableauData transform_frame(const TableauData& t, const RatMatrix& m);

struct FlagSpec {
    RatMatrix change; // empty = identity flag
    std::string desc = "identity";
};

FlagSpec random_flag(int n, Rng& rng, int index);

struct CharacterVector {
    std::vector<int> s;
    bool stable = true;
    std::string flag_desc = "identity";

    int sum() const;
    int weighted_sum() const; // sum i * s_i (Cartan's bound)
};

CharacterVector cartan_characters(const TableauData& t, const FlagSpec& flag, Rng rng);

struct ProlongationInfo {
    int rank = 0;            // dim ker(delta) on Hom(W, im tau)
    int kernel_dim_src = 0;  // dim ker(delta_tau) on Hom(W, T): rank + n*dim(ker tau)
    int tableau_rank = 0;    // generic rank of tau
    bool stable = true;
};

ProlongationInfo prolongation_rank(const TableauData& t, Rng rng);

struct CartanTestResult {
    int bound = 0; // for the reported flag
    int rank = 0;
    Verdict involutive = Verdict::No; // No means "not involutive by this test"
    CharacterVector characters;
    std::vector<CharacterVector> flags_tried;
    std::vector<std::string> warnings;
};

// Identity flag first, then `random_flags` random GL(n,Q) changes; reports the
// lexicographically maximal character sequence and whether some flag achieved
// Cartan's bound.
CartanTestResult cartan_test(const TableauData& t, Rng rng, int random_flags = 8);

// Spencer cohomology dimension H^{m,l} at a point, m in {-1,0,1}, l in {2,3}.
// Throws StructureError outside the supported range.
int spencer_cohomology_dim(const TableauData& t, int m, int l,
                           const std::map<std::string, double>& point);

} // namespace relalg

#endif

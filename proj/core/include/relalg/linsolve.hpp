#ifndef RELALG_LINSOLVE_HPP
#define RELALG_LINSOLVE_HPP

#include <relalg/expr.hpp>

#include <string>
#include <vector>

namespace relalg {

using ExprMatrix = std::vector<std::vector<Expr>>;
using RatMatrix = std::vector<std::vector<Rat>>;
using DblMatrix = std::vector<std::vector<double>>;

int numeric_rank(DblMatrix m, double tol = 1e-9);
// Basis of the right kernel (vectors over the columns of m).
DblMatrix numeric_kernel(DblMatrix m, double tol = 1e-9);

int exact_rank(RatMatrix m);
RatMatrix exact_kernel(RatMatrix m);

struct GenericRank {
    int rank = 0;
    bool stable = true; // false when probe points disagree
    bool exact = false; // true when computed over Q, no sampling involved
};

// Rank at generic points: exact over Q when all entries are rational,
// otherwise sampled at `samples` seeded random rational points.
GenericRank generic_rank(const ExprMatrix& m, Rng rng, int samples = 3, double tol = 1e-9);

// Evaluates an Expr matrix at a point, resampling-free (throws DomainError
// when a pole is hit).
DblMatrix eval_matrix(const ExprMatrix& m, const std::map<std::string, double>& point);

// Affine system  A u + rhs = 0  over the rational-function field.
// Gauss-Jordan with certified pivots: a pivot must be an exact rational or
// probe NonZero; Undetermined candidates are never used.
struct AffineSolution {
    bool aborted = false;            // an Undetermined pivot blocked progress
    std::string abort_note;          // the offending pivot expression
    std::vector<int> pivot_cols;     // columns that got pivots
    std::vector<int> free_cols;      // remaining columns
    std::vector<Expr> particular;    // one solution with free slots set to 0
    ExprMatrix kernel;               // denominator-cleared primitive basis, one row per free col
    // inconsistent rows: equation index -> residual that must vanish but does not
    std::vector<std::pair<int, Expr>> obstructions;
    std::vector<int> undetermined_rows; // rows whose residual could not be decided
    std::vector<std::string> warnings;  // genericity notes (probed pivots, discarded rows)
};

// `ncols` is the number of unknowns; it cannot be inferred from `a` when the
// system has no equations.
AffineSolution solve_affine(const ExprMatrix& a, const std::vector<Expr>& rhs,
                            std::size_t ncols, Rng rng);

} // namespace relalg

#endif

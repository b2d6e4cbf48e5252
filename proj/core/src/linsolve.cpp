#include <relalg/linsolve.hpp>

#include <algorithm>
#include <cmath>

namespace relalg {

int numeric_rank(DblMatrix m, double tol) {
    if (m.empty() || m[0].empty()) return 0;
    std::size_t rows = m.size(), cols = m[0].size();
    double scale = 0;
    for (const auto& r : m)
        for (double v : r) scale = std::max(scale, std::abs(v));
    if (scale == 0) return 0;
    double cut = tol * std::max(1.0, scale);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t best = rank;
        for (std::size_t r = rank + 1; r < rows; ++r)
            if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
        if (std::abs(m[best][col]) <= cut) continue;
        std::swap(m[rank], m[best]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][col] == 0) continue;
            double f = m[r][col] / m[rank][col];
            for (std::size_t c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

DblMatrix numeric_kernel(DblMatrix m, double tol) {
    if (m.empty() || m[0].empty()) {
        // no equations: callers must supply the ambient dimension themselves
        return {};
    }
    std::size_t rows = m.size(), cols = m[0].size();
    double scale = 0;
    for (const auto& r : m)
        for (double v : r) scale = std::max(scale, std::abs(v));
    double cut = tol * std::max(1.0, scale);
    std::vector<int> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t best = rank;
        for (std::size_t r = rank + 1; r < rows; ++r)
            if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
        if (std::abs(m[best][col]) <= cut) continue;
        std::swap(m[rank], m[best]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank) continue;
            double f = m[r][col] / m[rank][col];
            if (f == 0) continue;
            for (std::size_t c = 0; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        pivot_col.push_back(static_cast<int>(col));
        ++rank;
    }
    DblMatrix basis;
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<double> v(cols, 0.0);
        v[f] = 1.0;
        for (std::size_t r = 0; r < rank; ++r)
            v[pivot_col[r]] = -m[r][f] / m[r][pivot_col[r]];
        basis.push_back(std::move(v));
    }
    return basis;
}

int exact_rank(RatMatrix m) {
    if (m.empty() || m[0].empty()) return 0;
    std::size_t rows = m.size(), cols = m[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t sel = rows;
        for (std::size_t r = rank; r < rows; ++r)
            if (m[r][col] != 0) {
                sel = r;
                break;
            }
        if (sel == rows) continue;
        std::swap(m[rank], m[sel]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (m[r][col] == 0) continue;
            Rat f = m[r][col] / m[rank][col];
            for (std::size_t c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

RatMatrix exact_kernel(RatMatrix m) {
    if (m.empty() || m[0].empty()) return {};
    std::size_t rows = m.size(), cols = m[0].size();
    std::vector<int> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t sel = rows;
        for (std::size_t r = rank; r < rows; ++r)
            if (m[r][col] != 0) {
                sel = r;
                break;
            }
        if (sel == rows) continue;
        std::swap(m[rank], m[sel]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][col] == 0) continue;
            Rat f = m[r][col] / m[rank][col];
            for (std::size_t c = 0; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        pivot_col.push_back(static_cast<int>(col));
        ++rank;
    }
    RatMatrix basis;
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rat> v(cols, Rat(0));
        v[f] = 1;
        for (std::size_t r = 0; r < rank; ++r)
            v[pivot_col[r]] = -m[r][f] / m[r][pivot_col[r]];
        basis.push_back(std::move(v));
    }
    return basis;
}

DblMatrix eval_matrix(const ExprMatrix& m, const std::map<std::string, double>& point) {
    DblMatrix out(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        out[r].reserve(m[r].size());
        for (const auto& e : m[r]) out[r].push_back(e.eval(point));
    }
    return out;
}

GenericRank generic_rank(const ExprMatrix& m, Rng rng, int samples, double tol) {
    GenericRank out;
    if (m.empty() || m[0].empty()) {
        out.exact = true;
        return out;
    }
    bool rational = true;
    std::set<std::string> vars;
    for (const auto& row : m)
        for (const auto& e : row) {
            if (!e.is_rational()) rational = false;
            auto vs = e.variables();
            vars.insert(vs.begin(), vs.end());
        }
    if (rational) {
        RatMatrix rm(m.size());
        for (std::size_t r = 0; r < m.size(); ++r)
            for (const auto& e : m[r]) rm[r].push_back(e.rational_value());
        out.rank = exact_rank(std::move(rm));
        out.exact = true;
        return out;
    }
    std::vector<int> ranks;
    int attempts = 0;
    while (static_cast<int>(ranks.size()) < samples && attempts < samples * 6) {
        ++attempts;
        std::map<std::string, double> pt;
        for (const auto& v : vars) pt[v] = to_double(rng.rational());
        try {
            ranks.push_back(numeric_rank(eval_matrix(m, pt), tol));
        } catch (const DomainError&) {
            continue;
        }
    }
    if (ranks.empty()) {
        out.stable = false;
        return out;
    }
    out.rank = *std::max_element(ranks.begin(), ranks.end());
    for (int r : ranks)
        if (r != out.rank) out.stable = false;
    return out;
}

// ---------------------------------------------------------------------------
// Exact affine solve over the function field
// ---------------------------------------------------------------------------

namespace {

Polynomial poly_lcm(const Polynomial& a, const Polynomial& b) {
    Polynomial g = poly_gcd(a, b);
    auto q = poly_exact_div(a, g);
    Polynomial left = q ? *q : a;
    return left * b;
}

} // namespace

AffineSolution solve_affine(const ExprMatrix& a, const std::vector<Expr>& rhs,
                            std::size_t ncols, Rng rng) {
    AffineSolution out;
    std::size_t rows = a.size();
    std::size_t cols = ncols;
    // augmented working copy [A | b], solving A u = b with b = -rhs
    ExprMatrix m(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        m[r] = a[r];
        m[r].push_back(-rhs[r]);
    }
    std::vector<int> pivot_row_of_col(cols, -1);
    std::vector<bool> row_used(rows, false);
    for (std::size_t col = 0; col < cols; ++col) {
        int best = -1;
        int best_class = 3;
        int best_complexity = 0;
        bool saw_undetermined = false;
        std::string undet_note;
        for (std::size_t r = 0; r < rows; ++r) {
            if (row_used[r] || m[r][col].is_zero_structural()) continue;
            const Expr& e = m[r][col];
            int cls;
            if (e.is_rational()) {
                cls = 0;
            } else if (is_zero(e, rng.fork()) == Truth::NonZero) {
                cls = 1;
            } else {
                saw_undetermined = true;
                undet_note = e.str();
                continue;
            }
            int cx = e.complexity();
            if (best < 0 || cls < best_class || (cls == best_class && cx < best_complexity)) {
                best = static_cast<int>(r);
                best_class = cls;
                best_complexity = cx;
            }
        }
        if (best < 0) {
            if (saw_undetermined) {
                out.aborted = true;
                out.abort_note = undet_note;
                out.warnings.push_back("undetermined pivot candidate: " + undet_note);
                return out;
            }
            continue; // free column
        }
        if (best_class != 0)
            out.warnings.push_back("pivot assumed nonzero at generic points: " +
                                   m[best][col].str());
        for (std::size_t r = 0; r < rows; ++r) {
            if (static_cast<int>(r) == best || m[r][col].is_zero_structural()) continue;
            Expr f = m[r][col] / m[best][col];
            for (std::size_t c = col; c <= cols; ++c) m[r][c] = m[r][c] - f * m[best][c];
        }
        row_used[best] = true;
        pivot_row_of_col[col] = best;
        out.pivot_cols.push_back(static_cast<int>(col));
    }
    // consistency of rows that never hosted a pivot
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_used[r]) continue;
        const Expr& resid = m[r][cols];
        if (resid.is_zero_structural()) continue;
        Truth t = is_zero(resid, rng.fork());
        if (t == Truth::Zero) continue;
        if (t == Truth::Undetermined) {
            out.undetermined_rows.push_back(static_cast<int>(r));
            out.warnings.push_back("residual undetermined at probe points: " + resid.str());
        }
        // report the residual of (A u + rhs = 0)
        out.obstructions.push_back({static_cast<int>(r), -resid});
    }
    // particular solution (free slots zero) and kernel basis
    out.particular.assign(cols, Expr());
    for (std::size_t col = 0; col < cols; ++col) {
        int pr = pivot_row_of_col[col];
        if (pr < 0) {
            out.free_cols.push_back(static_cast<int>(col));
            continue;
        }
        out.particular[col] = m[pr][cols] / m[pr][col];
    }
    for (int f : out.free_cols) {
        std::vector<Expr> v(cols, Expr());
        v[f] = Expr::constant(1);
        for (std::size_t col = 0; col < cols; ++col) {
            int pr = pivot_row_of_col[col];
            if (pr < 0) continue;
            if (m[pr][f].is_zero_structural()) continue;
            v[col] = -(m[pr][f] / m[pr][col]);
        }
        // clear denominators to a primitive vector
        Polynomial lcm = Polynomial::constant(1);
        for (const auto& e : v)
            if (!e.is_zero_structural()) lcm = poly_lcm(lcm, e.den());
        if (!lcm.is_constant()) {
            Expr scale = Expr::from_quotient(lcm, Polynomial::constant(1));
            for (auto& e : v) e = e * scale;
        }
        // and divide out the gcd of the numerators
        Polynomial g = Polynomial::zero();
        for (const auto& e : v)
            if (!e.is_zero_structural()) g = g.is_zero() ? e.num() : poly_gcd(g, e.num());
        if (!g.is_zero() && !g.is_constant()) {
            bool ok = true;
            std::vector<Expr> reduced = v;
            for (auto& e : reduced) {
                if (e.is_zero_structural()) continue;
                auto q = poly_exact_div(e.num(), g);
                if (!q) {
                    ok = false;
                    break;
                }
                e = Expr::from_quotient(*q, e.den());
            }
            if (ok) v = std::move(reduced);
        }
        out.kernel.push_back(std::move(v));
    }
    return out;
}

} // namespace relalg

#include <relalg/tableau.hpp>

#include <algorithm>
#include <numeric>

namespace relalg {

// ---------------------------------------------------------------------------
// Layout helpers
// ---------------------------------------------------------------------------

// All strictly increasing multi-indices of size l over {1..n}, lex order.
static std::vector<std::vector<int>> increasing_indices(int n, int l) {
    std::vector<std::vector<int>> out;
    if (l < 0 || l > n) return out;
    std::vector<int> idx(l);
    std::iota(idx.begin(), idx.end(), 1);
    while (true) {
        out.push_back(idx);
        if (l == 0) break;
        int p = l - 1;
        while (p >= 0 && idx[p] == n - (l - 1 - p)) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < l; ++q) idx[q] = idx[q - 1] + 1;
    }
    return out;
}

std::vector<ComponentKey> TableauData::derivation_components(int n, int nbase, int deg) {
    std::vector<ComponentKey> out;
    for (int i = 1; i <= n; ++i)
        for (const auto& J : increasing_indices(n, deg + 1))
            out.push_back({ComponentKey::Kind::covector, i, J});
    for (int mu = 0; mu < nbase; ++mu)
        for (const auto& I : increasing_indices(n, deg))
            out.push_back({ComponentKey::Kind::function, mu, I});
    return out;
}

Expr TableauData::raw_entry(int row, std::size_t col) const {
    const Expr& e = entries[row][col];
    if (cols[col].kind == ComponentKey::Kind::covector) return -e;
    return e;
}

ExprMatrix TableauData::symbol_block() const {
    ExprMatrix out(rows());
    for (int r = 0; r < rows(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (cols[c].kind == ComponentKey::Kind::function) out[r].push_back(entries[r][c]);
    return out;
}

TableauData tableau_map(const RelativeAlgebroid& a) {
    TableauData t;
    t.frame_rank = a.rank();
    t.deg = 1;
    t.row_names = a.fiber_vars;
    t.base_names = a.base_vars;
    t.frame_names = a.frame;
    t.cols = TableauData::derivation_components(a.rank(), static_cast<int>(a.base_vars.size()), 1);
    t.entries.assign(t.rows(), std::vector<Expr>(t.cols.size()));
    for (int r = 0; r < t.rows(); ++r) {
        const std::string& y = a.fiber_vars[r];
        for (std::size_t c = 0; c < t.cols.size(); ++c) {
            const ComponentKey& key = t.cols[c];
            if (key.kind == ComponentKey::Kind::covector) {
                // d c^i_jk / d y  (c is minus the stored raw coefficient)
                Expr raw = a.dtheta[key.target - 1].coefficient(key.args);
                t.entries[r][c] = (-raw).differentiate(y);
            } else {
                t.entries[r][c] = a.dbase[key.target].coefficient(key.args).differentiate(y);
            }
        }
    }
    return t;
}

TableauData tautological_tableau(int n, int m, int k) {
    TableauData t;
    t.frame_rank = n;
    t.deg = k;
    for (int a = 0; a < m; ++a) t.base_names.push_back("v" + std::to_string(a + 1));
    t.cols = TableauData::derivation_components(n, m, k);
    auto idxs = increasing_indices(n, k);
    for (int a = 0; a < m; ++a)
        for (const auto& I : idxs) {
            std::string nm = "r" + std::to_string(a + 1) + "_";
            for (int i : I) nm += std::to_string(i);
            t.row_names.push_back(nm);
        }
    t.entries.assign(t.rows(), std::vector<Expr>(t.cols.size()));
    int r = 0;
    for (int a = 0; a < m; ++a)
        for (const auto& I : idxs) {
            ComponentKey key{ComponentKey::Kind::function, a, I};
            auto it = std::find(t.cols.begin(), t.cols.end(), key);
            t.entries[r][it - t.cols.begin()] = Expr::constant(1);
            ++r;
        }
    return t;
}

TableauData full_derivation_tableau(int n, int nbase, int deg) {
    TableauData t;
    t.frame_rank = n;
    t.deg = deg;
    for (int mu = 0; mu < nbase; ++mu) t.base_names.push_back("x" + std::to_string(mu + 1));
    t.cols = TableauData::derivation_components(n, nbase, deg);
    t.entries.assign(t.cols.size(), std::vector<Expr>(t.cols.size()));
    for (std::size_t c = 0; c < t.cols.size(); ++c) {
        t.row_names.push_back("d" + std::to_string(c));
        // rows are raw derivation coordinates; store with the c-sign convention
        t.entries[c][c] = t.cols[c].kind == ComponentKey::Kind::covector
                              ? Expr::constant(-1)
                              : Expr::constant(1);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Spencer differential
// ---------------------------------------------------------------------------

Expr SpencerImage::value_of(const ComponentKey& key) const {
    for (std::size_t i = 0; i < comps.size(); ++i)
        if (comps[i] == key) return values[i];
    throw StructureError("component outside the Spencer image layout");
}

// Accumulates value * theta^K ^ (component slot J) into the output layout.
namespace {

struct Accumulator {
    std::vector<ComponentKey> comps;
    std::vector<Expr> values;
    std::map<ComponentKey, std::size_t> pos;

    explicit Accumulator(std::vector<ComponentKey> layout) : comps(std::move(layout)) {
        values.assign(comps.size(), Expr());
        for (std::size_t i = 0; i < comps.size(); ++i) pos[comps[i]] = i;
    }

    void add(ComponentKey::Kind kind, int target, std::vector<int> args, const Expr& v) {
        int sign = sort_index_sign(args);
        if (sign == 0 || v.is_zero_structural()) return;
        ComponentKey key{kind, target, std::move(args)};
        auto it = pos.find(key);
        if (it == pos.end()) throw StructureError("Spencer image slot out of range");
        values[it->second] = values[it->second] + (sign < 0 ? -v : v);
    }
};

} // namespace

ExprMatrix spencer_matrix(const TableauData& t, int l) {
    int n = t.frame_rank;
    auto out_comps =
        TableauData::derivation_components(n, static_cast<int>(t.base_names.size()), t.deg + l);
    auto ks = increasing_indices(n, l);
    ExprMatrix m(out_comps.size());
    for (auto& row : m) row.assign(ks.size() * t.rows(), Expr());
    std::map<ComponentKey, std::size_t> pos;
    for (std::size_t i = 0; i < out_comps.size(); ++i) pos[out_comps[i]] = i;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        for (int r = 0; r < t.rows(); ++r) {
            std::size_t col = ki * t.rows() + r;
            for (std::size_t c = 0; c < t.cols.size(); ++c) {
                Expr raw = t.raw_entry(r, c);
                if (raw.is_zero_structural()) continue;
                std::vector<int> args = ks[ki];
                args.insert(args.end(), t.cols[c].args.begin(), t.cols[c].args.end());
                int sign = sort_index_sign(args);
                if (sign == 0) continue;
                ComponentKey key{t.cols[c].kind, t.cols[c].target, args};
                m[pos.at(key)][col] = m[pos.at(key)][col] + (sign < 0 ? -raw : raw);
            }
        }
    }
    return m;
}

SpencerImage spencer_differential(const TableauData& t, const ExprMatrix& xi) {
    int n = t.frame_rank;
    if (static_cast<int>(xi.size()) != t.rows())
        throw StructureError("xi must have one row per fiber direction");
    for (const auto& row : xi)
        if (static_cast<int>(row.size()) != n)
            throw StructureError("xi must have one column per frame element");
    SpencerImage out;
    out.comps =
        TableauData::derivation_components(n, static_cast<int>(t.base_names.size()), t.deg + 1);
    Accumulator acc(out.comps);
    for (int j = 1; j <= n; ++j)
        for (int r = 0; r < t.rows(); ++r) {
            const Expr& x = xi[r][j - 1];
            if (x.is_zero_structural()) continue;
            for (std::size_t c = 0; c < t.cols.size(); ++c) {
                Expr raw = t.raw_entry(r, c);
                if (raw.is_zero_structural()) continue;
                std::vector<int> args = {j};
                args.insert(args.end(), t.cols[c].args.begin(), t.cols[c].args.end());
                acc.add(t.cols[c].kind, t.cols[c].target, std::move(args), x * raw);
            }
        }
    out.values = std::move(acc.values);
    return out;
}

// ---------------------------------------------------------------------------
// Frame changes and Cartan characters
// ---------------------------------------------------------------------------

TableauData transform_frame(const TableauData& t, const RatMatrix& m) {
    int n = t.frame_rank;
    if (m.empty()) return t;
    if (static_cast<int>(m.size()) != n) throw StructureError("frame change must be n x n");
    {
        RatMatrix chk = m;
        if (exact_rank(std::move(chk)) != n)
            throw StructureError("frame change matrix is singular");
    }
    // new basis 1-forms: theta^j = sum_l m[j][l] theta'^l
    std::vector<DForm> subst;
    for (int j = 0; j < n; ++j) {
        DForm f(n, 1);
        for (int l = 0; l < n; ++l)
            if (m[j][l] != 0) f.set_coefficient({l + 1}, Expr::constant(m[j][l]));
        subst.push_back(f);
    }
    TableauData out = t;
    for (auto& row : out.entries)
        for (auto& e : row) e = Expr();
    std::map<ComponentKey, std::size_t> pos;
    for (std::size_t i = 0; i < t.cols.size(); ++i) pos[t.cols[i]] = i;
    for (int r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols.size(); ++c) {
            Expr raw = t.raw_entry(r, c);
            if (raw.is_zero_structural()) continue;
            DForm expanded = DForm::scalar(n, raw);
            for (int i : t.cols[c].args) expanded = expanded.wedge(subst[i - 1]);
            for (const auto& [idx, v] : expanded.coeffs()) {
                ComponentKey key{t.cols[c].kind, t.cols[c].target, idx};
                auto it = pos.find(key);
                Expr stored = t.cols[c].kind == ComponentKey::Kind::covector ? -v : v;
                out.entries[r][it->second] = out.entries[r][it->second] + stored;
            }
        }
    }
    return out;
}

FlagSpec random_flag(int n, Rng& rng, int index) {
    FlagSpec spec;
    spec.desc = "random#" + std::to_string(index);
    while (true) {
        RatMatrix m(n, std::vector<Rat>(n));
        for (auto& row : m)
            for (auto& v : row) v = rng.rational_or_zero(3, 2);
        RatMatrix chk = m;
        if (exact_rank(std::move(chk)) == n) {
            spec.change = std::move(m);
            return spec;
        }
    }
}

int CharacterVector::sum() const {
    int acc = 0;
    for (int v : s) acc += v;
    return acc;
}

int CharacterVector::weighted_sum() const {
    int acc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += static_cast<int>(i + 1) * s[i];
    return acc;
}

CharacterVector cartan_characters(const TableauData& t, const FlagSpec& flag, Rng rng) {
    TableauData w = flag.change.empty() ? t : transform_frame(t, flag.change);
    CharacterVector out;
    out.flag_desc = flag.desc;
    int n = t.frame_rank;
    int prev = 0;
    for (int i = 1; i <= n; ++i) {
        // columns whose frame indices all lie in {1..i}
        ExprMatrix sub(w.rows());
        for (int r = 0; r < w.rows(); ++r)
            for (std::size_t c = 0; c < w.cols.size(); ++c) {
                bool keep = true;
                for (int a : w.cols[c].args)
                    if (a > i) keep = false;
                if (keep) sub[r].push_back(w.entries[r][c]);
            }
        GenericRank gr = generic_rank(sub, rng.fork());
        if (!gr.stable) out.stable = false;
        out.s.push_back(gr.rank - prev);
        prev = gr.rank;
    }
    return out;
}

ProlongationInfo prolongation_rank(const TableauData& t, Rng rng) {
    ProlongationInfo out;
    if (t.rows() == 0) return out;
    GenericRank taur = generic_rank(t.entries, rng.fork());
    out.tableau_rank = taur.rank;
    ExprMatrix dm = spencer_matrix(t, 1);
    GenericRank dr = generic_rank(dm, rng.fork());
    out.kernel_dim_src = t.frame_rank * t.rows() - dr.rank;
    out.rank = t.frame_rank * taur.rank - dr.rank;
    out.stable = taur.stable && dr.stable;
    return out;
}

CartanTestResult cartan_test(const TableauData& t, Rng rng, int random_flags) {
    CartanTestResult out;
    ProlongationInfo pi = prolongation_rank(t, rng.fork());
    out.rank = pi.rank;
    if (!pi.stable) out.warnings.push_back("prolongation rank unstable across probe points");
    std::vector<FlagSpec> flags;
    flags.push_back(FlagSpec{});
    Rng flag_rng = rng.fork();
    for (int i = 0; i < random_flags; ++i)
        flags.push_back(random_flag(t.frame_rank, flag_rng, i + 1));
    bool any_pass = false, any_unstable = !pi.stable;
    for (const auto& fl : flags) {
        CharacterVector cv = cartan_characters(t, fl, rng.fork());
        out.flags_tried.push_back(cv);
        if (!cv.stable) {
            any_unstable = true;
            continue;
        }
        if (cv.weighted_sum() == pi.rank) any_pass = true;
        if (out.characters.s.empty() || cv.s > out.characters.s) out.characters = cv;
    }
    if (out.characters.s.empty() && !out.flags_tried.empty())
        out.characters = out.flags_tried.front();
    out.bound = out.characters.weighted_sum();
    if (any_pass)
        out.involutive = Verdict::Yes;
    else if (any_unstable)
        out.involutive = Verdict::Undetermined;
    else
        out.involutive = Verdict::No;
    if (out.involutive == Verdict::No)
        out.warnings.push_back(
            "no sampled flag achieved Cartan's bound; not involutive by this test");
    return out;
}

// ---------------------------------------------------------------------------
// Spencer cohomology dimensions at a point
// ---------------------------------------------------------------------------

namespace {

// delta: Hom(Lambda^l W, span(elements)) -> D^(deg+l) components, numerically.
// `elements` are raw component vectors over derivation_components(n,nbase,deg).
DblMatrix numeric_delta_matrix(int n, int nbase, int deg, int l, const DblMatrix& elements,
                               const std::vector<ComponentKey>& deg_comps) {
    auto out_comps = TableauData::derivation_components(n, nbase, deg + l);
    std::map<ComponentKey, std::size_t> pos;
    for (std::size_t i = 0; i < out_comps.size(); ++i) pos[out_comps[i]] = i;
    auto ks = increasing_indices(n, l);
    DblMatrix m(out_comps.size(),
                std::vector<double>(ks.size() * elements.size(), 0.0));
    for (std::size_t ki = 0; ki < ks.size(); ++ki)
        for (std::size_t e = 0; e < elements.size(); ++e) {
            std::size_t col = ki * elements.size() + e;
            for (std::size_t c = 0; c < deg_comps.size(); ++c) {
                double v = elements[e][c];
                if (v == 0) continue;
                std::vector<int> args = ks[ki];
                args.insert(args.end(), deg_comps[c].args.begin(), deg_comps[c].args.end());
                int sign = sort_index_sign(args);
                if (sign == 0) continue;
                ComponentKey key{deg_comps[c].kind, deg_comps[c].target, args};
                m[pos.at(key)][col] += sign * v;
            }
        }
    return m;
}

// Classical skew-symmetrization: Hom(Lambda^lin W, elements) ->
// Hom(Lambda^(lin+1) W, R^inner), elements given as vectors over (frame, inner).
DblMatrix numeric_skew_matrix(int n, int lin, int inner, const DblMatrix& elements) {
    auto ks = increasing_indices(n, lin);
    auto js = increasing_indices(n, lin + 1);
    std::map<std::vector<int>, std::size_t> kpos;
    for (std::size_t i = 0; i < ks.size(); ++i) kpos[ks[i]] = i;
    DblMatrix m(js.size() * inner, std::vector<double>(ks.size() * elements.size(), 0.0));
    for (std::size_t ji = 0; ji < js.size(); ++ji) {
        const auto& J = js[ji];
        for (std::size_t a = 0; a < J.size(); ++a) {
            std::vector<int> K = J;
            K.erase(K.begin() + a);
            int frame = J[a];
            double sign = (a % 2 == 0) ? 1.0 : -1.0;
            std::size_t kidx = kpos.at(K);
            for (std::size_t e = 0; e < elements.size(); ++e)
                for (int t = 0; t < inner; ++t)
                    m[ji * inner + t][kidx * elements.size() + e] +=
                        sign * elements[e][(frame - 1) * inner + t];
        }
    }
    return m;
}

// Row-space basis of a numeric matrix.
DblMatrix row_space_basis(DblMatrix m, double tol = 1e-9) {
    if (m.empty()) return {};
    std::size_t rows = m.size(), cols = m[0].size();
    double scale = 0;
    for (const auto& r : m)
        for (double v : r) scale = std::max(scale, std::abs(v));
    if (scale == 0) return {};
    double cut = tol * std::max(1.0, scale);
    DblMatrix basis;
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
            for (std::size_t c = 0; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    for (std::size_t r = 0; r < rank; ++r) basis.push_back(m[r]);
    return basis;
}

} // namespace

int spencer_cohomology_dim(const TableauData& t, int m, int l,
                           const std::map<std::string, double>& point) {
    if (m < -1 || m > 1 || l < 2 || l > 3)
        throw StructureError("unsupported Spencer cohomology request (m in {-1,0,1}, l in {2,3})");
    int n = t.frame_rank;
    int nbase = static_cast<int>(t.base_names.size());
    auto deg_comps = TableauData::derivation_components(n, nbase, t.deg);
    // numeric raw tableau rows at the point
    DblMatrix raw(t.rows(), std::vector<double>(deg_comps.size(), 0.0));
    for (int r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols.size(); ++c) {
            auto it = std::find(deg_comps.begin(), deg_comps.end(), t.cols[c]);
            raw[r][it - deg_comps.begin()] = t.raw_entry(r, c).eval(point);
        }
    auto binom = [](int a, int b) {
        if (b < 0 || b > a) return 0L;
        long r = 1;
        for (int i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
        return r;
    };
    long dim_target = 0;
    for (const auto& c : TableauData::derivation_components(n, nbase, t.deg + l))
        (void)c, ++dim_target;

    if (m == -1) {
        DblMatrix dm = numeric_delta_matrix(n, nbase, t.deg, l, raw, deg_comps);
        return static_cast<int>(dim_target) - numeric_rank(dm);
    }

    DblMatrix im_basis = row_space_basis(raw); // basis of im(tau) in component space
    int tdim = static_cast<int>(im_basis.size());

    // T^(1) = ker(delta) on Hom(W, im tau): vectors over (frame, im-basis)
    DblMatrix t1;
    if (tdim > 0) {
        DblMatrix d1 = numeric_delta_matrix(n, nbase, t.deg, 1, im_basis, deg_comps);
        t1 = numeric_kernel(d1);
        if (d1.empty() || d1[0].empty()) {
            // no target components: everything is in the kernel
            t1.assign(static_cast<std::size_t>(n) * tdim, {});
            for (std::size_t i = 0; i < t1.size(); ++i) {
                t1[i].assign(static_cast<std::size_t>(n) * tdim, 0.0);
                t1[i][i] = 1.0;
            }
        }
    }

    if (m == 0) {
        // numerator: ker(delta_tau) on Hom(Lambda^l W, T-source)
        DblMatrix dl = numeric_delta_matrix(n, nbase, t.deg, l, raw, deg_comps);
        int domain = static_cast<int>(binom(n, l)) * t.rows();
        int ker = domain - numeric_rank(dl);
        // denominator: image of the classical skew map from Hom(Lambda^(l-1) W, T^(1))
        int denom = 0;
        if (!t1.empty()) {
            DblMatrix sk = numeric_skew_matrix(n, l - 1, tdim, t1);
            denom = numeric_rank(sk);
        }
        return ker - denom;
    }

    // m == 1: classical cohomology of the prolongation tower
    if (t1.empty()) return 0;
    DblMatrix sk_num = numeric_skew_matrix(n, l, tdim, t1);
    int domain = static_cast<int>(binom(n, l)) * static_cast<int>(t1.size());
    int ker = domain - numeric_rank(sk_num);
    // T^(2) = ker of skew: Hom(W, T^(1)) -> Hom(Lambda^2 W, im tau)
    DblMatrix sk1 = numeric_skew_matrix(n, 1, tdim, t1);
    // columns of sk1 are (K=singleton, t1-element) pairs = Hom(W, T^(1))
    DblMatrix t2 = numeric_kernel(sk1);
    int denom = 0;
    if (!t2.empty()) {
        // delta: Hom(Lambda^(l-1) W, T^(2)) -> Hom(Lambda^l W, T^(1)):
        // T^(2) vectors live over (frame, #T1) after reordering columns of sk1.
        // sk1 columns are ordered (K major, element minor) with |K| = 1, so the
        // layout is already (frame, t1-element).
        DblMatrix sk2 = numeric_skew_matrix(n, l - 1, static_cast<int>(t1.size()), t2);
        denom = numeric_rank(sk2);
    }
    return ker - denom;
}

} // namespace relalg

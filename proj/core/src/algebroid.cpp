#include <relalg/algebroid.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace relalg {

VarTable RelativeAlgebroid::var_table() const {
    VarTable vt;
    for (const auto& v : base_vars) vt.add(v, VarRole::base);
    for (const auto& v : fiber_vars) vt.add(v, VarRole::fiber);
    return vt;
}

Expr RelativeAlgebroid::structure_c(int i, int j, int k) const {
    if (j >= k) throw StructureError("structure_c requires j < k");
    return -dtheta[i - 1].coefficient({j, k});
}

Expr RelativeAlgebroid::anchor_entry(int mu, int i) const {
    return dbase[mu].coefficient({i});
}

int RelativeAlgebroid::base_index(const std::string& name) const {
    for (std::size_t i = 0; i < base_vars.size(); ++i)
        if (base_vars[i] == name) return static_cast<int>(i);
    return -1;
}

int RelativeAlgebroid::fiber_index(const std::string& name) const {
    for (std::size_t i = 0; i < fiber_vars.size(); ++i)
        if (fiber_vars[i] == name) return static_cast<int>(i);
    return -1;
}

void RelativeAlgebroid::validate() const {
    int n = rank();
    if (static_cast<int>(dtheta.size()) != n)
        throw StructureError("expected one structure 2-form per frame element");
    if (dbase.size() != base_vars.size())
        throw StructureError("expected one anchor 1-form per base variable");
    std::set<std::string> allowed(base_vars.begin(), base_vars.end());
    allowed.insert(fiber_vars.begin(), fiber_vars.end());
    auto check_vars = [&](const DForm& f, const std::string& what) {
        for (const auto& v : f.variables())
            if (!allowed.count(v))
                throw StructureError(what + " mentions undeclared variable " + v);
    };
    for (int i = 0; i < n; ++i) {
        if (dtheta[i].degree() != 2 && !dtheta[i].is_zero())
            throw StructureError("d " + frame[i] + " must be a 2-form");
        if (dtheta[i].frame_rank() != n) throw StructureError("frame-rank mismatch");
        check_vars(dtheta[i], "d " + frame[i]);
    }
    for (std::size_t m = 0; m < dbase.size(); ++m) {
        if (dbase[m].degree() != 1 && !dbase[m].is_zero())
            throw StructureError("d " + base_vars[m] + " must be a 1-form");
        if (dbase[m].frame_rank() != n) throw StructureError("frame-rank mismatch");
        check_vars(dbase[m], "d " + base_vars[m]);
    }
    // no name may be declared twice across frame/base/fiber
    std::set<std::string> seen;
    for (const auto& v : frame)
        if (!seen.insert(v).second) throw StructureError("duplicate declaration: " + v);
    for (const auto& v : base_vars)
        if (!seen.insert(v).second) throw StructureError("duplicate declaration: " + v);
    for (const auto& v : fiber_vars)
        if (!seen.insert(v).second) throw StructureError("duplicate declaration: " + v);
    if (!jet_frame.empty() && static_cast<int>(jet_frame.size()) != n)
        throw StructureError("jet frame annotation must match the frame rank");
}

// ---------------------------------------------------------------------------
// .alg parsing / printing
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

RelativeAlgebroid load_algebroid(const std::string& text) {
    RelativeAlgebroid a;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, std::pair<std::string, int>> dlines; // name -> (rhs, line)
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto words = split_ws(t);
        if (words[0] == "frame" || words[0] == "base" || words[0] == "fiber") {
            auto& target = words[0] == "frame" ? a.frame
                           : words[0] == "base" ? a.base_vars
                                                : a.fiber_vars;
            if (!target.empty())
                throw ParseError("duplicate '" + words[0] + "' declaration", lineno, 1);
            target.assign(words.begin() + 1, words.end());
        } else if (words[0] == "jetframe") {
            a.jet_frame.assign(words.begin() + 1, words.end());
        } else if (words[0] == "level") {
            if (words.size() != 2) throw ParseError("expected 'level <k>'", lineno, 1);
            a.level = std::stoi(words[1]);
        } else if (words[0] == "d") {
            auto eq = t.find('=');
            if (eq == std::string::npos || words.size() < 2)
                throw ParseError("expected 'd <name> = <form>'", lineno, 1);
            std::string name = words[1];
            if (dlines.count(name))
                throw ParseError("duplicate 'd " + name + "' line", lineno, 1);
            dlines[name] = {trim(t.substr(eq + 1)), lineno};
        } else {
            throw ParseError("unknown directive '" + words[0] + "'", lineno, 1);
        }
    }
    if (a.frame.empty()) throw ParseError("missing 'frame' declaration", lineno, 1);
    int n = a.rank();
    VarTable vt = a.var_table();
    a.dtheta.assign(n, DForm(n, 2));
    a.dbase.assign(a.base_vars.size(), DForm(n, 1));
    for (const auto& [name, rhs_line] : dlines) {
        const auto& [rhs, dline] = rhs_line;
        DForm f;
        try {
            f = parse_form(rhs, a.frame, vt);
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()) + " (in 'd " + name + "' on line " +
                                 std::to_string(dline) + ")",
                             dline, 1);
        }
        auto fi = std::find(a.frame.begin(), a.frame.end(), name);
        if (fi != a.frame.end()) {
            if (f.degree() != 2 && !f.is_zero())
                throw StructureError("d " + name + " must be a 2-form (line " +
                                     std::to_string(dline) + ")");
            if (f.is_zero()) f = DForm(n, 2);
            a.dtheta[fi - a.frame.begin()] = f;
            continue;
        }
        int mu = a.base_index(name);
        if (mu >= 0) {
            if (f.degree() != 1 && !f.is_zero())
                throw StructureError("d " + name + " must be a 1-form (line " +
                                     std::to_string(dline) + ")");
            if (f.is_zero()) f = DForm(n, 1);
            a.dbase[mu] = f;
            continue;
        }
        if (a.fiber_index(name) >= 0)
            throw StructureError("'d " + name +
                                 "' given for a fiber variable; fiber images belong to lifts");
        throw StructureError("'d " + name + "' refers to an undeclared name");
    }
    a.validate();
    return a;
}

RelativeAlgebroid load_algebroid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return load_algebroid(ss.str());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string to_alg_text(const RelativeAlgebroid& a) {
    std::ostringstream os;
    for (const auto& p : a.provenance) os << "# " << p << "\n";
    os << "frame";
    for (const auto& f : a.frame) os << " " << f;
    os << "\n";
    os << "base";
    for (const auto& v : a.base_vars) os << " " << v;
    os << "\n";
    os << "fiber";
    for (const auto& v : a.fiber_vars) os << " " << v;
    os << "\n";
    if (!a.jet_frame.empty()) {
        os << "jetframe";
        for (const auto& v : a.jet_frame) os << " " << v;
        os << "\n";
    }
    if (a.level != 0) os << "level " << a.level << "\n";
    for (int i = 0; i < a.rank(); ++i)
        if (!a.dtheta[i].is_zero())
            os << "d " << a.frame[i] << " = " << a.dtheta[i].str(a.frame) << "\n";
    for (std::size_t m = 0; m < a.dbase.size(); ++m)
        if (!a.dbase[m].is_zero())
            os << "d " << a.base_vars[m] << " = " << a.dbase[m].str(a.frame) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Derivation
// ---------------------------------------------------------------------------

Derivation::Derivation(const RelativeAlgebroid& a) : a_(&a) {
    for (std::size_t m = 0; m < a.base_vars.size(); ++m) dvar_[a.base_vars[m]] = a.dbase[m];
}

Derivation::Derivation(const RelativeAlgebroid& a, std::map<std::string, DForm> fiber_images)
    : Derivation(a) {
    for (auto& [name, form] : fiber_images) dvar_[name] = std::move(form);
}

DForm Derivation::d_scalar(const Expr& f) const {
    DForm out(a_->rank(), 1);
    for (const auto& v : f.variables()) {
        auto it = dvar_.find(v);
        if (it == dvar_.end())
            throw StructureError("coefficient depends on variable '" + v +
                                 "' outside the derivation's domain");
        Expr df = f.differentiate(v);
        if (df.is_zero_structural() || it->second.is_zero()) continue;
        out = out + it->second.scaled(df);
    }
    return out;
}

DForm Derivation::apply(const DForm& alpha) const {
    int n = a_->rank();
    if (alpha.degree() == 0) {
        Expr f = alpha.coefficient({});
        return d_scalar(f);
    }
    DForm out(n, alpha.degree() + 1);
    for (const auto& [idx, coeff] : alpha.coeffs()) {
        // D f ^ theta^J
        DForm theta_j = DForm::scalar(n, Expr::constant(1));
        for (int i : idx) theta_j = theta_j.wedge(DForm::theta(n, i));
        out = out + d_scalar(coeff).wedge(theta_j);
        // f * sum_t (-1)^(t-1) theta^{j1} ^ .. D theta^{jt} .. ^ theta^{jk}
        for (std::size_t t = 0; t < idx.size(); ++t) {
            DForm piece = DForm::scalar(n, Expr::constant(1));
            for (std::size_t s = 0; s < idx.size(); ++s) {
                if (s == t)
                    piece = piece.wedge(a_->dtheta[idx[s] - 1]);
                else
                    piece = piece.wedge(DForm::theta(n, idx[s]));
            }
            Expr sign_coeff = (t % 2 == 0) ? coeff : -coeff;
            out = out + piece.scaled(sign_coeff);
        }
    }
    return out;
}

DForm derive(const RelativeAlgebroid& a, const DForm& alpha) {
    if (alpha.frame_rank() != a.rank())
        throw StructureError("form frame rank does not match the algebroid");
    return Derivation(a).apply(alpha);
}

// ---------------------------------------------------------------------------
// Bracket / anchor duality
// ---------------------------------------------------------------------------

static void check_base_only(const RelativeAlgebroid& a, const Expr& e, const char* what) {
    for (const auto& v : e.variables())
        if (a.fiber_index(v) >= 0)
            throw StructureError(std::string(what) + " must have base-only coefficients");
}

Expr anchor_apply(const RelativeAlgebroid& a, const SectionExpr& x, const Expr& f) {
    if (static_cast<int>(x.coeffs.size()) != a.rank())
        throw StructureError("section length does not match the frame rank");
    check_base_only(a, f, "anchor argument");
    Expr out;
    for (int i = 1; i <= a.rank(); ++i) {
        if (x.coeffs[i - 1].is_zero_structural()) continue;
        check_base_only(a, x.coeffs[i - 1], "section");
        Expr rho_f;
        for (std::size_t mu = 0; mu < a.base_vars.size(); ++mu)
            rho_f = rho_f + a.anchor_entry(static_cast<int>(mu), i) *
                                f.differentiate(a.base_vars[mu]);
        out = out + x.coeffs[i - 1] * rho_f;
    }
    return out;
}

SectionExpr bracket(const RelativeAlgebroid& a, const SectionExpr& x, const SectionExpr& y) {
    int n = a.rank();
    if (static_cast<int>(x.coeffs.size()) != n || static_cast<int>(y.coeffs.size()) != n)
        throw StructureError("section length does not match the frame rank");
    SectionExpr out;
    out.coeffs.assign(n, Expr());
    // [x, y] = x^i y^j [e_i, e_j] + rho(x)(y^k) e_k - rho(y)(x^k) e_k
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) continue;
            Expr xy = x.coeffs[i - 1] * y.coeffs[j - 1];
            if (xy.is_zero_structural()) continue;
            for (int k = 1; k <= n; ++k) {
                Expr c = i < j ? a.structure_c(k, i, j) : -a.structure_c(k, j, i);
                if (!c.is_zero_structural()) out.coeffs[k - 1] = out.coeffs[k - 1] + xy * c;
            }
        }
    for (int k = 1; k <= n; ++k) {
        out.coeffs[k - 1] = out.coeffs[k - 1] + anchor_apply(a, x, y.coeffs[k - 1]) -
                            anchor_apply(a, y, x.coeffs[k - 1]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classifying data / systatic directions / reduction / restriction
// ---------------------------------------------------------------------------

ExprMatrix classifying_data(const RelativeAlgebroid& a) {
    // column layout: bracket coefficients (i, j<k) then anchor coefficients (mu, i)
    ExprMatrix m;
    for (const auto& y : a.fiber_vars) {
        std::vector<Expr> row;
        for (int i = 1; i <= a.rank(); ++i)
            for (int j = 1; j <= a.rank(); ++j)
                for (int k = j + 1; k <= a.rank(); ++k)
                    row.push_back(a.structure_c(i, j, k).differentiate(y));
        for (std::size_t mu = 0; mu < a.base_vars.size(); ++mu)
            for (int i = 1; i <= a.rank(); ++i)
                row.push_back(a.anchor_entry(static_cast<int>(mu), i).differentiate(y));
        m.push_back(std::move(row));
    }
    return m;
}

Verdict is_standard(const RelativeAlgebroid& a, Rng rng) {
    if (a.fiber_vars.empty()) return Verdict::Yes; // vacuously an honest algebroid
    ExprMatrix m = classifying_data(a);
    GenericRank gr = generic_rank(m, rng);
    if (!gr.stable) return Verdict::Undetermined;
    return gr.rank == static_cast<int>(a.fiber_vars.size()) ? Verdict::Yes : Verdict::No;
}

SystaticInfo systatic_directions(const RelativeAlgebroid& a, Rng rng) {
    SystaticInfo out;
    if (a.fiber_vars.empty()) return out;
    ExprMatrix m = classifying_data(a);
    GenericRank gr = generic_rank(m, rng);
    out.stable = gr.stable;
    out.kernel_dim = static_cast<int>(a.fiber_vars.size()) - gr.rank;
    // kernel vectors live in the fiber directions: solve tau^T v = 0 at a point
    if (out.kernel_dim > 0) {
        std::set<std::string> vars;
        for (const auto& row : m)
            for (const auto& e : row) {
                auto vs = e.variables();
                vars.insert(vs.begin(), vs.end());
            }
        std::map<std::string, double> pt;
        for (const auto& v : vars) pt[v] = to_double(rng.rational());
        try {
            DblMatrix md = eval_matrix(m, pt);
            // transpose: columns become the fiber directions
            DblMatrix mt(md.empty() ? 0 : md[0].size(), std::vector<double>(md.size()));
            for (std::size_t r = 0; r < md.size(); ++r)
                for (std::size_t c = 0; c < md[r].size(); ++c) mt[c][r] = md[r][c];
            out.basis = numeric_kernel(mt);
        } catch (const DomainError&) {
            out.stable = false;
        }
    }
    // coordinate-aligned part: fiber variables absent from every structure function
    for (std::size_t r = 0; r < a.fiber_vars.size(); ++r) {
        bool used = false;
        for (const auto& e : m[r])
            if (!e.is_zero_structural()) used = true;
        if (!used) out.unused_fiber_vars.push_back(a.fiber_vars[r]);
    }
    return out;
}

RelativeAlgebroid reduce(const RelativeAlgebroid& a, Rng rng) {
    SystaticInfo info = systatic_directions(a, rng);
    if (info.kernel_dim == 0) return a;
    if (static_cast<int>(info.unused_fiber_vars.size()) != info.kernel_dim)
        throw StructureError(
            "systatic kernel is not aligned with the fiber coordinates; "
            "reduction beyond aligned coordinates is out of scope (kernel dim " +
            std::to_string(info.kernel_dim) + ", aligned " +
            std::to_string(info.unused_fiber_vars.size()) + ")");
    RelativeAlgebroid r = a;
    for (const auto& drop : info.unused_fiber_vars)
        r.fiber_vars.erase(std::find(r.fiber_vars.begin(), r.fiber_vars.end(), drop));
    r.provenance.push_back("reduced: dropped inessential fiber variables");
    r.validate();
    return r;
}

RelativeAlgebroid restrict_algebroid(const RelativeAlgebroid& a,
                                     const std::vector<std::pair<std::string, Expr>>& solved,
                                     Rng rng, std::vector<std::string>* warnings) {
    std::map<std::string, Expr> subst;
    for (const auto& [var, rhs] : solved) {
        if (a.base_index(var) < 0 && a.fiber_index(var) < 0)
            throw StructureError("restriction variable '" + var + "' is not declared");
        if (subst.count(var)) throw StructureError("variable '" + var + "' restricted twice");
        if (rhs.depends_on(var))
            throw StructureError("restriction for '" + var + "' is not in solved form");
        subst[var] = rhs;
    }
    // the right-hand sides must live on the locus coordinates
    for (const auto& [var, rhs] : solved)
        for (const auto& v : rhs.variables())
            if (subst.count(v))
                throw StructureError("restriction right-hand side mentions eliminated '" + v +
                                     "'");
    auto apply = [&](const Expr& e) { return e.substitute(subst); };

    // invariance: for an eliminated base variable x = g, D x must agree with
    // the derivative of g along the locus
    Derivation d(a);
    for (const auto& [var, rhs] : solved) {
        int mu = a.base_index(var);
        if (mu < 0) continue; // fiber eliminations need no tangency condition
        for (const auto& v : rhs.variables())
            if (a.fiber_index(v) >= 0)
                throw StructureError("base restriction '" + var +
                                     "' has a fiber-dependent right-hand side");
        DForm dg = d.d_scalar(rhs);
        DForm residual = (a.dbase[mu] - dg).map_coefficients(apply);
        for (const auto& [idx, c] : residual.coeffs()) {
            Truth t = is_zero(c, rng.fork());
            if (t == Truth::NonZero)
                throw StructureError("invariance violation: d " + var +
                                     " is not tangent to the locus (residual " + c.str() + ")");
            if (t == Truth::Undetermined && warnings)
                warnings->push_back("invariance residual undetermined for " + var + ": " +
                                    c.str());
        }
    }

    RelativeAlgebroid r;
    r.frame = a.frame;
    r.level = a.level;
    r.jet_frame = a.jet_frame;
    r.provenance = a.provenance;
    {
        std::string note = "restricted to";
        for (const auto& [var, rhs] : solved) note += " " + var + "=" + rhs.str();
        r.provenance.push_back(note);
    }
    for (const auto& v : a.base_vars)
        if (!subst.count(v)) r.base_vars.push_back(v);
    for (const auto& v : a.fiber_vars)
        if (!subst.count(v)) r.fiber_vars.push_back(v);
    for (const auto& f : a.dtheta) r.dtheta.push_back(f.map_coefficients(apply));
    for (std::size_t mu = 0; mu < a.base_vars.size(); ++mu)
        if (!subst.count(a.base_vars[mu])) r.dbase.push_back(a.dbase[mu].map_coefficients(apply));
    r.validate();
    return r;
}

} // namespace relalg

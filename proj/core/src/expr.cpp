#include <relalg/expr.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace relalg {

// ---------------------------------------------------------------------------
// VarTable
// ---------------------------------------------------------------------------

int VarTable::add(const std::string& name, VarRole role) {
    if (contains(name)) throw StructureError("duplicate variable declaration: " + name);
    names_.push_back(name);
    roles_.push_back(role);
    return static_cast<int>(names_.size()) - 1;
}

bool VarTable::contains(const std::string& name) const { return index_of(name) >= 0; }

int VarTable::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

VarRole VarTable::role(const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw StructureError("unknown variable: " + name);
    return roles_[i];
}

std::vector<std::string> VarTable::with_role(VarRole r) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (roles_[i] == r) out.push_back(names_[i]);
    return out;
}

// ---------------------------------------------------------------------------
// LinForm
// ---------------------------------------------------------------------------

void LinForm::add(const std::string& var, const Rat& coeff) {
    if (coeff == 0) return;
    auto it = std::lower_bound(terms.begin(), terms.end(), var,
                               [](const auto& p, const std::string& v) { return p.first < v; });
    if (it != terms.end() && it->first == var) {
        it->second += coeff;
        if (it->second == 0) terms.erase(it);
    } else {
        terms.insert(it, {var, coeff});
    }
}

void LinForm::add(const LinForm& other, const Rat& scale) {
    for (const auto& [v, q] : other.terms) add(v, q * scale);
    constant += other.constant * scale;
}

LinForm LinForm::negated() const {
    LinForm r;
    r.constant = -constant;
    for (const auto& [v, q] : terms) r.terms.push_back({v, -q});
    return r;
}

double LinForm::eval(const std::map<std::string, double>& point) const {
    double acc = to_double(constant);
    for (const auto& [v, q] : terms) {
        auto it = point.find(v);
        if (it == point.end()) throw StructureError("unassigned variable in evaluation: " + v);
        acc += to_double(q) * it->second;
    }
    return acc;
}

std::string LinForm::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const Rat& c, const std::string& body) {
        Rat a = c < 0 ? Rat(-c) : c;
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        if (body.empty()) {
            os << to_string(a);
        } else if (a == 1) {
            os << body;
        } else {
            os << to_string(a) << "*" << body;
        }
    };
    for (const auto& [v, q] : terms) emit(q, v);
    if (constant != 0) emit(constant, "");
    return os.str();
}

bool operator==(const LinForm& a, const LinForm& b) {
    return a.constant == b.constant && a.terms == b.terms;
}

static int cmp_rat(const Rat& a, const Rat& b) { return ::cmp(a, b); }

static int cmp_linform(const LinForm& a, const LinForm& b) {
    std::size_t n = std::min(a.terms.size(), b.terms.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.terms[i].first != b.terms[i].first)
            return a.terms[i].first < b.terms[i].first ? -1 : 1;
        int c = cmp_rat(a.terms[i].second, b.terms[i].second);
        if (c != 0) return c;
    }
    if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
    return cmp_rat(a.constant, b.constant);
}

bool operator<(const LinForm& a, const LinForm& b) { return cmp_linform(a, b) < 0; }

// ---------------------------------------------------------------------------
// TrigAtom, Monomial
// ---------------------------------------------------------------------------

std::string TrigAtom::str() const {
    return (kind == TrigKind::sin ? "sin(" : "cos(") + arg.str() + ")";
}

bool operator==(const TrigAtom& a, const TrigAtom& b) {
    return a.kind == b.kind && a.arg == b.arg;
}

static int cmp_trig(const TrigAtom& a, const TrigAtom& b) {
    if (a.kind != b.kind) return a.kind == TrigKind::sin ? -1 : 1;
    return cmp_linform(a.arg, b.arg);
}

bool operator<(const TrigAtom& a, const TrigAtom& b) { return cmp_trig(a, b) < 0; }

int Monomial::total_degree() const {
    int d = 0;
    for (const auto& [v, e] : vars) d += e;
    for (const auto& [t, e] : trig) d += e;
    if (!exp_arg.is_zero()) d += 1;
    return d;
}

bool operator==(const Monomial& a, const Monomial& b) {
    return a.vars == b.vars && a.trig == b.trig && a.exp_arg == b.exp_arg;
}

static int cmp_monomial(const Monomial& a, const Monomial& b) {
    // graded order: lower total degree sorts first (terms print highest first)
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db ? -1 : 1;
    std::size_t n = std::min(a.vars.size(), b.vars.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.vars[i].first != b.vars[i].first)
            return a.vars[i].first < b.vars[i].first ? 1 : -1; // earlier name = higher
        if (a.vars[i].second != b.vars[i].second)
            return a.vars[i].second < b.vars[i].second ? -1 : 1;
    }
    if (a.vars.size() != b.vars.size()) return a.vars.size() < b.vars.size() ? -1 : 1;
    n = std::min(a.trig.size(), b.trig.size());
    for (std::size_t i = 0; i < n; ++i) {
        int c = cmp_trig(a.trig[i].first, b.trig[i].first);
        if (c != 0) return -c;
        if (a.trig[i].second != b.trig[i].second)
            return a.trig[i].second < b.trig[i].second ? -1 : 1;
    }
    if (a.trig.size() != b.trig.size()) return a.trig.size() < b.trig.size() ? -1 : 1;
    return cmp_linform(a.exp_arg, b.exp_arg);
}

bool operator<(const Monomial& a, const Monomial& b) { return cmp_monomial(a, b) < 0; }

static Monomial monomial_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    {
        auto ia = a.vars.begin(), ib = b.vars.begin();
        while (ia != a.vars.end() || ib != b.vars.end()) {
            if (ib == b.vars.end() || (ia != a.vars.end() && ia->first < ib->first))
                r.vars.push_back(*ia++);
            else if (ia == a.vars.end() || ib->first < ia->first)
                r.vars.push_back(*ib++);
            else {
                r.vars.push_back({ia->first, ia->second + ib->second});
                ++ia;
                ++ib;
            }
        }
    }
    {
        auto ia = a.trig.begin(), ib = b.trig.begin();
        while (ia != a.trig.end() || ib != b.trig.end()) {
            if (ib == b.trig.end() || (ia != a.trig.end() && ia->first < ib->first))
                r.trig.push_back(*ia++);
            else if (ia == a.trig.end() || ib->first < ia->first)
                r.trig.push_back(*ib++);
            else {
                r.trig.push_back({ia->first, ia->second + ib->second});
                ++ia;
                ++ib;
            }
        }
    }
    r.exp_arg = a.exp_arg;
    r.exp_arg.add(b.exp_arg);
    return r;
}

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

bool Polynomial::is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms[0].first.is_one());
}

Rat Polynomial::constant_value() const {
    if (terms.empty()) return Rat(0);
    assert(is_constant());
    return terms[0].second;
}

int Polynomial::total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, m.total_degree());
    return d;
}

Polynomial Polynomial::constant(const Rat& c) {
    Polynomial p;
    if (c != 0) p.terms.push_back({Monomial{}, c});
    return p;
}

Polynomial Polynomial::variable(const std::string& name) {
    Polynomial p;
    Monomial m;
    m.vars.push_back({name, 1});
    p.terms.push_back({m, Rat(1)});
    return p;
}

void Polynomial::collect_vars(std::set<std::string>& out) const {
    for (const auto& [m, c] : terms) {
        for (const auto& [v, e] : m.vars) out.insert(v);
        for (const auto& [t, e] : m.trig)
            for (const auto& [v, q] : t.arg.terms) out.insert(v);
        for (const auto& [v, q] : m.exp_arg.terms) out.insert(v);
    }
}

bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms == b.terms; }

// Rebuilds a polynomial from accumulated terms, enforcing the sin-degree <= 1
// normal form (sin^2 l -> 1 - cos^2 l) and dropping zero coefficients.
static Polynomial from_terms(std::vector<std::pair<Monomial, Rat>> work) {
    std::map<Monomial, Rat> acc;
    while (!work.empty()) {
        auto [m, c] = work.back();
        work.pop_back();
        if (c == 0) continue;
        int sin_idx = -1;
        for (std::size_t i = 0; i < m.trig.size(); ++i) {
            if (m.trig[i].first.kind == TrigKind::sin && m.trig[i].second >= 2) {
                sin_idx = static_cast<int>(i);
                break;
            }
        }
        if (sin_idx < 0) {
            auto it = acc.find(m);
            if (it == acc.end())
                acc.emplace(std::move(m), c);
            else {
                it->second += c;
                if (it->second == 0) acc.erase(it);
            }
            continue;
        }
        // m = rest * sin(l)^s, s >= 2: expand sin^2 = 1 - cos^2 once.
        TrigAtom sin_atom = m.trig[sin_idx].first;
        int s = m.trig[sin_idx].second;
        Monomial rest = m;
        if (s > 2)
            rest.trig[sin_idx].second = s - 2;
        else
            rest.trig.erase(rest.trig.begin() + sin_idx);
        TrigAtom cos_atom{TrigKind::cos, sin_atom.arg};
        Monomial with_cos2 = rest;
        {
            auto it = std::lower_bound(
                with_cos2.trig.begin(), with_cos2.trig.end(), cos_atom,
                [](const auto& p, const TrigAtom& a) { return p.first < a; });
            if (it != with_cos2.trig.end() && it->first == cos_atom)
                it->second += 2;
            else
                with_cos2.trig.insert(it, {cos_atom, 2});
        }
        work.push_back({rest, c});
        work.push_back({with_cos2, -c});
    }
    Polynomial p;
    p.terms.assign(acc.begin(), acc.end());
    std::sort(p.terms.begin(), p.terms.end(),
              [](const auto& a, const auto& b) { return b.first < a.first; });
    return p;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<std::pair<Monomial, Rat>> work = a.terms;
    work.insert(work.end(), b.terms.begin(), b.terms.end());
    return from_terms(std::move(work));
}

Polynomial neg(const Polynomial& a) {
    Polynomial r = a;
    for (auto& [m, c] : r.terms) c = -c;
    return r;
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + neg(b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<std::pair<Monomial, Rat>> work;
    work.reserve(a.terms.size() * b.terms.size());
    for (const auto& [ma, ca] : a.terms)
        for (const auto& [mb, cb] : b.terms) work.push_back({monomial_mul(ma, mb), ca * cb});
    return from_terms(std::move(work));
}

Polynomial derivative(const Polynomial& p, const std::string& var) {
    std::vector<std::pair<Monomial, Rat>> work;
    for (const auto& [m, c] : p.terms) {
        // variable powers
        for (std::size_t i = 0; i < m.vars.size(); ++i) {
            if (m.vars[i].first != var) continue;
            Monomial d = m;
            Rat coeff = c * m.vars[i].second;
            if (d.vars[i].second == 1)
                d.vars.erase(d.vars.begin() + i);
            else
                d.vars[i].second -= 1;
            work.push_back({d, coeff});
        }
        // trig atoms
        for (std::size_t i = 0; i < m.trig.size(); ++i) {
            const TrigAtom& at = m.trig[i].first;
            Rat dl(0);
            for (const auto& [v, q] : at.arg.terms)
                if (v == var) dl = q;
            if (dl == 0) continue;
            int e = m.trig[i].second;
            Monomial d = m;
            if (e == 1)
                d.trig.erase(d.trig.begin() + i);
            else
                d.trig[i].second -= 1;
            TrigAtom partner{at.kind == TrigKind::sin ? TrigKind::cos : TrigKind::sin, at.arg};
            Rat coeff = c * e * dl * (at.kind == TrigKind::cos ? Rat(-1) : Rat(1));
            Monomial dm = monomial_mul(d, [&] {
                Monomial t;
                t.trig.push_back({partner, 1});
                return t;
            }());
            work.push_back({dm, coeff});
        }
        // exp factor
        {
            Rat dl(0);
            for (const auto& [v, q] : m.exp_arg.terms)
                if (v == var) dl = q;
            if (dl != 0) work.push_back({m, c * dl});
        }
    }
    return from_terms(std::move(work));
}

double eval(const Polynomial& p, const std::map<std::string, double>& point) {
    double acc = 0.0;
    for (const auto& [m, c] : p.terms) {
        double t = to_double(c);
        for (const auto& [v, e] : m.vars) {
            auto it = point.find(v);
            if (it == point.end()) throw StructureError("unassigned variable in evaluation: " + v);
            t *= std::pow(it->second, e);
        }
        for (const auto& [at, e] : m.trig) {
            double a = at.arg.eval(point);
            t *= std::pow(at.kind == TrigKind::sin ? std::sin(a) : std::cos(a), e);
        }
        if (!m.exp_arg.is_zero()) t *= std::exp(m.exp_arg.eval(point));
        acc += t;
    }
    return acc;
}

// Multiplies every monomial by exp(shift).
static Polynomial mul_exp(const Polynomial& p, const LinForm& shift) {
    if (shift.is_zero()) return p;
    Polynomial r = p;
    for (auto& [m, c] : r.terms) m.exp_arg.add(shift);
    std::sort(r.terms.begin(), r.terms.end(),
              [](const auto& a, const auto& b) { return b.first < a.first; });
    return r;
}

// ---------------------------------------------------------------------------
// Multivariate gcd / exact division.
//
// Polynomials are mapped onto exponent vectors over an ordered symbol list
// (variables, then trig atoms, then at most one exp-lattice unit). exp
// factors are units; their exponents are shifted to be non-negative and the
// shift is restored afterwards.
// ---------------------------------------------------------------------------

namespace {

struct SymSpace {
    std::vector<std::string> vars;
    std::vector<TrigAtom> trigs;
    bool has_exp = false;
    LinForm exp_base;   // primitive lattice generator
    bool lattice_ok = true;

    int nsyms() const { return static_cast<int>(vars.size() + trigs.size()) + (has_exp ? 1 : 0); }
};

using ExpVec = std::vector<int>;

struct GPoly {
    std::map<ExpVec, Rat> t;
    bool zero() const { return t.empty(); }
};

// Tries to express arg = k * base with k rational. base must be nonzero.
std::optional<Rat> proportion(const LinForm& arg, const LinForm& base) {
    if (arg.is_zero()) return Rat(0);
    Rat k(0);
    if (!base.terms.empty()) {
        // match on the first base term
        Rat found(0);
        for (const auto& [v, q] : arg.terms)
            if (v == base.terms[0].first) found = q;
        if (found == 0 && !arg.terms.empty() && arg.terms[0].first != base.terms[0].first)
            return std::nullopt;
        k = found / base.terms[0].second;
    } else {
        if (!arg.terms.empty()) return std::nullopt;
        k = arg.constant / base.constant;
    }
    // verify
    LinForm check = base;
    LinForm scaled;
    scaled.add(check, k);
    if (scaled == arg) return k;
    return std::nullopt;
}

SymSpace build_space(const Polynomial& a, const Polynomial& b) {
    SymSpace s;
    std::set<std::string> vset;
    std::set<TrigAtom> tset;
    std::vector<LinForm> exps;
    auto scan = [&](const Polynomial& p) {
        for (const auto& [m, c] : p.terms) {
            for (const auto& [v, e] : m.vars) vset.insert(v);
            for (const auto& [at, e] : m.trig) tset.insert(at);
            if (!m.exp_arg.is_zero()) exps.push_back(m.exp_arg);
        }
    };
    scan(a);
    scan(b);
    s.vars.assign(vset.begin(), vset.end());
    s.trigs.assign(tset.begin(), tset.end());
    if (!exps.empty()) {
        s.has_exp = true;
        s.exp_base = exps[0];
        std::vector<Rat> ks;
        for (const auto& e : exps) {
            auto k = proportion(e, s.exp_base);
            if (!k) {
                s.lattice_ok = false;
                return s;
            }
            ks.push_back(*k);
        }
        // rescale the base so all multiples become integers
        mpz_class l(1);
        for (const auto& k : ks) l = l * k.get_den() / gcd(l, mpz_class(k.get_den()));
        if (l != 1) {
            LinForm nb;
            nb.add(s.exp_base, Rat(1) / Rat(l));
            s.exp_base = nb;
        }
    }
    return s;
}

std::optional<GPoly> to_gpoly(const Polynomial& p, const SymSpace& s) {
    GPoly g;
    for (const auto& [m, c] : p.terms) {
        ExpVec e(s.nsyms(), 0);
        for (const auto& [v, k] : m.vars) {
            auto it = std::lower_bound(s.vars.begin(), s.vars.end(), v);
            e[it - s.vars.begin()] = k;
        }
        for (const auto& [at, k] : m.trig) {
            auto it = std::lower_bound(s.trigs.begin(), s.trigs.end(), at);
            e[s.vars.size() + (it - s.trigs.begin())] = k;
        }
        if (!m.exp_arg.is_zero()) {
            auto mult = proportion(m.exp_arg, s.exp_base);
            if (!mult || !is_integer(*mult)) return std::nullopt;
            e.back() = static_cast<int>(mult->get_num().get_si());
        }
        g.t[e] = c;
    }
    return g;
}

Polynomial from_gpoly(const GPoly& g, const SymSpace& s) {
    std::vector<std::pair<Monomial, Rat>> work;
    for (const auto& [e, c] : g.t) {
        Monomial m;
        for (std::size_t i = 0; i < s.vars.size(); ++i)
            if (e[i] > 0) m.vars.push_back({s.vars[i], e[i]});
        for (std::size_t i = 0; i < s.trigs.size(); ++i)
            if (e[s.vars.size() + i] > 0)
                m.trig.push_back({s.trigs[i], e[s.vars.size() + i]});
        if (s.has_exp && e.back() != 0) m.exp_arg.add(s.exp_base, Rat(e.back()));
        work.push_back({m, c});
    }
    return from_terms(std::move(work));
}

// Shifts the exp coordinate so the minimum exponent is zero; returns the shift.
int normalize_exp_unit(GPoly& g, const SymSpace& s) {
    if (!s.has_exp || g.zero()) return 0;
    int mn = 0;
    bool first = true;
    for (const auto& [e, c] : g.t) {
        if (first || e.back() < mn) mn = e.back();
        first = false;
    }
    if (mn == 0) return 0;
    std::map<ExpVec, Rat> nt;
    for (const auto& [e, c] : g.t) {
        ExpVec f = e;
        f.back() -= mn;
        nt[f] = c;
    }
    g.t = std::move(nt);
    return mn;
}

GPoly gmul(const GPoly& a, const GPoly& b) {
    GPoly r;
    for (const auto& [ea, ca] : a.t)
        for (const auto& [eb, cb] : b.t) {
            ExpVec e = ea;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            auto it = r.t.find(e);
            if (it == r.t.end())
                r.t[e] = ca * cb;
            else {
                it->second += ca * cb;
                if (it->second == 0) r.t.erase(it);
            }
        }
    return r;
}

GPoly gsub(const GPoly& a, const GPoly& b) {
    GPoly r = a;
    for (const auto& [e, c] : b.t) {
        auto it = r.t.find(e);
        if (it == r.t.end())
            r.t[e] = -c;
        else {
            it->second -= c;
            if (it->second == 0) r.t.erase(it);
        }
    }
    return r;
}

int gdeg(const GPoly& p, int sym) {
    int d = -1;
    for (const auto& [e, c] : p.t) d = std::max(d, e[sym]);
    return d;
}

bool gconst(const GPoly& p) {
    for (const auto& [e, c] : p.t)
        for (int x : e)
            if (x != 0) return false;
    return true;
}

// Coefficient of sym^k, as a GPoly with sym zeroed out.
GPoly gcoeff(const GPoly& p, int sym, int k) {
    GPoly r;
    for (const auto& [e, c] : p.t)
        if (e[sym] == k) {
            ExpVec f = e;
            f[sym] = 0;
            r.t[f] = c;
        }
    return r;
}

GPoly gshift(const GPoly& p, int sym, int k) {
    GPoly r;
    for (const auto& [e, c] : p.t) {
        ExpVec f = e;
        f[sym] += k;
        r.t[f] = c;
    }
    return r;
}

// Multivariate long division; nullopt when not exactly divisible.
std::optional<GPoly> gdiv_exact(GPoly num, const GPoly& den) {
    GPoly q;
    if (den.zero()) return std::nullopt;
    auto lt = [](const GPoly& p) { return --p.t.end(); };
    auto dlt = lt(den);
    while (!num.zero()) {
        auto nlt = lt(num);
        ExpVec e = nlt->first;
        bool ok = true;
        for (std::size_t i = 0; i < e.size(); ++i) {
            e[i] -= dlt->first[i];
            if (e[i] < 0) ok = false;
        }
        if (!ok) return std::nullopt;
        Rat c = nlt->second / dlt->second;
        GPoly term;
        term.t[e] = c;
        q.t[e] = c;
        num = gsub(num, gmul(term, den));
    }
    return q;
}

GPoly ggcd(GPoly a, GPoly b);

GPoly gcontent(const GPoly& p, int sym) {
    GPoly c;
    for (int k = 0; k <= gdeg(p, sym); ++k) {
        GPoly ck = gcoeff(p, sym, k);
        if (!ck.zero()) c = ggcd(c, ck);
    }
    return c;
}

// Pseudo-remainder of a by b with respect to sym.
GPoly gprem(GPoly a, const GPoly& b, int sym) {
    int db = gdeg(b, sym);
    GPoly lcb = gcoeff(b, sym, db);
    while (!a.zero() && gdeg(a, sym) >= db) {
        int da = gdeg(a, sym);
        GPoly lca = gcoeff(a, sym, da);
        a = gsub(gmul(a, lcb), gshift(gmul(lca, b), sym, da - db));
    }
    return a;
}

GPoly ggcd(GPoly a, GPoly b) {
    if (a.zero()) return b;
    if (b.zero()) return a;
    if (gconst(a) || gconst(b)) {
        GPoly one;
        one.t[ExpVec(a.t.begin()->first.size(), 0)] = Rat(1);
        return one;
    }
    int nsym = static_cast<int>(a.t.begin()->first.size());
    int sym = -1;
    for (int i = 0; i < nsym && sym < 0; ++i)
        if (gdeg(a, i) > 0 || gdeg(b, i) > 0) sym = i;
    if (gdeg(a, sym) == 0 || gdeg(b, sym) == 0) {
        // sym occurs in only one of them: gcd divides that one's content
        const GPoly& with = gdeg(a, sym) > 0 ? a : b;
        const GPoly& without = gdeg(a, sym) > 0 ? b : a;
        return ggcd(gcontent(with, sym), without);
    }
    GPoly ca = gcontent(a, sym), cb = gcontent(b, sym);
    GPoly cg = ggcd(ca, cb);
    GPoly A = *gdiv_exact(a, ca), B = *gdiv_exact(b, cb);
    if (gdeg(A, sym) < gdeg(B, sym)) std::swap(A, B);
    while (true) {
        GPoly R = gprem(A, B, sym);
        if (R.zero()) break;
        if (gdeg(R, sym) == 0) {
            GPoly one;
            one.t[ExpVec(R.t.begin()->first.size(), 0)] = Rat(1);
            B = one;
            break;
        }
        A = B;
        GPoly cr = gcontent(R, sym);
        auto pr = gdiv_exact(R, cr);
        B = pr ? *pr : R;
    }
    return gmul(cg, B);
}

} // namespace

Polynomial poly_gcd(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero() || a.is_constant() || b.is_constant())
        return Polynomial::constant(1);
    SymSpace s = build_space(a, b);
    if (!s.lattice_ok) return Polynomial::constant(1);
    auto ga = to_gpoly(a, s), gb = to_gpoly(b, s);
    if (!ga || !gb) return Polynomial::constant(1);
    normalize_exp_unit(*ga, s);
    normalize_exp_unit(*gb, s);
    GPoly g = ggcd(*ga, *gb);
    normalize_exp_unit(g, s);
    Polynomial r = from_gpoly(g, s);
    if (r.is_zero()) return Polynomial::constant(1);
    return r;
}

std::optional<Polynomial> poly_exact_div(const Polynomial& num, const Polynomial& den) {
    if (den.is_zero()) return std::nullopt;
    if (num.is_zero()) return Polynomial::zero();
    if (den.is_constant()) {
        Polynomial r = num * Polynomial::constant(Rat(1) / den.constant_value());
        return r;
    }
    SymSpace s = build_space(num, den);
    if (!s.lattice_ok) return std::nullopt;
    auto gn = to_gpoly(num, s), gd = to_gpoly(den, s);
    if (!gn || !gd) return std::nullopt;
    int sn = normalize_exp_unit(*gn, s);
    int sd = normalize_exp_unit(*gd, s);
    auto q = gdiv_exact(*gn, *gd);
    if (!q) return std::nullopt;
    Polynomial r = from_gpoly(*q, s);
    if (s.has_exp && sn != sd) {
        LinForm shift;
        shift.add(s.exp_base, Rat(sn - sd));
        r = mul_exp(r, shift);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Expr
// ---------------------------------------------------------------------------

Expr Expr::from_quotient(Polynomial num, Polynomial den) {
    Expr e;
    e.num_ = std::move(num);
    e.den_ = std::move(den);
    e.normalize();
    return e;
}

void Expr::normalize() {
    if (den_.is_zero()) throw DomainError("division by zero expression");
    if (num_.is_zero()) {
        den_ = Polynomial::constant(1);
        return;
    }
    if (!den_.is_constant()) {
        Polynomial g = poly_gcd(num_, den_);
        if (!(g.is_constant())) {
            auto qn = poly_exact_div(num_, g);
            auto qd = poly_exact_div(den_, g);
            if (qn && qd) {
                num_ = *qn;
                den_ = *qd;
            }
        }
        // exp factors are units: pull the denominator's leading exp into num
        if (!den_.is_zero() && !den_.terms.empty() && !den_.terms.front().first.exp_arg.is_zero()) {
            LinForm shift = den_.terms.front().first.exp_arg.negated();
            num_ = mul_exp(num_, shift);
            den_ = mul_exp(den_, shift);
        }
    }
    if (den_.is_constant()) {
        Rat c = den_.constant_value();
        if (c != 1) num_ = num_ * Polynomial::constant(Rat(1) / c);
        den_ = Polynomial::constant(1);
        return;
    }
    Rat lead = den_.terms.front().second;
    if (lead != 1) {
        Polynomial inv = Polynomial::constant(Rat(1) / lead);
        num_ = num_ * inv;
        den_ = den_ * inv;
    }
}

Expr Expr::constant(const Rat& c) {
    Expr e;
    e.num_ = Polynomial::constant(c);
    return e;
}

Expr Expr::variable(const std::string& name) {
    Expr e;
    e.num_ = Polynomial::variable(name);
    return e;
}

Rat Expr::rational_value() const {
    return num_.constant_value() / den_.constant_value();
}

std::optional<LinForm> as_linform(const Expr& e) {
    if (!e.den().is_constant()) return std::nullopt;
    Rat d = e.den().constant_value();
    LinForm f;
    for (const auto& [m, c] : e.num().terms) {
        if (!m.trig.empty() || !m.exp_arg.is_zero()) return std::nullopt;
        if (m.vars.empty())
            f.constant += c / d;
        else if (m.vars.size() == 1 && m.vars[0].second == 1)
            f.add(m.vars[0].first, c / d);
        else
            return std::nullopt;
    }
    return f;
}

static Expr make_trig(TrigKind kind, const Expr& arg) {
    auto lf = as_linform(arg);
    if (!lf)
        throw StructureError("sin/cos/exp argument must be affine in the variables: " +
                             arg.str());
    if (lf->is_zero()) return kind == TrigKind::sin ? Expr() : Expr::constant(1);
    bool flip = false;
    // sign normalization: leading coefficient (or constant) positive
    if (!lf->terms.empty() ? lf->terms[0].second < 0 : lf->constant < 0) {
        *lf = lf->negated();
        flip = kind == TrigKind::sin;
    }
    Monomial m;
    m.trig.push_back({TrigAtom{kind, *lf}, 1});
    Polynomial p;
    p.terms.push_back({m, flip ? Rat(-1) : Rat(1)});
    Expr e;
    e = Expr::from_quotient(p, Polynomial::constant(1));
    return e;
}

Expr Expr::sin_of(const Expr& arg) { return make_trig(TrigKind::sin, arg); }
Expr Expr::cos_of(const Expr& arg) { return make_trig(TrigKind::cos, arg); }

Expr Expr::exp_of(const Expr& arg) {
    auto lf = as_linform(arg);
    if (!lf)
        throw StructureError("sin/cos/exp argument must be affine in the variables: " +
                             arg.str());
    if (lf->is_zero()) return Expr::constant(1);
    Monomial m;
    m.exp_arg = *lf;
    Polynomial p;
    p.terms.push_back({m, Rat(1)});
    return Expr::from_quotient(p, Polynomial::constant(1));
}

Expr Expr::operator+(const Expr& o) const {
    if (den_ == o.den_) return from_quotient(num_ + o.num_, den_);
    return from_quotient(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Expr Expr::operator-(const Expr& o) const {
    if (den_ == o.den_) return from_quotient(num_ - o.num_, den_);
    return from_quotient(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Expr Expr::operator*(const Expr& o) const {
    return from_quotient(num_ * o.num_, den_ * o.den_);
}

Expr Expr::operator/(const Expr& o) const {
    if (o.num_.is_zero()) throw DomainError("division by zero");
    return from_quotient(num_ * o.den_, den_ * o.num_);
}

Expr Expr::operator-() const { return from_quotient(neg(num_), den_); }

Expr Expr::pow(long k) const {
    if (k == 0) return Expr::constant(1);
    bool invert = k < 0;
    unsigned long n = invert ? -k : k;
    Expr base = *this, acc = Expr::constant(1);
    while (n > 0) {
        if (n & 1) acc = acc * base;
        base = base * base;
        n >>= 1;
    }
    if (invert) return Expr::constant(1) / acc;
    return acc;
}

Expr Expr::differentiate(const std::string& var) const {
    // (n/d)' = (n' d - n d') / d^2
    Polynomial dn = derivative(num_, var);
    if (den_.is_constant()) return from_quotient(dn, den_);
    Polynomial dd = derivative(den_, var);
    return from_quotient(dn * den_ - num_ * dd, den_ * den_);
}

static Expr subst_linform(const LinForm& f, const std::map<std::string, Expr>& b) {
    Expr acc = Expr::constant(f.constant);
    for (const auto& [v, q] : f.terms) {
        auto it = b.find(v);
        Expr var = it == b.end() ? Expr::variable(v) : it->second;
        acc = acc + Expr::constant(q) * var;
    }
    return acc;
}

static Expr subst_poly(const Polynomial& p, const std::map<std::string, Expr>& b) {
    Expr acc;
    for (const auto& [m, c] : p.terms) {
        Expr t = Expr::constant(c);
        for (const auto& [v, e] : m.vars) {
            auto it = b.find(v);
            Expr var = it == b.end() ? Expr::variable(v) : it->second;
            t = t * var.pow(e);
        }
        for (const auto& [at, e] : m.trig) {
            Expr arg = subst_linform(at.arg, b);
            Expr atom = at.kind == TrigKind::sin ? Expr::sin_of(arg) : Expr::cos_of(arg);
            t = t * atom.pow(e);
        }
        if (!m.exp_arg.is_zero()) t = t * Expr::exp_of(subst_linform(m.exp_arg, b));
        acc = acc + t;
    }
    return acc;
}

Expr Expr::substitute(const std::map<std::string, Expr>& bindings) const {
    Expr n = subst_poly(num_, bindings);
    if (den_.is_constant() && den_.constant_value() == 1) return n;
    Expr d = subst_poly(den_, bindings);
    return n / d;
}

double Expr::eval(const std::map<std::string, double>& point) const {
    double n = relalg::eval(num_, point);
    if (den_.is_constant() && den_.constant_value() == 1) return n;
    double d = relalg::eval(den_, point);
    if (std::abs(d) < 1e-300 || !std::isfinite(d))
        throw DomainError("denominator vanishes at evaluation point");
    return n / d;
}

std::set<std::string> Expr::variables() const {
    std::set<std::string> out;
    num_.collect_vars(out);
    den_.collect_vars(out);
    return out;
}

bool Expr::depends_on(const std::string& var) const { return variables().count(var) > 0; }

double eval_numeric(const Expr& e, const std::map<std::string, double>& point) {
    return e.eval(point);
}

Truth is_zero(const Expr& e, Rng rng, int probes, double tol) {
    if (e.is_zero_structural()) return Truth::Zero;
    auto vars = e.variables();
    if (vars.empty()) {
        // constant in the atoms; evaluate once (no free variables to sample)
        double v = e.eval({});
        return std::abs(v) > tol ? Truth::NonZero : Truth::Undetermined;
    }
    int done = 0, attempts = 0;
    while (done < probes && attempts < probes * 8) {
        ++attempts;
        std::map<std::string, double> pt;
        for (const auto& v : vars) pt[v] = to_double(rng.rational());
        try {
            double val = e.eval(pt);
            if (!std::isfinite(val)) continue;
            if (std::abs(val) > tol) return Truth::NonZero;
            ++done;
        } catch (const DomainError&) {
            continue; // probe hit a pole: resample
        }
    }
    return Truth::Undetermined;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

static std::string monomial_str(const Monomial& m, const Rat& coeff) {
    std::vector<std::string> factors;
    Rat a = coeff < 0 ? Rat(-coeff) : coeff;
    if (a != 1 || m.is_one()) factors.push_back(to_string(a));
    for (const auto& [v, e] : m.vars)
        factors.push_back(e == 1 ? v : v + "**" + std::to_string(e));
    for (const auto& [t, e] : m.trig)
        factors.push_back(e == 1 ? t.str() : t.str() + "**" + std::to_string(e));
    if (!m.exp_arg.is_zero()) factors.push_back("exp(" + m.exp_arg.str() + ")");
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "*";
        out += factors[i];
    }
    return out;
}

static std::string poly_str(const Polynomial& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : p.terms) {
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        os << monomial_str(m, c);
    }
    return os.str();
}

std::string Expr::str() const {
    if (den_.is_constant() && den_.constant_value() == 1) return poly_str(num_);
    return "(" + poly_str(num_) + ")/(" + poly_str(den_) + ")";
}

std::string to_string(const Expr& e) { return e.str(); }

} // namespace relalg

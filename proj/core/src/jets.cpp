#include <relalg/jetnames.hpp>
#include <relalg/jets.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace relalg {

std::string JetSystem::coord_name(const JetCoord& c) const {
    return jet_coordinate_name(dep[c.dep], c.idx, indep);
}

// Non-decreasing multi-indices of length o over {0..n-1}, lex order.
static std::vector<std::vector<int>> symmetric_indices(int n, int o) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(o, 0);
    if (o == 0) {
        out.push_back({});
        return out;
    }
    while (true) {
        out.push_back(idx);
        int p = o - 1;
        while (p >= 0 && idx[p] == n - 1) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < o; ++q) idx[q] = idx[p];
    }
    return out;
}

std::vector<JetCoord> JetSystem::coords_up_to(int maxorder) const {
    std::vector<JetCoord> out;
    int n = static_cast<int>(indep.size());
    for (int o = 0; o <= maxorder; ++o)
        for (int a = 0; a < static_cast<int>(dep.size()); ++a)
            for (const auto& idx : symmetric_indices(n, o)) out.push_back({a, idx});
    return out;
}

bool JetSystem::is_solved(const std::string& name) const { return solved_rhs(name) != nullptr; }

const Expr* JetSystem::solved_rhs(const std::string& name) const {
    for (const auto& [lhs, rhs] : equations)
        if (lhs == name) return &rhs;
    return nullptr;
}

void JetSystem::validate() const {
    if (indep.empty() || dep.empty()) throw StructureError("PDE needs indep and dep variables");
    if (order < 1) throw StructureError("PDE order must be >= 1");
    std::set<std::string> names(indep.begin(), indep.end());
    for (const auto& d : dep)
        if (!names.insert(d).second) throw StructureError("duplicate variable: " + d);
    std::set<std::string> top;
    for (const auto& c : coords_up_to(order))
        if (c.order() == order) top.insert(coord_name(c));
    std::set<std::string> all;
    for (const auto& c : coords_up_to(order)) all.insert(coord_name(c));
    std::set<std::string> solved;
    for (const auto& [lhs, rhs] : equations) {
        if (!top.count(lhs))
            throw StructureError("equation left-hand side '" + lhs +
                                 "' is not an order-" + std::to_string(order) + " coordinate");
        if (!solved.insert(lhs).second)
            throw StructureError("coordinate '" + lhs + "' solved twice");
    }
    for (const auto& [lhs, rhs] : equations)
        for (const auto& v : rhs.variables()) {
            if (solved.count(v))
                throw StructureError("right-hand side of '" + lhs +
                                     "' mentions the solved coordinate '" + v + "'");
            if (!all.count(v) && std::find(indep.begin(), indep.end(), v) == indep.end())
                throw StructureError("right-hand side of '" + lhs +
                                     "' mentions unknown name '" + v + "'");
        }
}

JetSystem load_pde(const std::string& text) {
    JetSystem j;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::vector<std::pair<std::string, std::string>> raw_eqs;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = line;
        auto a = t.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        auto b = t.find_last_not_of(" \t\r\n");
        t = t.substr(a, b - a + 1);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        std::string word;
        ls >> word;
        if (word == "indep") {
            std::string v;
            while (ls >> v) j.indep.push_back(v);
        } else if (word == "dep") {
            std::string v;
            while (ls >> v) j.dep.push_back(v);
        } else if (word == "order") {
            if (!(ls >> j.order)) throw ParseError("expected 'order <k>'", lineno, 1);
        } else if (word == "eq") {
            auto eq = t.find('=');
            if (eq == std::string::npos) throw ParseError("expected 'eq <coord> = <expr>'", lineno, 1);
            std::string lhs = t.substr(2, eq - 2);
            auto la = lhs.find_first_not_of(" \t");
            auto lb = lhs.find_last_not_of(" \t");
            lhs = lhs.substr(la, lb - la + 1);
            raw_eqs.push_back({lhs, t.substr(eq + 1)});
        } else {
            throw ParseError("unknown directive '" + word + "'", lineno, 1);
        }
    }
    VarTable vt;
    for (const auto& v : j.indep) vt.add(v, VarRole::base);
    for (const auto& c : j.coords_up_to(j.order)) vt.add(j.coord_name(c), VarRole::jet);
    for (const auto& [lhs, rhs] : raw_eqs) j.equations.push_back({lhs, parse_expr(rhs, vt)});
    j.validate();
    return j;
}

JetSystem load_pde_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return load_pde(ss.str());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string to_pde_text(const JetSystem& j) {
    std::ostringstream os;
    os << "indep";
    for (const auto& v : j.indep) os << " " << v;
    os << "\ndep";
    for (const auto& v : j.dep) os << " " << v;
    os << "\norder " << j.order << "\n";
    for (const auto& [lhs, rhs] : j.equations) os << "eq " << lhs << " = " << rhs.str() << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Total derivatives
// ---------------------------------------------------------------------------

namespace {

// The image of coordinate `c` under differentiation by x_j, with solved-form
// substitution at the top order.
Expr coordinate_image(const JetSystem& j, const JetCoord& c, int xj) {
    JetCoord up{c.dep, c.idx};
    up.idx.push_back(xj);
    std::sort(up.idx.begin(), up.idx.end());
    std::string name = j.coord_name(up);
    if (up.order() > j.order)
        throw StructureError("total derivative needs coordinate '" + name +
                             "' beyond the jet order");
    if (const Expr* rhs = j.solved_rhs(name)) return *rhs;
    return Expr::variable(name);
}

std::optional<JetCoord> lookup_coord(const JetSystem& j, const std::string& name) {
    for (int a = 0; a < static_cast<int>(j.dep.size()); ++a)
        if (name == j.dep[a]) return JetCoord{a, {}};
    auto parsed = parse_jet_coordinate(name, j.indep);
    if (!parsed) return std::nullopt;
    for (int a = 0; a < static_cast<int>(j.dep.size()); ++a)
        if (parsed->first == j.dep[a]) {
            std::vector<int> idx = parsed->second;
            std::sort(idx.begin(), idx.end());
            return JetCoord{a, idx};
        }
    return std::nullopt;
}

} // namespace

Expr total_derivative(const JetSystem& j, const Expr& f, int xj) {
    if (xj < 0 || xj >= static_cast<int>(j.indep.size()))
        throw StructureError("independent index out of range");
    Expr out = f.differentiate(j.indep[xj]);
    for (const auto& v : f.variables()) {
        if (std::find(j.indep.begin(), j.indep.end(), v) != j.indep.end()) continue;
        auto c = lookup_coord(j, v);
        if (!c) throw StructureError("'" + v + "' is not a jet coordinate");
        Expr df = f.differentiate(v);
        if (df.is_zero_structural()) continue;
        out = out + df * coordinate_image(j, *c, xj);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PDE -> relative algebroid
// ---------------------------------------------------------------------------

RelativeAlgebroid pde_to_algebroid(const JetSystem& j) {
    j.validate();
    int n = static_cast<int>(j.indep.size());
    RelativeAlgebroid a;
    for (int i = 1; i <= n; ++i) a.frame.push_back("theta" + std::to_string(i));
    a.jet_frame = j.indep;
    a.base_vars = j.indep;
    for (const auto& c : j.coords_up_to(j.order)) {
        std::string nm = j.coord_name(c);
        if (c.order() < j.order)
            a.base_vars.push_back(nm);
        else if (!j.is_solved(nm))
            a.fiber_vars.push_back(nm);
    }
    a.dtheta.assign(n, DForm(n, 2));
    for (std::size_t m = 0; m < a.base_vars.size(); ++m) {
        DForm d(n, 1);
        const std::string& name = a.base_vars[m];
        auto it = std::find(j.indep.begin(), j.indep.end(), name);
        if (it != j.indep.end()) {
            d.set_coefficient({static_cast<int>(it - j.indep.begin()) + 1}, Expr::constant(1));
        } else {
            auto c = lookup_coord(j, name);
            for (int xj = 0; xj < n; ++xj) {
                Expr img = coordinate_image(j, *c, xj);
                if (!img.is_zero_structural()) d.set_coefficient({xj + 1}, img);
            }
        }
        a.dbase.push_back(d);
    }
    a.provenance.push_back("from PDE (order " + std::to_string(j.order) + ")");
    a.validate();
    return a;
}

// ---------------------------------------------------------------------------
// Side-by-side prolongation comparison
// ---------------------------------------------------------------------------

namespace {

// Jet-side prolongation state: solved coordinates of every order seen so far.
struct JetTower {
    JetSystem sys;          // order grows as the tower climbs
    std::set<std::string> parametric; // non-solved coordinates, order >= 1

    explicit JetTower(const JetSystem& j) : sys(j) {
        for (const auto& c : sys.coords_up_to(sys.order))
            if (c.order() >= 1 && !sys.is_solved(sys.coord_name(c)))
                parametric.insert(sys.coord_name(c));
    }
};

} // namespace

PdeCompareReport pde_prolong_compare(const JetSystem& j, int depth, Rng rng) {
    if (depth < 1) throw StructureError("depth must be >= 1");
    PdeCompareReport report;
    RelativeAlgebroid current = pde_to_algebroid(j);
    JetTower jt(j);

    for (int level = 1; level <= depth; ++level) {
        PdeCompareLevel rec;
        rec.level = level;

        // ---- algebroid side
        ProlongationStep step = solve_prolongation(current, rng.fork());
        if (step.aborted) {
            report.warnings.push_back("algebroid prolongation aborted: " + step.abort_note);
            report.match = false;
            report.levels.push_back(std::move(rec));
            break;
        }
        rec.algebroid_obstructed = step.obstructed();
        rec.algebroid_new_vars = static_cast<int>(step.new_vars.size());

        // ---- jet side: differentiate every top-order solved equation
        int K = jt.sys.order;
        std::vector<std::pair<std::string, Expr>> generated;
        JetSystem up = jt.sys;
        up.order = K + 1; // extended table; old equations keep substituting
        for (const auto& [lhs, rhs] : jt.sys.equations) {
            auto c = lookup_coord(jt.sys, lhs);
            if (c->order() != K) continue;
            for (int xj = 0; xj < static_cast<int>(j.indep.size()); ++xj) {
                JetCoord t{c->dep, c->idx};
                t.idx.push_back(xj);
                std::sort(t.idx.begin(), t.idx.end());
                generated.push_back({up.coord_name(t), total_derivative(up, rhs, xj)});
            }
        }
        // canonicalize: resolve references among the newly solved coordinates
        std::map<std::string, Expr> fresh;
        for (auto& [name, val] : generated) {
            auto it = fresh.find(name);
            if (it == fresh.end())
                fresh[name] = val;
            else {
                Expr resid = it->second - val;
                if (!resid.is_zero_structural())
                    fresh[name + "#alt"] = val; // keep for the conflict pass below
            }
        }
        for (int round = 0; round < 8; ++round) {
            bool changed = false;
            for (auto& [name, val] : fresh) {
                std::map<std::string, Expr> sub;
                for (const auto& v : val.variables()) {
                    auto it = fresh.find(v);
                    if (it != fresh.end() && v != name) sub[v] = it->second;
                }
                if (!sub.empty()) {
                    val = val.substitute(sub);
                    changed = true;
                }
            }
            if (!changed) break;
        }
        // conflicts between the two determinations of one coordinate
        for (auto it = fresh.begin(); it != fresh.end();) {
            if (it->first.find("#alt") != std::string::npos) {
                std::string base = it->first.substr(0, it->first.find("#alt"));
                Expr resid = fresh.at(base) - it->second;
                if (!resid.is_zero_structural() &&
                    is_zero(resid, rng.fork()) != Truth::Zero)
                    rec.jet_obstructions.push_back(base + ": " + resid.str() + " = 0");
                it = fresh.erase(it);
            } else {
                ++it;
            }
        }
        for (const auto& [name, val] : fresh) {
            up.equations.push_back({name, val});
            rec.jet_constraints.push_back({name, val});
        }
        for (const auto& c : up.coords_up_to(K + 1))
            if (c.order() == K + 1 && !up.is_solved(up.coord_name(c))) {
                jt.parametric.insert(up.coord_name(c));
                ++rec.jet_new_parametric;
            }
        rec.jet_parametric_total = static_cast<int>(jt.parametric.size());

        // ---- comparison
        rec.counts_match = rec.algebroid_new_vars == rec.jet_new_parametric;
        if (!rec.counts_match)
            rec.mismatches.push_back("new-variable count: algebroid " +
                                     std::to_string(rec.algebroid_new_vars) + " vs jet " +
                                     std::to_string(rec.jet_new_parametric));
        {
            std::set<std::string> alg_names(step.new_vars.begin(), step.new_vars.end());
            std::set<std::string> jet_names;
            for (const auto& c : up.coords_up_to(K + 1))
                if (c.order() == K + 1 && !up.is_solved(up.coord_name(c)))
                    jet_names.insert(up.coord_name(c));
            if (alg_names != jet_names)
                rec.mismatches.push_back("new-variable names differ");
        }
        rec.constraints_match = true;
        for (std::size_t rho = 0; rho < current.fiber_vars.size(); ++rho) {
            auto c = lookup_coord(up, current.fiber_vars[rho]);
            if (!c) {
                rec.mismatches.push_back("fiber variable '" + current.fiber_vars[rho] +
                                         "' is not a jet coordinate");
                rec.constraints_match = false;
                continue;
            }
            for (int xj = 0; xj < static_cast<int>(j.indep.size()); ++xj) {
                JetCoord t{c->dep, c->idx};
                t.idx.push_back(xj);
                std::sort(t.idx.begin(), t.idx.end());
                std::string tname = up.coord_name(t);
                Expr expected = up.is_solved(tname) ? *up.solved_rhs(tname)
                                                    : Expr::variable(tname);
                Expr got = step.lift[rho].coefficient({xj + 1});
                if (!(got == expected)) {
                    rec.constraints_match = false;
                    rec.mismatches.push_back("lift of " + current.fiber_vars[rho] + " along " +
                                             j.indep[xj] + ": algebroid " + got.str() +
                                             " vs jet " + expected.str());
                }
            }
        }
        if (rec.algebroid_obstructed != !rec.jet_obstructions.empty()) {
            rec.mismatches.push_back("obstruction status differs between the two sides");
            rec.constraints_match = false;
        }
        if (!rec.counts_match || !rec.constraints_match || !rec.mismatches.empty())
            report.match = false;
        bool stop = rec.algebroid_obstructed || !rec.jet_obstructions.empty();
        report.levels.push_back(std::move(rec));
        if (stop) break;
        current = step.prolonged;
        jt.sys = std::move(up);
    }
    return report;
}

} // namespace relalg

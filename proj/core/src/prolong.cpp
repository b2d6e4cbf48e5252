#include <relalg/jetnames.hpp>
#include <relalg/prolong.hpp>

#include <algorithm>

namespace relalg {

int TorsionSystem::unknown_index(int rho, int i) const {
    for (std::size_t u = 0; u < unknowns.size(); ++u)
        if (unknowns[u].first == rho && unknowns[u].second == i) return static_cast<int>(u);
    return -1;
}

TorsionSystem torsion_system(const RelativeAlgebroid& a) {
    a.validate();
    int n = a.rank();
    TorsionSystem sys;
    sys.frame_rank = n;
    for (std::size_t rho = 0; rho < a.fiber_vars.size(); ++rho)
        for (int i = 1; i <= n; ++i) {
            sys.unknowns.push_back({static_cast<int>(rho), i});
            sys.unknown_names.push_back("u_" + a.fiber_vars[rho] + "_" + std::to_string(i));
        }

    // D~ with the fiber images set to zero gives the lift-independent part;
    // the coefficient of u^rho_i is theta^i ^ (d alpha / d y^rho).
    std::map<std::string, DForm> zero_images;
    for (const auto& y : a.fiber_vars) zero_images[y] = DForm(n, 1);
    Derivation d0(a, zero_images);

    auto add_equations = [&](const DForm& alpha, ComponentKey::Kind kind, int target) {
        DForm known = d0.apply(alpha);
        int out_deg = alpha.degree() + 1;
        // u-coefficients, indexed like sys.unknowns
        std::vector<DForm> ucoeff(sys.unknowns.size(), DForm(n, out_deg));
        for (std::size_t rho = 0; rho < a.fiber_vars.size(); ++rho) {
            DForm dalpha = alpha.map_coefficients(
                [&](const Expr& e) { return e.differentiate(a.fiber_vars[rho]); });
            if (dalpha.is_zero()) continue;
            for (int i = 1; i <= n; ++i) {
                int u = sys.unknown_index(static_cast<int>(rho), i);
                ucoeff[u] = DForm::theta(n, i).wedge(dalpha);
            }
        }
        // one equation per multi-index slot with any nonzero entry
        std::set<std::vector<int>> slots;
        for (const auto& [idx, c] : known.coeffs()) slots.insert(idx);
        for (const auto& f : ucoeff)
            for (const auto& [idx, c] : f.coeffs()) slots.insert(idx);
        for (const auto& idx : slots) {
            TorsionEquation eq;
            eq.slot = ComponentKey{kind, target, idx};
            eq.constant = known.coefficient(idx);
            eq.coeffs.reserve(sys.unknowns.size());
            for (const auto& f : ucoeff) eq.coeffs.push_back(f.coefficient(idx));
            sys.equations.push_back(std::move(eq));
        }
    };

    for (std::size_t mu = 0; mu < a.base_vars.size(); ++mu)
        add_equations(a.dbase[mu], ComponentKey::Kind::function, static_cast<int>(mu));
    for (int i = 1; i <= n; ++i)
        add_equations(a.dtheta[i - 1], ComponentKey::Kind::covector, i);
    return sys;
}

// ---------------------------------------------------------------------------
// solve_prolongation
// ---------------------------------------------------------------------------

namespace {

Expr dot(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    Expr acc;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_zero_structural() && !b[i].is_zero_structural()) acc = acc + a[i] * b[i];
    return acc;
}

// Makes the particular solution orthogonal to the kernel span (w.r.t. the
// Euclidean pairing on the lift slots). This pins the parametrization: the
// free coefficients then measure exactly the kernel components of the lift.
void orthogonalize(std::vector<Expr>& particular, const ExprMatrix& kernel, Rng rng,
                   std::vector<std::string>& warnings) {
    if (kernel.empty()) return;
    std::size_t k = kernel.size();
    ExprMatrix gram(k, std::vector<Expr>(k));
    std::vector<Expr> rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) gram[i][j] = dot(kernel[i], kernel[j]);
        rhs[i] = dot(particular, kernel[i]);
    }
    AffineSolution sol = solve_affine(gram, rhs, k, rng.fork());
    if (sol.aborted || !sol.obstructions.empty() || !sol.free_cols.empty()) {
        warnings.push_back("lift parametrization left unnormalized (kernel Gram solve failed)");
        return;
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < particular.size(); ++c)
            particular[c] = particular[c] + sol.particular[i] * kernel[i][c];
}

std::string fresh_name(std::string base, const std::set<std::string>& taken) {
    while (taken.count(base)) base = "_" + base;
    return base;
}

// Jet-style name for a free direction: when the algebroid came from a jet
// space and the kernel vector has rational entries, the free slot u^rho_i is
// itself a jet coordinate (the i-th derivative of y^rho) and names the new
// variable. Kernel directions with function coefficients keep v-names.
std::optional<std::string> jet_style_name(const RelativeAlgebroid& a,
                                          const TorsionSystem& sys,
                                          const std::vector<Expr>& kvec, int free_col) {
    if (a.jet_frame.empty()) return std::nullopt;
    for (const auto& e : kvec)
        if (!e.is_zero_structural() && !e.is_rational()) return std::nullopt;
    auto [rho, i] = sys.unknowns[free_col];
    auto parsed = parse_jet_coordinate(a.fiber_vars[rho], a.jet_frame);
    std::string dep;
    std::vector<int> idx;
    if (parsed) {
        dep = parsed->first;
        idx = parsed->second;
    } else {
        dep = a.fiber_vars[rho];
    }
    idx.push_back(i - 1);
    return jet_coordinate_name(dep, idx, a.jet_frame);
}

} // namespace

ProlongationStep solve_prolongation(const RelativeAlgebroid& a, Rng rng) {
    ProlongationStep step;
    TorsionSystem sys = torsion_system(a);
    int n = a.rank();

    ExprMatrix m(sys.equations.size());
    std::vector<Expr> rhs(sys.equations.size());
    for (std::size_t r = 0; r < sys.equations.size(); ++r) {
        m[r] = sys.equations[r].coeffs;
        rhs[r] = sys.equations[r].constant;
    }
    AffineSolution sol = solve_affine(m, rhs, sys.unknowns.size(), rng.fork());
    step.warnings = sol.warnings;
    if (sol.aborted) {
        step.aborted = true;
        step.abort_note = "undetermined pivot: " + sol.abort_note;
        return step;
    }
    for (const auto& [row, resid] : sol.obstructions)
        step.obstructions.push_back({sys.equations[row].slot, resid});

    orthogonalize(sol.particular, sol.kernel, rng.fork(), step.warnings);

    // name the free directions
    std::set<std::string> taken(a.base_vars.begin(), a.base_vars.end());
    taken.insert(a.fiber_vars.begin(), a.fiber_vars.end());
    taken.insert(a.frame.begin(), a.frame.end());
    int level = a.level + 1;
    for (std::size_t f = 0; f < sol.kernel.size(); ++f) {
        std::optional<std::string> nm = jet_style_name(a, sys, sol.kernel[f], sol.free_cols[f]);
        std::string name =
            fresh_name(nm ? *nm : "v" + std::to_string(level) + "_" + std::to_string(f + 1),
                       taken);
        taken.insert(name);
        step.new_vars.push_back(name);
    }

    // assemble the lift 1-forms
    std::vector<Expr> u(sol.particular);
    for (std::size_t f = 0; f < sol.kernel.size(); ++f) {
        Expr v = Expr::variable(step.new_vars[f]);
        for (std::size_t c = 0; c < u.size(); ++c)
            if (!sol.kernel[f][c].is_zero_structural())
                u[c] = u[c] + v * sol.kernel[f][c];
    }
    step.lift.assign(a.fiber_vars.size(), DForm(n, 1));
    for (std::size_t c = 0; c < sys.unknowns.size(); ++c) {
        auto [rho, i] = sys.unknowns[c];
        if (!u[c].is_zero_structural())
            step.lift[rho].set_coefficient({i}, step.lift[rho].coefficient({i}) + u[c]);
    }

    // the solved lift must annihilate every equation modulo the obstruction set
    {
        std::set<const TorsionEquation*> flagged;
        for (const auto& [row, resid] : sol.obstructions)
            flagged.insert(&sys.equations[row]);
        for (const auto& eq : sys.equations) {
            if (flagged.count(&eq)) continue;
            Expr resid = eq.constant;
            for (std::size_t c = 0; c < u.size(); ++c)
                if (!eq.coeffs[c].is_zero_structural()) resid = resid + eq.coeffs[c] * u[c];
            if (!resid.is_zero_structural() && is_zero(resid, rng.fork()) == Truth::NonZero)
                throw Error("internal: solved lift leaves a nonzero residual " + resid.str());
        }
    }

    // prolonged algebroid: base grows by the old fiber, fiber becomes the new
    // variables, the anchor extends by the lift
    RelativeAlgebroid p;
    p.frame = a.frame;
    p.base_vars = a.base_vars;
    p.base_vars.insert(p.base_vars.end(), a.fiber_vars.begin(), a.fiber_vars.end());
    p.fiber_vars = step.new_vars;
    p.dtheta = a.dtheta;
    p.dbase = a.dbase;
    p.dbase.insert(p.dbase.end(), step.lift.begin(), step.lift.end());
    p.level = level;
    p.jet_frame = a.jet_frame;
    p.provenance = a.provenance;
    p.provenance.push_back("prolongation level " + std::to_string(level));
    if (!step.obstructed()) p.validate();
    step.prolonged = std::move(p);
    return step;
}

std::vector<DForm> curvature(const ProlongationStep& step) {
    if (step.aborted) throw StructureError("curvature of an aborted step");
    if (step.obstructed())
        throw StructureError("curvature is defined only for torsionless (unobstructed) steps");
    const RelativeAlgebroid& p = step.prolonged;
    std::map<std::string, DForm> frozen;
    for (const auto& v : p.fiber_vars) frozen[v] = DForm(p.rank(), 1);
    Derivation d0(p, frozen);
    std::vector<DForm> out;
    out.reserve(step.lift.size());
    for (const auto& l : step.lift) out.push_back(d0.apply(l));
    return out;
}

TowerReport prolongation_tower(const RelativeAlgebroid& a, int max_depth, Rng rng) {
    if (max_depth < 1) throw StructureError("max_depth must be >= 1");
    TowerReport report;
    RelativeAlgebroid current = a;
    for (int level = 1; level <= max_depth; ++level) {
        LevelReport rec;
        rec.level = level;
        rec.cartan = cartan_test(tableau_map(current), rng.fork());
        rec.step = solve_prolongation(current, rng.fork());
        for (const auto& w : rec.step.warnings) report.warnings.push_back(w);
        if (rec.step.aborted) {
            report.aborted = true;
            report.abort_note = rec.step.abort_note;
            report.levels.push_back(std::move(rec));
            break;
        }
        if (rec.step.obstructed()) {
            report.obstructed_level = level;
            report.levels.push_back(std::move(rec));
            break;
        }
        rec.curvature_forms = curvature(rec.step);
        if (!report.formal_certificate && rec.cartan.involutive == Verdict::Yes) {
            rec.certificate_here = true;
            report.formal_certificate = true;
            report.certificate_level = level;
        }
        bool curvature_zero = true;
        for (const auto& f : rec.curvature_forms)
            if (!f.is_zero()) curvature_zero = false;
        if (rec.step.new_vars.empty() && curvature_zero) {
            rec.finite_type_here = true;
            report.finite_type = true;
            report.levels.push_back(std::move(rec));
            break;
        }
        RelativeAlgebroid next = rec.step.prolonged;
        report.levels.push_back(std::move(rec));
        current = std::move(next);
    }
    return report;
}

} // namespace relalg

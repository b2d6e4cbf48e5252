#include "cli.hpp"

#include <relalg/jets.hpp>
#include <relalg/prolong.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace relalg::cli {

using json = nlohmann::ordered_json;

namespace {

struct Ctx {
    long seed = 0;
    bool as_json = false;
    bool quiet = false;
    std::ostream* out = nullptr;
    std::vector<std::string> args;

    json report;
    std::vector<std::string> warnings;

    void begin(const std::string& command) {
        report = json::object();
        report["command"] = command;
        report["args"] = args;
        report["seed"] = seed;
    }

    void finish() {
        report["warnings"] = warnings;
        if (as_json) (*out) << report.dump(2) << "\n";
    }

    void say(const std::string& line) {
        if (!quiet && !as_json) (*out) << line << "\n";
    }
};

std::string verdict_str(Verdict v) {
    switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no_by_this_test";
    default: return "undetermined";
    }
}

std::string slot_str(const RelativeAlgebroid& a, const ComponentKey& key) {
    std::string target = key.kind == ComponentKey::Kind::covector
                             ? a.frame[key.target - 1]
                             : a.base_vars[key.target];
    std::string idx;
    for (std::size_t i = 0; i < key.args.size(); ++i) {
        if (i) idx += ",";
        idx += std::to_string(key.args[i]);
    }
    return "D(" + target + ")[" + idx + "]";
}

json characters_json(const CharacterVector& cv) {
    json j = json::object();
    j["s"] = cv.s;
    j["flag"] = cv.flag_desc;
    j["stable"] = cv.stable;
    return j;
}

json cartan_json(const CartanTestResult& ct) {
    json j = json::object();
    j["s"] = ct.characters.s;
    j["bound"] = ct.bound;
    j["prolongation_rank"] = ct.rank;
    j["involutive"] = verdict_str(ct.involutive);
    j["flag"] = ct.characters.flag_desc;
    j["warnings"] = ct.warnings;
    return j;
}

json step_json(const RelativeAlgebroid& input, const ProlongationStep& step) {
    json j = json::object();
    j["new_vars"] = step.new_vars;
    json lift = json::object();
    for (std::size_t rho = 0; rho < step.lift.size(); ++rho)
        lift["D " + input.fiber_vars[rho]] = step.lift[rho].str(input.frame);
    j["lift"] = lift;
    json obs = json::array();
    for (const auto& [slot, resid] : step.obstructions) {
        json o = json::object();
        o["slot"] = slot_str(input, slot);
        o["residual"] = resid.str();
        DForm f(input.rank(), static_cast<int>(slot.args.size()));
        f.set_coefficient(slot.args, resid);
        o["form"] = f.str(input.frame);
        obs.push_back(o);
    }
    j["obstructions"] = obs;
    j["warnings"] = step.warnings;
    return j;
}

// Parses "K=1,phi=1/3" into a rational-valued point.
std::map<std::string, double> parse_point(const std::string& text) {
    std::map<std::string, double> pt;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("bad point entry '" + item + "'");
        std::string name = item.substr(0, eq);
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        Rat v;
        std::string val = item.substr(eq + 1);
        val.erase(0, val.find_first_not_of(" \t"));
        val.erase(val.find_last_not_of(" \t") + 1);
        if (!parse_rat(val, v)) throw Error("bad rational '" + val + "' in point");
        pt[name] = to_double(v);
    }
    return pt;
}

// Rational frame change from a permutation like "2,1,3".
RatMatrix permutation_flag(const std::string& perm, int n) {
    std::vector<int> p;
    std::stringstream ss(perm);
    std::string item;
    while (std::getline(ss, item, ',')) p.push_back(std::stoi(item));
    if (static_cast<int>(p.size()) != n) throw Error("flag permutation must list all frame indices");
    // theta^{p[l]} becomes the l-th flag direction: theta^j = theta'^{pos(j)}
    RatMatrix m(n, std::vector<Rat>(n, Rat(0)));
    for (int l = 0; l < n; ++l) {
        if (p[l] < 1 || p[l] > n) throw Error("flag permutation index out of range");
        m[p[l] - 1][l] = 1;
    }
    return m;
}

int cmd_check(Ctx& ctx, const std::string& file) {
    auto a = load_algebroid_file(file);
    ctx.begin("check");
    Rng rng(ctx.seed);
    Verdict st = is_standard(a, rng.fork());
    SystaticInfo sys = systatic_directions(a, rng.fork());
    if (!sys.stable) ctx.warnings.push_back("systatic kernel rank unstable across probes");
    json r = json::object();
    r["file"] = file;
    r["frame"] = a.frame;
    r["base"] = a.base_vars;
    r["fiber"] = a.fiber_vars;
    r["level"] = a.level;
    r["standard"] = st == Verdict::Yes ? "yes" : (st == Verdict::No ? "no" : "undetermined");
    r["systatic_kernel_dim"] = sys.kernel_dim;
    r["systatic_aligned_vars"] = sys.unused_fiber_vars;
    ctx.report["result"] = r;
    ctx.say("frame rank " + std::to_string(a.rank()) + ", base " +
            std::to_string(a.base_vars.size()) + ", fiber " + std::to_string(a.fiber_vars.size()));
    ctx.say("standard: " + r["standard"].get<std::string>());
    ctx.say("systatic kernel dimension: " + std::to_string(sys.kernel_dim));
    return 0;
}

int cmd_derive(Ctx& ctx, const std::string& file, const std::string& form_text) {
    auto a = load_algebroid_file(file);
    ctx.begin("derive");
    DForm f = parse_form(form_text, a.frame, a.var_table());
    DForm df = derive(a, f);
    json r = json::object();
    r["form"] = form_text;
    r["result"] = df.str(a.frame);
    r["degree"] = df.degree();
    ctx.report["result"] = r;
    ctx.say("D(" + form_text + ") = " + df.str(a.frame));
    return 0;
}

int cmd_torsion(Ctx& ctx, const std::string& file) {
    auto a = load_algebroid_file(file);
    ctx.begin("torsion");
    TorsionSystem sys = torsion_system(a);
    json r = json::object();
    r["unknowns"] = sys.unknown_names;
    json eqs = json::array();
    for (const auto& eq : sys.equations) {
        Expr lhs = eq.constant;
        for (std::size_t u = 0; u < eq.coeffs.size(); ++u)
            if (!eq.coeffs[u].is_zero_structural())
                lhs = lhs + eq.coeffs[u] * Expr::variable(sys.unknown_names[u]);
        json e = json::object();
        e["slot"] = slot_str(a, eq.slot);
        e["equation"] = lhs.str() + " = 0";
        eqs.push_back(e);
        ctx.say(slot_str(a, eq.slot) + ":  " + lhs.str() + " = 0");
    }
    r["equations"] = eqs;
    ctx.report["result"] = r;
    ctx.say(std::to_string(sys.equations.size()) + " equations, " +
            std::to_string(sys.unknowns.size()) + " unknowns");
    return 0;
}

int cmd_prolong(Ctx& ctx, const std::string& file, int steps, const std::string& emit_dir) {
    auto a = load_algebroid_file(file);
    ctx.begin("prolong");
    Rng rng(ctx.seed);
    json levels = json::array();
    RelativeAlgebroid current = a;
    bool obstructed = false;
    for (int s = 1; s <= steps; ++s) {
        ProlongationStep step = solve_prolongation(current, rng.fork());
        for (const auto& w : step.warnings) ctx.warnings.push_back(w);
        json lj = step_json(current, step);
        lj["level"] = current.level + 1;
        if (step.aborted) {
            lj["aborted"] = step.abort_note;
            levels.push_back(lj);
            ctx.report["result"] = json{{"levels", levels}};
            ctx.finish();
            return 1;
        }
        levels.push_back(lj);
        ctx.say("level " + std::to_string(current.level + 1) + ": " +
                std::to_string(step.new_vars.size()) + " new variable(s), " +
                std::to_string(step.obstructions.size()) + " obstruction(s)");
        for (std::size_t rho = 0; rho < step.lift.size(); ++rho)
            ctx.say("  D " + current.fiber_vars[rho] + " = " + step.lift[rho].str(current.frame));
        for (const auto& [slot, resid] : step.obstructions)
            ctx.say("  obstruction " + slot_str(current, slot) + ": " + resid.str() + " = 0");
        if (step.obstructed()) {
            obstructed = true;
            break;
        }
        if (!emit_dir.empty()) {
            std::filesystem::create_directories(emit_dir);
            std::string stem = std::filesystem::path(file).stem().string();
            std::string out_path = (std::filesystem::path(emit_dir) /
                                    (stem + ".level" + std::to_string(step.prolonged.level) +
                                     ".alg"))
                                       .string();
            std::ofstream os(out_path);
            os << to_alg_text(step.prolonged);
            ctx.say("  emitted " + out_path);
        }
        current = step.prolonged;
    }
    ctx.report["result"] = json{{"levels", levels}};
    return obstructed ? 2 : 0;
}

int cmd_tower(Ctx& ctx, const std::string& file, int max_depth, const std::string& json_out) {
    auto a = load_algebroid_file(file);
    ctx.begin("tower");
    TowerReport tw = prolongation_tower(a, max_depth, Rng(ctx.seed));
    for (const auto& w : tw.warnings) ctx.warnings.push_back(w);
    json levels = json::array();
    RelativeAlgebroid current = a;
    for (const auto& lv : tw.levels) {
        json lj = json::object();
        lj["level"] = lv.level;
        lj["new_vars"] = lv.step.new_vars;
        json lift = json::object();
        for (std::size_t rho = 0; rho < lv.step.lift.size(); ++rho)
            lift["D " + current.fiber_vars[rho]] = lv.step.lift[rho].str(current.frame);
        lj["lift"] = lift;
        json obs = json::array();
        for (const auto& [slot, resid] : lv.step.obstructions) {
            json o = json::object();
            o["slot"] = slot_str(current, slot);
            o["residual"] = resid.str();
            DForm f(current.rank(), static_cast<int>(slot.args.size()));
            f.set_coefficient(slot.args, resid);
            o["form"] = f.str(current.frame);
            obs.push_back(o);
        }
        lj["obstructions"] = obs;
        lj["characters"] = characters_json(lv.cartan.characters);
        lj["cartan_test"] = cartan_json(lv.cartan);
        json curv = json::array();
        for (const auto& f : lv.curvature_forms) curv.push_back(f.str(current.frame));
        lj["curvature"] = curv;
        json certs = json::object();
        certs["finite_type"] = lv.finite_type_here;
        certs["involutive_and_torsionless"] = lv.certificate_here;
        lj["certificates"] = certs;
        levels.push_back(lj);
        ctx.say("level " + std::to_string(lv.level) + ": +" +
                std::to_string(lv.step.new_vars.size()) + " vars, s=" + [&] {
                    std::string s = "(";
                    for (std::size_t i = 0; i < lv.cartan.characters.s.size(); ++i)
                        s += (i ? "," : "") + std::to_string(lv.cartan.characters.s[i]);
                    return s + ")";
                }() + ", involutive: " + verdict_str(lv.cartan.involutive) +
                (lv.step.obstructed() ? ", OBSTRUCTED" : "") +
                (lv.finite_type_here ? ", finite type" : ""));
        if (!lv.step.aborted && !lv.step.obstructed()) current = lv.step.prolonged;
    }
    json r = json::object();
    r["levels"] = levels;
    r["finite_type"] = tw.finite_type;
    r["obstructed_level"] = tw.obstructed_level;
    r["formal_integrability_certificate"] = tw.formal_certificate;
    r["certificate_level"] = tw.certificate_level;
    if (tw.aborted) r["aborted"] = tw.abort_note;
    ctx.report["result"] = r;
    if (tw.formal_certificate)
        ctx.say("certificate: involutive + torsionless at level " +
                std::to_string(tw.certificate_level) + " (formally integrable)");
    if (tw.finite_type) ctx.say("finite type: tower constant from level " +
                                std::to_string(static_cast<int>(tw.levels.size())));
    if (!json_out.empty()) {
        ctx.report["warnings"] = ctx.warnings;
        std::ofstream os(json_out);
        os << ctx.report.dump(2) << "\n";
    }
    if (tw.aborted) return 1;
    return tw.obstructed_level > 0 ? 2 : 0;
}

int cmd_characters(Ctx& ctx, const std::string& file, const std::string& flag_perm,
                   int random_flags) {
    auto a = load_algebroid_file(file);
    ctx.begin("characters");
    TableauData t = tableau_map(a);
    Rng rng(ctx.seed);
    json flags = json::array();
    CharacterVector best;
    if (!flag_perm.empty()) {
        FlagSpec spec;
        spec.change = permutation_flag(flag_perm, a.rank());
        spec.desc = "perm(" + flag_perm + ")";
        best = cartan_characters(t, spec, rng.fork());
        flags.push_back(characters_json(best));
    } else {
        best = cartan_characters(t, FlagSpec{}, rng.fork());
        flags.push_back(characters_json(best));
        Rng frng = rng.fork();
        for (int i = 0; i < random_flags; ++i) {
            CharacterVector cv =
                cartan_characters(t, random_flag(a.rank(), frng, i + 1), rng.fork());
            flags.push_back(characters_json(cv));
            if (cv.stable && cv.s > best.s) best = cv;
        }
    }
    if (!best.stable) ctx.warnings.push_back("character ranks unstable across probes");
    json r = json::object();
    r["s"] = best.s;
    r["flag"] = best.flag_desc;
    r["bound"] = best.weighted_sum();
    r["flags_tried"] = flags;
    ctx.report["result"] = r;
    std::string line = "s = (";
    for (std::size_t i = 0; i < best.s.size(); ++i)
        line += (i ? "," : "") + std::to_string(best.s[i]);
    ctx.say(line + ") via " + best.flag_desc + ", Cartan bound " +
            std::to_string(best.weighted_sum()));
    return 0;
}

int cmd_cartan_test(Ctx& ctx, const std::string& file, int random_flags) {
    auto a = load_algebroid_file(file);
    ctx.begin("cartan-test");
    CartanTestResult ct = cartan_test(tableau_map(a), Rng(ctx.seed), random_flags);
    for (const auto& w : ct.warnings) ctx.warnings.push_back(w);
    ctx.report["result"] = cartan_json(ct);
    ctx.say("rank tau^(1) = " + std::to_string(ct.rank) + ", bound = " +
            std::to_string(ct.bound) + ", involutive: " + verdict_str(ct.involutive));
    return 0;
}

int cmd_cohomology(Ctx& ctx, const std::string& file, int m, int l, const std::string& point) {
    auto a = load_algebroid_file(file);
    ctx.begin("cohomology");
    auto pt = parse_point(point);
    int dim = spencer_cohomology_dim(tableau_map(a), m, l, pt);
    json r = json::object();
    r["m"] = m;
    r["l"] = l;
    r["point"] = point;
    r["dim"] = dim;
    ctx.report["result"] = r;
    ctx.say("dim H^{" + std::to_string(m) + "," + std::to_string(l) + "} = " +
            std::to_string(dim));
    return 0;
}

int cmd_restrict(Ctx& ctx, const std::string& file, const std::vector<std::string>& eqs,
                 const std::string& emit) {
    auto a = load_algebroid_file(file);
    ctx.begin("restrict");
    std::vector<std::pair<std::string, Expr>> solved;
    VarTable vt = a.var_table();
    for (const auto& e : eqs) {
        auto pos = e.find('=');
        if (pos == std::string::npos) throw Error("--eq expects 'var=expr', got '" + e + "'");
        std::string var = e.substr(0, pos);
        var.erase(0, var.find_first_not_of(" \t"));
        var.erase(var.find_last_not_of(" \t") + 1);
        solved.push_back({var, parse_expr(e.substr(pos + 1), vt)});
    }
    RelativeAlgebroid r = restrict_algebroid(a, solved, Rng(ctx.seed), &ctx.warnings);
    std::string text = to_alg_text(r);
    json rj = json::object();
    rj["algebroid"] = text;
    ctx.report["result"] = rj;
    if (!emit.empty()) {
        std::ofstream os(emit);
        os << text;
        ctx.say("wrote " + emit);
    } else {
        ctx.say(text);
    }
    return 0;
}

int cmd_from_pde(Ctx& ctx, const std::string& file, const std::string& emit) {
    auto j = load_pde_file(file);
    ctx.begin("from-pde");
    RelativeAlgebroid a = pde_to_algebroid(j);
    std::string text = to_alg_text(a);
    json r = json::object();
    r["algebroid"] = text;
    ctx.report["result"] = r;
    if (!emit.empty()) {
        std::ofstream os(emit);
        os << text;
        ctx.say("wrote " + emit);
    } else {
        ctx.say(text);
    }
    return 0;
}

int cmd_pde_compare(Ctx& ctx, const std::string& file, int depth) {
    auto j = load_pde_file(file);
    ctx.begin("pde-compare");
    PdeCompareReport rep = pde_prolong_compare(j, depth, Rng(ctx.seed));
    for (const auto& w : rep.warnings) ctx.warnings.push_back(w);
    json levels = json::array();
    for (const auto& lv : rep.levels) {
        json lj = json::object();
        lj["level"] = lv.level;
        lj["algebroid_new_vars"] = lv.algebroid_new_vars;
        lj["jet_new_parametric"] = lv.jet_new_parametric;
        lj["jet_parametric_total"] = lv.jet_parametric_total;
        json cons = json::array();
        for (const auto& [name, val] : lv.jet_constraints)
            cons.push_back(name + " = " + val.str());
        lj["jet_constraints"] = cons;
        lj["jet_obstructions"] = lv.jet_obstructions;
        lj["counts_match"] = lv.counts_match;
        lj["constraints_match"] = lv.constraints_match;
        lj["mismatches"] = lv.mismatches;
        levels.push_back(lj);
        ctx.say("level " + std::to_string(lv.level) + ": algebroid +" +
                std::to_string(lv.algebroid_new_vars) + ", jet +" +
                std::to_string(lv.jet_new_parametric) + " (total " +
                std::to_string(lv.jet_parametric_total) + "), " +
                (lv.counts_match && lv.constraints_match ? "match" : "MISMATCH"));
        for (const auto& m : lv.mismatches) ctx.say("  " + m);
    }
    json r = json::object();
    r["match"] = rep.match;
    r["levels"] = levels;
    ctx.report["result"] = r;
    ctx.say(rep.match ? "full match" : "MISMATCH between jet and algebroid prolongations");
    return rep.match ? 0 : 1;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"relalg: relative algebroids, prolongation towers, and PDE conversion"};
    app.require_subcommand(1);

    Ctx ctx;
    ctx.out = &out;
    ctx.args = args;
    app.add_option("--seed", ctx.seed, "PRNG seed for generic-point probes")->default_val(0);
    app.add_flag("--json", ctx.as_json, "print the JSON report to stdout");
    app.add_flag("--quiet", ctx.quiet, "suppress human-readable output");

    std::string file, form_text, emit, json_out, point, flag_perm;
    std::vector<std::string> eqs;
    int steps = 1, max_depth = 3, m = 0, l = 2, depth = 1, random_flags = 8;

    auto* c_check = app.add_subcommand("check", "validate and classify an .alg file");
    c_check->add_option("file", file)->required();

    auto* c_derive = app.add_subcommand("derive", "apply the relative derivation to a form");
    c_derive->add_option("file", file)->required();
    c_derive->add_option("--form", form_text, "form expression")->required();

    auto* c_torsion = app.add_subcommand("torsion", "assemble the torsion system");
    c_torsion->add_option("file", file)->required();

    auto* c_prolong = app.add_subcommand("prolong", "solve prolongation steps");
    c_prolong->add_option("file", file)->required();
    c_prolong->add_option("--steps", steps, "number of steps")->default_val(1);
    c_prolong->add_option("--emit", emit, "directory for prolonged .alg files");

    auto* c_tower = app.add_subcommand("tower", "build the prolongation tower");
    c_tower->add_option("file", file)->required();
    c_tower->add_option("--max-depth", max_depth, "maximum depth")->required();
    c_tower->add_option("--json", json_out, "write the JSON report to a file");

    auto* c_chars = app.add_subcommand("characters", "Cartan characters of the tableau");
    c_chars->add_option("file", file)->required();
    c_chars->add_option("--flag", flag_perm, "frame permutation, e.g. 2,1,3");
    c_chars->add_option("--random-flags", random_flags, "number of random flags")
        ->default_val(8);

    auto* c_ct = app.add_subcommand("cartan-test", "Cartan's test for involutivity");
    c_ct->add_option("file", file)->required();
    c_ct->add_option("--random-flags", random_flags, "number of random flags")->default_val(8);

    auto* c_coh = app.add_subcommand("cohomology", "Spencer cohomology dimension at a point");
    c_coh->add_option("file", file)->required();
    c_coh->add_option("--m", m, "first index (-1, 0, 1)")->required();
    c_coh->add_option("--l", l, "form degree (2 or 3)")->required();
    c_coh->add_option("--point", point, "e.g. \"K=1,phi=1/3\"")->required();

    auto* c_res = app.add_subcommand("restrict", "restrict to a solved-form locus");
    c_res->add_option("file", file)->required();
    c_res->add_option("--eq", eqs, "var=expr (repeatable)")->required();
    c_res->add_option("--emit", emit, "output .alg path");

    auto* c_pde = app.add_subcommand("from-pde", "convert a solved-form PDE to an algebroid");
    c_pde->add_option("file", file)->required();
    c_pde->add_option("--emit", emit, "output .alg path");

    auto* c_cmp = app.add_subcommand("pde-compare", "compare jet and algebroid prolongations");
    c_cmp->add_option("file", file)->required();
    c_cmp->add_option("--depth", depth, "levels to compare")->default_val(1);

    for (auto* sub : {c_check, c_derive, c_torsion, c_prolong, c_tower, c_chars, c_ct, c_coh,
                      c_res, c_pde, c_cmp})
        sub->fallthrough();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }

    int code = 1;
    try {
        if (c_check->parsed()) code = cmd_check(ctx, file);
        else if (c_derive->parsed()) code = cmd_derive(ctx, file, form_text);
        else if (c_torsion->parsed()) code = cmd_torsion(ctx, file);
        else if (c_prolong->parsed()) code = cmd_prolong(ctx, file, steps, emit);
        else if (c_tower->parsed()) code = cmd_tower(ctx, file, max_depth, json_out);
        else if (c_chars->parsed()) code = cmd_characters(ctx, file, flag_perm, random_flags);
        else if (c_ct->parsed()) code = cmd_cartan_test(ctx, file, random_flags);
        else if (c_coh->parsed()) code = cmd_cohomology(ctx, file, m, l, point);
        else if (c_res->parsed()) code = cmd_restrict(ctx, file, eqs, emit);
        else if (c_pde->parsed()) code = cmd_from_pde(ctx, file, emit);
        else if (c_cmp->parsed()) code = cmd_pde_compare(ctx, file, depth);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    ctx.finish();
    return code;
}

} // namespace relalg::cli

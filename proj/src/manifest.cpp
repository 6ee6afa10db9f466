#include "imcflab/manifest.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "imcflab/experiments.hpp"
#include "imcflab/field_io.hpp"
#include "imcflab/streamlines.hpp"

namespace imcflab {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& ptr, const std::string& msg) {
    throw std::invalid_argument(ptr + ": " + msg);
}

double get_num(const json& j, const char* key, double dflt, double lo, double hi,
               const std::string& what) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) fail(std::string("/") + key, "must be a number");
    const double v = j[key].get<double>();
    if (!(v >= lo && v <= hi)) fail(std::string("/") + key, what);
    return v;
}

json certificate_to_json(const ImcfCertificate& c) {
    json out;
    out["sup_F_norm"] = c.sup_F_norm;
    out["alignment_residual_L1"] = c.alignment_residual_L1;
    out["tol_div"] = c.tol_div;
    out["tol_F"] = c.thresholds.tol_F;
    out["tol_align"] = c.thresholds.tol_align;
    json res = json::array();
    for (const auto& [id, r] : c.weak_div_residuals)
        res.push_back(json{{"test", id}, {"residual", r}});
    out["weak_div_residuals"] = res;
    out["verdict"] = c.pass ? "pass" : "fail";
    if (!c.pass) out["failure"] = c.failure;
    return out;
}

void add_assertion(json& rep, const std::string& name, bool pass, double value,
                   double threshold) {
    rep["assertions"].push_back(
        json{{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
}

bool all_assertions_pass(const json& rep) {
    for (const auto& a : rep["assertions"])
        if (!a["pass"].get<bool>()) return false;
    return true;
}

const ExactSolution pick_member(const std::string& name) {
    return member_by_name(members(), name);
}

}  // namespace

Manifest parse_manifest_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("/: manifest is not valid JSON: ") + e.what());
    }
    Manifest m;
    if (!j.contains("experiment") || !j["experiment"].is_string())
        fail("/experiment", "required string, one of prop1|lemma42|theorem2|certify|solve|trace");
    m.experiment = j["experiment"].get<std::string>();
    const std::vector<std::string> kinds{"prop1", "lemma42", "theorem2",
                                         "certify", "solve",   "trace"};
    if (std::find(kinds.begin(), kinds.end(), m.experiment) == kinds.end())
        fail("/experiment", "unknown experiment kind '" + m.experiment + "'");

    if (j.contains("member")) {
        if (!j["member"].is_string()) fail("/member", "must be a string");
        m.member = j["member"].get<std::string>();
        const std::vector<std::string> names{"linear", "aronsson43", "angle"};
        if (std::find(names.begin(), names.end(), m.member) == names.end())
            fail("/member", "unknown corpus member '" + m.member + "'");
    }
    if (j.contains("target")) {
        if (!j["target"].is_string()) fail("/target", "must be a string");
        m.target = j["target"].get<std::string>();
    }
    if (j.contains("field_file")) {
        if (!j["field_file"].is_string()) fail("/field_file", "must be a string");
        m.field_file = j["field_file"].get<std::string>();
        if (!fs::exists(m.field_file)) fail("/field_file", "file does not exist");
    }
    if (j.contains("grid")) {
        const json& gj = j["grid"];
        if (gj.is_number_integer())
            m.grid_n = gj.get<int>();
        else if (gj.is_object() && gj.contains("n") && gj["n"].is_number_integer())
            m.grid_n = gj["n"].get<int>();
        else
            fail("/grid", "must be an integer node count or {\"n\": int}");
        if (m.grid_n < 9 || m.grid_n > 2049) fail("/grid", "node count must be in [9, 2049]");
        m.grid_set = true;
    }
    m.delta = get_num(j, "delta", 0.05, 1e-9, 1.0 / 16.0 - 1e-12,
                      "must be in (0, 1/16) per the local-problem hypotheses");
    m.sigma = get_num(j, "sigma", 0.5, 0.5, 1.0 - 8.0 * m.delta - 1e-12,
                      "must be in [1/2, 1 - 8*delta)");
    m.gamma = get_num(j, "gamma", 0.5, 1e-9, 1.0 - m.delta - 1e-12,
                      "must be in (0, 1 - delta)");
    m.gamma_set = j.contains("gamma");
    m.p_max = get_num(j, "p_max", 16.0, 2.0, 128.0, "must be in [2, 128]");
    m.eps_min = get_num(j, "eps_min", 1e-5, 0.0, 1.0, "must be in [0, 1]");
    m.tol = get_num(j, "tol", 1e-9, 1e-15, 1e-2, "must be in [1e-15, 1e-2]");
    m.max_iters =
        static_cast<int>(get_num(j, "max_iters", 50, 1, 10000, "must be in [1, 10000]"));
    if (j.contains("p_values")) {
        if (!j["p_values"].is_array()) fail("/p_values", "must be an array of numbers");
        for (std::size_t k = 0; k < j["p_values"].size(); ++k) {
            const json& v = j["p_values"][k];
            if (!v.is_number() || v.get<double>() < 2.0)
                fail("/p_values/" + std::to_string(k), "must be a number >= 2");
            m.p_values.push_back(v.get<double>());
        }
        for (std::size_t k = 1; k < m.p_values.size(); ++k)
            if (m.p_values[k] <= m.p_values[k - 1])
                fail("/p_values", "must be strictly increasing");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) fail("/tolerances", "must be an object");
        m.vtol.tol_F = get_num(t, "tol_F", m.vtol.tol_F, 0.0, 1.0, "must be in [0, 1]");
        m.vtol.tol_align =
            get_num(t, "tol_align", m.vtol.tol_align, 0.0, 1.0, "must be in [0, 1]");
        m.vtol.c0_div = get_num(t, "c0_div", m.vtol.c0_div, 0.0, 100.0, "must be in [0, 100]");
        m.vtol.tol_HI = get_num(t, "tol_HI", m.vtol.tol_HI, 0.0, 1.0, "must be in [0, 1]");
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) fail("/out", "must be a string");
        m.out_dir = j["out"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            fail("/seed", "must be an unsigned integer");
        m.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("dump_fields")) {
        if (!j["dump_fields"].is_boolean()) fail("/dump_fields", "must be a boolean");
        m.dump_fields = j["dump_fields"].get<bool>();
    }
    if (j.contains("quiet")) {
        if (!j["quiet"].is_boolean()) fail("/quiet", "must be a boolean");
        m.quiet = j["quiet"].get<bool>();
    }
    if (j.contains("trace")) {
        const json& t = j["trace"];
        if (!t.is_object()) fail("/trace", "must be an object");
        if (t.contains("seeds")) {
            if (!t["seeds"].is_array()) fail("/trace/seeds", "must be an array of [x, y]");
            for (std::size_t k = 0; k < t["seeds"].size(); ++k) {
                const json& s = t["seeds"][k];
                if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
                    fail("/trace/seeds/" + std::to_string(k), "must be [x, y]");
                m.trace_seeds.emplace_back(s[0].get<double>(), s[1].get<double>());
            }
        }
        m.trace_step = get_num(t, "step", 0.0, 0.0, 1.0, "must be in [0, 1]");
        m.trace_max_len = get_num(t, "max_len", 4.0, 1e-6, 100.0, "must be in (0, 100]");
    }
    return m;
}

Manifest parse_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("/: cannot open manifest " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest_text(text);
}

namespace {

void run_solve_experiment(const Manifest& m, json& rep) {
    const ExactSolution sol = pick_member(m.member);
    DirichletProblem pr;
    if (sol.domain.kind == Domain::Kind::AnnularSector) {
        pr = angle_sector_problem(m.grid_n);
    } else {
        const Grid2D g = Grid2D::square(1.0, m.grid_n);
        pr = DirichletProblem::rectangle(
            g, [&](double x, double y) { return sol.value(x, y); });
    }
    SolveParams sp = SolveParams::default_for(m.p_max, m.eps_min);
    sp.tol = m.tol;
    sp.max_iters = m.max_iters;
    const SolveResult res = solve(pr, sp);

    std::ofstream csv(fs::path(m.out_dir) / "convergence.csv");
    csv << "stage,p,epsilon,iterations,energy,residual,converged\n";
    for (std::size_t s = 0; s < res.stages.size(); ++s) {
        const SolveStage& st = res.stages[s];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%.17g,%.17g,%d\n", s, st.p,
                      st.epsilon, st.iterations, st.energy, st.residual,
                      st.converged ? 1 : 0);
        csv << buf;
    }
    dump_scalar(res.u, (fs::path(m.out_dir) / "u.csv").string());
    dump_vector(gradient(res.u), (fs::path(m.out_dir) / "grad_u.csv").string());

    rep["results"]["energy"] = res.energy;
    rep["results"]["residual"] = res.residual;
    rep["results"]["iterations"] = res.iterations;
    add_assertion(rep, "solver converged", res.converged, res.residual, m.tol);
}

void run_trace_experiment(const Manifest& m, json& rep) {
    ScalarField u;
    if (!m.field_file.empty()) {
        u = load_scalar(m.field_file);
    } else {
        const ExactSolution sol = pick_member(m.member);
        Grid2D g = sol.domain.kind == Domain::Kind::AnnularSector
                       ? Grid2D(0.0, 0.0, 2.0 / (m.grid_n - 1), m.grid_n, m.grid_n)
                       : Grid2D::square(1.0, m.grid_n);
        u = sample(sol, g).u;
    }
    const double step = m.trace_step > 0.0 ? m.trace_step : 0.5 * u.grid.h;
    std::vector<std::pair<double, double>> seeds = m.trace_seeds;
    if (seeds.empty()) seeds = {{0.0, -0.5}};

    std::ofstream csv(fs::path(m.out_dir) / "paths.csv");
    csv << "path_id,s,x,y,grad_norm\n";
    double worst_var = 0.0;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        const StreamlinePath p =
            trace_streamline(u, {seeds[k].first, seeds[k].second}, step, m.trace_max_len);
        double lo = 1e300, hi = -1e300;
        for (std::size_t q = 0; q < p.size(); ++q) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", k,
                          p.arclength[q], p.x[q], p.y[q], p.grad_norm_along[q]);
            csv << buf;
            lo = std::min(lo, p.grad_norm_along[q]);
            hi = std::max(hi, p.grad_norm_along[q]);
        }
        if (p.size() > 1 && lo > 0.0) worst_var = std::max(worst_var, (hi - lo) / lo);
    }
    rep["results"]["paths"] = seeds.size();
    rep["results"]["max_relative_grad_variation"] = worst_var;
    add_assertion(rep, "traced all requested paths", true, static_cast<double>(seeds.size()),
                  static_cast<double>(seeds.size()));
}

void run_certify_experiment(const Manifest& m, json& rep) {
    const std::string target = m.target.empty() ? m.member : m.target;
    if (target == "circle") {
        // w = log r, F = x/r on the annulus {1/2 <= r <= 2}
        const Grid2D g(-2.0, -2.0, 4.0 / (m.grid_n - 1), m.grid_n, m.grid_n);
        ScalarField w(g);
        VectorField F(g);
        CellMask mask(static_cast<std::size_t>(g.n_cells()), 0);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double r = std::max(1e-12, std::hypot(g.node_x(i), g.node_y(j)));
                w.values[g.node_index(i, j)] = std::log(r);
            }
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                const double r = std::hypot(x, y);
                const int c = g.cell_index(ci, cj);
                if (r < 0.5 || r > 2.0) continue;
                F.fx[c] = x / r;
                F.fy[c] = y / r;
                mask[c] = 1;
            }
        const std::vector<TestFunction> tests =
            make_test_suite(g, 24, m.seed, 0.10, 0.35, [](double x, double y) {
                const double r = std::hypot(x, y);
                return std::min(r - 0.5, 2.0 - r);
            });
        const ImcfCertificate cert = certify(w, F, tests, m.vtol, &mask);
        rep["results"]["certificate"] = certificate_to_json(cert);
        add_assertion(rep, "circle pair certified", cert.pass, cert.sup_F_norm,
                      1.0 + m.vtol.tol_F);
    } else if (target == "aronsson43") {
        AronssonParams ap;
        ap.grid_ns = {m.grid_n};
        ap.seed = m.seed;
        ap.tol = m.vtol;
        const AronssonReport ar = run_aronsson_discrimination(ap);
        rep["results"]["axis_residual"] = ar.axis_residual.front();
        rep["results"]["quad_residual"] = ar.quad_residual.front();
        rep["results"]["failing_tests"] = ar.failing_tests;
        add_assertion(rep, "full-square certificate (expected to fail on axis tests)",
                      !ar.full_square_fails, ar.axis_residual.front(),
                      m.vtol.c0_div * 2.0 / (m.grid_n - 1));
    } else if (target == "linear") {
        const Grid2D g = Grid2D::square(1.0, m.grid_n);
        ScalarField w(g, 0.0);
        VectorField F(g, -1.0, 0.0);  // e^0 perp(e2)
        const std::vector<TestFunction> tests =
            make_test_suite(g, 20, m.seed, 0.78, 0.80, [](double x, double y) {
                return 1.0 - std::max(std::abs(x), std::abs(y));
            });
        const ImcfCertificate cert = certify(w, F, tests, m.vtol);
        rep["results"]["certificate"] = certificate_to_json(cert);
        add_assertion(rep, "linear limit pair certified", cert.pass, cert.sup_F_norm,
                      1.0 + m.vtol.tol_F);
    } else {
        fail("/target", "unknown certify target '" + target + "'");
    }
}

void run_prop1_experiment(const Manifest& m, json& rep) {
    const ExactSolution sol = pick_member(m.member);
    Prop1Params pp;
    pp.n = m.grid_n;
    // the sector sweep needs the finer default grid: at 65^2 the h-floor
    // overtakes the 1/p signal at the top of the default sweep
    if (sol.domain.kind == Domain::Kind::AnnularSector && !m.grid_set) pp.n = 129;
    pp.delta = m.delta;
    pp.sigma = m.sigma;
    pp.gamma = m.gamma;
    pp.eps_min = m.eps_min;
    pp.seed = m.seed;
    pp.tol = m.vtol;
    if (!m.p_values.empty())
        pp.p_values = m.p_values;
    else if (sol.domain.kind == Domain::Kind::AnnularSector)
        pp.p_values = {8, 16, 32, 64};
    if (sol.domain.kind == Domain::Kind::AnnularSector && !m.gamma_set)
        pp.gamma = 0.45;  // sector default keeps the normalization floor harmless

    const Prop1Outcome out = run_prop1(sol, pp);

    if (m.dump_fields && !out.sweep.records.empty()) {
        dump_scalar(out.v_last, (fs::path(m.out_dir) / "v.csv").string());
        dump_scalar(out.w_last, (fs::path(m.out_dir) / "w.csv").string());
        dump_vector(out.F_last, (fs::path(m.out_dir) / "F.csv").string());
    }

    std::ofstream csv(fs::path(m.out_dir) / "sweep.csv");
    csv << "p,epsilon,iterations,converged,energy,l1_distance,one_sided_min,sup_w_error,sup_u_"
           "error,min_vertical,sup_grad_interior,sup_grad_bound\n";
    for (const SweepRecord& r : out.sweep.records) {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.p, r.epsilon, r.iterations, r.converged ? 1 : 0, r.energy,
                      r.l1_distance, r.one_sided_min, r.sup_w_error, r.sup_u_error,
                      r.min_vertical, r.sup_grad_interior, r.sup_grad_bound);
        csv << buf;
    }

    json sweep;
    sweep["geometry"] = out.sweep.geometry;
    sweep["l1_slope"] = out.sweep.l1_slope;
    json recs = json::array();
    for (const SweepRecord& r : out.sweep.records)
        recs.push_back(json{{"p", r.p},
                            {"l1_distance", r.l1_distance},
                            {"converged", r.converged},
                            {"one_sided_min", r.one_sided_min}});
    sweep["records"] = recs;
    rep["results"]["sweep"] = sweep;
    rep["results"]["limit_certificate"] = certificate_to_json(out.limit_certificate);
    if (!out.sweep.records.empty()) {
        rep["results"]["finite_p_certificate"] =
            certificate_to_json(out.finite_p_certificate);
        add_assertion(rep, "all solves converged", out.sweep.all_converged, 0.0, 0.0);
        add_assertion(rep, "L1 distances decrease in p", out.sweep.l1_decreasing, 0.0, 0.0);
        if (out.sweep.geometry == "slab") {
            double worst = 0.0;
            for (const SweepRecord& r : out.sweep.records)
                worst = std::min(worst, r.one_sided_min + prop1_slack(r.p));
            add_assertion(rep, "one-sided bound (w_p <= w_ref + slack)", out.sweep.one_sided_ok,
                          worst, 0.0);
        } else {
            add_assertion(rep, "L1 slope in [-1.3, -0.7]",
                          out.sweep.l1_slope >= -1.3 && out.sweep.l1_slope <= -0.7,
                          out.sweep.l1_slope, -1.0);
        }
        add_assertion(rep, "limit certificate", out.limit_certificate.pass, 0.0, 0.0);
        for (const SweepRecord& r : out.sweep.records) {
            add_assertion(rep, "interior gradient bound at p=" + std::to_string(r.p),
                          r.sup_grad_interior <= r.sup_grad_bound, r.sup_grad_interior,
                          r.sup_grad_bound);
        }
        if (out.sweep.geometry == "slab") {
            for (const SweepRecord& r : out.sweep.records)
                add_assertion(rep, "vertical monotonicity at p=" + std::to_string(r.p),
                              r.min_vertical >= m.sigma - 1e-2, r.min_vertical,
                              m.sigma - 1e-2);
        }
    } else {
        // non-orientable member: the certification is expected to fail and the
        // run reports that failure through its exit code
        add_assertion(rep, "weak-solution certificate", out.limit_certificate.pass, 0.0, 0.0);
    }
}

void run_lemma42_experiment(const Manifest& m, json& rep) {
    const ExactSolution sol = pick_member(m.member);
    Lemma42Params lp;
    lp.n = m.grid_n;
    if (!m.p_values.empty()) lp.p_values = m.p_values;
    lp.gamma = sol.domain.kind == Domain::Kind::AnnularSector ? 0.45 : m.gamma;
    lp.eps_min = m.eps_min;
    Polyline curve;
    if (sol.domain.kind == Domain::Kind::AnnularSector) {
        const double c = 1.0 / std::sqrt(2.0);
        for (int k = 0; k <= 20; ++k) {
            const double r = 1.5 - 0.7 * k / 20.0;
            curve.x.push_back(r * c);
            curve.y.push_back(r * c);
        }
    } else {
        for (int k = 0; k <= 20; ++k) {
            curve.x.push_back(-0.5 + k / 20.0);
            curve.y.push_back(0.0);
        }
    }
    const Lemma42Report out = run_lemma42(sol, curve, lp);

    std::ofstream csv(fs::path(m.out_dir) / "brackets.csv");
    csv << "p,upper_quantity,lower_quantity,sup_bound,mean_bound\n";
    json rows = json::array();
    for (const Lemma42Row& r : out.rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.p,
                      r.upper_quantity, r.lower_quantity, r.sup_bound, r.mean_bound);
        csv << buf;
        rows.push_back(json{{"p", r.p},
                            {"upper_quantity", r.upper_quantity},
                            {"lower_quantity", r.lower_quantity},
                            {"sup_bound", r.sup_bound},
                            {"mean_bound", r.mean_bound}});
    }
    rep["results"]["rows"] = rows;
    const Lemma42Row& last = out.rows.back();
    add_assertion(rep, "upper bracket within slack", out.upper_ok, last.upper_quantity,
                  last.sup_bound + lp.slack);
    add_assertion(rep, "lower bracket within slack", out.lower_ok, last.lower_quantity,
                  last.mean_bound - lp.slack);
}

void run_theorem2_experiment(const Manifest& m, json& rep) {
    const ExactSolution sol = pick_member(m.member);
    Theorem2Params tp;
    const Theorem2Report out = run_theorem2(sol, tp);

    std::ofstream csv(fs::path(m.out_dir) / "seminorms.csv");
    csv << "region,q,n,value\n";
    json rows = json::array();
    for (const Theorem2Row& r : out.rows) {
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%.17g\n", r.region.c_str(), r.q,
                          tp.grid_ns[k], r.values[k]);
            csv << buf;
        }
        rows.push_back(json{{"region", r.region},
                            {"q", r.q},
                            {"values", r.values},
                            {"ratios", r.ratios}});
    }
    rep["results"]["rows"] = rows;
    if (sol.name == "aronsson43") {
        add_assertion(rep, "one-sided q=4 seminorm within 2x per refinement",
                      out.one_sided_bounded, out.one_sided_max_ratio, 2.0);
        add_assertion(rep, "straddling q=4 seminorm grows >= 2x per refinement",
                      out.straddle_blows_up, out.straddle_min_ratio, 2.0);
    } else {
        // linear: all seminorms vanish
        double worst = 0.0;
        for (const Theorem2Row& r : out.rows)
            for (double v : r.values) worst = std::max(worst, v);
        add_assertion(rep, "all seminorms vanish", worst <= 1e-20, worst, 1e-20);
    }
}

}  // namespace

int run_manifest(const Manifest& m) {
    fs::create_directories(m.out_dir);
    json rep;
    rep["experiment"] = m.experiment;
    rep["member"] = m.member;
    rep["seed"] = m.seed;
    rep["grid_n"] = m.grid_n;
    rep["params"] = json{{"delta", m.delta},   {"sigma", m.sigma},
                         {"gamma", m.gamma},   {"p_max", m.p_max},
                         {"eps_min", m.eps_min}, {"tol", m.tol}};
    rep["assertions"] = json::array();
    rep["aborted"] = false;

    int code = 0;
    try {
        if (m.experiment == "solve")
            run_solve_experiment(m, rep);
        else if (m.experiment == "trace")
            run_trace_experiment(m, rep);
        else if (m.experiment == "certify")
            run_certify_experiment(m, rep);
        else if (m.experiment == "prop1")
            run_prop1_experiment(m, rep);
        else if (m.experiment == "lemma42")
            run_lemma42_experiment(m, rep);
        else if (m.experiment == "theorem2")
            run_theorem2_experiment(m, rep);
        rep["pass"] = all_assertions_pass(rep);
        code = rep["pass"].get<bool>() ? 0 : 1;
    } catch (const std::exception& e) {
        rep["aborted"] = true;
        rep["error"] = e.what();
        rep["pass"] = false;
        code = 2;
    }

    {
        std::ofstream out(fs::path(m.out_dir) / "report.json");
        out << rep.dump(2) << '\n';
    }
    {
        // wall-clock metadata lives outside report.json so reruns stay byte-identical
        std::ofstream meta(fs::path(m.out_dir) / "run_meta.txt");
        const auto now = std::chrono::system_clock::now();
        meta << "finished_unix_ms "
             << std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
                    .count()
             << '\n';
    }
    if (!m.quiet) {
        for (const auto& a : rep["assertions"])
            std::cout << (a["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                      << a["name"].get<std::string>() << '\n';
        if (rep["aborted"].get<bool>())
            std::cout << "[ABORT] " << rep["error"].get<std::string>() << '\n';
    }
    return code;
}

int summarize_report(const std::string& report_path, bool quiet) {
    std::ifstream in(report_path);
    if (!in) {
        std::cerr << "report: cannot open " << report_path << '\n';
        return 2;
    }
    json rep = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (rep.is_discarded()) {
        std::cerr << "report: invalid JSON in " << report_path << '\n';
        return 2;
    }
    if (!quiet) {
        std::cout << "experiment: " << rep.value("experiment", std::string("?")) << "  member: "
                  << rep.value("member", std::string("?")) << "  pass: "
                  << (rep.value("pass", false) ? "yes" : "no") << '\n';
        if (rep.contains("assertions"))
            for (const auto& a : rep["assertions"])
                std::cout << "  " << (a["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                          << a["name"].get<std::string>() << '\n';
    }
    return rep.value("pass", false) ? 0 : 1;
}

}  // namespace imcflab

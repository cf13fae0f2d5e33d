#include "paneitz/commands.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "paneitz/bifurcation.hpp"
#include "paneitz/coeffs.hpp"
#include "paneitz/output.hpp"
#include "paneitz/sturm.hpp"
#include "paneitz/verify.hpp"

namespace paneitz {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = {
        "coeffs", "spectrum", "bifurcation-points", "shoot",           "scan",      "solve",
        "branch", "diagram",  "verify-appendix",    "nonexistence-scan", "verify-all"};
    return names;
}

namespace {

struct Run {
    const RunConfig& cfg;
    const CommandOptions& opts;
    std::ostream& log;
    fs::path dir;
    json summary = json::object();
    json artifacts = json::array();
    json timings = json::object();
    std::vector<std::string> failed_checks;
    std::string stage = "setup";
    std::string failed_stage;

    template <class F>
    auto step(const std::string& name, F&& f)
    {
        stage = name;
        const auto t0 = std::chrono::steady_clock::now();
        auto done = [&] {
            timings[name] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
            f();
            done();
        } else {
            auto r = f();
            done();
            return r;
        }
    }

    fs::path file(const std::string& name)
    {
        artifacts.push_back(name);
        return dir / name;
    }

    void write_json(const std::string& name, const json& j)
    {
        std::ofstream out(file(name));
        out << j.dump(2) << '\n';
    }

    void check(const std::string& name, bool ok, const std::string& where = {})
    {
        if (!where.empty()) stage = where;
        summary["checks"][name] = ok;
        if (ok) return;
        failed_checks.push_back(name);
        if (failed_stage.empty()) failed_stage = stage;
    }

    ShootOptions shoot_options() const
    {
        ShootOptions o;
        o.eps_rel = cfg.eps_rel;
        o.flow.rtol = cfg.rtol;
        o.flow.atol = cfg.atol;
        return o;
    }

    ContinuationOptions continuation() const
    {
        ContinuationOptions co;
        co.s_max = cfg.s_max;
        co.profile_points = cfg.profile_points;
        co.eps_rel = cfg.eps_rel;
        return co;
    }
};

json versions()
{
    std::ostringstream eig;
    eig << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    std::ostringstream nj;
    nj << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
       << NLOHMANN_JSON_VERSION_PATCH;
    return {{"paneitz", kVersion}, {"eigen", eig.str()}, {"nlohmann_json", nj.str()},
            {"compiler", __VERSION__}};
}

json options_json(const CommandOptions& o)
{
    json j = json::object();
    if (o.s) j["s"] = *o.s;
    if (o.a) j["a"] = *o.a;
    if (o.b) j["b"] = *o.b;
    if (o.n) j["n"] = *o.n;
    if (o.m) j["m"] = *o.m;
    if (o.lambda0) j["lambda0"] = *o.lambda0;
    if (o.lambda1) j["lambda1"] = *o.lambda1;
    j["index"] = o.index;
    j["count"] = o.count;
    j["cells"] = o.cells;
    j["rect"] = {o.rect.a_min, o.rect.a_max, o.rect.b_min, o.rect.b_max};
    j["trajectory"] = o.trajectory;
    j["eigenfunctions"] = o.eigenfunctions;
    j["criteria"] = o.criteria;
    j["trials"] = o.trials;
    return j;
}

json coefficients_json(const PaneitzCoefficients& c)
{
    json j = {{"alpha", c.alpha}, {"beta", c.beta}, {"q", c.q}, {"discriminant", c.discriminant()}};
    if (c.factorizable) {
        j["c"] = c.c_factor;
        j["d"] = c.d_factor;
    } else {
        j["c"] = nullptr;
        j["d"] = nullptr;
    }
    return j;
}

json state_json(const State& s)
{
    return {{"t", s.t}, {"v", {s.v[0], s.v[1], s.v[2], s.v[3]}}};
}

json certificate_json(const std::optional<Certificate>& c)
{
    if (!c) return nullptr;
    return {{"cone", c->name()}, {"t", c->t}, {"v", {c->state[0], c->state[1], c->state[2], c->state[3]}}};
}

json point_json(const BifurcationPoint& bp)
{
    json j = {{"index", bp.index},
              {"s", bp.s},
              {"lambda", bp.lambda},
              {"tau", bp.tau},
              {"kernel_tangent", {bp.kernel_tangent[0], bp.kernel_tangent[1]}},
              {"phi_mismatch", bp.phi_mismatch},
              {"valid", bp.valid}};
    j["closed_form"] = bp.closed_form ? json(*bp.closed_form) : json(nullptr);
    return j;
}

void write_profile_csv(Run& run, const std::string& name, const SolutionProfile& sol)
{
    CsvWriter csv(run.file(name), {"t", "u", "du", "d2u"});
    for (Eigen::Index k = 0; k < sol.t.size(); ++k) {
        csv << sol.t[k] << sol.u[k] << sol.du[k] << sol.d2u[k];
        csv.end_row();
    }
}

std::vector<BifurcationPoint> compute_instants(Run& run, const Profile& p,
                                               const CoefficientPath& path, int count)
{
    const auto spectra = run.step("spectrum", [&] { return spectrum(p, count, run.cfg.gridsize); });
    return run.step("instants", [&] { return instants(path, spectra, count); });
}

void write_branch(Run& run, const Branch& br)
{
    const std::string stem = "branch_" + std::to_string(br.origin.index);
    CsvWriter csv(run.file(stem + ".csv"),
                  {"s", "a", "b", "a_end", "b_end", "min_u", "max_u", "critical_points",
                   "identity_relative", "max_w2", "equation_residual", "iterations"});
    json pts = json::array();
    for (const auto& pt : br.points) {
        csv << pt.s << pt.a << pt.b << pt.profile.a_end << pt.profile.b_end << pt.quality.min_u
            << pt.quality.max_u << pt.quality.critical_point_count << pt.quality.identity_relative
            << pt.quality.max_w2 << pt.quality.equation_residual << pt.iterations;
        csv.end_row();
        pts.push_back({{"s", pt.s}, {"a", pt.a}, {"b", pt.b}, {"quality", pt.quality.to_json()}});
    }
    run.write_json(stem + ".json", {{"origin", point_json(br.origin)},
                                    {"status", to_string(br.status)},
                                    {"message", br.message},
                                    {"tangent_cosine", br.tangent_cosine},
                                    {"critical_point_count", br.critical_point_count},
                                    {"census_constant", br.census_constant()},
                                    {"points", pts}});
}

// (s, a) columns of a stored branch CSV; empty when absent.
std::vector<BranchPoint> read_branch_csv(const fs::path& path)
{
    std::vector<BranchPoint> pts;
    std::ifstream in(path);
    if (!in) return pts;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string s, a, b;
        if (!std::getline(ls, s, ',') || !std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
        BranchPoint pt;
        pt.s = std::stod(s);
        pt.a = std::stod(a);
        pt.b = std::stod(b);
        pts.push_back(std::move(pt));
    }
    return pts;
}

// ---------------------------------------------------------------------------

void cmd_coeffs(Run& run)
{
    const auto& o = run.opts;
    const auto& src = run.cfg.coefficients;
    EinsteinProductDatum d;
    bool from_config = src.value("source", "") == "product" && !o.n && !o.m && !o.lambda0 && !o.lambda1;
    if (from_config) {
        d.n = src.value("n", 3);
        d.m = src.value("m", 3);
        d.lambda0 = src.value("lambda0", 2.0);
        if (!o.s) throw ConfigError("coeffs with a product path needs --s (Lambda1 = slope*s)");
        d.lambda1 = src.value("slope", 2.0) * *o.s;
    } else {
        d.n = o.n.value_or(3);
        d.m = o.m.value_or(3);
        d.lambda0 = o.lambda0.value_or(1.0);
        d.lambda1 = o.lambda1.value_or(d.lambda0);
    }
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto c = run.step("coefficients", [&] { return product_coefficients(d, run.cfg.q); });
    json j = coefficients_json(c);
    j["Q"] = q_curvature_product(d);
    j["n"] = d.n;
    j["m"] = d.m;
    j["lambda0"] = d.lambda0;
    j["lambda1"] = d.lambda1;
    run.log << j.dump(2) << '\n';
    run.write_json("coeffs.json", j);
    run.summary["coefficients"] = j;
}

void cmd_spectrum(Run& run)
{
    const auto p = run.cfg.make_profile();
    const auto spectra = run.step("spectrum", [&] { return spectrum(p, run.opts.count, run.cfg.gridsize); });
    run.step("write", [&] {
        CsvWriter csv(run.file("spectrum.csv"), {"i", "lambda_i", "lambda_extrapolated", "zero_count"});
        for (int i = 0; i <= spectra.count(); ++i) {
            csv << i << spectra.eigenvalues[i] << spectra.extrapolated[i] << spectra.interior_zero_counts[i];
            csv.end_row();
        }
        if (run.opts.eigenfunctions) {
            std::vector<std::string> head = {"t"};
            for (int i = 0; i <= spectra.count(); ++i) head.push_back("phi_" + std::to_string(i));
            CsvWriter ef(run.file("eigenfunctions.csv"), head);
            for (Eigen::Index k = 0; k < spectra.grid.size(); ++k) {
                ef << spectra.grid[k];
                for (int i = 0; i <= spectra.count(); ++i) ef << spectra.eigenfunctions(k, i);
                ef.end_row();
            }
        }
    });
    for (int i = 0; i <= spectra.count(); ++i)
        run.log << "lambda_" << i << " = " << csv_number(spectra.eigenvalues[i])
                << "  (extrapolated " << csv_number(spectra.extrapolated[i]) << ", zeros "
                << spectra.interior_zero_counts[i] << ")\n";
    bool ladder = true;
    for (int i = 0; i <= spectra.count(); ++i) ladder = ladder && spectra.interior_zero_counts[i] == i;
    run.check("zero_count_ladder", ladder, "spectrum");
    run.summary["eigenvalues"] = spectra.eigenvalues;
    run.summary["invariant_bilaplacian_gap"] = spectra.invariant_bilaplacian_gap();
}

void cmd_bifurcation_points(Run& run)
{
    const auto p = run.cfg.make_profile();
    const auto path = run.cfg.make_path();
    const auto pts = compute_instants(run, p, path, run.cfg.i_max);
    const auto hyp = run.step("hypotheses", [&] { return validate_hypotheses(path, 1.5 * pts.back().s); });
    run.step("write", [&] {
        CsvWriter csv(run.file("bifurcation_points.csv"), {"i", "s_i", "lambda_i", "tau_i", "closed_form_s_i"});
        for (const auto& bp : pts) {
            csv << bp.index << bp.s << bp.lambda << bp.tau
                << (bp.closed_form ? *bp.closed_form : std::nan(""));
            csv.end_row();
        }
        run.write_json("hypotheses.json", hyp.to_json());
    });
    json list = json::array();
    bool all_valid = true;
    for (const auto& bp : pts) {
        run.log << "s_" << bp.index << " = " << csv_number(bp.s) << "  lambda = " << csv_number(bp.lambda)
                << "  tau = " << csv_number(bp.tau) << '\n';
        list.push_back(point_json(bp));
        all_valid = all_valid && bp.valid;
    }
    run.check("hypotheses", hyp.ok(), "hypotheses");
    run.check("tau_nonzero", all_valid, "instants");
    run.summary["points"] = list;
}

void cmd_shoot(Run& run)
{
    if (!run.opts.a || !run.opts.b) throw ConfigError("shoot needs --a and --b");
    const auto p = run.cfg.make_profile();
    const auto c = run.cfg.make_coefficients(run.opts.s);
    const auto so = run.shoot_options();
    const auto res = run.step("shoot", [&] { return shoot(c, p, *run.opts.a, *run.opts.b, so); });
    json j = {{"a", *run.opts.a},
              {"b", *run.opts.b},
              {"coefficients", coefficients_json(c)},
              {"r1", res.r1},
              {"r3", res.r3},
              {"norm", res.norm()},
              {"terminated_early", res.terminated_early},
              {"termination", to_string(res.termination)},
              {"nonpositive", res.nonpositive},
              {"final_state", state_json(res.final_state)},
              {"certificate", certificate_json(res.certificate)}};
    run.write_json("shoot.json", j);
    if (run.opts.trajectory) {
        const auto traj = run.step("trajectory", [&] { return shoot_trajectory(c, p, *run.opts.a, *run.opts.b, so); });
        CsvWriter csv(run.file("trajectory.csv"), {"t", "v0", "v1", "v2", "v3"});
        const auto& v0 = traj.start().v;
        csv << traj.start().t << v0[0] << v0[1] << v0[2] << v0[3];
        csv.end_row();
        for (const auto& st : traj.steps()) {
            const auto v = st.end();
            csv << st.t1() << v[0] << v[1] << v[2] << v[3];
            csv.end_row();
        }
    }
    const auto& f = res.final_state;
    run.log << "terminal t = " << csv_number(f.t) << "  v = (" << csv_number(f.v[0]) << ", "
            << csv_number(f.v[1]) << ", " << csv_number(f.v[2]) << ", " << csv_number(f.v[3]) << ")\n"
            << "termination: " << to_string(res.termination) << "\n"
            << "certificate: " << (res.certificate ? res.certificate->name() : std::string("none")) << '\n'
            << "residual r1 = " << csv_number(res.r1) << "  r3 = " << csv_number(res.r3) << '\n';
    run.summary["residual_norm"] = res.norm();
    run.summary["termination"] = to_string(res.termination);
}

ScanResult run_scan(Run& run, const PaneitzCoefficients& c, const Profile& p)
{
    const auto& o = run.opts;
    if (o.cells < 1) throw ConfigError("--cells must be positive");
    if (!(o.rect.a_min > 0) || !(o.rect.a_max > o.rect.a_min) || !(o.rect.b_max > o.rect.b_min))
        throw ConfigError("scan rectangle needs 0 < a_min < a_max and b_min < b_max");
    const auto so = run.shoot_options();
    const auto res = run.step("scan", [&] { return scan(c, p, o.rect, o.cells, o.cells, so); });
    run.step("write", [&] {
        CsvWriter csv(run.file("scan.csv"), {"a", "b", "r1", "r3", "early", "certificate"});
        for (const auto& nd : res.nodes) {
            csv << nd.a << nd.b << nd.r.r1 << nd.r.r3 << int(nd.r.terminated_early)
                << (nd.r.certificate ? nd.r.certificate->name() : std::string("none"));
            csv.end_row();
        }
        CsvWriter cells(run.file("scan_cells.csv"),
                        {"i", "j", "a0", "a1", "b0", "b1", "sign_change", "candidate", "pruned", "trivial"});
        for (const auto& cl : res.cells) {
            if (!cl.sign_change && !cl.pruned) continue;
            cells << cl.i << cl.j << cl.a0 << cl.a1 << cl.b0 << cl.b1 << int(cl.sign_change)
                  << int(cl.candidate) << int(cl.pruned) << int(cl.trivial);
            cells.end_row();
        }
    });
    int sign = 0, pruned = 0, trivial = 0;
    for (const auto& cl : res.cells) {
        sign += cl.sign_change;
        pruned += cl.pruned;
        trivial += cl.candidate && cl.trivial;
    }
    run.summary["coefficients"] = coefficients_json(c);
    run.summary["sign_change_cells"] = sign;
    run.summary["pruned_cells"] = pruned;
    run.summary["trivial_cells"] = trivial;
    run.summary["nontrivial_candidates"] = res.nontrivial_candidates();
    run.log << res.cells.size() << " cells, " << sign << " coarse sign changes, " << pruned
            << " pruned, " << res.nontrivial_candidates() << " nontrivial candidates\n";
    return res;
}

void cmd_scan(Run& run)
{
    run_scan(run, run.cfg.make_coefficients(run.opts.s), run.cfg.make_profile());
}

void cmd_nonexistence_scan(Run& run)
{
    const auto res = run_scan(run, run.cfg.make_coefficients(run.opts.s), run.cfg.make_profile());
    run.summary["note"] = "sample-based check, not a proof";
    run.check("no_nontrivial_candidate", res.nontrivial_candidates() == 0, "scan");
}

void cmd_solve(Run& run)
{
    if (!run.opts.a || !run.opts.b) throw ConfigError("solve needs --a and --b as the initial guess");
    const auto p = run.cfg.make_profile();
    const auto c = run.cfg.make_coefficients(run.opts.s);
    SolveOptions so;
    so.shoot = run.shoot_options();
    so.profile_points = run.cfg.profile_points;
    const auto res = run.step("solve", [&] { return solve(c, p, *run.opts.a, *run.opts.b, so); });
    json j = {{"status", to_string(res.status)}, {"a", res.a}, {"b", res.b},
              {"iterations", res.iterations}, {"residual_norm", res.residual_norm},
              {"coefficients", coefficients_json(c)}};
    run.step("write", [&] {
        if (res.profile) write_profile_csv(run, "solution.csv", *res.profile);
        j["quality"] = res.quality ? res.quality->to_json() : json(nullptr);
        run.write_json("quality.json", j);
    });
    run.log << "status: " << to_string(res.status) << "  a = " << csv_number(res.a)
            << "  b = " << csv_number(res.b) << "  iterations " << res.iterations << '\n';
    run.summary["solve"] = j;
    run.check("converged", res.status == SolveStatus::converged || res.status == SolveStatus::trivial,
              "solve");
}

void cmd_branch(Run& run)
{
    const int idx = run.opts.index;
    if (idx < 1) throw ConfigError("--index must be >= 1");
    const auto p = run.cfg.make_profile();
    const auto path = run.cfg.make_path();
    const auto pts = compute_instants(run, p, path, std::max(idx, run.cfg.i_max));
    const auto br = run.step("continuation", [&] { return continue_branch(path, p, pts[idx - 1], run.continuation()); });
    run.step("write", [&] { write_branch(run, br); });
    run.log << "branch " << idx << ": " << br.points.size() << " points, s in ["
            << csv_number(br.s_lo()) << ", " << csv_number(br.s_hi()) << "], status "
            << to_string(br.status) << (br.message.empty() ? "" : " (" + br.message + ")") << '\n';
    run.summary["status"] = to_string(br.status);
    run.summary["points"] = br.points.size();
    run.summary["s_range"] = {br.s_lo(), br.s_hi()};
    run.summary["tangent_cosine"] = br.tangent_cosine;
    if (br.status == BranchStatus::step_failure || br.status == BranchStatus::corrector_failure)
        run.summary["note"] = "continuation stalled; inconclusive";
    run.check("critical_point_count_constant", br.census_constant(), "continuation");
}

void cmd_diagram(Run& run)
{
    const auto p = run.cfg.make_profile();
    const auto path = run.cfg.make_path();
    const auto pts = compute_instants(run, p, path, run.cfg.i_max);
    std::vector<Branch> branches;
    int stored = 0;
    for (const auto& bp : pts) {
        Branch br;
        br.origin = bp;
        br.points = read_branch_csv(run.dir / ("branch_" + std::to_string(bp.index) + ".csv"));
        if (!br.points.empty()) {
            ++stored;
        } else {
            br = run.step("continuation_" + std::to_string(bp.index),
                          [&] { return continue_branch(path, p, bp, run.continuation()); });
            write_branch(run, br);
        }
        branches.push_back(std::move(br));
    }
    double s_hi = 1.1 * pts.back().s;
    for (const auto& br : branches)
        if (!br.points.empty()) s_hi = std::max(s_hi, br.points.back().s);
    run.step("render", [&] {
        std::ofstream out(run.file("diagram.svg"));
        out << bifurcation_svg(pts, branches, std::max(0.0, path.s_min()), s_hi);
    });
    run.summary["branches"] = branches.size();
    run.summary["stored_branches"] = stored;
    run.log << "diagram.svg: " << branches.size() << " branches (" << stored << " from stored CSV)\n";
}

void cmd_verify_appendix(Run& run)
{
    const auto& o = run.opts;
    std::vector<std::pair<int, int>> pairs;
    if (o.n || o.m) {
        pairs.push_back({o.n.value_or(3), o.m.value_or(3)});
    } else {
        for (int n = 3; n <= 12; ++n)
            for (int m = 3; m <= 12; ++m) pairs.push_back({n, m});
    }
    const double l0 = o.lambda0.value_or(1.0);
    if (!(l0 > 0)) throw ConfigError("--lambda0 must be positive");
    json rows = json::array();
    double worst = 0.0;
    bool positive = true;
    run.step("certificate", [&] {
        for (auto [n, m] : pairs) {
            if (n < 1 || m < 1 || n + m <= 4) throw ConfigError("need n, m >= 1 and n + m > 4");
            const auto cert = appendix_certificate(n, m, l0);
            worst = std::max(worst, cert.max_rel_mismatch);
            positive = positive && cert.all_positive;
            rows.push_back({{"n", n}, {"m", m}, {"lambda0", l0}, {"h0", cert.h0},
                            {"h0_prime", cert.h0_prime}, {"quad_coeff", cert.quad_coeff},
                            {"direct_h0", cert.direct_h0}, {"direct_h0_prime", cert.direct_h0_prime},
                            {"direct_quad_coeff", cert.direct_quad_coeff},
                            {"max_rel_mismatch", cert.max_rel_mismatch}, {"all_positive", cert.all_positive}});
            if (pairs.size() == 1)
                run.log << "n=" << n << " m=" << m << " lambda0=" << csv_number(l0) << ": h0 = "
                        << csv_number(cert.h0) << ", h0' = " << csv_number(cert.h0_prime)
                        << ", quadratic = " << csv_number(cert.quad_coeff) << ", mismatch "
                        << csv_number(cert.max_rel_mismatch) << '\n';
        }
    });
    run.write_json("appendix.json", rows);
    run.log << pairs.size() << " (n, m) pairs, max relative mismatch " << csv_number(worst) << '\n';
    run.summary["pairs"] = pairs.size();
    run.summary["max_rel_mismatch"] = worst;
    run.check("closed_forms_match", worst <= 1e-7, "certificate");
    run.check("all_positive", positive);
}

void cmd_verify_all(Run& run)
{
    VerifyOptions vo;
    vo.seed = run.cfg.seed;
    vo.gridsize = run.cfg.gridsize;
    vo.certificate_trials = run.opts.trials;
    json results = json::array();
    run.step("criteria", [&] {
        run_criteria(vo, run.opts.criteria, [&](const CriterionResult& r) {
            run.stage = "criterion " + std::to_string(r.id);
            run.log << format_line(r) << std::endl;
            run.timings["criterion_" + std::to_string(r.id)] = r.seconds;
            results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass},
                               {"detail", r.detail}, {"data", r.data}});
            run.check("criterion " + std::to_string(r.id) + " " + r.name, r.pass);
        });
    });
    // details carry no timings, so this file is reproducible
    run.write_json("verify.json", results);
    int passed = 0;
    for (const auto& r : results) passed += r["pass"].get<bool>();
    run.log << passed << "/" << results.size() << " criteria passed\n";
    run.summary["passed"] = passed;
    run.summary["total"] = results.size();
}

using Handler = void (*)(Run&);

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> h = {
        {"coeffs", cmd_coeffs},
        {"spectrum", cmd_spectrum},
        {"bifurcation-points", cmd_bifurcation_points},
        {"shoot", cmd_shoot},
        {"scan", cmd_scan},
        {"solve", cmd_solve},
        {"branch", cmd_branch},
        {"diagram", cmd_diagram},
        {"verify-appendix", cmd_verify_appendix},
        {"nonexistence-scan", cmd_nonexistence_scan},
        {"verify-all", cmd_verify_all},
    };
    return h;
}

}  // namespace

int run_command(const RunConfig& config, const std::string& command, const CommandOptions& opts,
                std::ostream& log)
{
    Run run{config, opts, log, fs::path(config.out), {}, {}, {}, {}, "setup", {}};
    std::error_code ec;
    fs::create_directories(run.dir, ec);
    if (ec) {
        log << "error: cannot create output directory '" << config.out << "': " << ec.message() << '\n';
        return Exit::usage;
    }

    int code = Exit::ok;
    std::string error;
    const auto it = handlers().find(command);
    if (it == handlers().end()) {
        code = Exit::usage;
        error = "unknown command '" + command + "'";
        run.stage = "dispatch";
    } else {
        try {
            config.validate();
            it->second(run);
            if (!run.failed_checks.empty()) code = Exit::failed;
        } catch (const ConfigError& e) {
            code = Exit::usage;
            error = e.what();
        } catch (const std::invalid_argument& e) {
            code = Exit::usage;
            error = e.what();
        } catch (const std::exception& e) {
            code = Exit::failed;
            error = e.what();
        }
    }

    json manifest = {{"tool", "paneitz"},
                     {"command", command},
                     {"versions", versions()},
                     {"config", config.to_json()},
                     {"options", options_json(opts)},
                     {"exit_code", code},
                     {"status", code == Exit::ok ? "ok" : code == Exit::failed ? "failed" : "error"},
                     {"summary", run.summary},
                     {"artifacts", run.artifacts}};
    if (!error.empty()) {
        manifest["failed_stage"] = run.stage;
        manifest["error"] = error;
        log << "error in stage '" << run.stage << "': " << error << '\n';
    } else if (!run.failed_checks.empty()) {
        manifest["failed_stage"] = run.failed_stage;
        manifest["failed_checks"] = run.failed_checks;
        for (const auto& name : run.failed_checks) log << "check failed: " << name << '\n';
    }
    if (opts.timings) manifest["timings"] = run.timings;
    std::ofstream out(run.dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    return code;
}

int report_config_error(const std::string& out, const std::string& command,
                        const std::string& error, std::ostream& log)
{
    log << "error in stage 'config': " << error << '\n';
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) return Exit::usage;
    json manifest = {{"tool", "paneitz"},  {"command", command}, {"versions", versions()},
                     {"config", nullptr},  {"exit_code", int(Exit::usage)},
                     {"status", "error"},  {"failed_stage", "config"},
                     {"error", error}};
    std::ofstream(fs::path(out) / "manifest.json") << manifest.dump(2) << '\n';
    return Exit::usage;
}

}  // namespace paneitz

#include "paneitz/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "paneitz/bifurcation.hpp"
#include "paneitz/coeffs.hpp"
#include "paneitz/flow.hpp"
#include "paneitz/multishoot.hpp"
#include "paneitz/profile.hpp"
#include "paneitz/shooting.hpp"
#include "paneitz/sturm.hpp"

namespace paneitz {

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Shared state: the S³ k=1 spectrum and the continued branches.
struct Context {
    VerifyOptions opts;
    std::optional<Spectrum> sphere_spectrum;
    std::optional<std::vector<BifurcationPoint>> points;
    std::optional<std::vector<Branch>> branches;  // 1..3 up to 1.5·s_3

    const Profile profile = Profile::sphere(3, 1);
    const CoefficientPath path = CoefficientPath::builtin(0.2, 3.0);

    const Spectrum& spectrum()
    {
        if (!sphere_spectrum) sphere_spectrum = paneitz::spectrum(profile, 5, opts.gridsize);
        return *sphere_spectrum;
    }
    const std::vector<BifurcationPoint>& instants()
    {
        if (!points) points = paneitz::instants(path, spectrum(), 4);
        return *points;
    }
    const std::vector<Branch>& three_branches()
    {
        if (!branches) {
            branches.emplace();
            ContinuationOptions co;
            co.s_max = 1.5 * instants()[2].s;
            for (int i = 0; i < 3; ++i)
                branches->push_back(continue_branch(path, profile, instants()[i], co));
        }
        return *branches;
    }
};

CriterionResult spectrum_oracle(Context& ctx)
{
    CriterionResult r;
    double worst = 0.0;
    bool ladder = true;
    const auto& s1 = ctx.spectrum();
    for (int i = 1; i <= 5; ++i) worst = std::max(worst, rel(s1.eigenvalues[i], -double(i) * (i + 2)));
    for (int i = 0; i <= 5; ++i) ladder = ladder && s1.interior_zero_counts[i] == i;
    const auto s2 = spectrum(Profile::sphere(3, 2), 3, ctx.opts.gridsize);
    double worst2 = 0.0;
    for (int i = 1; i <= 3; ++i)
        worst2 = std::max(worst2, rel(s2.eigenvalues[i], -2.0 * i * (2.0 * i + 2.0)));
    for (int i = 0; i <= 3; ++i) ladder = ladder && s2.interior_zero_counts[i] == i;
    r.pass = worst <= 1e-4 && worst2 <= 1e-4 && ladder;
    r.detail = "k=1 max rel err " + sci(worst) + ", k=2 max rel err " + sci(worst2) +
               ", zero counts " + (ladder ? "exact" : "WRONG");
    r.data = {{"k1_max_rel", worst}, {"k2_max_rel", worst2}, {"zero_counts_exact", ladder}};
    return r;
}

CriterionResult closed_form_instants(Context& ctx)
{
    CriterionResult r;
    double worst = 0.0;
    bool taus = true;
    int checked = 0;
    for (double c : {0.05, 0.2})
        for (double q : {2.0, 3.0, 5.0}) {
            const auto path = CoefficientPath::builtin(c, q);
            for (const auto& bp : instants(path, ctx.spectrum(), 4)) {
                worst = std::max(worst, rel(bp.s, builtin_instant(bp.lambda, c, q)));
                taus = taus && bp.valid && bp.tau != 0.0;
                ++checked;
            }
        }
    r.pass = worst <= 1e-10 && taus && checked == 24;
    r.detail = std::to_string(checked) + " instants, max rel gap " + sci(worst) +
               (taus ? ", all tau nonzero" : ", some tau vanish");
    r.data = {{"max_rel", worst}, {"tau_nonzero", taus}};
    return r;
}

CriterionResult geometry_golden(Context&)
{
    CriterionResult r;
    bool alpha_exact = true;
    double worst_beta = 0.0;
    for (double s : {1.0, 2.0, 5.0}) {
        const auto c = product_coefficients({3, 3, 2.0, 2.0 * s}, 3.0);
        alpha_exact = alpha_exact && c.alpha == 3.0 * s + 1.0;
        worst_beta = std::max(worst_beta, rel(c.beta, -1.5 * (1 + s * s) + 1.71 * (1 + s) * (1 + s)));
    }
    r.pass = alpha_exact && worst_beta <= 1e-12;
    r.detail = std::string("alpha ") + (alpha_exact ? "exact" : "INEXACT") + ", beta max rel err " +
               sci(worst_beta);
    r.data = {{"alpha_exact", alpha_exact}, {"beta_max_rel", worst_beta}};
    return r;
}

CriterionResult appendix(Context& ctx)
{
    CriterionResult r;
    double worst = 0.0;
    bool positive = true;
    for (int n = 3; n <= 12; ++n)
        for (int m = 3; m <= 12; ++m) {
            const auto cert = appendix_certificate(n, m, 1.0);
            worst = std::max(worst, cert.max_rel_mismatch);
            positive = positive && cert.all_positive;
        }
    std::mt19937_64 rng(ctx.opts.seed);
    std::uniform_int_distribution<int> dim(3, 12);
    std::uniform_real_distribution<double> l0(0.01, 10.0), ratio(1.0, 20.0);
    int bad = 0;
    for (int k = 0; k < 500; ++k) {
        const int n = dim(rng), m = dim(rng);
        const double a = l0(rng);
        const double b = a * ratio(rng);
        const double alpha = product_alpha(n, m, a, b), beta = product_beta(n, m, a, b);
        if (!(alpha * alpha - 4.0 * beta > 0.0)) ++bad;
    }
    r.pass = worst <= 1e-7 && positive && bad == 0;
    r.detail = "closed forms max rel gap " + sci(worst) + ", " + std::to_string(500 - bad) +
               "/500 random samples positive";
    r.data = {{"max_rel", worst}, {"all_positive", positive}, {"random_failures", bad}};
    return r;
}

CriterionResult trivial_branch(Context& ctx)
{
    CriterionResult r;
    const std::vector<Profile> profiles = {Profile::sphere(3, 1), Profile::sphere(3, 2),
                                           Profile::sphere(2, 1), Profile::sphere(5, 1),
                                           Profile::sphere(4, 3), Profile::sphere(3, 2, 1.0)};
    const std::vector<std::array<double, 3>> samples = {
        {1.0, 0.2, 3.0}, {10.0, 20.0, 3.0}, {50.0, 500.0, 3.0}, {0.1, 0.002, 3.0}, {4.0, 3.84, 5.0}, {3.0, 1.0, 2.0}};
    double worst = 0.0;
    for (const auto& p : profiles)
        for (const auto& s : samples) {
            const auto res = shoot(make_coefficients(s[0], s[1], s[2]), p, 1.0, 0.0);
            worst = std::max(worst, res.terminated_early ? INFINITY : res.norm());
        }

    const auto& bps = ctx.instants();
    const MultipleShooting ms(ctx.profile, MultipleShooting::recommended_segments(
                                               ctx.path.at(1.5 * bps.back().s), ctx.profile));
    auto tj = [&](double s) { return trivial_jacobian(ms, ctx.path.at(s)); };
    bool flips = true;
    double at_instants = 0.0, at_mid = INFINITY;
    for (std::size_t i = 0; i < bps.size(); ++i) {
        const double s = bps[i].s;
        flips = flips && tj(s * (1 - 1e-3)).det_sign * tj(s * (1 + 1e-3)).det_sign < 0;
        at_instants = std::max(at_instants, tj(s).rcond);
        const double lo = i == 0 ? 0.0 : bps[i - 1].s;
        at_mid = std::min(at_mid, tj(0.5 * (lo + s)).rcond);
    }
    r.pass = worst <= 1e-9 && flips && at_instants <= 1e-10 && at_mid >= 1e-8;
    r.detail = "shoot(1,0) max residual " + sci(worst) + ", det sign " +
               (flips ? "flips" : "DOES NOT FLIP") + " at s_1..s_4, rcond at instants <= " +
               sci(at_instants) + ", at midpoints >= " + sci(at_mid);
    r.data = {{"trivial_residual", worst}, {"sign_flips", flips}, {"rcond_instants", at_instants},
              {"rcond_midpoints", at_mid}, {"segments", ms.segments()}};
    return r;
}

// Weighted cosine of (u − 1) against φ_i on the solution grid.
double eigen_cosine(const SolutionProfile& sol, const Profile& p, const Spectrum& spectra, int i)
{
    double uv = 0, uu = 0, vv = 0;
    for (Eigen::Index k = 0; k < sol.t.size(); ++k) {
        const double H = p.weight(sol.t(k));
        const double d = sol.u(k) - 1.0;
        const double f = spectra.eigenfunction(i, sol.t(k));
        uv += H * d * f;
        uu += H * d * d;
        vv += H * f * f;
    }
    return std::abs(uv) / std::sqrt(uu * vv);
}

CriterionResult local_shape(Context& ctx)
{
    CriterionResult r;
    const auto& bp = ctx.instants()[0];
    ContinuationOptions co;
    co.s_max = 2.0 * bp.s;
    const auto br = continue_branch(ctx.path, ctx.profile, bp, co);
    if (br.points.empty()) {
        r.detail = "branch 1 did not start: " + br.message;
        return r;
    }
    const double cosine = eigen_cosine(br.points.front().profile, ctx.profile, ctx.spectrum(), 1);
    bool census = true;
    for (const auto& pt : br.points) census = census && pt.profile.critical_point_count == 2;
    const bool reached = br.status == BranchStatus::reached_s_max;
    r.pass = cosine >= 0.99 && census && reached;
    r.detail = "cosine " + sci(cosine) + ", " + std::to_string(br.points.size()) + " points, " +
               (census ? "2 critical points at all" : "census BROKEN") + ", status " +
               to_string(br.status);
    r.data = {{"cosine", cosine}, {"points", br.points.size()}, {"census_constant", census},
              {"status", to_string(br.status)}, {"tangent_cosine", br.tangent_cosine}};
    return r;
}

CriterionResult branch_invariants(Context& ctx)
{
    CriterionResult r;
    const auto& brs = ctx.three_branches();
    bool ok = true;
    double worst_identity = 0.0, worst_w2 = -INFINITY, min_u = INFINITY;
    std::ostringstream counts;
    for (std::size_t i = 0; i < brs.size(); ++i) {
        const auto& br = brs[i];
        ok = ok && br.status == BranchStatus::reached_s_max && br.census_constant() &&
             br.critical_point_count == int(i) + 2;
        for (const auto& pt : br.points) {
            worst_identity = std::max(worst_identity, pt.quality.identity_relative);
            worst_w2 = std::max(worst_w2, pt.quality.max_w2);
            min_u = std::min(min_u, pt.quality.min_u);
        }
        counts << (i ? "," : "") << (br.census_constant() ? std::to_string(br.critical_point_count) : "?");
    }
    double separation = INFINITY;
    for (std::size_t i = 0; i < brs.size(); ++i)
        for (std::size_t j = i + 1; j < brs.size(); ++j)
            separation = std::min(separation, branch_separation(brs[i], brs[j]));
    r.pass = ok && min_u > 0.0 && worst_identity <= 1e-6 && worst_w2 <= 1e-8 && separation > 1e-4;
    r.detail = "min u " + sci(min_u) + ", identity <= " + sci(worst_identity) + ", w2 <= " +
               sci(worst_w2) + ", counts (" + counts.str() + "), separation " + sci(separation);
    r.data = {{"min_u", min_u}, {"identity", worst_identity}, {"max_w2", worst_w2},
              {"separation", separation}, {"branches_ok", ok}};
    return r;
}

CriterionResult multiplicity(Context& ctx)
{
    CriterionResult r;
    const double s = 1.1 * ctx.instants()[2].s;
    const auto census = census_at(ctx.three_branches(), s);
    int nontrivial = 0;
    for (const auto& e : census.entries) nontrivial += e.positive;
    r.pass = nontrivial >= 3 && census.by_critical_points.size() >= 3 && census.meets_floor;
    std::ostringstream os;
    os << nontrivial << " positive solutions at s = " << sci(s) << ", critical-point counts {";
    bool first = true;
    for (const auto& [k, v] : census.by_critical_points) {
        os << (first ? "" : ", ") << k << ":" << v;
        first = false;
    }
    os << "}";
    r.detail = os.str();
    r.data = census.to_json();
    return r;
}

CriterionResult nonexistence(Context& ctx)
{
    CriterionResult r;
    const auto c = make_coefficients(0.1, 0.002, 3.0);
    const auto res = scan(c, ctx.profile, Rect{0.2, 3.0, -5.0, 5.0}, ctx.opts.scan_cells, ctx.opts.scan_cells);
    int sign_cells = 0, trivial = 0, pruned = 0;
    for (const auto& cell : res.cells) {
        sign_cells += cell.sign_change;
        trivial += cell.candidate && cell.trivial;
        pruned += cell.pruned;
    }
    const int nontrivial = res.nontrivial_candidates();
    r.pass = nontrivial == 0;
    r.detail = std::to_string(nontrivial) + " nontrivial candidates (" + std::to_string(trivial) +
               " cells at (1,0), " + std::to_string(sign_cells) + " coarse sign-change cells, " +
               std::to_string(pruned) + " pruned); sample-based check, not a proof";
    r.data = {{"nontrivial_candidates", nontrivial}, {"trivial_cells", trivial},
              {"coarse_sign_cells", sign_cells}, {"pruned", pruned}};
    return r;
}

CriterionResult series_order(Context& ctx)
{
    CriterionResult r;
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    FlowOptions tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    const double t_probe = 1.0;
    auto at_probe = [&](double eps) {
        return integrate(c, ctx.profile, series_start(c, ctx.profile, 2.0, 1.0, eps), t_probe, tight)
            .final_state()
            .v;
    };
    const std::vector<double> eps = {0.16, 0.08, 0.04, 0.02};
    std::vector<StateVector> y;
    for (double e : eps) y.push_back(at_probe(e));
    y.push_back(at_probe(0.01));
    std::vector<double> err;
    for (std::size_t k = 0; k + 1 < y.size(); ++k) err.push_back((y[k] - y[k + 1]).norm());
    double order = INFINITY;
    std::ostringstream os;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        const double o = std::log2(err[k] / err[k + 1]);
        order = std::min(order, o);
        os << (k ? ", " : "") << sci(o);
    }
    r.pass = order >= 4.0;
    r.detail = "observed orders " + os.str() + " (eps = 0.16 … 0.01)";
    r.data = {{"min_order", order}, {"differences", err}};
    return r;
}

CriterionResult certificate_soundness(Context& ctx)
{
    CriterionResult r;
    std::mt19937_64 rng(ctx.opts.seed + 11);
    std::uniform_real_distribution<double> sd(1.0, 60.0), ad(0.2, 3.0), bd(-5.0, 5.0);
    ShootOptions stop_on_cone;
    stop_on_cone.flow.certificates = true;
    int fired = 0, attempts = 0, global = 0;
    double smallest = INFINITY;
    while (fired < ctx.opts.certificate_trials && attempts < 100 * ctx.opts.certificate_trials) {
        ++attempts;
        const double s = sd(rng), a = ad(rng), b = bd(rng);
        const auto c = ctx.path.at(s);
        const auto probe = shoot(c, ctx.profile, a, b, stop_on_cone);
        if (!probe.terminated_early || !probe.certificate) continue;
        ++fired;
        const auto full = shoot(c, ctx.profile, a, b);
        const double norm = full.norm();
        smallest = std::min(smallest, norm);
        if (norm <= 1e-6) ++global;
    }
    r.pass = fired == ctx.opts.certificate_trials && global == 0;
    r.detail = std::to_string(fired) + " fired trajectories, " + std::to_string(global) +
               " satisfy the far-end conditions; smallest residual " + sci(smallest);
    r.data = {{"fired", fired}, {"attempts", attempts}, {"global", global}, {"smallest", smallest}};
    return r;
}

}  // namespace

std::string criterion_name(int id)
{
    static const char* names[] = {"spectrum oracle",        "closed-form bifurcation instants",
                                  "geometry golden data",   "appendix certificate",
                                  "trivial branch",         "local branch shape",
                                  "branch invariants",      "multiplicity floor",
                                  "nonexistence scan",      "series-start order",
                                  "certificate soundness"};
    return id >= 1 && id <= kCriteria ? names[id - 1] : "unknown";
}

std::string format_line(const CriterionResult& r)
{
    return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
           ": " + r.detail;
}

std::vector<CriterionResult> run_criteria(const VerifyOptions& opts, const std::vector<int>& which,
                                          const std::function<void(const CriterionResult&)>& on_result)
{
    using Fn = CriterionResult (*)(Context&);
    static const Fn table[kCriteria] = {spectrum_oracle,   closed_form_instants, geometry_golden,
                                        appendix,          trivial_branch,       local_shape,
                                        branch_invariants, multiplicity,         nonexistence,
                                        series_order,      certificate_soundness};
    std::vector<int> ids = which;
    if (ids.empty())
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);

    Context ctx;
    ctx.opts = opts;
    std::vector<CriterionResult> out;
    for (int id : ids) {
        if (id < 1 || id > kCriteria) throw std::invalid_argument("unknown criterion " + std::to_string(id));
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = table[id - 1](ctx);
        } catch (const std::exception& e) {
            r = CriterionResult{};
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.id = id;
        r.name = criterion_name(id);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace paneitz

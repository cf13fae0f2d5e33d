#include "paneitz/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/AutoDiff>

namespace paneitz {

CoefficientPath CoefficientPath::builtin(double c, double q)
{
    if (!(c > 0.0)) throw std::invalid_argument("builtin path needs c > 0");
    if (!(q > 1.0)) throw std::invalid_argument("exponent q must exceed 1");
    CoefficientPath p;
    p.kind_ = Kind::builtin;
    p.q_ = q;
    p.c_ = c;
    p.s_min_ = 0.0;
    std::ostringstream os;
    os << "builtin a(s)=s, b(s)=" << c << "*s^2";
    p.descriptor_ = os.str();
    p.params_ = {{"c", c}};
    p.eval_ = [c](double s) { return Value{s, c * s * s, 1.0, 2.0 * c * s}; };
    return p;
}

CoefficientPath CoefficientPath::product(int n, int m, double lambda0, double slope, double q,
                                         double s_min)
{
    EinsteinProductDatum d{n, m, lambda0, lambda0};
    d.validate();
    if (!(q > 1.0)) throw std::invalid_argument("exponent q must exceed 1");
    if (!(slope > 0.0)) throw std::invalid_argument("product path needs a positive slope");
    CoefficientPath p;
    p.kind_ = Kind::product;
    p.q_ = q;
    p.c_ = std::numeric_limits<double>::quiet_NaN();
    p.s_min_ = s_min;
    std::ostringstream os;
    os << "product n=" << n << " m=" << m << " lambda0=" << lambda0 << " lambda1=" << slope << "*s";
    p.descriptor_ = os.str();
    p.params_ = {{"n", n}, {"m", m}, {"lambda0", lambda0}, {"slope", slope}, {"s_min", s_min}};
    p.eval_ = [n, m, lambda0, slope](double s) {
        using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;
        const AD l0(lambda0);
        const AD l1(slope * s, 1, 0);
        const AD a = product_alpha<AD>(n, m, l0, l1);
        const AD b = product_beta<AD>(n, m, l0, l1);
        return Value{a.value(), b.value(), slope * a.derivatives()(0), slope * b.derivatives()(0)};
    };
    return p;
}

CoefficientPath CoefficientPath::polynomial(std::vector<double> alpha, std::vector<double> beta,
                                            double q, double s_min)
{
    if (alpha.empty() || beta.empty())
        throw std::invalid_argument("polynomial path needs coefficients for alpha and beta");
    if (!(q > 1.0)) throw std::invalid_argument("exponent q must exceed 1");
    CoefficientPath p;
    p.kind_ = Kind::user;
    p.q_ = q;
    p.c_ = std::numeric_limits<double>::quiet_NaN();
    p.s_min_ = s_min;
    p.descriptor_ = "user polynomial path";
    p.params_ = {{"alpha", alpha}, {"beta", beta}, {"s_min", s_min}};
    auto horner = [](const std::vector<double>& c, double s) {
        double v = 0.0, d = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            d = d * s + v;
            v = v * s + *it;
        }
        return std::pair{v, d};
    };
    p.eval_ = [alpha, beta, horner](double s) {
        const auto [a, da] = horner(alpha, s);
        const auto [b, db] = horner(beta, s);
        return Value{a, b, da, db};
    };
    return p;
}

PaneitzCoefficients CoefficientPath::at(double s) const
{
    const Value v = eval_(s);
    return make_coefficients(v.alpha, v.beta, q_);
}

nlohmann::json CoefficientPath::to_json() const
{
    static const char* names[] = {"builtin", "product", "user"};
    return {{"kind", names[int(kind_)]}, {"q", q_}, {"descriptor", descriptor_}, {"params", params_}};
}

double phi(double a, double b, double q) { return 0.5 * (a - std::sqrt(a * a + 4.0 * b * (q - 1.0))); }

double phi(const CoefficientPath& path, double s)
{
    const auto v = path(s);
    return phi(v.alpha, v.beta, path.q());
}

double builtin_instant(double lambda, double c, double q)
{
    return 2.0 * lambda / (1.0 - std::sqrt(1.0 + 4.0 * c * (q - 1.0)));
}

nlohmann::json HypothesisReport::to_json() const
{
    nlohmann::json j = {{"discriminant", discriminant},
                        {"increasing", increasing},
                        {"limit_at_infinity", limit_at_infinity},
                        {"phi_decreasing", phi_decreasing},
                        {"failures", failures},
                        {"ok", ok()}};
    j["limit_at_zero"] = limit_at_zero ? nlohmann::json(*limit_at_zero) : nlohmann::json("n/a");
    return j;
}

HypothesisReport validate_hypotheses(const CoefficientPath& path, double s_hi, int samples)
{
    HypothesisReport r;
    const double lo = path.s_min() > 0.0 ? path.s_min() : 1e-6 * s_hi;
    double previous_phi = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double x = double(i) / samples;
        const double s = path.s_min() > 0.0 ? lo + (s_hi - lo) * x : lo * std::pow(s_hi / lo, x);
        const auto v = path(s);
        if (!(v.alpha * v.alpha > 4.0 * v.beta) && r.discriminant) {
            r.discriminant = false;
            r.failures.push_back("a^2 <= 4b at s = " + std::to_string(s));
        }
        if (!(v.alpha > 0 && v.beta > 0 && v.dalpha > 0 && v.dbeta > 0) && r.increasing) {
            r.increasing = false;
            r.failures.push_back("a or b not positive and increasing at s = " + std::to_string(s));
        }
        const double f = phi(v.alpha, v.beta, path.q());
        if (!(f < previous_phi) && r.phi_decreasing) {
            r.phi_decreasing = false;
            r.failures.push_back("phi not decreasing at s = " + std::to_string(s));
        }
        previous_phi = f;
    }
    const auto top = path(s_hi);
    if (path.s_min() == 0.0) {
        const auto tiny = path(1e-9 * s_hi);
        r.limit_at_zero = std::abs(tiny.alpha) <= 1e-6 * (1.0 + top.alpha) &&
                          std::abs(tiny.beta) <= 1e-6 * (1.0 + top.beta);
        if (!*r.limit_at_zero) r.failures.push_back("a, b do not vanish at 0");
    }
    const auto far = path(1e4 * s_hi);
    r.limit_at_infinity = far.alpha >= 100.0 * top.alpha && far.beta >= 100.0 * top.beta;
    if (!r.limit_at_infinity) r.failures.push_back("a, b do not grow without bound");
    return r;
}

std::vector<BifurcationPoint> instants(const CoefficientPath& path, const Spectrum& spectra,
                                       int i_max)
{
    if (i_max < 1 || i_max > spectra.count())
        throw std::invalid_argument("instants: spectrum depth below i_max");
    const double lo0 = path.s_min();
    double hi = std::max(1.0, 2.0 * lo0);
    const double deepest = spectra.extrapolated[i_max];
    for (int k = 0; phi(path, hi) >= deepest; ++k) {
        if (k > 200) throw std::runtime_error("instants: cannot bracket phi(s) = lambda");
        hi *= 2.0;
    }
    const auto hyp = validate_hypotheses(path, 2.0 * hi);
    if (!hyp.ok()) {
        std::string msg = "instants: path violates hypotheses:";
        for (const auto& f : hyp.failures) msg += " " + f + ";";
        throw std::runtime_error(msg);
    }

    std::vector<BifurcationPoint> out;
    for (int i = 1; i <= i_max; ++i) {
        const double lambda = spectra.extrapolated[i];
        double a = lo0, b = hi;
        if (!(phi(path, a) > lambda))
            throw std::runtime_error("instants: phi at the domain start is already below lambda_" +
                                     std::to_string(i));
        for (int it = 0; it < 400 && b - a > 2.0 * std::numeric_limits<double>::epsilon() * b; ++it) {
            const double mid = 0.5 * (a + b);
            if (phi(path, mid) > lambda)
                a = mid;
            else
                b = mid;
        }
        // Bisection leaves |φ − λ| at rounding level; take the closer end.
        const double s = std::abs(phi(path, a) - lambda) < std::abs(phi(path, b) - lambda) ? a : b;

        BifurcationPoint bp;
        bp.index = i;
        bp.s = s;
        bp.lambda = lambda;
        bp.phi_mismatch = std::abs(phi(path, s) - lambda);
        const auto v = path(s);
        bp.tau = -v.dalpha * lambda + v.dbeta * (1.0 - path.q());
        const double scale = std::abs(v.dalpha * lambda) + std::abs(v.dbeta * (path.q() - 1.0));
        bp.valid = std::abs(bp.tau) > 1e-10 * scale && bp.phi_mismatch <= 1e-12 * std::max(1.0, std::abs(lambda));
        // (1+j0)φ''(0) = λφ(0) for every eigenfunction.
        bp.kernel_tangent = Eigen::Vector2d(1.0, lambda).normalized();
        if (path.kind() == CoefficientPath::Kind::builtin) {
            bp.closed_form = builtin_instant(lambda, path.builtin_c(), path.q());
            if (std::abs(*bp.closed_form - s) > 1e-10 * std::abs(s))
                throw std::runtime_error("instants: disagreement with the closed form at i = " +
                                         std::to_string(i));
        }
        if (!out.empty() && !(s > out.back().s))
            throw std::runtime_error("instants: roots not increasing");
        out.push_back(bp);
    }
    return out;
}

std::string to_string(BranchStatus s)
{
    switch (s) {
    case BranchStatus::active: return "active";
    case BranchStatus::reached_s_max: return "reached_s_max";
    case BranchStatus::step_failure: return "step_failure";
    case BranchStatus::positivity_lost: return "positivity_lost";
    case BranchStatus::corrector_failure: return "corrector_failure";
    }
    return "unknown";
}

double Branch::s_lo() const
{
    double s = std::numeric_limits<double>::infinity();
    for (const auto& p : points) s = std::min(s, p.s);
    return s;
}

double Branch::s_hi() const
{
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) s = std::max(s, p.s);
    return s;
}

bool Branch::census_constant() const
{
    for (const auto& p : points)
        if (p.profile.critical_point_count != critical_point_count) return false;
    return !points.empty();
}

bool Branch::monotone_after(int skip) const
{
    for (std::size_t k = std::size_t(std::max(skip, 0)) + 1; k < points.size(); ++k)
        if (!(points[k].s > points[k - 1].s)) return false;
    return true;
}

namespace {

struct Corrected {
    bool ok = false;
    Eigen::VectorXd Y;
    int iterations = 0;
};

class Continuation {
public:
    Continuation(const CoefficientPath& path, const MultipleShooting& ms, Eigen::Vector3d weights,
                 const ContinuationOptions& opts)
        : path_(path), ms_(ms), w_(weights), opts_(opts), n_(ms.unknowns())
    {
    }

    Eigen::Vector3d reduced(const Eigen::VectorXd& Y) const
    {
        return {Y(0) * w_(0), Y(1) * w_(1), Y(n_) * w_(2)};
    }

    // Newton on F = 0 and dir·(reduced(Y) − anchor) = h.
    Corrected correct(Eigen::VectorXd Y, const Eigen::Vector3d& dir, const Eigen::Vector3d& anchor,
                      double h) const
    {
        Corrected out;
        for (int it = 0; it <= opts_.max_iter; ++it) {
            if (!(Y(n_) > path_.s_min())) return out;
            PaneitzCoefficients c;
            try {
                c = path_.at(Y(n_));
            } catch (const std::exception&) {
                return out;
            }
            const Eigen::VectorXd X = Y.head(n_);
            const auto ev = ms_.evaluate(c, X, true);
            if (!ev.ok) return out;
            const double g = dir.dot(reduced(Y) - anchor) - h;
            if (it > 0 && ev.F.lpNorm<Eigen::Infinity>() <= opts_.tol * std::max(1.0, X.lpNorm<Eigen::Infinity>()) &&
                std::abs(g) <= 1e-12) {
                out.ok = true;
                out.Y = Y;
                out.iterations = it;
                return out;
            }
            if (it == opts_.max_iter) break;
            const auto v = path_(Y(n_));
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
            A.topLeftCorner(n_, n_) = ev.J;
            A.col(n_).head(n_) = ev.dcoeffs * Eigen::Vector2d(v.dalpha, v.dbeta);
            A(n_, 0) = dir(0) * w_(0);
            A(n_, 1) = dir(1) * w_(1);
            A(n_, n_) = dir(2) * w_(2);
            Eigen::VectorXd rhs(n_ + 1);
            rhs.head(n_) = -ev.F;
            rhs(n_) = -g;
            const Eigen::VectorXd dY = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(rhs);
            if (!dY.allFinite()) return out;
            Y += dY;
        }
        return out;
    }

private:
    const CoefficientPath& path_;
    const MultipleShooting& ms_;
    Eigen::Vector3d w_;
    const ContinuationOptions& opts_;
    Eigen::Index n_;
};

bool is_trivial(const Eigen::VectorXd& Y, Eigen::Index n)
{
    return std::abs(Y(0) - 1.0) + std::abs(Y(1)) <= 1e-8 && std::abs(Y(n - 2) - 1.0) + std::abs(Y(n - 1)) <= 1e-8;
}

}  // namespace

Branch continue_branch(const CoefficientPath& path, const Profile& p, const BifurcationPoint& bp,
                       const ContinuationOptions& opts_in)
{
    if (!bp.valid) throw std::invalid_argument("continue_branch: bifurcation point not valid");
    ContinuationOptions opts = opts_in;
    if (opts.s_max <= 0.0) opts.s_max = 3.0 * bp.s;
    if (!(opts.s_max > bp.s)) throw std::invalid_argument("continue_branch: s_max below s_i");

    Branch br;
    br.origin = bp;
    br.critical_point_count = bp.index + 1;
    br.path = std::make_shared<const CoefficientPath>(path);
    const int M = opts.segments > 0 ? opts.segments
                                    : MultipleShooting::recommended_segments(path.at(opts.s_max), p);
    br.shooting = std::make_shared<const MultipleShooting>(p, M, opts.eps_rel);
    const MultipleShooting& ms = *br.shooting;
    const Eigen::Index n = ms.unknowns();

    const Eigen::Vector3d w(1.0, 1.0 / (1.0 + std::abs(bp.lambda)), 1.0 / bp.s);
    Continuation cont(path, ms, w, opts);

    Eigen::VectorXd Y0(n + 1);
    Y0.head(n) = ms.constant(1.0);
    Y0(n) = bp.s;

    const auto tj = trivial_jacobian(ms, path.at(bp.s));
    Eigen::VectorXd ker = tj.null_vector;
    br.tangent_cosine =
        std::abs(Eigen::Vector2d(ker(0), ker(1)).normalized().dot(bp.kernel_tangent));
    const double ker_scale = Eigen::Vector2d(ker(0) * w(0), ker(1) * w(1)).norm();
    ker /= ker_scale;

    auto make_point = [&](const Eigen::VectorXd& Y, int iterations) {
        BranchPoint pt;
        pt.s = Y(n);
        pt.X = Y.head(n);
        pt.a = Y(0);
        pt.b = Y(1);
        const auto c = path.at(pt.s);
        pt.profile = ms.assemble(c, pt.X, opts.profile_points);
        pt.quality = quality_checks(c, p, pt.profile);
        pt.iterations = iterations;
        return pt;
    };

    // First step: both orientations of the kernel, keep the one with larger s.
    std::optional<Corrected> first;
    for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd pred = Y0;
        pred.head(n) += sign * opts.h0 * ker;
        const Eigen::Vector3d dir(sign * ker(0) * w(0), sign * ker(1) * w(1), 0.0);
        auto res = cont.correct(pred, dir, cont.reduced(Y0), opts.h0);
        if (!res.ok || is_trivial(res.Y, n)) continue;
        const bool better =
            !first || res.Y(n) > first->Y(n) + 1e-8 * bp.s ||
            (std::abs(res.Y(n) - first->Y(n)) <= 1e-8 * bp.s && res.Y(0) > 1.0 && first->Y(0) <= 1.0);
        if (better) first = res;
    }
    if (!first) {
        std::ostringstream os;
        os << "corrector failed on the first step; attempted tangent (da, db) = (" << ker(0) << ", "
           << ker(1) << ")";
        br.status = BranchStatus::corrector_failure;
        br.message = os.str();
        return br;
    }

    Eigen::VectorXd prev = Y0, cur = first->Y;
    {
        auto pt = make_point(cur, first->iterations);
        if (!pt.quality.positive) {
            br.status = BranchStatus::positivity_lost;
            return br;
        }
        br.points.push_back(std::move(pt));
    }

    double h = opts.h0;
    if (first->iterations <= 2) h = std::min(2.0 * h, opts.h_max);
    int halvings = 0;
    while (true) {
        if (cur(n) >= opts.s_max) {
            br.status = BranchStatus::reached_s_max;
            break;
        }
        if (int(br.points.size()) >= opts.max_points) {
            br.status = BranchStatus::active;
            br.message = "point budget exhausted";
            break;
        }
        const Eigen::VectorXd diff = cur - prev;
        const Eigen::Vector3d rd = cont.reduced(diff);
        const double len = rd.norm();
        const Eigen::Vector3d dir = rd / len;
        const Eigen::VectorXd pred = cur + (h / len) * diff;
        auto res = cont.correct(pred, dir, cont.reduced(cur), h);
        if (!res.ok || is_trivial(res.Y, n)) {
            h *= 0.5;
            if (++halvings > opts.max_halvings) {
                br.status = BranchStatus::step_failure;
                std::ostringstream os;
                os << "step failure at s = " << cur(n);
                br.message = os.str();
                break;
            }
            continue;
        }
        BranchPoint pt;
        try {
            pt = make_point(res.Y, res.iterations);
        } catch (const std::exception& e) {
            br.status = BranchStatus::step_failure;
            br.message = e.what();
            break;
        }
        if (!pt.quality.positive) {
            br.status = BranchStatus::positivity_lost;
            std::ostringstream os;
            os << "min u = " << pt.quality.min_u << " at s = " << pt.s;
            br.message = os.str();
            break;
        }
        br.points.push_back(std::move(pt));
        prev = cur;
        cur = res.Y;
        halvings = 0;
        if (res.iterations <= 2) h = std::min(2.0 * h, opts.h_max);
        else if (res.iterations >= 6) h *= 0.5;
    }
    return br;
}

std::optional<BranchPoint> branch_at(const Branch& branch, double s)
{
    const auto& pts = branch.points;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double s0 = pts[k].s, s1 = pts[k + 1].s;
        if (!((s0 <= s && s <= s1) || (s1 <= s && s <= s0))) continue;
        const double w = s1 == s0 ? 0.0 : (s - s0) / (s1 - s0);
        Eigen::VectorXd X = (1.0 - w) * pts[k].X + w * pts[k + 1].X;
        const auto c = branch.path->at(s);
        const auto rep = newton_fixed(*branch.shooting, c, X);
        if (!rep.converged) return std::nullopt;
        BranchPoint pt;
        pt.s = s;
        pt.X = X;
        pt.a = X(0);
        pt.b = X(1);
        pt.profile = branch.shooting->assemble(c, X, int(pts[k].profile.t.size()) - 1);
        pt.quality = quality_checks(c, branch.shooting->profile(), pt.profile);
        pt.iterations = rep.iterations;
        return pt;
    }
    return std::nullopt;
}

namespace {

std::optional<Eigen::Vector2d> interpolate_data(const Branch& b, double s)
{
    const auto& pts = b.points;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double s0 = pts[k].s, s1 = pts[k + 1].s;
        if (!((s0 <= s && s <= s1) || (s1 <= s && s <= s0))) continue;
        const double w = s1 == s0 ? 0.0 : (s - s0) / (s1 - s0);
        return Eigen::Vector2d((1 - w) * pts[k].a + w * pts[k + 1].a, (1 - w) * pts[k].b + w * pts[k + 1].b);
    }
    return std::nullopt;
}

}  // namespace

double branch_separation(const Branch& x, const Branch& y, int samples)
{
    const double lo = std::max(x.s_lo(), y.s_lo());
    const double hi = std::min(x.s_hi(), y.s_hi());
    double best = std::numeric_limits<double>::infinity();
    if (!(lo <= hi)) return best;
    for (int k = 0; k <= samples; ++k) {
        const double s = lo + (hi - lo) * k / samples;
        const auto p = interpolate_data(x, s);
        const auto q = interpolate_data(y, s);
        if (p && q) best = std::min(best, (*p - *q).norm());
    }
    return best;
}

nlohmann::json CensusReport::to_json() const
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries)
        list.push_back({{"branch", e.branch},
                        {"origin_index", e.origin_index},
                        {"reflection", e.reflection},
                        {"a", e.a},
                        {"b", e.b},
                        {"critical_point_count", e.critical_point_count},
                        {"positive", e.positive}});
    nlohmann::json by = nlohmann::json::object();
    for (const auto& [k, v] : by_critical_points) by[std::to_string(k)] = v;
    return {{"s", s},
            {"solutions", list},
            {"count", entries.size()},
            {"by_critical_points", by},
            {"floor", floor},
            {"meets_floor", meets_floor},
            {"distinct_counts", distinct_counts}};
}

CensusReport census_at(const std::vector<Branch>& branches, double s)
{
    CensusReport rep;
    rep.s = s;
    std::vector<int> origins;
    std::vector<CensusEntry> found;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& br = branches[k];
        if (br.origin.s < s &&
            std::find(origins.begin(), origins.end(), br.origin.index) == origins.end())
            origins.push_back(br.origin.index);
        if (br.points.empty() || s < br.s_lo() || s > br.s_hi()) continue;
        const auto pt = branch_at(br, s);
        if (!pt || pt->profile.constant) continue;
        CensusEntry e;
        e.branch = int(k);
        e.origin_index = br.origin.index;
        e.a = pt->a;
        e.b = pt->b;
        e.critical_point_count = pt->profile.critical_point_count;
        e.positive = pt->quality.positive;
        e.u = pt->profile.u;
        found.push_back(e);
        if (br.shooting->profile().antisymmetric()) {
            CensusEntry r = e;
            r.reflection = true;
            r.u = e.u.reverse();
            r.a = pt->profile.a_end;
            r.b = pt->profile.b_end;
            if ((r.u - e.u).lpNorm<Eigen::Infinity>() > 1e-6) found.push_back(r);
        }
    }
    for (const auto& e : found) {
        if (!e.positive) continue;
        const bool duplicate = std::any_of(rep.entries.begin(), rep.entries.end(), [&](const CensusEntry& o) {
            return o.u.size() == e.u.size() && (o.u - e.u).lpNorm<Eigen::Infinity>() <= 1e-6;
        });
        if (!duplicate) rep.entries.push_back(e);
    }
    for (const auto& e : rep.entries) ++rep.by_critical_points[e.critical_point_count];
    rep.floor = int(origins.size());
    rep.meets_floor = int(rep.entries.size()) >= rep.floor;
    rep.distinct_counts = int(rep.by_critical_points.size()) >= rep.floor;
    return rep;
}

}  // namespace paneitz

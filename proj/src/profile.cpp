#include "paneitz/profile.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace paneitz {

namespace {

bool valid_degree(int k) { return k == 1 || k == 2 || k == 3 || k == 4 || k == 6; }

}  // namespace

Profile Profile::sphere(int n, int k, double c, bool require_antisymmetric)
{
    if (n < 2) throw std::invalid_argument("sphere profile needs n >= 2");
    if (!valid_degree(k))
        throw std::invalid_argument("Cartan-Muenzner degree must be one of 1, 2, 3, 4, 6");
    if (require_antisymmetric && c != 0.0)
        throw std::invalid_argument("antisymmetric profile requested with c != 0");

    Profile p;
    p.kind_ = Kind::sphere;
    p.n_ = n;
    p.k_ = k;
    p.c_ = c;
    p.D_ = std::numbers::pi / k;
    p.j0_ = double(n - 1) / k + 0.5 * c;
    p.j1_ = double(n - 1) / k - 0.5 * c;
    if (!(p.j0_ > 0.0) || !(p.j1_ > 0.0))
        throw std::invalid_argument("sphere datum gives a non-positive boundary exponent");
    p.antisymmetric_ = (c == 0.0);
    p.finalize();
    return p;
}

Profile Profile::tabulated(double D, double j0, double j1, std::vector<double> t,
                           std::vector<double> h)
{
    if (!(D > 0.0)) throw std::invalid_argument("tabulated profile needs D > 0");
    if (!(j0 > 0.0) || !(j1 > 0.0))
        throw std::invalid_argument("tabulated profile needs positive boundary exponents");
    if (t.size() != h.size() || t.size() < 4)
        throw std::invalid_argument("tabulated profile needs >= 4 matching samples");
    std::vector<double> g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0 && t[i] < D))
            throw std::invalid_argument("tabulated samples must lie in (0, D)");
        g[i] = h[i] - j0 / t[i] + j1 / (D - t[i]);
    }
    auto table = std::make_shared<Table>();
    table->regular = CubicSpline(t, g);
    table->t = std::move(t);
    table->h = std::move(h);

    Profile p;
    p.kind_ = Kind::tabulated;
    p.D_ = D;
    p.j0_ = j0;
    p.j1_ = j1;
    p.table_ = std::move(table);
    p.antisymmetric_ = (j0 == j1) && check_antisymmetry(p, 64, 1e-8);
    p.finalize();
    return p;
}

void Profile::finalize()
{
    decreasing_ = true;
    const int samples = 256;
    for (int i = 1; i < samples; ++i) {
        const double t = D_ * i / samples;
        if (!(dh(t) < 0.0)) {
            decreasing_ = false;
            break;
        }
    }
}

double Profile::h(double t) const
{
    if (kind_ == Kind::sphere) {
        const double x = k_ * t;
        return (n_ - 1) * std::cos(x) / std::sin(x) + 0.5 * c_ * k_ / std::sin(x);
    }
    return j0_ / t - j1_ / (D_ - t) + table_->regular.value(t);
}

double Profile::dh(double t) const
{
    if (kind_ == Kind::sphere) {
        const double x = k_ * t;
        const double csc = 1.0 / std::sin(x);
        const double cot = std::cos(x) * csc;
        return -(n_ - 1) * k_ * csc * csc - 0.5 * c_ * k_ * k_ * csc * cot;
    }
    const double r = D_ - t;
    return -j0_ / (t * t) - j1_ / (r * r) + table_->regular.derivative(t, 1);
}

double Profile::d2h(double t) const
{
    if (kind_ == Kind::sphere) {
        const double x = k_ * t;
        const double csc = 1.0 / std::sin(x);
        const double cot = std::cos(x) * csc;
        const double kk = double(k_) * k_;
        return 2.0 * (n_ - 1) * kk * csc * csc * cot +
               0.5 * c_ * kk * k_ * (csc * cot * cot + csc * csc * csc);
    }
    const double r = D_ - t;
    return 2.0 * j0_ / (t * t * t) - 2.0 * j1_ / (r * r * r) + table_->regular.derivative(t, 2);
}

double Profile::weight(double t) const
{
    if (t <= 0.0 || t >= D_) return 0.0;
    if (kind_ == Kind::sphere) {
        const double x = k_ * t;
        double H = std::pow(std::sin(x), double(n_ - 1) / k_);
        if (c_ != 0.0) H *= std::pow(std::tan(0.5 * x), 0.5 * c_);
        return H;
    }
    const double half = 0.5 * D_;
    const auto& s = table_->regular;
    const double log_regular = s.integral_from_start(t) - s.integral_from_start(half);
    return std::pow(t / half, j0_) * std::pow((D_ - t) / half, j1_) * std::exp(log_regular);
}

EndpointExpansion Profile::start_expansion() const
{
    EndpointExpansion e;
    e.exponent = j0_;
    if (kind_ == Kind::sphere) {
        const double k = k_;
        e.regular = {0.0, -(n_ - 1) * k / 3.0 + c_ * k * k / 12.0, 0.0,
                     -(n_ - 1) * k * k * k / 45.0 + 7.0 * c_ * k * k * k * k / 720.0};
        return e;
    }
    const auto& s = table_->regular;
    const double D = D_;
    e.regular = {s.value(0.0) - j1_ / D, s.derivative(0.0, 1) - j1_ / (D * D),
                 0.5 * s.derivative(0.0, 2) - j1_ / (D * D * D),
                 s.derivative(0.0, 3) / 6.0 - j1_ / (D * D * D * D)};
    return e;
}

Profile Profile::mirrored() const
{
    if (kind_ == Kind::sphere) return sphere(n_, k_, -c_);
    std::vector<double> t(table_->t.rbegin(), table_->t.rend());
    std::vector<double> h(table_->h.rbegin(), table_->h.rend());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = D_ - t[i];
        h[i] = -h[i];
    }
    return tabulated(D_, j1_, j0_, std::move(t), std::move(h));
}

std::vector<std::array<double, 2>> Profile::samples() const
{
    std::vector<std::array<double, 2>> out;
    if (table_)
        for (std::size_t i = 0; i < table_->t.size(); ++i)
            out.push_back({table_->t[i], table_->h[i]});
    return out;
}

std::string Profile::describe() const
{
    std::ostringstream os;
    if (kind_ == Kind::sphere)
        os << "sphere(n=" << n_ << ", k=" << k_ << ", c=" << c_ << ")";
    else
        os << "tabulated(D=" << D_ << ", j0=" << j0_ << ", j1=" << j1_ << ", "
           << table_->t.size() << " samples)";
    return os.str();
}

double weight_H(const Profile& p, double t)
{
    if (!(t >= 0.0 && t <= p.length())) throw std::out_of_range("weight_H: t outside [0, D]");
    return p.weight(t);
}

bool check_antisymmetry(const Profile& p, int samples, double tol)
{
    if (samples < 1) throw std::invalid_argument("check_antisymmetry needs samples >= 1");
    const double half = 0.5 * p.length();
    for (int i = 1; i <= samples; ++i) {
        // Interior offsets in (0, D/2); stay off the singular endpoints.
        const double s = half * i / (samples + 1.0);
        if (std::abs(p.h(half - s) + p.h(half + s)) > tol * (1.0 + std::abs(p.h(half - s))))
            return false;
    }
    return true;
}

nlohmann::json to_json(const Profile& p)
{
    nlohmann::json j;
    j["kind"] = p.kind() == Profile::Kind::sphere ? "sphere" : "tabulated";
    if (p.kind() == Profile::Kind::sphere) {
        j["n"] = p.sphere_n();
        j["k"] = p.sphere_k();
        j["c"] = p.sphere_c();
    }
    j["D"] = p.length();
    j["j0"] = p.j0();
    j["j1"] = p.j1();
    j["antisymmetric"] = p.antisymmetric();
    if (p.kind() == Profile::Kind::tabulated) j["samples"] = p.samples();
    return j;
}

Profile profile_from_json(const nlohmann::json& j)
{
    const std::string kind = j.value("kind", "sphere");
    if (kind == "sphere")
        return Profile::sphere(j.value("n", 3), j.value("k", 1), j.value("c", 0.0));
    if (kind == "tabulated") {
        std::vector<double> t, h;
        for (const auto& row : j.at("samples")) {
            t.push_back(row.at(0).get<double>());
            h.push_back(row.at(1).get<double>());
        }
        return Profile::tabulated(j.at("D").get<double>(), j.at("j0").get<double>(),
                                  j.at("j1").get<double>(), std::move(t), std::move(h));
    }
    throw std::invalid_argument("unknown profile kind '" + kind + "'");
}

}  // namespace paneitz

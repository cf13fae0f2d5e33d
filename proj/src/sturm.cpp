#include "paneitz/sturm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace paneitz {

namespace {

constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563,
                                            0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461,
                                              0.6521451548625461, 0.3478548451374538};

// Number of eigenvalues of the tridiagonal matrix strictly below x.
int count_below(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x)
{
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    int count = 0;
    double pivot = d(0) - x;
    if (pivot < 0) ++count;
    for (Eigen::Index i = 1; i < d.size(); ++i) {
        if (std::abs(pivot) < tiny) pivot = -tiny;
        pivot = d(i) - x - e(i - 1) * e(i - 1) / pivot;
        if (pivot < 0) ++count;
    }
    return count;
}

Eigen::VectorXd inverse_iteration(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                                  double lambda, const std::vector<Eigen::VectorXd>& previous)
{
    const Eigen::Index n = d.size();
    const double shift = lambda + 1e-10 * std::max(1.0, std::abs(lambda));
    Eigen::SparseMatrix<double> T(n, n);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        entries.emplace_back(i, i, d(i) - shift);
        if (i + 1 < n) {
            entries.emplace_back(i, i + 1, e(i));
            entries.emplace_back(i + 1, i, e(i));
        }
    }
    T.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(T);
    if (lu.info() != Eigen::Success) throw std::runtime_error("inverse iteration: factorization failed");

    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.25 * std::sin(0.7 * double(i) + 0.3);
    x.normalize();
    for (int it = 0; it < 4; ++it) {
        x = lu.solve(x);
        if (lu.info() != Eigen::Success || !x.allFinite())
            throw std::runtime_error("inverse iteration: solve failed");
        for (const auto& v : previous) x -= v.dot(x) * v;
        x.normalize();
    }
    return x;
}

}  // namespace

Eigen::VectorXd WeightedPencil::apply(const Eigen::VectorXd& v) const
{
    const Eigen::Index n = size();
    Eigen::VectorXd out = diagonal.cwiseProduct(v);
    out.head(n - 1) += offdiag.cwiseProduct(v.tail(n - 1));
    out.tail(n - 1) += offdiag.cwiseProduct(v.head(n - 1));
    return out;
}

WeightedPencil assemble_operator(const Profile& p, int gridsize)
{
    if (gridsize < 16) throw std::invalid_argument("assemble_operator: gridsize must be >= 16");
    const double D = p.length();
    const double dx = D / gridsize;

    WeightedPencil pencil;
    pencil.spacing = dx;
    pencil.centers.resize(gridsize);
    pencil.mass.resize(gridsize);
    pencil.diagonal.resize(gridsize);
    pencil.offdiag.resize(gridsize - 1);

    for (int i = 0; i < gridsize; ++i) {
        const double left = i * dx;
        pencil.centers(i) = left + 0.5 * dx;
        double m = 0.0;
        for (std::size_t g = 0; g < kGaussNodes.size(); ++g)
            m += kGaussWeights[g] * p.weight(left + 0.5 * dx * (1.0 + kGaussNodes[g]));
        pencil.mass(i) = 0.5 * dx * m;
    }
    for (int i = 0; i + 1 < gridsize; ++i) pencil.offdiag(i) = p.weight((i + 1) * dx) / dx;
    for (int i = 0; i < gridsize; ++i) {
        const double left = i > 0 ? pencil.offdiag(i - 1) : 0.0;
        const double right = i + 1 < gridsize ? pencil.offdiag(i) : 0.0;
        pencil.diagonal(i) = -(left + right);
    }
    return pencil;
}

std::vector<double> tridiagonal_top_eigenvalues(const Eigen::VectorXd& d, const Eigen::VectorXd& e,
                                                int count)
{
    const Eigen::Index n = d.size();
    if (count < 1 || count > n) throw std::invalid_argument("tridiagonal_top_eigenvalues: bad count");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double radius = (i > 0 ? std::abs(e(i - 1)) : 0.0) + (i + 1 < n ? std::abs(e(i)) : 0.0);
        lo = std::min(lo, d(i) - radius);
        hi = std::max(hi, d(i) + radius);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    std::vector<double> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const int target = int(n) - 1 - k;  // ascending index
        double a = lo - 1e-12 * scale, b = hi + 1e-12 * scale;
        for (int it = 0; it < 200 && b - a > 4 * std::numeric_limits<double>::epsilon() *
                                                   std::max(std::abs(a), std::abs(b)) +
                                               1e-300;
             ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(d, e, mid) > target)
                b = mid;
            else
                a = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

int count_sign_changes(const Eigen::VectorXd& f, double deadband)
{
    int changes = 0;
    int last = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (std::abs(f(i)) <= deadband) continue;
        const int sign = f(i) > 0 ? 1 : -1;
        if (last != 0 && sign != last) ++changes;
        last = sign;
    }
    return changes;
}

namespace {

struct StandardForm {
    Eigen::VectorXd d, e, scale;  // T = M^{-1/2} A M^{-1/2}, scale = M^{-1/2}
};

StandardForm standard_form(const WeightedPencil& pencil)
{
    StandardForm sf;
    sf.scale = pencil.mass.cwiseSqrt().cwiseInverse();
    sf.d = pencil.diagonal.cwiseQuotient(pencil.mass);
    const Eigen::Index n = pencil.size();
    sf.e = pencil.offdiag.cwiseProduct(sf.scale.head(n - 1)).cwiseProduct(sf.scale.tail(n - 1));
    return sf;
}

}  // namespace

Spectrum spectrum(const Profile& p, int count, int gridsize)
{
    if (count < 1) throw std::invalid_argument("spectrum: count must be >= 1");
    if (count > gridsize / 10)
        throw std::invalid_argument("spectrum: count exceeds resolvable modes (count <= gridsize/10)");

    const WeightedPencil fine = assemble_operator(p, gridsize);
    const StandardForm sf = standard_form(fine);
    const auto values = tridiagonal_top_eigenvalues(sf.d, sf.e, count + 1);

    const WeightedPencil coarse = assemble_operator(p, gridsize / 2);
    const StandardForm sc = standard_form(coarse);
    const auto coarse_values = tridiagonal_top_eigenvalues(sc.d, sc.e, count + 1);

    Spectrum s;
    s.length = p.length();
    s.grid = fine.centers;
    s.mass = fine.mass;
    s.eigenfunctions.resize(gridsize, count + 1);
    std::vector<Eigen::VectorXd> found;
    for (int i = 0; i <= count; ++i) {
        if (i > 0 && !(values[i] < values[i - 1]))
            throw std::runtime_error("spectrum: eigenvalues not strictly decreasing");
        Eigen::VectorXd x = inverse_iteration(sf.d, sf.e, values[i], found);
        found.push_back(x);
        Eigen::VectorXd phi = x.cwiseProduct(sf.scale);  // M-orthonormal
        phi /= std::sqrt(phi.cwiseProduct(fine.mass).dot(phi));
        double at_zero = (9.0 * phi(0) - phi(1)) / 8.0;
        if (at_zero < 0) {
            phi = -phi;
            at_zero = -at_zero;
        }
        s.eigenfunctions.col(i) = phi;
        s.eigenvalues.push_back(values[i]);
        // Mesh halving; the scheme is second order.
        s.extrapolated.push_back((4.0 * values[i] - coarse_values[i]) / 3.0);
        s.endpoint_values.push_back(at_zero);
        s.interior_zero_counts.push_back(count_sign_changes(phi));
    }
    return s;
}

double Spectrum::eigenfunction(int i, double t) const
{
    const Eigen::VectorXd& phi = eigenfunctions.col(i);
    const Eigen::Index n = grid.size();
    const double dx = length / double(n);
    if (t <= grid(0)) {
        const double end = endpoint_values[i];
        return end + (phi(0) - end) * (t / grid(0)) * (t / grid(0));
    }
    if (t >= grid(n - 1)) {
        const double end = (9.0 * phi(n - 1) - phi(n - 2)) / 8.0;
        const double u = (length - t) / (length - grid(n - 1));
        return end + (phi(n - 1) - end) * u * u;
    }
    const double pos = (t - grid(0)) / dx;
    const Eigen::Index j = std::min<Eigen::Index>(Eigen::Index(pos), n - 2);
    const double w = pos - double(j);
    return (1.0 - w) * phi(j) + w * phi(j + 1);
}

double Spectrum::weighted_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const
{
    return f.cwiseProduct(mass).dot(g);
}

double Spectrum::invariant_bilaplacian_gap() const
{
    if (eigenvalues.size() < 2) throw std::logic_error("spectrum has no λ_1");
    return eigenvalues[1] * eigenvalues[1];
}

double fourth_order_eigenvalue(const Spectrum& s, int i, const PaneitzCoefficients& coeffs)
{
    if (i < 0 || i >= int(s.eigenvalues.size()))
        throw std::out_of_range("fourth_order_eigenvalue: index outside spectrum");
    const double l = s.eigenvalues[i];
    return l * l - coeffs.alpha * l;
}

}  // namespace paneitz

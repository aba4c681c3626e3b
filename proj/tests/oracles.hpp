#ifndef PTOMO_TESTS_ORACLES_HPP
#define PTOMO_TESTS_ORACLES_HPP

// Independent reference computations for the tests. Nothing here calls the
// code under test.

#include <ptomo/core.hpp>
#include <ptomo/field.hpp>

#include <cmath>
#include <vector>

namespace oracle {

using ptomo::cplx;
using ptomo::Mat2;
using ptomo::Vec3;

/// exp(A) for a 2x2 complex matrix: scaling and squaring over a 30-term Taylor sum.
inline Mat2 expm(const Mat2& A)
{
    int squarings = 0;
    double norm = A.cwiseAbs().maxCoeff();
    while (norm > 0.25) {
        norm *= 0.5;
        ++squarings;
    }
    const Mat2 B = A / std::pow(2.0, squarings);
    Mat2 term = Mat2::Identity(), sum = Mat2::Identity();
    for (int k = 1; k <= 30; ++k) {
        term = term * B / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i)
        sum = sum * sum;
    return sum;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(static_cast<std::size_t>(m), 0.0);
    w.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        x[static_cast<std::size_t>(i)] = z;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// integral of f over [a, b], composite Gauss-Legendre (pieces x 20 nodes).
template <typename F>
double integrate(F&& f, double a, double b, int pieces = 64)
{
    static thread_local std::vector<double> x, w;
    if (x.empty())
        gauss_legendre(20, x, w);
    double total = 0.0;
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double c = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < x.size(); ++i)
            total += w[i] * f(c + 0.5 * h * x[i]);
    }
    return 0.5 * h * total;
}

/// Bump profile exp(1 - 1/(1 - t^2)), written out again here.
inline double bump(double t) { return t >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t)); }

/// Integral of bump(|x - c| / rho) along a line at distance s from the
/// centre (planar or spatial: only the distance matters).
inline double bump_line_integral(double s, double rho)
{
    s = std::abs(s);
    if (s >= rho)
        return 0.0;
    const double T = std::sqrt(rho * rho - s * s);
    return integrate([&](double t) { return bump(std::sqrt(s * s + t * t) / rho); }, -T, T, 64);
}

/// Sampler with a constant symmetric value inside a ball and zero outside.
struct ConstantSampler {
    ptomo::Sym3 value;
    double radius = 0.5;
    ptomo::Sym3 at(const Vec3& x) const { return x.norm() <= radius + 1e-9 ? value : ptomo::Sym3{}; }
    double sampler_support() const { return radius; }
    void breakpoints(const Vec3&, const Vec3&, double, double, std::vector<double>&) const {}
};

/// Direct (slow) evaluation of (2 pi)^-3 h^3 sum_x e^{i p x} u(x).
inline cplx direct_transform(const ptomo::ScalarVolume& u, const Vec3& p)
{
    const int n = u.size();
    const double h = u.spacing();
    cplx sum = 0.0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const double x = -u.half_width() + (ix + 0.5) * h;
                const double y = -u.half_width() + (iy + 0.5) * h;
                const double z = -u.half_width() + (iz + 0.5) * h;
                sum += std::polar(1.0, p[0] * x + p[1] * y + p[2] * z) * u(ix, iy, iz);
            }
    return sum * h * h * h / std::pow(2.0 * M_PI, 3);
}

} // namespace oracle

#endif // PTOMO_TESTS_ORACLES_HPP

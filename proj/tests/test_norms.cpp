#include <ptomo/ptomo.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace ptomo;

namespace {

ScalarVolume random_volume(int n, unsigned seed, double half_width = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarVolume v(n, half_width);
    for (auto& x : v.data())
        x = cplx(u(rng), u(rng));
    return v;
}

Vec3 grid_frequency(int jx, int jy, int jz, int n, double h)
{
    const double dp = 2.0 * M_PI / (n * h);
    auto s = [n](int j) { return j < (n + 1) / 2 ? j : j - n; };
    return dp * Vec3(s(jx), s(jy), s(jz));
}

/// Brute force sup over the grid frequencies, optionally of the p-gradient
/// (central differences of the direct sum).
double brute_norm(const ScalarVolume& u, double sigma, bool gradient)
{
    const int n = u.size();
    double m = 0.0;
    for (int jz = 0; jz < n; ++jz)
        for (int jy = 0; jy < n; ++jy)
            for (int jx = 0; jx < n; ++jx) {
                const Vec3 p = grid_frequency(jx, jy, jz, n, u.spacing());
                const double w = std::pow(1.0 + p.norm(), sigma);
                m = std::max(m, w * std::abs(oracle::direct_transform(u, p)));
                if (!gradient)
                    continue;
                for (int a = 0; a < 3; ++a) {
                    const double dlt = 1e-5;
                    Vec3 e = Vec3::Zero();
                    e[a] = dlt;
                    const cplx d = (oracle::direct_transform(u, p + e) - oracle::direct_transform(u, p - e)) / (2.0 * dlt);
                    m = std::max(m, w * std::abs(d));
                }
            }
    return m;
}

} // namespace

TEST(FourierSamples, MatchDirectQuadratureAtRandomFrequencies)
{
    const int n = 16;
    const ScalarVolume u = random_volume(n, 21, 1.3);
    const auto spec = fourier_samples(u);
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<int> j(0, n - 1);
    for (int t = 0; t < 10; ++t) {
        const int jx = j(rng), jy = j(rng), jz = j(rng);
        const cplx want = oracle::direct_transform(u, grid_frequency(jx, jy, jz, n, u.spacing()));
        EXPECT_LE(std::abs(spec[u.index(jx, jy, jz)] - want), 1e-6 * std::abs(want));
    }
}

TEST(HatLinf, EqualsBruteForceSup)
{
    const ScalarVolume u = random_volume(6, 23);
    for (double sigma : {0.0, 4.0, 5.5}) {
        const double want = brute_norm(u, sigma, false);
        EXPECT_LE(std::abs(hat_linf_sigma(u, sigma) - want), 1e-9 * want);
    }
}

TEST(HatLinf, SigmaZeroIsMaxMagnitude)
{
    const ScalarVolume u = random_volume(8, 24);
    const auto spec = fourier_samples(u);
    double m = 0.0;
    for (const auto& v : spec)
        m = std::max(m, std::abs(v));
    EXPECT_EQ(hat_linf_sigma(u, 0.0), m);
}

TEST(HatLinf, HomogeneityAndTriangleInequality)
{
    const ScalarVolume a = random_volume(12, 25), b = random_volume(12, 26);
    for (double sigma : {3.5, 4.0}) {
        const double na = hat_linf_sigma(a, sigma), nb = hat_linf_sigma(b, sigma);
        for (const cplx c : {cplx(2.0, 0.0), cplx(-0.3, 1.7), cplx(0.0, -1e-3)}) {
            ScalarVolume ca = a;
            ca *= c;
            EXPECT_LE(std::abs(hat_linf_sigma(ca, sigma) - std::abs(c) * na), 1e-9 * std::abs(c) * na);
        }
        ScalarVolume ab = a;
        ab += b;
        EXPECT_LE(hat_linf_sigma(ab, sigma), (na + nb) * (1.0 + 1e-9));
    }
    EXPECT_EQ(hat_linf_sigma(ScalarVolume(8, 1.0), 4.0), 0.0);
    EXPECT_THROW(hat_linf_sigma(a, -1.0), InvalidParameter);
}

TEST(HatLinf, TensorNormIsMaxOverComponents)
{
    const TensorField f = standard_phantom().rasterize(12, 1.0);
    double m = 0.0;
    for (std::size_t k = 0; k < 6; ++k)
        m = std::max(m, hat_linf_sigma(f.component(k), 4.0));
    EXPECT_EQ(hat_linf_sigma(f, 4.0), m);
    EXPECT_EQ(hat_c_sigma(f, 4.0, 0), m);
}

TEST(HatC, OrderOneIncludesFrequencyDerivatives)
{
    const ScalarVolume u = random_volume(6, 27);
    const double want = brute_norm(u, 4.0, true);
    EXPECT_LE(std::abs(hat_c_sigma(u, 4.0, 1) - want), 1e-6 * want);
    EXPECT_THROW(hat_c_sigma(u, 4.0, 2), InvalidParameter);
}

TEST(HatC, TranslationChangesOnlyOrderOne)
{
    // A voxel shift of a compactly supported volume multiplies the
    // transform by a phase: order 0 is unchanged, order 1 is not.
    ScalarVolume u(12, 4.0), v(12, 4.0);
    for (int iz = 2; iz < 6; ++iz)
        for (int iy = 2; iy < 6; ++iy)
            for (int ix = 2; ix < 6; ++ix) {
                u(ix, iy, iz) = cplx(ix - iy, iz);
                v(ix + 6, iy, iz) = cplx(ix - iy, iz);
            }
    EXPECT_LE(std::abs(hat_linf_sigma(u, 4.0) - hat_linf_sigma(v, 4.0)), 1e-10 * hat_linf_sigma(u, 4.0));
    EXPECT_GT(std::abs(hat_c_sigma(u, 4.0, 1) - hat_c_sigma(v, 4.0, 1)), 1e-3 * hat_c_sigma(u, 4.0, 1));
}

TEST(LambdaNorm, MatchesDirectSumAndIsHomogeneous)
{
    const ViewSet views = standard_views(8, 8, 1.0);
    std::mt19937_64 rng(28);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Sinogram g(views, SinogramKind::Residual);
    for (auto& v : g.data())
        v = cplx(u(rng), u(rng));
    const double sigma = 4.0;
    const double ds = views.slice_spacing(), dd = views.detector_spacing();
    double want = 0.0;
    for (std::size_t view = 0; view < 6; ++view)
        for (int k = 0; k < 8; ++k)
            for (int a = -4; a < 4; ++a)
                for (int b = -4; b < 4; ++b) {
                    const double p2 = 2.0 * M_PI * a / (8 * ds), p1 = 2.0 * M_PI * b / (8 * dd);
                    cplx s = 0.0;
                    for (int j = 0; j < 8; ++j)
                        for (int l = 0; l < 8; ++l)
                            s += std::polar(1.0, p1 * views.detector_position(l) + p2 * views.slice_position(j)) *
                                 g(view, k, j, l);
                    want = std::max(want, std::pow(1.0 + std::hypot(p1, p2), sigma) * std::abs(s) * ds * dd /
                                              (4.0 * M_PI * M_PI));
                }
    const double got = lambda_norm(g, sigma);
    EXPECT_LE(std::abs(got - want), 1e-9 * want);
    Sinogram h = g;
    for (auto& v : h.data())
        v *= cplx(0.0, -3.0);
    EXPECT_LE(std::abs(lambda_norm(h, sigma) - 3.0 * got), 1e-9 * got);
}

#include <ptomo/ptomo.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ptomo;

namespace {

struct PlanarBump {
    double cu, cv, rho, amp;
};

/// Oracle sinogram of a sum of planar radial bumps on the full circle.
SliceSinogram bump_sinogram(const std::vector<PlanarBump>& bumps, int K, int M, double half_width)
{
    SliceSinogram g = SliceSinogram::zeros(K, M, 2.0 * half_width / M);
    for (int k = 0; k < K; ++k) {
        const double phi = g.angles[static_cast<std::size_t>(k)];
        for (int l = 0; l < M; ++l)
            for (const auto& b : bumps) {
                const double cs = -b.cu * std::sin(phi) + b.cv * std::cos(phi);
                g(k, l) += b.amp * oracle::bump_line_integral(g.position(l) - cs, b.rho);
            }
    }
    return g;
}

double bump_value(const std::vector<PlanarBump>& bumps, double u, double v)
{
    double s = 0.0;
    for (const auto& b : bumps)
        s += b.amp * oracle::bump(std::hypot(u - b.cu, v - b.cv) / b.rho);
    return s;
}

double rel_l2(const SliceImage& img, const std::vector<PlanarBump>& bumps)
{
    double num = 0.0, den = 0.0;
    for (int iv = 0; iv < img.size; ++iv)
        for (int iu = 0; iu < img.size; ++iu) {
            const double t = bump_value(bumps, img.position(iu), img.position(iv));
            num += std::norm(img(iu, iv) - t);
            den += t * t;
        }
    return std::sqrt(num / den);
}

double rel_l2(const SliceImage& a, const SliceImage& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        num += std::norm(a.data[i] - b.data[i]);
        den += std::norm(b.data[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST(Fbp, RecoversCentredRadialBump)
{
    const std::vector<PlanarBump> b{{0.0, 0.0, 0.6, 1.0}};
    EXPECT_LE(rel_l2(invert_slice(bump_sinogram(b, 180, 64, 1.0)), b), 0.02);
}

TEST(Fbp, RecoversOffCentreBumps)
{
    const std::vector<PlanarBump> b{{0.25, -0.1, 0.45, 1.0}, {-0.3, 0.35, 0.3, -0.7}};
    EXPECT_LE(rel_l2(invert_slice(bump_sinogram(b, 180, 64, 1.0)), b), 0.02);
}

TEST(Fbp, PeakWithinOnePixel)
{
    const std::vector<PlanarBump> b{{0.31, -0.22, 0.2, 1.0}};
    const SliceImage img = invert_slice(bump_sinogram(b, 180, 64, 1.0));
    int bu = 0, bv = 0;
    for (int iv = 0; iv < img.size; ++iv)
        for (int iu = 0; iu < img.size; ++iu)
            if (std::abs(img(iu, iv)) > std::abs(img(bu, bv))) {
                bu = iu;
                bv = iv;
            }
    EXPECT_LE(std::abs(img.position(bu) - 0.31), img.spacing);
    EXPECT_LE(std::abs(img.position(bv) + 0.22), img.spacing);
}

TEST(Fbp, FourierSliceAgreesWithBackprojection)
{
    const std::vector<PlanarBump> b{{0.1, -0.05, 0.6, 1.0}};
    const SliceSinogram g = bump_sinogram(b, 180, 64, 1.0);
    EXPECT_LE(rel_l2(invert_slice_fourier(g), invert_slice(g)), 0.03);
    EXPECT_LE(rel_l2(invert_slice_fourier(g), b), 0.03);
}

TEST(Fbp, ZeroAndLinearity)
{
    const SliceSinogram z = SliceSinogram::zeros(16, 12, 0.1);
    for (const auto& v : invert_slice(z).data)
        EXPECT_EQ(v, cplx(0.0));
    const SliceSinogram g1 = bump_sinogram({{0.0, 0.1, 0.5, 1.0}}, 32, 24, 1.0);
    const SliceSinogram g2 = bump_sinogram({{0.2, -0.1, 0.3, 1.0}}, 32, 24, 1.0);
    SliceSinogram sum = g1;
    const cplx c(0.5, -2.0);
    for (std::size_t i = 0; i < sum.data.size(); ++i)
        sum.data[i] = g1.data[i] + c * g2.data[i];
    const SliceImage a = invert_slice(g1), b = invert_slice(g2), s = invert_slice(sum);
    for (std::size_t i = 0; i < s.data.size(); ++i)
        EXPECT_LE(std::abs(s.data[i] - a.data[i] - c * b.data[i]), 1e-12);
}

TEST(Fbp, SymmetrizeIsIdempotent)
{
    SliceSinogram g = SliceSinogram::zeros(16, 10, 0.2);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = cplx(std::sin(1.7 * i), std::cos(0.3 * i));
    const SliceSinogram a = symmetrize(g), b = symmetrize(a);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        EXPECT_LE(std::abs(a.data[i] - b.data[i]), 1e-15);
    // consistent data is unchanged
    const SliceSinogram c = bump_sinogram({{0.2, -0.1, 0.3, 1.0}}, 16, 10, 1.0);
    const SliceSinogram d = symmetrize(c);
    for (std::size_t i = 0; i < c.data.size(); ++i)
        EXPECT_LE(std::abs(c.data[i] - d.data[i]), 1e-12);
}

TEST(Fbp, Validation)
{
    EXPECT_THROW(invert_slice(SliceSinogram::zeros(7, 10, 0.1)), InvalidParameter);
    EXPECT_THROW(invert_slice(SliceSinogram::zeros(6, 10, 0.1)), InvalidParameter);
    EXPECT_THROW(invert_slice(SliceSinogram::zeros(16, 10, 0.0)), InvalidParameter);
    SliceSinogram g = SliceSinogram::zeros(16, 10, 0.1);
    g.angles[3] += 0.01;
    EXPECT_THROW(invert_slice(g), InvalidParameter);
    EXPECT_THROW(invert_slice(SliceSinogram::zeros(16, 10, 0.1), RampOptions{0, 4, false}), InvalidParameter);
}

TEST(InvertVolume, RecoversScalarBumpFromEveryView)
{
    const int n = 32;
    ScalarVolume vol(n, 1.0);
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                vol(ix, iy, iz) = oracle::bump((vol.position(ix, iy, iz) - Vec3(0.1, -0.15, 0.05)).norm() / 0.55);
    const ViewSet views = standard_views(90, n, 1.0);
    const Sinogram g = classical_ray_transform(vol, views);
    for (std::size_t v = 0; v < 6; ++v) {
        ScalarVolume r = invert_volume(g, v, n);
        r -= vol;
        EXPECT_LE(l2_norm(r) / l2_norm(vol), 0.03) << "view " << v;
    }
}

TEST(InvertVolume, ZeroMapsToZero)
{
    const Sinogram g(standard_views(16, 12, 1.0), SinogramKind::Classical);
    const ScalarVolume r = invert_volume(g, 2, 12);
    EXPECT_EQ(sup_norm(r), 0.0);
    EXPECT_THROW(invert_volume(g, 6, 12), InvalidParameter);
}

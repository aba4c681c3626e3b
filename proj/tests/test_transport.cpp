#include <ptomo/ptomo.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace ptomo;

namespace {

ViewFrame random_frame(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    const Vec3 w = Vec3(g(rng), g(rng), g(rng)).normalized();
    Vec3 t = Vec3(g(rng), g(rng), g(rng));
    t = (t - t.dot(w) * w).normalized();
    return ViewFrame(Direction(w), Direction(t));
}

Mat3 random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::Matrix3d a;
    for (int i = 0; i < 9; ++i)
        a(i / 3, i % 3) = g(rng);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0)
        q.col(0) *= -1.0;
    return q.cast<cplx>();
}

Sym3 isotropic(cplx c)
{
    Sym3 s;
    s.c = {c, c, c, 0.0, 0.0, 0.0};
    return s;
}

} // namespace

TEST(Transport, ConstantGeneratorMatchesMatrixExponential)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        oracle::ConstantSampler s;
        s.radius = 0.5;
        for (auto& c : s.value.c)
            c = cplx(u(rng), u(rng));
        const ViewFrame frame = random_frame(rng);
        const RayCoord ray{frame, 0.3 * u(rng), 0.3 * u(rng)};
        const double L = 2.0 * std::sqrt(0.25 - ray.xi1 * ray.xi1 - ray.xi2 * ray.xi2);
        const Mat2 want = oracle::expm(L * local_F(s.value, frame));
        const Mat2 got = solve_ray(s, ray, 0.01);
        EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Transport, MissedRayIsIdentity)
{
    oracle::ConstantSampler s;
    s.value = isotropic(1.0);
    const ViewFrame frame = ViewFrame::at_angle(Direction(Vec3(0, 0, 1)), 0.4);
    EXPECT_EQ(solve_ray(s, RayCoord{frame, 0.6, 0.0}, 0.01), Mat2::Identity());
}

TEST(Transport, Rk4ConvergesWithOrderFour)
{
    const BumpPhantom ph = standard_phantom();
    const ViewSet views = standard_views(8, 8, 1.0);
    std::vector<RayCoord> rays;
    for (std::size_t v = 0; v < 6; ++v)
        for (int k = 0; k < 8; k += 3)
            rays.push_back(views.ray(v, k, 2, 3));
    auto error = [&](double h) {
        double e = 0.0;
        for (const auto& r : rays)
            e = std::max(e, (solve_ray(ph, r, h) - solve_ray(ph, r, 2e-4)).cwiseAbs().maxCoeff());
        return e;
    };
    // coarser steps (h >= 0.05) are still pre-asymptotic for these bumps
    const double e1 = error(0.05), e2 = error(0.025), e3 = error(0.0125);
    const double order1 = std::log2(e1 / e2), order2 = std::log2(e2 / e3);
    EXPECT_GE(order1, 3.5) << e1 << ' ' << e2;
    EXPECT_GE(order2, 3.5) << e2 << ' ' << e3;
}

TEST(Transport, ImaginaryFieldGivesUnitaryScattering)
{
    const TensorField phys = standard_phantom().rasterize(16, 1.0);
    const TensorField f = phys * cplx(0.05 / sup_norm(phys));
    const ViewSet views = standard_views(16, 16, 1.0);
    double worst = 0.0, s11 = 0.0;
    for (const auto& m : forward_scattering(f, views, default_step(f))) {
        worst = std::max(worst, (m * m.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
        s11 = std::max(s11, std::abs(m(0, 0)));
    }
    EXPECT_LE(worst, 1e-7);
    EXPECT_LE(s11, 1.0 + 1e-9);
}

TEST(Transport, IsotropicFieldIsExponentialOfLineIntegral)
{
    for (const cplx c : {cplx(0.8, 0.0), cplx(0.0, 1.3), cplx(-0.4, 0.6)}) {
        Bump b;
        b.radius = 0.6;
        b.amplitude = isotropic(c);
        const BumpPhantom ph({b}, 0.8);
        const ViewSet views = standard_views(12, 10, 1.0);
        for (std::size_t v = 0; v < 6; ++v)
            for (int k = 0; k < 12; k += 5)
                for (int l = 0; l < 10; l += 3) {
                    const RayCoord ray = views.ray(v, k, 4, l);
                    const double dist = ray.base_point().norm();
                    const Mat2 S = solve_ray(ph, ray, 0.005);
                    const cplx want = std::exp(c * oracle::bump_line_integral(dist, 0.6));
                    EXPECT_LE(std::abs(S(0, 0) - want), 1e-8);
                    EXPECT_LE(std::abs(S(1, 1) - want), 1e-8);
                    EXPECT_LE(std::abs(S(0, 1)) + std::abs(S(1, 0)), 1e-12);
                }
    }
}

TEST(Transport, NeumannSeriesMatchesRk4)
{
    const TensorField phys = standard_phantom().rasterize(16, 1.0);
    const TensorField f = phys * cplx(0.05 / sup_norm(phys));
    const ViewSet views = standard_views(16, 16, 1.0);
    const double h = default_step(f);
    const Sinogram a = forward_s11(f, views, h);
    const Sinogram b = forward_s11_neumann(f, views, 12, h);
    EXPECT_LE(a.difference(b, SinogramKind::Residual).sup_norm(), 1e-8);
}

TEST(Transport, FirstBornTermIsTransverseTransform)
{
    const TensorField phys = standard_phantom().rasterize(16, 1.0);
    const TensorField f = phys * cplx(0.05 / sup_norm(phys));
    const ViewSet views = standard_views(16, 16, 1.0);
    const Sinogram s = forward_s11_neumann(f, views, 1, default_step(f));
    const LambdaData j = transverse_transform(f, views);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.data().size(); ++i)
        worst = std::max(worst, std::abs(s.data()[i] - 1.0 - j.sinogram().data()[i]));
    EXPECT_LE(worst, 1e-6);
}

TEST(Transport, NonlinearRemainderIsQuadratic)
{
    const BumpPhantom ph = standard_phantom();
    const ViewSet views = standard_views(8, 8, 1.0);
    auto remainder = [&](double eps) {
        const BumpPhantom p = ph.scaled(eps);
        double m = 0.0;
        for (std::size_t v = 0; v < 6; ++v)
            for (int k = 0; k < 8; k += 2)
                for (int l = 2; l < 6; ++l) {
                    const RayCoord ray = views.ray(v, k, 3, l);
                    const cplx s = solve_ray(p, ray, 0.01)(0, 0);
                    const cplx lin = neumann_ray(p, ray, 1, 0.01)(0, 0);
                    m = std::max(m, std::abs(s - lin));
                }
        return m;
    };
    const double r = remainder(0.1) / remainder(0.05);
    EXPECT_NEAR(r, 4.0, 0.4);
}

TEST(Transport, ReversedRayInvertsTheNegatedField)
{
    // Traversing the line backwards with frame (omega, -theta) gives
    // D S(-f)^{-1} D, D = diag(1, -1).
    const BumpPhantom ph = standard_phantom().scaled(cplx(0.3, 0.2));
    const BumpPhantom neg = ph.scaled(-1.0);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Mat2 D = Mat2::Identity();
    D(1, 1) = -1.0;
    for (int t = 0; t < 10; ++t) {
        const ViewFrame frame = random_frame(rng);
        const RayCoord ray{frame, u(rng), u(rng)};
        const RayCoord back = RayCoord::encode(frame.reversed(), ray.base_point());
        const Mat2 got = solve_ray(ph, back, 0.005);
        const Mat2 want = D * solve_ray(neg, ray, 0.005).inverse() * D;
        EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Transport, RotationCovariance)
{
    const BumpPhantom ph = standard_phantom();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int t = 0; t < 5; ++t) {
        const Mat3 R = random_rotation(rng);
        const Eigen::Matrix3d Rr = R.real();
        std::vector<Bump> rotated = ph.bumps();
        for (auto& b : rotated) {
            b.center = Rr * b.center;
            b.amplitude = Sym3::from_matrix(R * b.amplitude.matrix() * R.transpose());
        }
        const BumpPhantom rp(rotated, ph.support_radius());
        const ViewFrame frame = random_frame(rng);
        const ViewFrame rframe(Direction(Rr * frame.omega().vec()), Direction(Rr * frame.theta().vec()));
        const RayCoord ray{frame, u(rng), u(rng)};
        const RayCoord rray{rframe, ray.xi1, ray.xi2};
        EXPECT_LE((solve_ray(ph, ray, 0.01) - solve_ray(rp, rray, 0.01)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Transport, SegmentsMultiply)
{
    const TensorField f = standard_phantom().rasterize(16, 1.0) * cplx(0.3);
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int t = 0; t < 10; ++t) {
        const ViewFrame frame = random_frame(rng);
        const Vec3 base = u(rng) * frame.theta_perp().vec() + u(rng) * frame.omega().vec();
        const double sm = u(rng), h = 0.25 * f.spacing();
        const Mat2 whole = solve_segment(f, frame, base, -0.9, 0.9, h);
        const Mat2 parts = solve_segment(f, frame, base, sm, 0.9, h) * solve_segment(f, frame, base, -0.9, sm, h);
        EXPECT_LE((whole - parts).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Transport, ClassicalTransformOfBumpMatchesOracle)
{
    Bump b;
    b.center = Vec3(0.1, -0.2, 0.05);
    b.radius = 0.5;
    b.amplitude = isotropic(1.0);
    const BumpPhantom ph({b}, 0.8);
    struct Scalar {
        const BumpPhantom* p;
        cplx at(const Vec3& x) const { return p->at(x).c[0]; }
        double sampler_support() const { return p->sampler_support(); }
        void breakpoints(const Vec3&, const Vec3&, double, double, std::vector<double>&) const {}
    };
    const ViewSet views = standard_views(10, 12, 1.0);
    const Sinogram g = classical_ray_transform(Scalar{&ph}, views, 0.005);
    for (std::size_t v = 0; v < 6; ++v)
        for (int k = 0; k < 10; k += 3)
            for (int j = 0; j < 12; j += 2)
                for (int l = 0; l < 12; ++l) {
                    const RayCoord ray = views.ray(v, k, j, l);
                    const Vec3 x = ray.base_point() - b.center;
                    const double dist = (x - x.dot(ray.frame.theta().vec()) * ray.frame.theta().vec()).norm();
                    EXPECT_NEAR(g(v, k, j, l).real(), oracle::bump_line_integral(dist, 0.5), 1e-8);
                }
}

TEST(Transport, Validation)
{
    oracle::ConstantSampler s;
    const ViewSet views = standard_views(8, 8, 1.0);
    EXPECT_THROW(solve_ray(s, views.ray(0, 0, 0, 0), 0.0), InvalidParameter);
    EXPECT_THROW(forward_s11_neumann(s, views, 0, 0.1), InvalidParameter);
}

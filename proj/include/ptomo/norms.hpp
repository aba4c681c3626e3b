#ifndef PTOMO_NORMS_HPP
#define PTOMO_NORMS_HPP

#include "fft.hpp"
#include "tensor_inversion.hpp"

#include <vector>

namespace ptomo {

/// Fourier transform convention u^(p) = (2 pi)^-3 * integral e^{i p x} u(x) dx,
/// evaluated by the cell-centred quadrature at the grid frequencies
/// p = 2 pi j / (2H), j = -n/2 .. n/2 - 1. Returns the transform samples in
/// FFT order; the constant phase from the half-cell grid offset is included.
inline std::vector<cplx> fourier_samples(const ScalarVolume& u)
{
    const int n = u.size();
    const double h = u.spacing();
    std::vector<cplx> spec = u.data();
    fft::transform(spec, {n, n, n}, fft::Sign::Backward);
    const double scale = h * h * h / std::pow(2.0 * pi, 3);
    const double offset = (0.5 - 0.5 * n) * h;
    for (int jz = 0; jz < n; ++jz)
        for (int jy = 0; jy < n; ++jy)
            for (int jx = 0; jx < n; ++jx) {
                const double psum = 2.0 * pi / (n * h) *
                                    (fft::signed_index(jx, n) + fft::signed_index(jy, n) + fft::signed_index(jz, n));
                spec[u.index(jx, jy, jz)] *= scale * std::polar(1.0, psum * offset);
            }
    return spec;
}

/// |p| at FFT bin (jx, jy, jz).
inline double frequency_norm(int jx, int jy, int jz, int n, double h)
{
    const double dp = 2.0 * pi / (n * h);
    const double px = dp * fft::signed_index(jx, n), py = dp * fft::signed_index(jy, n), pz = dp * fft::signed_index(jz, n);
    return std::sqrt(px * px + py * py + pz * pz);
}

inline double weighted_max(const std::vector<cplx>& spec, int n, double h, double sigma)
{
    double m = 0.0;
    for (int jz = 0; jz < n; ++jz)
        for (int jy = 0; jy < n; ++jy)
            for (int jx = 0; jx < n; ++jx) {
                const double w = std::pow(1.0 + frequency_norm(jx, jy, jz, n, h), sigma);
                const std::size_t idx = static_cast<std::size_t>(jx) + static_cast<std::size_t>(n) * (jy + static_cast<std::size_t>(n) * jz);
                m = std::max(m, w * std::abs(spec[idx]));
            }
    return m;
}

/// sup_p (1 + |p|)^sigma |u^(p)| over the grid frequencies.
inline double hat_linf_sigma(const ScalarVolume& u, double sigma)
{
    require(sigma >= 0.0, "hat_linf_sigma: sigma must be non-negative");
    return weighted_max(fourier_samples(u), u.size(), u.spacing(), sigma);
}

/// Matrix-valued version with the entrywise max norm.
inline double hat_linf_sigma(const TensorField& f, double sigma)
{
    double m = 0.0;
    for (std::size_t k = 0; k < 6; ++k)
        m = std::max(m, hat_linf_sigma(f.component(k), sigma));
    return m;
}

/// Order 0 coincides with hat_linf_sigma. Order 1 also takes the sup of the
/// weighted first derivatives d u^/d p_a, computed as the transform of
/// i x_a u(x) (the exact derivative of the discrete transform).
inline double hat_c_sigma(const ScalarVolume& u, double sigma, int order)
{
    require(order == 0 || order == 1, "hat_c_sigma: order must be 0 or 1");
    double m = hat_linf_sigma(u, sigma);
    if (order == 0)
        return m;
    const int n = u.size();
    for (int a = 0; a < 3; ++a) {
        ScalarVolume moment = u;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix)
                    moment(ix, iy, iz) *= cplx(0.0, u.position(ix, iy, iz)[a]);
        m = std::max(m, weighted_max(fourier_samples(moment), n, u.spacing(), sigma));
    }
    return m;
}

inline double hat_c_sigma(const TensorField& f, double sigma, int order)
{
    double m = 0.0;
    for (std::size_t k = 0; k < 6; ++k)
        m = std::max(m, hat_c_sigma(f.component(k), sigma, order));
    return m;
}

/// Discrete weighted norm of data on the ray families: for every view and
/// angle, the 2D transform (2 pi)^-2 * integral e^{i p xi} g(xi) d xi over
/// (xi1, xi2), weighted by (1 + |p|)^sigma; max over everything.
inline double lambda_norm(const Sinogram& data, double sigma)
{
    require(sigma >= 0.0, "lambda_norm: sigma must be non-negative");
    const ViewSet& v = data.views();
    const int Ms = v.slice_count, Md = v.detector_count;
    const double ds = v.slice_spacing(), dd = v.detector_spacing();
    const double scale = ds * dd / (4.0 * pi * pi);
    const std::size_t pairs = v.view_count() * static_cast<std::size_t>(v.angles_per_view);
    std::vector<double> maxima(pairs, 0.0);
    parallel_for(pairs, [&](std::size_t idx) {
        const std::size_t view = idx / static_cast<std::size_t>(v.angles_per_view);
        const int k = static_cast<int>(idx % static_cast<std::size_t>(v.angles_per_view));
        std::vector<cplx> plane(static_cast<std::size_t>(Ms) * Md);
        for (int j = 0; j < Ms; ++j)
            for (int l = 0; l < Md; ++l)
                plane[static_cast<std::size_t>(j) * Md + l] = data(view, k, j, l);
        fft::transform(plane, {Ms, Md}, fft::Sign::Backward);
        double m = 0.0;
        for (int j = 0; j < Ms; ++j)
            for (int l = 0; l < Md; ++l) {
                const double p2 = 2.0 * pi * fft::signed_index(j, Ms) / (Ms * ds);
                const double p1 = 2.0 * pi * fft::signed_index(l, Md) / (Md * dd);
                const double w = std::pow(1.0 + std::hypot(p1, p2), sigma);
                m = std::max(m, w * scale * std::abs(plane[static_cast<std::size_t>(j) * Md + l]));
            }
        maxima[idx] = m;
    });
    return *std::max_element(maxima.begin(), maxima.end());
}

inline double lambda_norm(const LambdaData& data, double sigma) { return lambda_norm(data.sinogram(), sigma); }

} // namespace ptomo

#endif // PTOMO_NORMS_HPP

#ifndef PTOMO_RADON_HPP
#define PTOMO_RADON_HPP

#include "fft.hpp"
#include "field.hpp"
#include "transport.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace ptomo {

/// Line integrals g(s, theta) of a planar function for K angles on the full
/// circle and M cell-centred detectors at spacing d, stored angle-major.
struct SliceSinogram {
    int detectors = 0;
    double spacing = 0.0;
    std::vector<double> angles;
    std::vector<cplx> data;

    int angle_count() const { return static_cast<int>(angles.size()); }
    double position(int l) const { return (l + 0.5 - 0.5 * detectors) * spacing; }
    cplx operator()(int k, int l) const { return data[static_cast<std::size_t>(k) * detectors + l]; }
    cplx& operator()(int k, int l) { return data[static_cast<std::size_t>(k) * detectors + l]; }

    static SliceSinogram zeros(int angles, int detectors, double spacing)
    {
        SliceSinogram g;
        g.detectors = detectors;
        g.spacing = spacing;
        for (int k = 0; k < angles; ++k)
            g.angles.push_back(2.0 * pi * k / angles);
        g.data.assign(static_cast<std::size_t>(angles) * detectors, 0.0);
        return g;
    }

    void validate() const
    {
        const int K = angle_count();
        require(spacing > 0.0, "SliceSinogram: detector spacing must be positive");
        require(K >= 8 && K % 2 == 0, "SliceSinogram: need an even number of at least 8 angles");
        require(detectors >= 2, "SliceSinogram: need at least two detectors");
        require(data.size() == static_cast<std::size_t>(K) * detectors, "SliceSinogram: data size mismatch");
        for (int k = 0; k < K; ++k)
            require(std::abs(angles[static_cast<std::size_t>(k)] - angles[0] - 2.0 * pi * k / K) <= 1e-9,
                    "SliceSinogram: angles must be uniform on the full circle");
    }
};

/// M x M image on the same cell-centred grid as the detectors, u fastest.
struct SliceImage {
    int size = 0;
    double spacing = 0.0;
    std::vector<cplx> data;

    double position(int i) const { return (i + 0.5 - 0.5 * size) * spacing; }
    cplx operator()(int iu, int iv) const { return data[static_cast<std::size_t>(iv) * size + iu]; }
    cplx& operator()(int iu, int iv) { return data[static_cast<std::size_t>(iv) * size + iu]; }
};

struct RampOptions {
    int padding = 4;
    int upsample = 4;     ///< filtered projections are resampled this much finer before backprojection
    bool apodize = false; ///< raised-cosine roll-off over the top 20% of the band
};

/// Averages each sample with the one describing the same line traversed in
/// the opposite direction: (s, theta) and (-s, -theta).
inline SliceSinogram symmetrize(const SliceSinogram& g)
{
    g.validate();
    const int K = g.angle_count(), M = g.detectors;
    SliceSinogram out = g;
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < M; ++l)
            out(k, l) = 0.5 * (g(k, l) + g((k + K / 2) % K, M - 1 - l));
    return out;
}

namespace detail {

inline double ramp_window(int signed_j, int P, bool apodize)
{
    const double nu = std::abs(static_cast<double>(signed_j)) / (0.5 * P); // 0..1 of Nyquist
    if (!apodize || nu <= 0.8)
        return 1.0;
    return 0.5 * (1.0 + std::cos(pi * std::min(1.0, (nu - 0.8) / 0.2)));
}

/// Ramp-filtered projections on the padded detector grid, resampled U times
/// finer: K rows of P * U values.
inline std::vector<cplx> ramp_filter(const SliceSinogram& g, const RampOptions& opt)
{
    const int K = g.angle_count(), M = g.detectors;
    const int P = opt.padding * M;
    const int offset = (P - M) / 2;
    // |k| sampled as the band-limited ramp kernel on the padded grid, which
    // gets the zero bin right (plain |k| leaves a constant bias in the slice).
    const double d = g.spacing;
    std::vector<cplx> kernel(static_cast<std::size_t>(P), 0.0);
    for (int q = 0; q < P; ++q) {
        const int m = fft::signed_index(q, P);
        if (m == 0)
            kernel[static_cast<std::size_t>(q)] = 1.0 / (4.0 * d * d);
        else if (m % 2 != 0)
            kernel[static_cast<std::size_t>(q)] = -1.0 / (pi * pi * m * m * d * d);
    }
    fft::transform(kernel, {P}, fft::Sign::Forward);
    std::vector<double> multiplier(static_cast<std::size_t>(P));
    for (int j = 0; j < P; ++j)
        multiplier[static_cast<std::size_t>(j)] =
            2.0 * pi * kernel[static_cast<std::size_t>(j)].real() * d / P * ramp_window(fft::signed_index(j, P), P, opt.apodize);
    // The filtered spectrum is zero-extended to P * U bins, which evaluates
    // the band-limited filtered projection on a U times finer grid.
    const int U = opt.upsample;
    const int PU = P * U;
    std::vector<cplx> out(static_cast<std::size_t>(K) * PU, 0.0);
    std::vector<cplx> row(static_cast<std::size_t>(P));
    for (int k = 0; k < K; ++k) {
        std::fill(row.begin(), row.end(), cplx(0.0));
        for (int l = 0; l < M; ++l)
            row[static_cast<std::size_t>(offset + l)] = g(k, l);
        fft::transform(row, {P}, fft::Sign::Forward);
        std::span<cplx> fine(out.data() + static_cast<std::size_t>(k) * PU, static_cast<std::size_t>(PU));
        for (int j = 0; j < P; ++j) {
            const int sj = fft::signed_index(j, P);
            const cplx v = row[static_cast<std::size_t>(j)] * multiplier[static_cast<std::size_t>(j)];
            if (U > 1 && sj == -P / 2) {
                // split the Nyquist bin between +-P/2 to keep the resampling real-symmetric
                fine[static_cast<std::size_t>(P / 2)] += 0.5 * v;
                fine[static_cast<std::size_t>(PU - P / 2)] += 0.5 * v;
            } else {
                fine[static_cast<std::size_t>(sj >= 0 ? sj : PU + sj)] = v;
            }
        }
        fft::transform(fine, {PU}, fft::Sign::Backward);
    }
    return out;
}

/// Backprojection of filtered rows (K rows of P * U values at spacing d / U)
/// at the chart point (u, v).
inline cplx backproject(const std::vector<cplx>& rows, const std::vector<double>& angles, int P, int U, double d, double u,
                        double v)
{
    const int K = static_cast<int>(angles.size());
    const int PU = P * U;
    const double weight = (2.0 * pi / K) / (4.0 * pi);
    cplx sum = 0.0;
    for (int k = 0; k < K; ++k) {
        const double phi = angles[static_cast<std::size_t>(k)];
        const double s = -u * std::sin(phi) + v * std::cos(phi); // x . theta_perp
        const double t = (s / d + 0.5 * P - 0.5) * U;
        const double fl = std::floor(t);
        const int i0 = static_cast<int>(fl);
        if (i0 < 0 || i0 + 1 >= PU)
            continue;
        const double w = t - fl;
        const cplx* row = rows.data() + static_cast<std::size_t>(k) * PU;
        sum += (1.0 - w) * row[i0] + w * row[i0 + 1];
    }
    return weight * sum;
}

} // namespace detail

/// Filtered backprojection over the full circle:
/// f(x) = (1/4pi) * sum_k (2pi/K) q_k(x . theta_perp_k), q = ramp-filtered
/// symmetrized projections. The ramp |k| is the Hilbert kernel followed by
/// d/ds in one multiplier.
inline SliceImage invert_slice(const SliceSinogram& input, const RampOptions& opt = {})
{
    require(opt.padding >= 1 && opt.upsample >= 1, "invert_slice: padding and upsample must be positive");
    const SliceSinogram g = symmetrize(input);
    const int M = g.detectors;
    const auto q = detail::ramp_filter(g, opt);
    SliceImage img{M, g.spacing, std::vector<cplx>(static_cast<std::size_t>(M) * M, 0.0)};
    for (int iv = 0; iv < M; ++iv)
        for (int iu = 0; iu < M; ++iu)
            img(iu, iv) = detail::backproject(q, g.angles, opt.padding * M, opt.upsample, g.spacing, img.position(iu),
                                              img.position(iv));
    return img;
}

/// One-dimensional spectra G_k(p_j) = d * sum_l g_sym(s_l, theta_k) e^{-i p_j s_l}
/// of the zero-padded symmetrized projections, p_j = 2 pi j / (P d) in FFT order.
inline std::vector<cplx> polar_spectrum(const SliceSinogram& input, int padding = 4)
{
    const SliceSinogram g = symmetrize(input);
    const int K = g.angle_count(), M = g.detectors;
    const int P = padding * M;
    const int offset = (P - M) / 2;
    std::vector<cplx> out(static_cast<std::size_t>(K) * P, 0.0);
    for (int k = 0; k < K; ++k) {
        std::span<cplx> row(out.data() + static_cast<std::size_t>(k) * P, static_cast<std::size_t>(P));
        for (int l = 0; l < M; ++l)
            row[static_cast<std::size_t>(offset + l)] = g(k, l);
        fft::transform(row, {P}, fft::Sign::Forward);
        for (int j = 0; j < P; ++j) {
            const double p = 2.0 * pi * fft::signed_index(j, P) / (P * g.spacing);
            row[static_cast<std::size_t>(j)] *= g.spacing * std::polar(1.0, -p * (0.5 - 0.5 * P) * g.spacing);
        }
    }
    return out;
}

/// Projection-slice inversion: the spectrum of each projection is the 2D
/// spectrum of the slice along the line through the origin in direction
/// theta_perp. Polar samples are gridded by nearest angle and linear radial
/// interpolation, then inverted by a 2D inverse transform.
inline SliceImage invert_slice_fourier(const SliceSinogram& input, int padding = 4)
{
    input.validate();
    const int K = input.angle_count(), M = input.detectors;
    const int P = padding * M;
    const double d = input.spacing;
    const double dp = 2.0 * pi / (P * d);
    const auto G = polar_spectrum(input, padding);
    const double dphi = 2.0 * pi / K;
    const double phi0 = input.angles[0];

    cplx dc = 0.0;
    for (int k = 0; k < K; ++k)
        dc += G[static_cast<std::size_t>(k) * P];
    dc /= static_cast<double>(K);

    std::vector<cplx> spec(static_cast<std::size_t>(P) * P, 0.0);
    for (int jy = 0; jy < P; ++jy)
        for (int jx = 0; jx < P; ++jx) {
            const double px = dp * fft::signed_index(jx, P);
            const double py = dp * fft::signed_index(jy, P);
            const double r = std::hypot(px, py);
            cplx value;
            if (r == 0.0) {
                value = dc;
            } else {
                const double phi = std::atan2(py, px) - 0.5 * pi - phi0;
                int k = static_cast<int>(std::lround(phi / dphi)) % K;
                if (k < 0)
                    k += K;
                const double t = r / dp;
                const int j0 = static_cast<int>(std::floor(t));
                if (j0 + 1 > P / 2 - 1)
                    continue;
                const double w = t - j0;
                const cplx* row = G.data() + static_cast<std::size_t>(k) * P;
                value = (1.0 - w) * row[j0] + w * row[j0 + 1];
            }
            const double phase = (px + py) * (0.5 - 0.5 * P) * d;
            spec[static_cast<std::size_t>(jy) * P + jx] = value * std::polar(1.0, phase);
        }
    fft::transform(spec, {P, P}, fft::Sign::Backward);
    const double scale = 1.0 / (static_cast<double>(P) * P * d * d);
    SliceImage img{M, d, std::vector<cplx>(static_cast<std::size_t>(M) * M)};
    const int offset = (P - M) / 2;
    for (int iv = 0; iv < M; ++iv)
        for (int iu = 0; iu < M; ++iu)
            img(iu, iv) = scale * spec[static_cast<std::size_t>(iv + offset) * P + (iu + offset)];
    return img;
}

/// Detector data of one slice of one view as a planar sinogram.
inline SliceSinogram slice_of(const Sinogram& sino, std::size_t view, int slice)
{
    const ViewSet& v = sino.views();
    SliceSinogram g = SliceSinogram::zeros(v.angles_per_view, v.detector_count, v.detector_spacing());
    for (int k = 0; k < v.angles_per_view; ++k)
        for (int l = 0; l < v.detector_count; ++l)
            g(k, l) = sino(view, k, slice, l);
    return g;
}

namespace detail {

/// Four-point Lagrange weights for offsets -1, 0, 1, 2 at fraction t in [0, 1).
inline std::array<double, 4> cubic_weights(double t)
{
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

} // namespace detail

/// Slice-by-slice inversion of one view's ray family onto the canonical grid
/// of size n. Slices are planes x . omega = xi2; each voxel is backprojected
/// directly at its chart coordinates (x . a, x . b) in the four nearest
/// slices, which are combined by cubic interpolation in xi2. When a voxel
/// lies on a slice plane this reduces to that slice alone.
inline ScalarVolume invert_volume(const Sinogram& sino, std::size_t view, int n, const RampOptions& opt = {})
{
    const ViewSet& views = sino.views();
    require(view < views.view_count(), "invert_volume: view index out of range");
    require(n >= 1, "invert_volume: grid size must be positive");
    require(opt.padding >= 1 && opt.upsample >= 1, "invert_volume: padding and upsample must be positive");
    const int M = views.detector_count, Ms = views.slice_count;
    const double H = views.half_width;
    const double d = views.detector_spacing(), ds = views.slice_spacing();

    ScalarVolume out(n, H);
    const auto [a, b] = frame_basis(views.omegas[view]);
    const Vec3& w = views.omegas[view].vec();
    const std::size_t count = out.voxel_count();

    // Per voxel: the first of its four slices and the interpolation fraction.
    std::vector<int> first(count);
    std::vector<double> frac(count);
    std::vector<std::vector<std::uint32_t>> members(static_cast<std::size_t>(Ms));
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t idx = out.index(ix, iy, iz);
                const double t = (out.position(ix, iy, iz).dot(w) + H) / ds - 0.5;
                double fl = std::floor(t);
                double f = t - fl;
                if (f > 1.0 - 1e-9) { // snap onto a slice plane
                    fl += 1.0;
                    f = 0.0;
                } else if (f < 1e-9) {
                    f = 0.0;
                }
                first[idx] = static_cast<int>(fl) - 1;
                frac[idx] = f;
                for (int m = 0; m < 4; ++m) {
                    const int js = first[idx] + m;
                    if (js >= 0 && js < Ms && (f != 0.0 || m == 1))
                        members[static_cast<std::size_t>(js)].push_back(static_cast<std::uint32_t>(idx));
                }
            }

    // contrib[4 * voxel + m]: backprojection of slice first + m at the voxel;
    // each entry is written by exactly one slice.
    std::vector<cplx> contrib(4 * count, 0.0);
    parallel_for(static_cast<std::size_t>(Ms), [&](std::size_t jss) {
        const int js = static_cast<int>(jss);
        if (members[jss].empty())
            return;
        const SliceSinogram g = symmetrize(slice_of(sino, view, js));
        const auto q = detail::ramp_filter(g, opt);
        for (const std::uint32_t idx : members[jss]) {
            const Vec3 x = out.position(static_cast<int>(idx % n), static_cast<int>((idx / n) % n),
                                        static_cast<int>(idx / (static_cast<std::size_t>(n) * n)));
            contrib[4 * idx + static_cast<std::size_t>(js - first[idx])] =
                detail::backproject(q, g.angles, opt.padding * M, opt.upsample, d, x.dot(a.vec()), x.dot(b.vec()));
        }
    });

    parallel_for(count, [&](std::size_t idx) {
        if (frac[idx] == 0.0) {
            out.data()[idx] = contrib[4 * idx + 1];
            return;
        }
        const auto wts = detail::cubic_weights(frac[idx]);
        cplx v = 0.0;
        for (std::size_t m = 0; m < 4; ++m)
            v += wts[m] * contrib[4 * idx + m];
        out.data()[idx] = v;
    });
    return out;
}

} // namespace ptomo

#endif // PTOMO_RADON_HPP

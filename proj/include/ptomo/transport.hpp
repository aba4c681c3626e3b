#ifndef PTOMO_TRANSPORT_HPP
#define PTOMO_TRANSPORT_HPP

#include "field.hpp"
#include "geometry.hpp"

#include <concepts>
#include <span>
#include <string>
#include <vector>

namespace ptomo {

/// Anything that can be evaluated along rays: a grid field (trilinear) or an
/// analytic phantom. breakpoints() reports parameters where the sampled
/// function stops being smooth so integration steps never straddle them.
template <typename S>
concept TensorSampler = requires(const S& s, const Vec3& x, std::vector<double>& out) {
    { s.at(x) } -> std::convertible_to<Sym3>;
    { s.sampler_support() } -> std::convertible_to<double>;
    s.breakpoints(x, x, 0.0, 1.0, out);
};

template <typename S>
concept ScalarSampler = requires(const S& s, const Vec3& x, std::vector<double>& out) {
    { s.at(x) } -> std::convertible_to<cplx>;
    { s.sampler_support() } -> std::convertible_to<double>;
    s.breakpoints(x, x, 0.0, 1.0, out);
};

/// Scalar grid volume as a ray sampler. The support radius is the smallest
/// ball containing every nonzero voxel plus the interpolation stencil.
class VolumeSampler {
public:
    explicit VolumeSampler(const ScalarVolume& v) : v_(&v)
    {
        double r = 0.0;
        bool any = false;
        const int n = v.size();
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix)
                    if (v(ix, iy, iz) != cplx(0.0)) {
                        r = std::max(r, v.position(ix, iy, iz).norm());
                        any = true;
                    }
        support_ = any ? r + std::sqrt(3.0) * v.spacing() : 0.0;
    }

    cplx at(const Vec3& x) const { return x.norm() >= support_ ? cplx(0.0) : v_->sample(x); }
    double sampler_support() const { return support_; }
    void breakpoints(const Vec3& o, const Vec3& d, double s0, double s1, std::vector<double>& out) const
    {
        detail::grid_breakpoints(v_->size(), v_->half_width(), o, d, s0, s1, out);
    }

private:
    const ScalarVolume* v_;
    double support_ = 0.0;
};

/// Generator of the 2x2 transport system for a local tensor value:
/// [[w f w, w f p], [p f w, p f p]] with w = omega, p = theta_perp.
inline Mat2 local_F(const Sym3& f, const ViewFrame& frame)
{
    const Vec3& w = frame.omega().vec();
    const Vec3& p = frame.theta_perp().vec();
    CVec3 fw, fp;
    for (int i = 0; i < 3; ++i) {
        fw[i] = f(i, 0) * w[0] + f(i, 1) * w[1] + f(i, 2) * w[2];
        fp[i] = f(i, 0) * p[0] + f(i, 1) * p[1] + f(i, 2) * p[2];
    }
    Mat2 F;
    F(0, 0) = w[0] * fw[0] + w[1] * fw[1] + w[2] * fw[2];
    F(0, 1) = w[0] * fp[0] + w[1] * fp[1] + w[2] * fp[2];
    F(1, 0) = p[0] * fw[0] + p[1] * fw[1] + p[2] * fw[2];
    F(1, 1) = p[0] * fp[0] + p[1] * fp[1] + p[2] * fp[2];
    return F;
}

/// Parameter interval where the ray base + s*theta meets the ball of the
/// given radius; empty when the ray misses it.
struct Chord {
    double enter = 0.0;
    double exit = 0.0;
    bool empty() const { return !(exit > enter); }
    double length() const { return empty() ? 0.0 : exit - enter; }
};

inline Chord ball_chord(const Vec3& base, const Vec3& dir, double radius)
{
    // base . dir may be nonzero for sub-segment solves, so solve the quadratic.
    const double b = base.dot(dir);
    const double c = base.squaredNorm() - radius * radius;
    const double disc = b * b - c;
    if (disc <= 0.0)
        return {};
    const double r = std::sqrt(disc);
    return {-b - r, -b + r};
}

/// Integration substep boundaries on [s0, s1]: every breakpoint of the
/// sampler is a boundary, and each piece between breakpoints is split into
/// equal substeps no longer than step.
template <typename Sampler>
void substep_boundaries(const Sampler& sampler, const Vec3& base, const Vec3& dir, double s0, double s1, double step,
                        std::vector<double>& nodes, std::vector<double>& scratch)
{
    nodes.clear();
    scratch.clear();
    if (!(s1 > s0))
        return;
    scratch.push_back(s0);
    sampler.breakpoints(base, dir, s0, s1, scratch);
    scratch.push_back(s1);
    std::sort(scratch.begin() + 1, scratch.end() - 1);
    nodes.push_back(s0);
    for (std::size_t i = 1; i < scratch.size(); ++i) {
        const double a = scratch[i - 1], b = scratch[i];
        const double len = b - a;
        if (len <= 1e-13)
            continue;
        const int m = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
        for (int k = 1; k < m; ++k)
            nodes.push_back(a + len * k / m);
        nodes.push_back(b);
    }
}

/// RK4 for d(mu)/ds = F(base + s*theta) mu over [s0, s1] starting from mu = Id.
template <TensorSampler Sampler>
Mat2 solve_segment(const Sampler& sampler, const ViewFrame& frame, const Vec3& base, double s0, double s1, double step)
{
    require(step > 0.0, "solve_ray: step must be positive");
    Mat2 mu = Mat2::Identity();
    const Vec3& dir = frame.theta().vec();
    thread_local std::vector<double> nodes, scratch;
    substep_boundaries(sampler, base, dir, s0, s1, step, nodes, scratch);
    if (nodes.size() < 2)
        return mu;
    auto F_at = [&](double s) { return local_F(sampler.at(base + s * dir), frame); };
    Mat2 F0 = F_at(nodes[0]);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double h = nodes[i] - nodes[i - 1];
        const Mat2 Fm = F_at(nodes[i - 1] + 0.5 * h);
        const Mat2 F1 = F_at(nodes[i]);
        const Mat2 k1 = F0 * mu;
        const Mat2 k2 = Fm * (mu + (0.5 * h) * k1);
        const Mat2 k3 = Fm * (mu + (0.5 * h) * k2);
        const Mat2 k4 = F1 * (mu + h * k3);
        mu += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        F0 = F1;
    }
    return mu;
}

/// Scattering matrix S of one ray: the transport solution started at Id
/// where the ray enters the sampler's support ball, read off at the exit.
template <TensorSampler Sampler>
Mat2 solve_ray(const Sampler& sampler, const RayCoord& ray, double step)
{
    require(step > 0.0, "solve_ray: step must be positive");
    const Vec3 base = ray.base_point();
    const Chord chord = ball_chord(base, ray.frame.theta().vec(), sampler.sampler_support());
    if (chord.empty())
        return Mat2::Identity();
    return solve_segment(sampler, ray.frame, base, chord.enter, chord.exit, step);
}

enum class SinogramKind { S11, Residual, Classical };

inline std::string to_string(SinogramKind k)
{
    switch (k) {
    case SinogramKind::S11: return "S11";
    case SinogramKind::Residual: return "residual";
    case SinogramKind::Classical: return "classical";
    }
    return "unknown";
}

inline SinogramKind sinogram_kind_from_string(const std::string& s)
{
    if (s == "S11")
        return SinogramKind::S11;
    if (s == "residual")
        return SinogramKind::Residual;
    if (s == "classical")
        return SinogramKind::Classical;
    throw FormatError("unknown sinogram kind '" + s + "'");
}

/// Complex samples over the ray families of a ViewSet, laid out view-major,
/// then angle, slice, detector.
class Sinogram {
public:
    Sinogram() = default;
    Sinogram(ViewSet views, SinogramKind kind, cplx fill = 0.0)
        : views_(std::move(views)), kind_(kind), data_(views_.view_count() * views_.samples_per_view(), fill)
    {
    }

    const ViewSet& views() const { return views_; }
    SinogramKind kind() const { return kind_; }
    void set_kind(SinogramKind k) { kind_ = k; }

    std::size_t index(std::size_t view, int k, int slice, int det) const
    {
        return ((view * static_cast<std::size_t>(views_.angles_per_view) + static_cast<std::size_t>(k)) *
                    static_cast<std::size_t>(views_.slice_count) +
                static_cast<std::size_t>(slice)) *
                   static_cast<std::size_t>(views_.detector_count) +
               static_cast<std::size_t>(det);
    }

    cplx operator()(std::size_t view, int k, int slice, int det) const { return data_[index(view, k, slice, det)]; }
    cplx& operator()(std::size_t view, int k, int slice, int det) { return data_[index(view, k, slice, det)]; }

    std::span<cplx> block(std::size_t view)
    {
        return std::span<cplx>(data_).subspan(view * views_.samples_per_view(), views_.samples_per_view());
    }
    std::span<const cplx> block(std::size_t view) const
    {
        return std::span<const cplx>(data_).subspan(view * views_.samples_per_view(), views_.samples_per_view());
    }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    double sup_norm() const
    {
        double m = 0.0;
        for (const auto& v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    /// this - other, sample by sample, tagged with the given kind.
    Sinogram difference(const Sinogram& other, SinogramKind kind) const
    {
        require(views_.same_sampling(other.views_), "Sinogram: sampling mismatch");
        Sinogram out(views_, kind);
        for (std::size_t i = 0; i < data_.size(); ++i)
            out.data_[i] = data_[i] - other.data_[i];
        return out;
    }

    friend bool operator==(const Sinogram& a, const Sinogram& b)
    {
        return a.views_.same_sampling(b.views_) && a.kind_ == b.kind_ && a.data_ == b.data_;
    }

private:
    ViewSet views_;
    SinogramKind kind_ = SinogramKind::S11;
    std::vector<cplx> data_;
};

/// Visits every (view, angle) pair in parallel; the pair's samples are the
/// only ones the visitor writes.
template <typename Visitor>
void for_each_view_angle(const ViewSet& views, Visitor&& visit)
{
    const std::size_t count = views.view_count() * static_cast<std::size_t>(views.angles_per_view);
    parallel_for(count, [&](std::size_t idx) {
        visit(idx / static_cast<std::size_t>(views.angles_per_view),
              static_cast<int>(idx % static_cast<std::size_t>(views.angles_per_view)));
    });
}

/// Default transport step: half the grid spacing.
inline double default_step(const TensorField& field) { return 0.5 * field.spacing(); }

/// S11 over every sampled ray of the view set (RK4 path).
template <TensorSampler Sampler>
Sinogram forward_s11(const Sampler& field, const ViewSet& views, double step)
{
    require(step > 0.0, "forward_s11: step must be positive");
    Sinogram out(views, SinogramKind::S11);
    for_each_view_angle(views, [&](std::size_t view, int k) {
        const ViewFrame frame = views.frame(view, k);
        for (int j = 0; j < views.slice_count; ++j)
            for (int l = 0; l < views.detector_count; ++l) {
                const RayCoord ray{frame, views.detector_position(l), views.slice_position(j)};
                out(view, k, j, l) = solve_ray(field, ray, step)(0, 0);
            }
    });
    return out;
}

/// Full 2x2 scattering matrices over the view set, same layout as Sinogram.
template <TensorSampler Sampler>
std::vector<Mat2> forward_scattering(const Sampler& field, const ViewSet& views, double step)
{
    std::vector<Mat2> out(views.view_count() * views.samples_per_view());
    Sinogram layout(views, SinogramKind::S11);
    for_each_view_angle(views, [&](std::size_t view, int k) {
        const ViewFrame frame = views.frame(view, k);
        for (int j = 0; j < views.slice_count; ++j)
            for (int l = 0; l < views.detector_count; ++l) {
                const RayCoord ray{frame, views.detector_position(l), views.slice_position(j)};
                out[layout.index(view, k, j, l)] = solve_ray(field, ray, step);
            }
    });
    return out;
}

/// S of one ray from the Born series Id + sum_j I(w_j), w_1 = F,
/// w_j = F * D(w_{j-1}), where D is the running integral from the entry point.
/// Running integrals use Simpson to substep ends and the matching three-point
/// rule to midpoints, on the same nodes as the RK4 path.
template <TensorSampler Sampler>
Mat2 neumann_ray(const Sampler& sampler, const RayCoord& ray, int terms, double step)
{
    require(terms >= 1, "forward_s11_neumann: terms must be at least 1");
    require(step > 0.0, "forward_s11_neumann: step must be positive");
    const Vec3 base = ray.base_point();
    const Vec3& dir = ray.frame.theta().vec();
    const Chord chord = ball_chord(base, dir, sampler.sampler_support());
    if (chord.empty())
        return Mat2::Identity();
    thread_local std::vector<double> nodes, scratch;
    substep_boundaries(sampler, base, dir, chord.enter, chord.exit, step, nodes, scratch);
    const std::size_t substeps = nodes.size() - 1;
    if (nodes.size() < 2)
        return Mat2::Identity();

    // Fine nodes: substep ends at even indices, midpoints at odd indices.
    const std::size_t fine = 2 * substeps + 1;
    std::vector<Mat2> F(fine), w(fine), cum(fine);
    for (std::size_t i = 0; i < substeps; ++i) {
        const double h = nodes[i + 1] - nodes[i];
        F[2 * i] = local_F(sampler.at(base + nodes[i] * dir), ray.frame);
        F[2 * i + 1] = local_F(sampler.at(base + (nodes[i] + 0.5 * h) * dir), ray.frame);
    }
    F[fine - 1] = local_F(sampler.at(base + nodes.back() * dir), ray.frame);

    auto integrate = [&](const std::vector<Mat2>& g) {
        Mat2 total = Mat2::Zero();
        for (std::size_t i = 0; i < substeps; ++i) {
            const double h = nodes[i + 1] - nodes[i];
            total += (h / 6.0) * (g[2 * i] + 4.0 * g[2 * i + 1] + g[2 * i + 2]);
        }
        return total;
    };

    Mat2 S = Mat2::Identity();
    w = F;
    S += integrate(w);
    for (int j = 2; j <= terms; ++j) {
        cum[0] = Mat2::Zero();
        for (std::size_t i = 0; i < substeps; ++i) {
            const double h = nodes[i + 1] - nodes[i];
            const Mat2& g0 = w[2 * i];
            const Mat2& gm = w[2 * i + 1];
            const Mat2& g1 = w[2 * i + 2];
            cum[2 * i + 1] = cum[2 * i] + (h / 24.0) * (5.0 * g0 + 8.0 * gm - g1);
            cum[2 * i + 2] = cum[2 * i] + (h / 6.0) * (g0 + 4.0 * gm + g1);
        }
        for (std::size_t i = 0; i < fine; ++i)
            w[i] = F[i] * cum[i];
        S += integrate(w);
    }
    return S;
}

/// S11 over the view set from the truncated Born series (validation path).
template <TensorSampler Sampler>
Sinogram forward_s11_neumann(const Sampler& field, const ViewSet& views, int terms, double step)
{
    require(terms >= 1, "forward_s11_neumann: terms must be at least 1");
    Sinogram out(views, SinogramKind::S11);
    for_each_view_angle(views, [&](std::size_t view, int k) {
        const ViewFrame frame = views.frame(view, k);
        for (int j = 0; j < views.slice_count; ++j)
            for (int l = 0; l < views.detector_count; ++l) {
                const RayCoord ray{frame, views.detector_position(l), views.slice_position(j)};
                out(view, k, j, l) = neumann_ray(field, ray, terms, step)(0, 0);
            }
    });
    return out;
}

/// Line integral of a scalar sampler along one ray: composite Simpson on the
/// substep grid, exact for the piecewise-cubic trilinear interpolant.
template <ScalarSampler Sampler>
cplx line_integral(const Sampler& sampler, const Vec3& base, const Vec3& dir, double step)
{
    const Chord chord = ball_chord(base, dir, sampler.sampler_support());
    if (chord.empty())
        return 0.0;
    thread_local std::vector<double> nodes, scratch;
    substep_boundaries(sampler, base, dir, chord.enter, chord.exit, step, nodes, scratch);
    if (nodes.size() < 2)
        return 0.0;
    cplx total = 0.0;
    cplx g0 = sampler.at(base + nodes[0] * dir);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double h = nodes[i] - nodes[i - 1];
        const cplx gm = sampler.at(base + (nodes[i - 1] + 0.5 * h) * dir);
        const cplx g1 = sampler.at(base + nodes[i] * dir);
        total += (h / 6.0) * (g0 + 4.0 * gm + g1);
        g0 = g1;
    }
    return total;
}

/// Classical ray transform of one view's ray family into the matching block.
template <ScalarSampler Sampler>
void ray_transform_view(const Sampler& sampler, const ViewSet& views, std::size_t view, double step, Sinogram& out)
{
    require(step > 0.0, "classical_ray_transform: step must be positive");
    parallel_for(static_cast<std::size_t>(views.angles_per_view), [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        const ViewFrame frame = views.frame(view, k);
        const Vec3& dir = frame.theta().vec();
        for (int j = 0; j < views.slice_count; ++j)
            for (int l = 0; l < views.detector_count; ++l) {
                const RayCoord ray{frame, views.detector_position(l), views.slice_position(j)};
                out(view, k, j, l) = line_integral(sampler, ray.base_point(), dir, step);
            }
    });
}

template <ScalarSampler Sampler>
Sinogram classical_ray_transform(const Sampler& sampler, const ViewSet& views, double step)
{
    Sinogram out(views, SinogramKind::Classical);
    for (std::size_t view = 0; view < views.view_count(); ++view)
        ray_transform_view(sampler, views, view, step, out);
    return out;
}

inline Sinogram classical_ray_transform(const ScalarVolume& volume, const ViewSet& views, double step = 0.0)
{
    if (step <= 0.0)
        step = 0.5 * volume.spacing();
    return classical_ray_transform(VolumeSampler(volume), views, step);
}

} // namespace ptomo

#endif // PTOMO_TRANSPORT_HPP

#ifndef PTOMO_FIELD_HPP
#define PTOMO_FIELD_HPP

#include "core.hpp"

#include <array>
#include <vector>

namespace ptomo {

/// Complex scalar samples on the cell-centred grid of [-H, H]^3, x fastest.
class ScalarVolume {
public:
    ScalarVolume() = default;

    ScalarVolume(int n, double half_width) : n_(n), half_width_(half_width), data_(static_cast<std::size_t>(n) * n * n)
    {
        require(n >= 1, "ScalarVolume: grid size must be positive");
        require(half_width > 0.0, "ScalarVolume: half_width must be positive");
    }

    int size() const { return n_; }
    double half_width() const { return half_width_; }
    double spacing() const { return 2.0 * half_width_ / n_; }
    double center(int i) const { return -half_width_ + (i + 0.5) * spacing(); }
    Vec3 position(int ix, int iy, int iz) const { return Vec3(center(ix), center(iy), center(iz)); }
    std::size_t voxel_count() const { return data_.size(); }

    std::size_t index(int ix, int iy, int iz) const
    {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n_) * (static_cast<std::size_t>(iy) + static_cast<std::size_t>(n_) * iz);
    }

    cplx operator()(int ix, int iy, int iz) const { return data_[index(ix, iy, iz)]; }
    cplx& operator()(int ix, int iy, int iz) { return data_[index(ix, iy, iz)]; }

    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }

    bool same_grid(const ScalarVolume& o) const { return n_ == o.n_ && half_width_ == o.half_width_; }

    /// Trilinear interpolation; samples outside the grid count as zero.
    cplx sample(const Vec3& x) const;

    ScalarVolume& operator+=(const ScalarVolume& o)
    {
        require(same_grid(o), "ScalarVolume: grid mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }

    ScalarVolume& operator-=(const ScalarVolume& o)
    {
        require(same_grid(o), "ScalarVolume: grid mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }

    ScalarVolume& operator*=(cplx s)
    {
        for (auto& v : data_)
            v *= s;
        return *this;
    }

    friend bool operator==(const ScalarVolume&, const ScalarVolume&) = default;

private:
    int n_ = 0;
    double half_width_ = 1.0;
    std::vector<cplx> data_;
};

namespace detail {

/// Corner offsets and weights of the trilinear stencil around x.
struct TrilinearStencil {
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    int count = 0;
};

inline TrilinearStencil trilinear_stencil(int n, double half_width, const Vec3& x)
{
    TrilinearStencil st;
    const double h = 2.0 * half_width / n;
    std::array<int, 3> i0{};
    std::array<double, 3> w{};
    for (int a = 0; a < 3; ++a) {
        const double t = (x[a] + half_width) / h - 0.5;
        const double fl = std::floor(t);
        if (fl < -1.0 || fl > n - 1.0)
            return st;
        i0[static_cast<std::size_t>(a)] = static_cast<int>(fl);
        w[static_cast<std::size_t>(a)] = t - fl;
    }
    for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
        const int ix = i0[0] + dx, iy = i0[1] + dy, iz = i0[2] + dz;
        if (ix < 0 || iy < 0 || iz < 0 || ix >= n || iy >= n || iz >= n)
            continue;
        const double weight = (dx ? w[0] : 1.0 - w[0]) * (dy ? w[1] : 1.0 - w[1]) * (dz ? w[2] : 1.0 - w[2]);
        if (weight == 0.0)
            continue;
        st.index[static_cast<std::size_t>(st.count)] =
            static_cast<std::size_t>(ix) + static_cast<std::size_t>(n) * (static_cast<std::size_t>(iy) + static_cast<std::size_t>(n) * iz);
        st.weight[static_cast<std::size_t>(st.count)] = weight;
        ++st.count;
    }
    return st;
}

/// Ray parameters in (s0, s1) where o + s*d crosses a plane of voxel centres;
/// the trilinear interpolant is a cubic polynomial in s between them.
inline void grid_breakpoints(int n, double half_width, const Vec3& o, const Vec3& d, double s0, double s1,
                             std::vector<double>& out)
{
    const double h = 2.0 * half_width / n;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-14)
            continue;
        const double xa = o[a] + s0 * d[a];
        const double xb = o[a] + s1 * d[a];
        const double lo = std::min(xa, xb), hi = std::max(xa, xb);
        const int m0 = static_cast<int>(std::ceil((lo + half_width) / h - 0.5));
        const int m1 = static_cast<int>(std::floor((hi + half_width) / h - 0.5));
        for (int m = std::max(m0, 0); m <= std::min(m1, n - 1); ++m) {
            const double s = (-half_width + (m + 0.5) * h - o[a]) / d[a];
            if (s > s0 && s < s1)
                out.push_back(s);
        }
    }
}

} // namespace detail

inline cplx ScalarVolume::sample(const Vec3& x) const
{
    const auto st = detail::trilinear_stencil(n_, half_width_, x);
    cplx v = 0.0;
    for (int c = 0; c < st.count; ++c)
        v += st.weight[static_cast<std::size_t>(c)] * data_[st.index[static_cast<std::size_t>(c)]];
    return v;
}

/// Component order of the stored upper triangle.
inline constexpr std::array<std::pair<int, int>, 6> tensor_components{{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}}};
inline constexpr std::array<const char*, 6> tensor_component_names{"f11", "f22", "f33", "f12", "f13", "f23"};

/// Symmetric 3x3 complex tensor field: six scalar components on one grid and
/// the radius outside of which every component vanishes.
class TensorField {
public:
    TensorField() = default;

    TensorField(int n, double half_width, double support_radius) : support_radius_(support_radius)
    {
        require(support_radius > 0.0, "TensorField: support radius must be positive");
        for (auto& c : comps_)
            c = ScalarVolume(n, half_width);
    }

    int size() const { return comps_[0].size(); }
    std::size_t voxel_count() const { return comps_[0].voxel_count(); }
    double half_width() const { return comps_[0].half_width(); }
    double spacing() const { return comps_[0].spacing(); }
    double support_radius() const { return support_radius_; }
    void set_support_radius(double r) { support_radius_ = r; }

    ScalarVolume& component(std::size_t k) { return comps_.at(k); }
    const ScalarVolume& component(std::size_t k) const { return comps_.at(k); }
    ScalarVolume& component(int i, int j) { return comps_[static_cast<std::size_t>(Sym3::index(i, j))]; }
    const ScalarVolume& component(int i, int j) const { return comps_[static_cast<std::size_t>(Sym3::index(i, j))]; }

    Sym3 voxel(std::size_t idx) const
    {
        Sym3 s;
        for (std::size_t k = 0; k < 6; ++k)
            s.c[k] = comps_[k].data()[idx];
        return s;
    }

    void set_voxel(std::size_t idx, const Sym3& s)
    {
        for (std::size_t k = 0; k < 6; ++k)
            comps_[k].data()[idx] = s.c[k];
    }

    bool same_grid(const TensorField& o) const { return comps_[0].same_grid(o.comps_[0]); }

    /// Radius beyond which the trilinear interpolant is identically zero.
    double interpolation_support() const { return support_radius_ + std::sqrt(3.0) * spacing(); }

    /// Ray-sampler interface used by the transport and ray-transform code.
    Sym3 at(const Vec3& x) const;
    double sampler_support() const { return interpolation_support(); }
    void breakpoints(const Vec3& o, const Vec3& d, double s0, double s1, std::vector<double>& out) const
    {
        detail::grid_breakpoints(size(), half_width(), o, d, s0, s1, out);
    }

    TensorField& operator+=(const TensorField& o)
    {
        for (std::size_t k = 0; k < 6; ++k)
            comps_[k] += o.comps_[k];
        support_radius_ = std::max(support_radius_, o.support_radius_);
        return *this;
    }

    TensorField& operator-=(const TensorField& o)
    {
        for (std::size_t k = 0; k < 6; ++k)
            comps_[k] -= o.comps_[k];
        support_radius_ = std::max(support_radius_, o.support_radius_);
        return *this;
    }

    TensorField& operator*=(cplx s)
    {
        for (auto& c : comps_)
            c *= s;
        return *this;
    }

    friend bool operator==(const TensorField&, const TensorField&) = default;

private:
    std::array<ScalarVolume, 6> comps_;
    double support_radius_ = 1.0;
};

inline TensorField operator-(TensorField a, const TensorField& b)
{
    a -= b;
    return a;
}

inline TensorField operator+(TensorField a, const TensorField& b)
{
    a += b;
    return a;
}

inline TensorField operator*(TensorField a, cplx s)
{
    a *= s;
    return a;
}

/// Trilinear interpolation of every component; exact zero beyond the
/// interpolation support.
inline Sym3 sample_tensor(const TensorField& field, const Vec3& x)
{
    Sym3 out;
    if (x.norm() >= field.interpolation_support())
        return out;
    const auto st = detail::trilinear_stencil(field.size(), field.half_width(), x);
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& data = field.component(k).data();
        cplx v = 0.0;
        for (int c = 0; c < st.count; ++c)
            v += st.weight[static_cast<std::size_t>(c)] * data[st.index[static_cast<std::size_t>(c)]];
        out.c[k] = v;
    }
    return out;
}

inline Sym3 TensorField::at(const Vec3& x) const { return sample_tensor(*this, x); }

/// Smooth radial cutoff: 1 inside r0, 0 outside r1, C-infinity in between.
class Cutoff {
public:
    Cutoff(double r0, double r1) : r0_(r0), r1_(r1)
    {
        require(r0 > 0.0 && r0 < r1, "Cutoff: requires 0 < r0 < r1");
    }

    double r0() const { return r0_; }
    double r1() const { return r1_; }

    /// Transition profile on [0, 1]: 1 at t <= 0, 0 at t >= 1.
    static double profile(double t)
    {
        if (t <= 0.0)
            return 1.0;
        if (t >= 1.0)
            return 0.0;
        const double a = std::exp(-1.0 / (1.0 - t));
        const double b = std::exp(-1.0 / t);
        return a / (a + b);
    }

    double radial(double r) const { return profile((r - r0_) / (r1_ - r0_)); }
    double operator()(const Vec3& x) const { return radial(x.norm()); }

private:
    double r0_;
    double r1_;
};

inline Cutoff make_cutoff(double r0, double r1) { return Cutoff(r0, r1); }

/// Pointwise multiplication by the cutoff. The support radius of the result
/// is min(field support, r1).
inline TensorField apply_cutoff(const Cutoff& chi, const TensorField& field)
{
    TensorField out = field;
    const int n = field.size();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Vec3 x = field.component(0).position(ix, iy, iz);
                const double w = chi(x);
                if (w == 1.0)
                    continue;
                const std::size_t idx = field.component(0).index(ix, iy, iz);
                for (std::size_t k = 0; k < 6; ++k)
                    out.component(k).data()[idx] *= w;
            }
    out.set_support_radius(std::min(field.support_radius(), chi.r1()));
    return out;
}

/// One smooth compactly supported bump exp(1 - 1/(1 - t^2)), t = |x - c| / radius,
/// times a symmetric amplitude.
struct Bump {
    Vec3 center = Vec3::Zero();
    double radius = 0.5;
    Sym3 amplitude;

    static double profile(double t)
    {
        if (t >= 1.0)
            return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
};

/// Analytic sum of bumps. Doubles as a ray sampler that evaluates the field
/// exactly instead of interpolating a grid.
class BumpPhantom {
public:
    BumpPhantom() = default;
    BumpPhantom(std::vector<Bump> bumps, double support_radius) : bumps_(std::move(bumps)), support_radius_(support_radius)
    {
        require(support_radius > 0.0, "BumpPhantom: support radius must be positive");
        for (std::size_t b = 0; b < bumps_.size(); ++b) {
            const auto& bump = bumps_[b];
            require(bump.radius > 0.0, "bump " + std::to_string(b) + ": radius must be positive");
            require(bump.center.norm() + bump.radius <= support_radius + 1e-12,
                    "bump " + std::to_string(b) + ": ball leaks outside the support radius");
        }
    }

    const std::vector<Bump>& bumps() const { return bumps_; }
    double support_radius() const { return support_radius_; }

    Sym3 at(const Vec3& x) const
    {
        Sym3 out;
        for (const auto& b : bumps_) {
            const double w = Bump::profile((x - b.center).norm() / b.radius);
            if (w == 0.0)
                continue;
            for (std::size_t k = 0; k < 6; ++k)
                out.c[k] += w * b.amplitude.c[k];
        }
        return out;
    }

    double sampler_support() const { return support_radius_; }
    void breakpoints(const Vec3&, const Vec3&, double, double, std::vector<double>&) const {}

    BumpPhantom scaled(cplx s) const
    {
        BumpPhantom out = *this;
        for (auto& b : out.bumps_)
            b.amplitude *= s;
        return out;
    }

    TensorField rasterize(int n, double half_width) const
    {
        TensorField f(n, half_width, support_radius_);
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix) {
                    const Vec3 x = f.component(0).position(ix, iy, iz);
                    if (x.norm() >= support_radius_)
                        continue;
                    f.set_voxel(f.component(0).index(ix, iy, iz), at(x));
                }
        return f;
    }

private:
    std::vector<Bump> bumps_;
    double support_radius_ = 0.8;
};

/// Grid phantom from a list of bumps; each ball must lie inside |x| <= r0.
inline TensorField bump_phantom(int n, double half_width, double r0, const std::vector<Bump>& bumps)
{
    return BumpPhantom(bumps, r0).rasterize(n, half_width);
}

/// Largest magnitude of each stored component over the grid.
inline std::array<double, 6> peak_magnitudes(const TensorField& f)
{
    std::array<double, 6> peaks{};
    for (std::size_t k = 0; k < 6; ++k)
        for (const auto& v : f.component(k).data())
            peaks[k] = std::max(peaks[k], std::abs(v));
    return peaks;
}

inline double sup_norm(const ScalarVolume& v)
{
    double m = 0.0;
    for (const auto& x : v.data())
        m = std::max(m, std::abs(x));
    return m;
}

/// Voxel sup of the entrywise max norm.
inline double sup_norm(const TensorField& f)
{
    const auto p = peak_magnitudes(f);
    return *std::max_element(p.begin(), p.end());
}

inline double l2_norm(const ScalarVolume& v)
{
    double s = 0.0;
    for (const auto& x : v.data())
        s += std::norm(x);
    return std::sqrt(s);
}

/// Two-bump phantom used throughout the tests and the CLI defaults: purely
/// imaginary symmetric amplitudes (the physically admissible class), peak
/// entry magnitude 1 before scaling.
inline BumpPhantom standard_phantom(double r0 = 0.8)
{
    Bump a;
    a.center = Vec3(0.2, -0.15, 0.1);
    a.radius = 0.45;
    Bump b;
    b.center = Vec3(-0.3, 0.25, -0.2);
    b.radius = 0.35;
    const cplx i(0.0, 1.0);
    a.amplitude.c = {1.0 * i, 0.6 * i, 0.8 * i, 0.3 * i, -0.25 * i, 0.2 * i};
    b.amplitude.c = {-0.5 * i, 0.9 * i, 0.4 * i, -0.35 * i, 0.3 * i, 0.45 * i};
    BumpPhantom p({a, b}, r0);
    return p;
}

} // namespace ptomo

#endif // PTOMO_FIELD_HPP

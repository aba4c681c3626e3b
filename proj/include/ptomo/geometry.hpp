#ifndef PTOMO_GEOMETRY_HPP
#define PTOMO_GEOMETRY_HPP

#include "core.hpp"

#include <Eigen/Geometry>

#include <vector>

namespace ptomo {

/// Unit vector in R^3.
class Direction {
public:
    Direction() : v_(0.0, 0.0, 1.0) {}

    explicit Direction(const Vec3& v) : v_(v)
    {
        require(std::abs(v.norm() - 1.0) <= 1e-12, "Direction: vector is not unit length");
    }

    static Direction normalized(const Vec3& v)
    {
        const double n = v.norm();
        require(n > 0.0 && std::isfinite(n), "Direction: cannot normalize a zero vector");
        return Direction(v / n);
    }

    const Vec3& vec() const { return v_; }
    double operator[](int i) const { return v_[i]; }
    Direction operator-() const { return Direction(-v_); }

private:
    Vec3 v_;
};

/// Deterministic chart (a, b) of the circle of unit vectors orthogonal to
/// omega, with (a, b, omega) right-handed.
inline std::pair<Direction, Direction> frame_basis(const Direction& omega)
{
    const Vec3& w = omega.vec();
    Vec3 a;
    if (std::abs(w.z()) < 0.9)
        a = Vec3::UnitZ().cross(w);
    else
        a = Vec3::UnitY().cross(w);
    a.normalize();
    Vec3 b = w.cross(a);
    b.normalize();
    return {Direction(a), Direction(b)};
}

/// Orthonormal triple (theta, theta_perp, omega) with theta_perp = omega x theta.
class ViewFrame {
public:
    ViewFrame(const Direction& omega, const Direction& theta)
        : omega_(omega), theta_(theta), theta_perp_(Direction::normalized(omega.vec().cross(theta.vec())))
    {
        require(std::abs(theta.vec().dot(omega.vec())) <= 1e-12, "ViewFrame: theta is not orthogonal to omega");
    }

    /// Frame at angle phi on the circle orthogonal to omega, measured in the
    /// chart returned by frame_basis.
    static ViewFrame at_angle(const Direction& omega, double phi)
    {
        const auto [a, b] = frame_basis(omega);
        return ViewFrame(omega, Direction::normalized(std::cos(phi) * a.vec() + std::sin(phi) * b.vec()));
    }

    const Direction& omega() const { return omega_; }
    const Direction& theta() const { return theta_; }
    const Direction& theta_perp() const { return theta_perp_; }

    /// Same omega, opposite orientation.
    ViewFrame reversed() const { return ViewFrame(omega_, -theta_); }

private:
    Direction omega_;
    Direction theta_;
    Direction theta_perp_;
};

/// A ray in the family perpendicular to omega: base point
/// xi1 * theta_perp + xi2 * omega, direction theta.
struct RayCoord {
    ViewFrame frame;
    double xi1 = 0.0;
    double xi2 = 0.0;

    Vec3 base_point() const { return xi1 * frame.theta_perp().vec() + xi2 * frame.omega().vec(); }

    /// Coordinates of a point x with x . theta = 0.
    static RayCoord encode(const ViewFrame& frame, const Vec3& x)
    {
        return RayCoord{frame, x.dot(frame.theta_perp().vec()), x.dot(frame.omega().vec())};
    }
};

/// Orthogonal projector onto {z : z . theta = 0} (bilinear dot product).
inline CVec3 project_transverse(const Direction& theta, const CVec3& z)
{
    const Vec3& t = theta.vec();
    const cplx dot = z[0] * t[0] + z[1] * t[1] + z[2] * t[2];
    return z - dot * t.cast<cplx>();
}

/// The six view directions together with the sampling of each ray family:
/// K angles on the full circle, detector and slice grids of cell-centred
/// samples on [-H, H].
struct ViewSet {
    std::vector<Direction> omegas;
    int angles_per_view = 0;
    int detector_count = 0;
    int slice_count = 0;
    double half_width = 1.0;

    std::size_t view_count() const { return omegas.size(); }

    double angle(int k) const { return 2.0 * pi * k / angles_per_view; }
    double detector_spacing() const { return 2.0 * half_width / detector_count; }
    double slice_spacing() const { return 2.0 * half_width / slice_count; }
    double detector_position(int l) const { return -half_width + (l + 0.5) * detector_spacing(); }
    double slice_position(int j) const { return -half_width + (j + 0.5) * slice_spacing(); }

    ViewFrame frame(std::size_t view, int k) const { return ViewFrame::at_angle(omegas.at(view), angle(k)); }

    RayCoord ray(std::size_t view, int k, int slice, int detector) const
    {
        return RayCoord{frame(view, k), detector_position(detector), slice_position(slice)};
    }

    std::size_t samples_per_view() const
    {
        return static_cast<std::size_t>(angles_per_view) * slice_count * detector_count;
    }

    bool same_sampling(const ViewSet& o) const
    {
        if (omegas.size() != o.omegas.size() || angles_per_view != o.angles_per_view ||
            detector_count != o.detector_count || slice_count != o.slice_count || half_width != o.half_width)
            return false;
        for (std::size_t i = 0; i < omegas.size(); ++i)
            if (omegas[i].vec() != o.omegas[i].vec())
                return false;
        return true;
    }
};

/// e1, e2, e3, (e1+e2)/sqrt2, (e1+e3)/sqrt2, (e2+e3)/sqrt2.
inline std::vector<Direction> standard_directions()
{
    const double r = 1.0 / std::sqrt(2.0);
    return {Direction(Vec3(1, 0, 0)), Direction(Vec3(0, 1, 0)), Direction(Vec3(0, 0, 1)),
            Direction(Vec3(r, r, 0)), Direction(Vec3(r, 0, r)), Direction(Vec3(0, r, r))};
}

inline bool is_standard(const ViewSet& views)
{
    const auto ref = standard_directions();
    if (views.omegas.size() != ref.size())
        return false;
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (views.omegas[i].vec() != ref[i].vec())
            return false;
    return true;
}

inline ViewSet standard_views(int angles, int samples, double half_width)
{
    require(angles >= 8 && angles % 2 == 0, "standard_views: angle count must be even and at least 8");
    require(samples >= 8, "standard_views: detector/slice count must be at least 8");
    require(half_width > 0.0, "standard_views: half_width must be positive");
    return ViewSet{standard_directions(), angles, samples, samples, half_width};
}

} // namespace ptomo

#endif // PTOMO_GEOMETRY_HPP

#ifndef PTOMO_TENSOR_INVERSION_HPP
#define PTOMO_TENSOR_INVERSION_HPP

#include "radon.hpp"

namespace ptomo {

/// Scalar data on the six standard ray families (one sinogram block per
/// direction), e.g. the transverse ray transform or a residual of S11.
class LambdaData {
public:
    LambdaData() = default;

    explicit LambdaData(Sinogram sino) : sino_(std::move(sino))
    {
        require(is_standard(sino_.views()), "LambdaData: requires the six standard view directions");
        require(sino_.kind() == SinogramKind::Residual || sino_.kind() == SinogramKind::Classical,
                "LambdaData: blocks must be residual or classical data");
    }

    const Sinogram& sinogram() const { return sino_; }
    Sinogram& sinogram() { return sino_; }
    const ViewSet& views() const { return sino_.views(); }

    /// Exchanges two blocks (used to probe which outputs depend on which views).
    void swap_blocks(std::size_t i, std::size_t j)
    {
        auto a = sino_.block(i);
        auto b = sino_.block(j);
        std::swap_ranges(a.begin(), a.end(), b.begin());
    }

    friend bool operator==(const LambdaData&, const LambdaData&) = default;

private:
    Sinogram sino_;
};

/// omega^T f omega at every voxel.
inline ScalarVolume contract(const TensorField& field, const Direction& omega)
{
    ScalarVolume out(field.size(), field.half_width());
    const Vec3& w = omega.vec();
    for (std::size_t i = 0; i < out.voxel_count(); ++i)
        out.data()[i] = field.voxel(i).contract(w, w);
    return out;
}

/// Jf on the standard ray families: the classical ray transform of the
/// contraction omega f omega for each direction omega.
inline LambdaData transverse_transform(const TensorField& field, const ViewSet& views, double step = 0.0)
{
    require(is_standard(views), "transverse_transform: requires the six standard view directions");
    if (step <= 0.0)
        step = default_step(field);
    Sinogram out(views, SinogramKind::Classical);
    for (std::size_t view = 0; view < views.view_count(); ++view) {
        const ScalarVolume scalar = contract(field, views.omegas[view]);
        ray_transform_view(VolumeSampler(scalar), views, view, step, out);
    }
    return LambdaData(std::move(out));
}

/// Assembles the symmetric field from the six per-direction slice-by-slice
/// inversions u_i: diagonal entries first (f_jj = u_j), then
/// f12 = u4 - (f11 + f22)/2, f13 = u5 - (f11 + f33)/2, f23 = u6 - (f22 + f33)/2.
/// Works on arbitrary data; no projection onto the range of J.
inline TensorField invert_lambda(const LambdaData& data, int n, const RampOptions& opt = {})
{
    const ViewSet& views = data.views();
    require(views.view_count() == 6, "invert_lambda: six blocks required");
    std::array<ScalarVolume, 6> u;
    for (std::size_t i = 0; i < 6; ++i)
        u[i] = invert_volume(data.sinogram(), i, n, opt);

    // The result has no a priori support; the cube's circumradius bounds it.
    TensorField f(n, views.half_width, std::sqrt(3.0) * views.half_width);
    f.component(0, 0) = u[0];
    f.component(1, 1) = u[1];
    f.component(2, 2) = u[2];
    auto off_diagonal = [&](int i, int j, const ScalarVolume& ui) {
        ScalarVolume out = ui;
        const auto& fii = f.component(i, i).data();
        const auto& fjj = f.component(j, j).data();
        for (std::size_t v = 0; v < out.voxel_count(); ++v)
            out.data()[v] -= 0.5 * (fii[v] + fjj[v]);
        f.component(i, j) = std::move(out);
    };
    off_diagonal(0, 1, u[3]);
    off_diagonal(0, 2, u[4]);
    off_diagonal(1, 2, u[5]);
    return f;
}

} // namespace ptomo

#endif // PTOMO_TENSOR_INVERSION_HPP

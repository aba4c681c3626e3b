#ifndef PTOMO_RECONSTRUCT_HPP
#define PTOMO_RECONSTRUCT_HPP

#include "norms.hpp"
#include "tensor_inversion.hpp"
#include "transport.hpp"

#include <chrono>
#include <optional>
#include <vector>

namespace ptomo {

enum class ForwardKind { RK4, Neumann };

struct ReconConfig {
    int grid_n = 64;
    int max_iters = 10;
    double stop_tol = 1e-4;
    double step = 0.0; ///< transport step; 0 selects half the grid spacing
    double sigma = 4.0;
    ForwardKind forward = ForwardKind::RK4;
    int neumann_terms = 12;
    RampOptions ramp{};

    void validate() const
    {
        require(grid_n >= 2, "ReconConfig: grid size must be at least 2");
        require(max_iters >= 1, "ReconConfig: max_iters must be at least 1");
        require(stop_tol > 0.0, "ReconConfig: stop_tol must be positive");
        require(sigma > 3.0, "ReconConfig: sigma must exceed 3");
        require(step >= 0.0, "ReconConfig: step must be non-negative");
        require(neumann_terms >= 1, "ReconConfig: neumann terms must be at least 1");
    }
};

struct IterationRecord {
    int n = 0;
    double residual_sup = 0.0; ///< sup |Delta^{n-1}| of the data that produced f^n
    double update_sup = 0.0;   ///< sup |f^n - f^{n-1}| (f^0 = 0)
    std::optional<double> err_sup;
    std::optional<double> err_fourier;
    double seconds = 0.0;
};

struct ReconState {
    TensorField iterate;
    std::vector<IterationRecord> history;
    bool converged = false;
    bool diverged = false;

    int n() const { return history.empty() ? 0 : history.back().n; }
};

/// S11 of a grid field by the configured forward solver.
inline Sinogram forward_data(const TensorField& f, const ViewSet& views, const ReconConfig& cfg)
{
    const double step = cfg.step > 0.0 ? cfg.step : default_step(f);
    if (cfg.forward == ForwardKind::Neumann)
        return forward_s11_neumann(f, views, cfg.neumann_terms, step);
    return forward_s11(f, views, step);
}

/// f^1 = chi * Jinv(S11 - 1).
inline TensorField initial_estimate(const Sinogram& s11, const Cutoff& chi, int n, const RampOptions& opt = {})
{
    require(s11.kind() == SinogramKind::S11, "initial_estimate: expected S11 data");
    require(is_standard(s11.views()), "initial_estimate: requires the six standard view directions");
    Sinogram delta(s11.views(), SinogramKind::Residual);
    for (std::size_t i = 0; i < delta.data().size(); ++i)
        delta.data()[i] = s11.data()[i] - 1.0;
    return apply_cutoff(chi, invert_lambda(LambdaData(std::move(delta)), n, opt));
}

namespace detail {

inline void record_errors(IterationRecord& rec, const TensorField& iterate, const TensorField* truth, double sigma)
{
    if (truth == nullptr)
        return;
    const TensorField err = *truth - iterate;
    rec.err_sup = sup_norm(err);
    rec.err_fourier = hat_linf_sigma(err, sigma);
}

inline bool growing_updates(const std::vector<IterationRecord>& h)
{
    const std::size_t k = h.size();
    return k >= 3 && h[k - 1].update_sup > h[k - 2].update_sup && h[k - 2].update_sup > h[k - 3].update_sup;
}

} // namespace detail

/// One step of the fixed-point scheme: forward-project f^n, take the S11
/// residual Delta^n = S11 - S11^n, and set f^{n+1} = chi (f^n + Jinv Delta^n).
inline ReconState refine(const Sinogram& s11, ReconState state, const Cutoff& chi, const ReconConfig& cfg,
                         const TensorField* truth = nullptr)
{
    cfg.validate();
    require(s11.kind() == SinogramKind::S11, "refine: expected S11 data");
    const auto start = std::chrono::steady_clock::now();
    const Sinogram predicted = forward_data(state.iterate, s11.views(), cfg);
    const Sinogram delta = s11.difference(predicted, SinogramKind::Residual);

    TensorField next = state.iterate;
    next += invert_lambda(LambdaData(delta), state.iterate.size(), cfg.ramp);
    next = apply_cutoff(chi, next);

    IterationRecord rec;
    rec.n = state.n() + 1;
    rec.residual_sup = delta.sup_norm();
    rec.update_sup = sup_norm(next - state.iterate);
    state.iterate = std::move(next);
    detail::record_errors(rec, state.iterate, truth, cfg.sigma);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    state.history.push_back(rec);
    if (detail::growing_updates(state.history))
        state.diverged = true;
    return state;
}

/// Linearized estimate followed by refinement until the update relative to
/// |f^1| drops below stop_tol, max_iters iterates exist, or the updates grow
/// twice in a row (divergence).
inline ReconState run(const Sinogram& s11, const Cutoff& chi, const ReconConfig& cfg,
                      const std::optional<TensorField>& truth = std::nullopt)
{
    cfg.validate();
    const TensorField* t = truth ? &*truth : nullptr;
    const auto start = std::chrono::steady_clock::now();
    ReconState state;
    state.iterate = initial_estimate(s11, chi, cfg.grid_n, cfg.ramp);
    IterationRecord first;
    first.n = 1;
    first.residual_sup = 0.0;
    for (const auto& v : s11.data())
        first.residual_sup = std::max(first.residual_sup, std::abs(v - 1.0));
    first.update_sup = sup_norm(state.iterate);
    detail::record_errors(first, state.iterate, t, cfg.sigma);
    first.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    state.history.push_back(first);

    const double scale = first.update_sup;
    if (scale == 0.0) {
        state.converged = true;
        return state;
    }
    while (state.n() < cfg.max_iters) {
        state = refine(s11, std::move(state), chi, cfg, t);
        if (state.diverged)
            break;
        if (state.history.back().update_sup / scale < cfg.stop_tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

} // namespace ptomo

#endif // PTOMO_RECONSTRUCT_HPP

#ifndef PTOMO_FFT_HPP
#define PTOMO_FFT_HPP

#include "core.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <vector>

namespace ptomo::fft {

enum class Sign { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

namespace detail {

class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    // Planning is not thread safe in FFTW; execution through the new-array
    // interface is.
    fftw_plan get(const std::vector<int>& dims, Sign sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(dims, static_cast<int>(sign));
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        std::size_t total = 1;
        for (int d : dims)
            total *= static_cast<std::size_t>(d);
        std::vector<cplx> scratch(total);
        auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr, static_cast<int>(sign),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr)
            throw std::runtime_error("fftw: planning failed");
        plans_.emplace(std::move(key), plan);
        return plan;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

} // namespace detail

/// Unnormalized in-place DFT over a row-major array with the given extents
/// (the last extent varies fastest).
inline void transform(std::span<cplx> data, const std::vector<int>& dims, Sign sign)
{
    std::size_t total = 1;
    for (int d : dims)
        total *= static_cast<std::size_t>(d);
    require(total == data.size(), "fft: extent mismatch");
    fftw_plan plan = detail::PlanCache::instance().get(dims, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

/// Signed frequency index of DFT bin j on a length-n transform.
inline int signed_index(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }

} // namespace ptomo::fft

#endif // PTOMO_FFT_HPP

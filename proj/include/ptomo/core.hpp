#ifndef PTOMO_CORE_HPP
#define PTOMO_CORE_HPP

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ptomo {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3cd;

inline constexpr double pi = 3.14159265358979323846;

/// Raised when an operation receives arguments outside its domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on malformed or mismatched file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw InvalidParameter(message);
}

/// Symmetric 3x3 complex matrix stored as its upper triangle
/// (f11, f22, f33, f12, f13, f23).
struct Sym3 {
    std::array<cplx, 6> c{};

    static constexpr int index(int i, int j)
    {
        if (i > j)
            std::swap(i, j);
        if (i == j)
            return i;
        return i == 0 ? (j == 1 ? 3 : 4) : 5;
    }

    cplx operator()(int i, int j) const { return c[static_cast<std::size_t>(index(i, j))]; }
    cplx& operator()(int i, int j) { return c[static_cast<std::size_t>(index(i, j))]; }

    Mat3 matrix() const
    {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m(i, j) = (*this)(i, j);
        return m;
    }

    static Sym3 from_matrix(const Mat3& m)
    {
        Sym3 s;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                s(i, j) = m(i, j);
        return s;
    }

    /// Bilinear contraction xi^T f zeta, no conjugation.
    cplx contract(const Vec3& xi, const Vec3& zeta) const
    {
        cplx sum = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                sum += (*this)(i, j) * (xi[i] * zeta[j]);
        return sum;
    }

    Sym3& operator+=(const Sym3& o)
    {
        for (std::size_t k = 0; k < 6; ++k)
            c[k] += o.c[k];
        return *this;
    }

    Sym3& operator*=(cplx s)
    {
        for (auto& v : c)
            v *= s;
        return *this;
    }

    friend bool operator==(const Sym3&, const Sym3&) = default;
};

inline unsigned& thread_count_override()
{
    static unsigned value = 0;
    return value;
}

/// Worker count: an explicit override, then PTOMO_THREADS, then the hardware
/// concurrency.
inline unsigned default_thread_count()
{
    if (thread_count_override() > 0)
        return thread_count_override();
    if (const char* env = std::getenv("PTOMO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for every i in [0, count) over contiguous disjoint chunks.
/// Each index is processed by exactly one worker; results never depend on
/// the number of workers as long as body writes only to slot i.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned threads = 0)
{
    if (threads == 0)
        threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = count * t / threads;
        const std::size_t end = count * (t + 1) / threads;
        pool.emplace_back([&, begin, end, t] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace ptomo

#endif // PTOMO_CORE_HPP

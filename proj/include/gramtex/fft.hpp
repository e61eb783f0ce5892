#pragma once

// Discrete Fourier transforms over the spatial axes of a Signal.
//
// Convention: unitary. For a field with n = rows * cols samples,
//   lambda_k = n^{-1/2} sum_m x_m exp(-2 pi i <k, m>)
//   x_m      = n^{-1/2} sum_k lambda_k exp(+2 pi i <k, m>)
// so Parseval is an equality. The raw (unnormalized) DFT used for filter
// diagonals is sqrt(n) times the unitary one: a circular convolution with
// kernel h multiplies lambda_k by raw_dft(h)_k.
//
// Backed by FFTW. Plans are created once per (rows, cols, direction) under a
// mutex with FFTW_UNALIGNED so execution is thread-safe and independent of
// buffer alignment.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "gramtex/signal.hpp"

namespace gramtex {

using Complex = std::complex<double>;

namespace detail {

class PlanCache {
public:
    PlanCache() = default;
    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t rows, std::size_t cols, int sign)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        const std::size_t n = rows * cols;
        auto* in = fftw_alloc_complex(n);
        auto* out = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), in, out, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

/// Unnormalized transform of one rows x cols plane; sign -1 forward, +1 inverse.
inline void raw_transform(std::span<const Complex> in, std::span<Complex> out, std::size_t rows,
                          std::size_t cols, int sign)
{
    fftw_plan plan = plan_cache().get(rows, cols, sign);
    // new-array execute requires distinct in/out buffers (the plan is out-of-place).
    std::vector<Complex> src(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

} // namespace detail

/// Flat index of the frequency -k (mod rows, cols).
inline std::size_t conjugate_index(std::size_t k, std::size_t rows, std::size_t cols) noexcept
{
    const std::size_t r = k / cols;
    const std::size_t c = k % cols;
    return ((rows - r) % rows) * cols + (cols - c) % cols;
}

/// Complex coefficients over the spatial frequency grid, one plane per channel.
struct Spectrum {
    Shape shape;
    std::vector<Complex> coeffs;
    bool hermitian = false;

    std::span<const Complex> channel(std::size_t c) const
    {
        return std::span<const Complex>(coeffs).subspan(c * shape.spatial(), shape.spatial());
    }
    std::span<Complex> channel(std::size_t c)
    {
        return std::span<Complex>(coeffs).subspan(c * shape.spatial(), shape.spatial());
    }
};

/// Forces coeffs[k] = conj(coeffs[-k]) exactly; self-conjugate bins become real.
inline void symmetrize(Spectrum& s)
{
    const std::size_t rows = s.shape.rows;
    const std::size_t cols = s.shape.cols;
    for (std::size_t c = 0; c < s.shape.channels; ++c) {
        auto plane = s.channel(c);
        for (std::size_t k = 0; k < plane.size(); ++k) {
            const std::size_t j = conjugate_index(k, rows, cols);
            if (j < k)
                continue;
            if (j == k) {
                plane[k] = Complex(plane[k].real(), 0.0);
            } else {
                const Complex avg = 0.5 * (plane[k] + std::conj(plane[j]));
                plane[k] = avg;
                plane[j] = std::conj(avg);
            }
        }
    }
    s.hermitian = true;
}

/// Unitary forward DFT of a real field. The result is flagged Hermitian and
/// symmetrized to remove rounding asymmetry.
inline Spectrum dft(const Signal& x)
{
    const Shape& sh = x.shape();
    Spectrum out{sh, std::vector<Complex>(sh.size()), false};
    const double scale = 1.0 / std::sqrt(static_cast<double>(sh.spatial()));
    std::vector<Complex> plane(sh.spatial());
    for (std::size_t c = 0; c < sh.channels; ++c) {
        auto src = x.channel(c);
        std::transform(src.begin(), src.end(), plane.begin(), [](double v) { return Complex(v, 0.0); });
        auto dst = out.channel(c);
        detail::raw_transform(plane, dst, sh.rows, sh.cols, FFTW_FORWARD);
        for (auto& v : dst)
            v *= scale;
    }
    symmetrize(out);
    return out;
}

/// Unitary inverse transform, keeping the complex result.
inline std::vector<Complex> idft_complex(const Spectrum& s)
{
    const Shape& sh = s.shape;
    std::vector<Complex> out(sh.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(sh.spatial()));
    for (std::size_t c = 0; c < sh.channels; ++c) {
        auto dst = std::span<Complex>(out).subspan(c * sh.spatial(), sh.spatial());
        detail::raw_transform(s.channel(c), dst, sh.rows, sh.cols, FFTW_BACKWARD);
        for (auto& v : dst)
            v *= scale;
    }
    return out;
}

/// Unitary inverse transform returning the real part. `max_imag`, when given,
/// receives the largest discarded imaginary magnitude.
inline Signal idft(const Spectrum& s, double* max_imag = nullptr)
{
    const auto full = idft_complex(s);
    std::vector<double> re(full.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        re[i] = full[i].real();
        worst = std::max(worst, std::abs(full[i].imag()));
    }
    if (max_imag)
        *max_imag = worst;
    return Signal(s.shape, std::move(re));
}

/// Unnormalized DFT of a real plane (used for circulant eigenvalues / filter diagonals).
inline std::vector<Complex> raw_dft(std::span<const double> plane, std::size_t rows, std::size_t cols)
{
    std::vector<Complex> in(plane.size());
    std::transform(plane.begin(), plane.end(), in.begin(), [](double v) { return Complex(v, 0.0); });
    std::vector<Complex> out(plane.size());
    detail::raw_transform(in, out, rows, cols, FFTW_FORWARD);
    return out;
}

/// max_k | |lambda^y_k| - |lambda^x_k| | / max_k |lambda^x_k| over all channels.
inline double magnitude_deviation(const Signal& x, const Signal& y)
{
    require(x.shape() == y.shape(), ErrorCode::shape_mismatch, "magnitude_deviation needs equal shapes");
    const Spectrum sx = dft(x);
    const Spectrum sy = dft(y);
    double worst = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < sx.coeffs.size(); ++i) {
        worst = std::max(worst, std::abs(std::abs(sy.coeffs[i]) - std::abs(sx.coeffs[i])));
        ref = std::max(ref, std::abs(sx.coeffs[i]));
    }
    return ref > 0.0 ? worst / ref : worst;
}

/// || |lambda^y| - |lambda^x| ||_2 / || |lambda^x| ||_2 over all channels.
inline double magnitude_l2_deviation(const Signal& x, const Signal& y)
{
    require(x.shape() == y.shape(), ErrorCode::shape_mismatch, "magnitude_l2_deviation needs equal shapes");
    const Spectrum sx = dft(x);
    const Spectrum sy = dft(y);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sx.coeffs.size(); ++i) {
        const double d = std::abs(sy.coeffs[i]) - std::abs(sx.coeffs[i]);
        num += d * d;
        den += std::norm(sx.coeffs[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace gramtex

#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the FFT, spectral or optimized paths of the library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <gramtex/random.hpp>
#include <gramtex/signal.hpp>

namespace oracle {

using cplx = std::complex<double>;

/// Direct O(n^2) unitary 2-D DFT of a rows x cols plane.
inline std::vector<cplx> direct_dft(const std::vector<double>& x, std::size_t rows, std::size_t cols)
{
    std::vector<cplx> out(rows * cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
    for (std::size_t k1 = 0; k1 < rows; ++k1)
        for (std::size_t k2 = 0; k2 < cols; ++k2) {
            cplx acc = 0.0;
            for (std::size_t m1 = 0; m1 < rows; ++m1)
                for (std::size_t m2 = 0; m2 < cols; ++m2) {
                    const double ang = -2.0 * std::numbers::pi *
                                       (static_cast<double>(k1 * m1) / static_cast<double>(rows) +
                                        static_cast<double>(k2 * m2) / static_cast<double>(cols));
                    acc += x[m1 * cols + m2] * cplx(std::cos(ang), std::sin(ang));
                }
            out[k1 * cols + k2] = acc * scale;
        }
    return out;
}

/// Direct circular convolution of one plane with a kernel anchored at 0:
/// out[r][c] = sum_{a,b} k[a][b] x[r-a][c-b].
inline std::vector<double> direct_convolve(const std::vector<double>& x, std::size_t rows, std::size_t cols,
                                           const std::vector<double>& k, std::size_t krows, std::size_t kcols)
{
    std::vector<double> out(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (std::size_t a = 0; a < krows; ++a)
                for (std::size_t b = 0; b < kcols; ++b)
                    acc += k[a * kcols + b] * x[((r + rows * 4 - a) % rows) * cols + (c + cols * 4 - b) % cols];
            out[r * cols + c] = acc;
        }
    return out;
}

/// Central finite-difference gradient with absolute step h.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline std::vector<double> uniform_vector(gramtex::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0)
{
    std::vector<double> v(n);
    for (auto& e : v)
        e = rng.uniform(lo, hi);
    return v;
}

inline gramtex::Signal random_signal(gramtex::Rng& rng, const gramtex::Shape& s, double lo = -1.0, double hi = 1.0)
{
    return gramtex::Signal(s, uniform_vector(rng, s.size(), lo, hi));
}

/// Bank of `count` random kernels of shape `ks`.
inline std::vector<gramtex::Signal> random_kernels(gramtex::Rng& rng, std::size_t count, const gramtex::Shape& ks)
{
    std::vector<gramtex::Signal> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(random_signal(rng, ks));
    return out;
}

/// Smooth-ish synthetic grayscale texture: oriented ridges plus noise.
inline gramtex::Signal ridge_texture(std::size_t rows, std::size_t cols, std::uint64_t seed)
{
    gramtex::Rng rng(seed);
    gramtex::Signal img = gramtex::Signal::image(rows, cols, 1);
    const double f1 = 3.0 + rng.uniform(0.0, 2.0);
    const double f2 = 5.0 + rng.uniform(0.0, 3.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double u = static_cast<double>(r) / static_cast<double>(rows);
            const double v = static_cast<double>(c) / static_cast<double>(cols);
            const double val = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * (f1 * u + 0.7 * f1 * v)) +
                               0.1 * std::cos(2.0 * std::numbers::pi * f2 * v) + 0.1 * rng.uniform(-1.0, 1.0);
            img.at(0, r, c) = val;
        }
    return img;
}

} // namespace oracle

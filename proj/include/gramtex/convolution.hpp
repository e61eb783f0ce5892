#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gramtex/fft.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/parallel.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

enum class Nonlinearity { identity, relu };

inline std::string_view to_string(Nonlinearity h) noexcept
{
    return h == Nonlinearity::relu ? "relu" : "identity";
}

inline Nonlinearity parse_nonlinearity(std::string_view s)
{
    if (s == "identity")
        return Nonlinearity::identity;
    if (s == "relu")
        return Nonlinearity::relu;
    throw Error(ErrorCode::invalid_argument, "unknown nonlinearity '" + std::string(s) + "'");
}

enum class ConvolutionRoute { spectral, spatial };

/// N feature maps of one spatial size, stored filter-major.
struct FeatureMaps {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    FeatureMaps() = default;
    FeatureMaps(std::size_t n, std::size_t r, std::size_t c) : count(n), rows(r), cols(c), values(n * r * c, 0.0) {}

    std::size_t spatial() const noexcept { return rows * cols; }
    std::span<double> map(std::size_t i) { return std::span<double>(values).subspan(i * spatial(), spatial()); }
    std::span<const double> map(std::size_t i) const
    {
        return std::span<const double>(values).subspan(i * spatial(), spatial());
    }
};

inline double apply_nonlinearity(double v, Nonlinearity h) noexcept
{
    return h == Nonlinearity::relu ? (v > 0.0 ? v : 0.0) : v;
}

/// Derivative of h; the ReLU derivative at exactly 0 is taken as 0.
inline double nonlinearity_derivative(double v, Nonlinearity h) noexcept
{
    return h == Nonlinearity::relu ? (v > 0.0 ? 1.0 : 0.0) : 1.0;
}

inline FeatureMaps apply_nonlinearity(FeatureMaps maps, Nonlinearity h)
{
    if (h == Nonlinearity::relu)
        for (auto& v : maps.values)
            v = v > 0.0 ? v : 0.0;
    return maps;
}

/// Circular convolution through the spectral route: each map is the inverse
/// transform of sum_c D_i^c * lambda_c. Uses precomputed diagonals.
inline FeatureMaps circular_convolve(const Spectrum& x_hat, const BankSpectra& bank)
{
    const Shape& s = x_hat.shape;
    require(bank.rows() == s.rows && bank.cols() == s.cols && bank.channels() == s.channels,
            ErrorCode::shape_mismatch, "bank spectra do not match the signal shape");
    FeatureMaps out(bank.filters(), s.rows, s.cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(s.spatial()));
    parallel_for(bank.filters(), [&](std::size_t i) {
        std::vector<Complex> prod(s.spatial(), Complex(0.0, 0.0));
        for (std::size_t c = 0; c < s.channels; ++c) {
            const auto d = bank.diagonal(i, c);
            const auto lam = x_hat.channel(c);
            for (std::size_t k = 0; k < prod.size(); ++k)
                prod[k] += d[k] * lam[k];
        }
        std::vector<Complex> spatial(s.spatial());
        detail::raw_transform(prod, spatial, s.rows, s.cols, FFTW_BACKWARD);
        auto dst = out.map(i);
        for (std::size_t m = 0; m < dst.size(); ++m)
            dst[m] = spatial[m].real() * scale;
    });
    return out;
}

/// Direct O(n * f^2) circular convolution:
/// out_i[r][col] = sum_c sum_{a,b} k_i[c][a][b] * x[c][r - a][col - b].
inline FeatureMaps circular_convolve_spatial(const Signal& x, const FilterBank& bank)
{
    const Shape& s = x.shape();
    bank.check_compatible(s);
    const Shape& ks = bank.kernel_shape();
    FeatureMaps out(bank.size(), s.rows, s.cols);
    parallel_for(bank.size(), [&](std::size_t i) {
        auto dst = out.map(i);
        const Signal& k = bank.kernel(i);
        for (std::size_t r = 0; r < s.rows; ++r)
            for (std::size_t col = 0; col < s.cols; ++col) {
                double acc = 0.0;
                for (std::size_t c = 0; c < s.channels; ++c)
                    for (std::size_t a = 0; a < ks.rows; ++a) {
                        const std::size_t rr = (r + s.rows - a % s.rows) % s.rows;
                        for (std::size_t b = 0; b < ks.cols; ++b) {
                            const std::size_t cc = (col + s.cols - b % s.cols) % s.cols;
                            acc += k.at(c, a, b) * x.at(c, rr, cc);
                        }
                    }
                dst[r * s.cols + col] = acc;
            }
    });
    return out;
}

/// Circular convolution of x with every filter of the bank, summing over
/// channels. The spectral route is the default; both routes agree to
/// rounding.
inline FeatureMaps circular_convolve(const Signal& x, const FilterBank& bank,
                                     ConvolutionRoute route = ConvolutionRoute::spectral)
{
    bank.check_compatible(x.shape());
    if (route == ConvolutionRoute::spatial)
        return circular_convolve_spatial(x, bank);
    const BankSpectra spectra(bank, x.shape());
    return circular_convolve(dft(x), spectra);
}

} // namespace gramtex

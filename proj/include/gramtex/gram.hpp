#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gramtex/convolution.hpp"
#include "gramtex/fft.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/parallel.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

/// G_ij = <h(F_i x), h(F_j x)> over all spatial locations. Unnormalized.
struct GramMatrix {
    Eigen::MatrixXd entries;

    std::size_t filter_count() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    double frobenius_norm() const { return entries.norm(); }
    double operator()(std::size_t i, std::size_t j) const
    {
        return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// Gram matrix of (already activated) feature maps. Entry (i, j), j >= i, is
/// accumulated over spatial index ascending and mirrored, so every entry has
/// the same bits whatever the worker count.
inline GramMatrix gram_from_features(const FeatureMaps& maps)
{
    const auto n = static_cast<Eigen::Index>(maps.count);
    GramMatrix g{Eigen::MatrixXd::Zero(n, n)};
    parallel_for(maps.count, [&](std::size_t i) {
        const auto fi = maps.map(i);
        for (std::size_t j = i; j < maps.count; ++j) {
            const auto fj = maps.map(j);
            double acc = 0.0;
            for (std::size_t m = 0; m < fi.size(); ++m)
                acc += fi[m] * fj[m];
            g.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    });
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            g.entries(i, j) = g.entries(j, i);
    return g;
}

inline GramMatrix gram(const Signal& x, const FilterBank& bank, Nonlinearity h)
{
    return gram_from_features(apply_nonlinearity(circular_convolve(x, bank), h));
}

/// Linear-case Gram straight from the spectrum:
/// G_ij = Re sum_k conj(sum_c D_i^{c,k} lambda_c^k) (sum_c D_j^{c,k} lambda_c^k),
/// which for one channel is sum_k |lambda_k|^2 conj(D_i^k) D_j^k.
inline GramMatrix spectral_gram(const Spectrum& x_hat, const BankSpectra& bank)
{
    const std::size_t n = bank.filters();
    const std::size_t len = bank.spatial();
    std::vector<Complex> mixed(n * len, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < bank.channels(); ++c) {
            const auto d = bank.diagonal(i, c);
            const auto lam = x_hat.channel(c);
            for (std::size_t k = 0; k < len; ++k)
                mixed[i * len + k] += d[k] * lam[k];
        }
    GramMatrix g{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < len; ++k)
                acc += (std::conj(mixed[i * len + k]) * mixed[j * len + k]).real();
            g.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
            g.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = acc;
        }
    return g;
}

struct EnergyReport {
    double energy = 0.0;          // ||G^target - G^y||_F
    double squared_energy = 0.0;  // ||G^target - G^y||_F^2, the optimized quantity
    Signal gradient;              // d squared_energy / dy
};

/// Gram energy of candidates against a fixed target, with the filter
/// diagonals computed once. Used directly by the optimizer.
///
/// With R = G^y - G^target and H_j = h(A_j y), the gradient of the squared
/// energy is 4 sum_i A_i^T (h'(A_i y) .* sum_j R_ij H_j), evaluated as
/// U (sum_i conj(D_i) U^H(...)).
class GramObjective {
public:
    GramObjective(const FilterBank& bank, const Shape& shape, Nonlinearity h, GramMatrix target)
        : shape_(shape), h_(h), spectra_(bank, shape), target_(std::move(target))
    {
        require(target_.filter_count() == bank.size(), ErrorCode::shape_mismatch,
                "target Gram has " + std::to_string(target_.filter_count()) + " filters, bank has " +
                    std::to_string(bank.size()));
    }

    const GramMatrix& target() const noexcept { return target_; }
    const Shape& shape() const noexcept { return shape_; }
    Nonlinearity nonlinearity() const noexcept { return h_; }
    const BankSpectra& spectra() const noexcept { return spectra_; }

    FeatureMaps preactivations(const Signal& y) const
    {
        check(y);
        return circular_convolve(dft(y), spectra_);
    }

    GramMatrix gram(const Signal& y) const { return gram_from_features(apply_nonlinearity(preactivations(y), h_)); }

    double squared_energy(const Signal& y) const { return (gram(y).entries - target_.entries).squaredNorm(); }

    EnergyReport evaluate(const Signal& y) const
    {
        const FeatureMaps pre = preactivations(y);
        const FeatureMaps act = apply_nonlinearity(pre, h_);
        const GramMatrix g = gram_from_features(act);
        const Eigen::MatrixXd residual = g.entries - target_.entries;

        EnergyReport report;
        report.squared_energy = residual.squaredNorm();
        report.energy = std::sqrt(report.squared_energy);
        report.gradient = gradient_from(pre, act, residual);
        return report;
    }

private:
    void check(const Signal& y) const
    {
        require(y.shape() == shape_, ErrorCode::shape_mismatch,
                "candidate shape " + y.shape().str() + " does not match " + shape_.str());
    }

    Signal gradient_from(const FeatureMaps& pre, const FeatureMaps& act, const Eigen::MatrixXd& residual) const
    {
        const std::size_t n = act.count;
        const std::size_t len = act.spatial();
        const double scale = 1.0 / std::sqrt(static_cast<double>(len));

        // Back-propagated maps, transformed to the frequency domain (unitary).
        std::vector<Complex> back_hat(n * len);
        parallel_for(n, [&](std::size_t i) {
            std::vector<Complex> b(len, Complex(0.0, 0.0));
            for (std::size_t j = 0; j < n; ++j) {
                const double r = residual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (r == 0.0)
                    continue;
                const auto hj = act.map(j);
                for (std::size_t m = 0; m < len; ++m)
                    b[m] += r * hj[m];
            }
            const auto pi = pre.map(i);
            for (std::size_t m = 0; m < len; ++m)
                b[m] *= 4.0 * nonlinearity_derivative(pi[m], h_);
            auto dst = std::span<Complex>(back_hat).subspan(i * len, len);
            detail::raw_transform(b, dst, act.rows, act.cols, FFTW_FORWARD);
        });

        Signal grad(shape_);
        std::vector<Complex> acc(len);
        std::vector<Complex> spatial(len);
        for (std::size_t c = 0; c < shape_.channels; ++c) {
            std::fill(acc.begin(), acc.end(), Complex(0.0, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                const auto d = spectra_.diagonal(i, c);
                for (std::size_t k = 0; k < len; ++k)
                    acc[k] += std::conj(d[k]) * back_hat[i * len + k];
            }
            detail::raw_transform(acc, spatial, shape_.rows, shape_.cols, FFTW_BACKWARD);
            auto dst = grad.channel(c);
            // Forward and inverse are both raw here; the unitary pair contributes 1/len.
            for (std::size_t m = 0; m < len; ++m)
                dst[m] = spatial[m].real() * scale * scale;
        }
        return grad;
    }

    Shape shape_;
    Nonlinearity h_;
    BankSpectra spectra_;
    GramMatrix target_;
};

inline EnergyReport energy(const Signal& y, const GramMatrix& target, const FilterBank& bank, Nonlinearity h)
{
    return GramObjective(bank, y.shape(), h, target).evaluate(y);
}

inline Signal energy_gradient(const Signal& y, const GramMatrix& target, const FilterBank& bank, Nonlinearity h)
{
    return energy(y, target, bank, h).gradient;
}

/// Frobenius energy only (no gradient).
inline double energy_value(const Signal& y, const GramMatrix& target, const FilterBank& bank, Nonlinearity h)
{
    require(target.filter_count() == bank.size(), ErrorCode::shape_mismatch, "target/bank filter count differ");
    return (gram(y, bank, h).entries - target.entries).norm();
}

} // namespace gramtex

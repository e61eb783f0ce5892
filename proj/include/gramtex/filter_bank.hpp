#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gramtex/fft.hpp"
#include "gramtex/parallel.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

/// N compact circular filters sharing one kernel shape. 1-D kernels are
/// {1, 1, f}; 2-D kernels are {C, f, f}. Kernel entry (c, a, b) acts on
/// x[c][r - a][col - b], i.e. the kernel is zero-extended anchored at index 0.
class FilterBank {
public:
    FilterBank() = default;

    explicit FilterBank(std::vector<Signal> kernels) : kernels_(std::move(kernels))
    {
        require(!kernels_.empty(), ErrorCode::invalid_argument, "filter bank needs at least one kernel");
        const Shape& s = kernels_.front().shape();
        for (const auto& k : kernels_) {
            require(k.shape() == s, ErrorCode::shape_mismatch, "all kernels must share one shape");
            require(k.all_finite(), ErrorCode::invalid_argument, "kernel entries must be finite");
        }
    }

    std::size_t size() const noexcept { return kernels_.size(); }
    const Signal& kernel(std::size_t i) const { return kernels_.at(i); }
    const std::vector<Signal>& kernels() const noexcept { return kernels_; }
    const Shape& kernel_shape() const { return kernels_.front().shape(); }
    std::size_t channels() const { return kernel_shape().channels; }

    /// First `count` filters.
    FilterBank prefix(std::size_t count) const
    {
        require(count >= 1 && count <= size(), ErrorCode::invalid_argument, "prefix length out of range");
        return FilterBank(std::vector<Signal>(kernels_.begin(), kernels_.begin() + static_cast<long>(count)));
    }

    FilterBank permuted(std::span<const std::size_t> order) const
    {
        std::vector<Signal> out;
        out.reserve(order.size());
        for (auto i : order)
            out.push_back(kernels_.at(i));
        return FilterBank(std::move(out));
    }

    /// Throws unless the bank can act on signals of shape `s`.
    void check_compatible(const Shape& s) const
    {
        const Shape& k = kernel_shape();
        require(k.channels == s.channels, ErrorCode::channel_mismatch,
                "filters have " + std::to_string(k.channels) + " channels, signal has " +
                    std::to_string(s.channels));
        require(k.rows <= s.rows && k.cols <= s.cols, ErrorCode::size_mismatch,
                "filter " + k.str() + " larger than signal " + s.str());
    }

private:
    std::vector<Signal> kernels_;
};

/// Per-filter, per-channel diagonals D_i^c: the raw DFT of each kernel
/// zero-extended to rows x cols. These are the eigenvalues of the
/// circulant (BCCB in 2-D) matrix of filter i.
class BankSpectra {
public:
    BankSpectra(const FilterBank& bank, const Shape& signal_shape)
        : filters_(bank.size()), channels_(signal_shape.channels), rows_(signal_shape.rows),
          cols_(signal_shape.cols), data_(filters_ * channels_ * rows_ * cols_)
    {
        bank.check_compatible(signal_shape);
        const Shape& ks = bank.kernel_shape();
        parallel_for(filters_, [&](std::size_t i) {
            std::vector<double> plane(rows_ * cols_);
            for (std::size_t c = 0; c < channels_; ++c) {
                std::fill(plane.begin(), plane.end(), 0.0);
                for (std::size_t a = 0; a < ks.rows; ++a)
                    for (std::size_t b = 0; b < ks.cols; ++b)
                        plane[a * cols_ + b] = bank.kernel(i).at(c, a, b);
                const auto d = raw_dft(plane, rows_, cols_);
                std::copy(d.begin(), d.end(), data_.begin() + static_cast<long>(offset(i, c)));
            }
        });
    }

    std::size_t filters() const noexcept { return filters_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t spatial() const noexcept { return rows_ * cols_; }

    std::span<const Complex> diagonal(std::size_t filter, std::size_t channel) const
    {
        return std::span<const Complex>(data_).subspan(offset(filter, channel), spatial());
    }

private:
    std::size_t offset(std::size_t i, std::size_t c) const noexcept { return (i * channels_ + c) * spatial(); }

    std::size_t filters_, channels_, rows_, cols_;
    std::vector<Complex> data_;
};

} // namespace gramtex

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gramtex/error.hpp"

namespace gramtex {

/// Channel-major, row-major extent of a real field. A 1-D signal of
/// length n is stored as {1 channel, 1 row, n cols}.
struct Shape {
    std::size_t channels = 1;
    std::size_t rows = 1;
    std::size_t cols = 0;

    std::size_t spatial() const noexcept { return rows * cols; }
    std::size_t size() const noexcept { return channels * rows * cols; }
    bool one_dimensional() const noexcept { return rows == 1; }

    friend bool operator==(const Shape&, const Shape&) = default;

    std::string str() const
    {
        return std::to_string(channels) + "x" + std::to_string(rows) + "x" + std::to_string(cols);
    }
};

/// Real signal or image. Covers both the 1-D vectors x, y in R^n and
/// H x W x C textures; the spatial transform always runs over (rows, cols).
class Signal {
public:
    Signal() = default;

    explicit Signal(Shape shape) : shape_(shape), data_(shape.size(), 0.0) { check_shape(); }

    Signal(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values))
    {
        check_shape();
        require(data_.size() == shape_.size(), ErrorCode::shape_mismatch,
                "value count " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
        require(all_finite(), ErrorCode::invalid_argument, "signal contains non-finite values");
    }

    static Signal vector(std::vector<double> samples)
    {
        require(samples.size() >= 2, ErrorCode::invalid_argument, "1-D signals need at least 2 samples");
        const Shape s{1, 1, samples.size()};
        return Signal(s, std::move(samples));
    }

    static Signal image(std::size_t rows, std::size_t cols, std::size_t channels = 1)
    {
        require(rows >= 2 && cols >= 2, ErrorCode::invalid_argument, "images need H, W >= 2");
        return Signal(Shape{channels, rows, cols});
    }

    static Signal image(std::size_t rows, std::size_t cols, std::size_t channels, std::vector<double> values)
    {
        require(rows >= 2 && cols >= 2, ErrorCode::invalid_argument, "images need H, W >= 2");
        return Signal(Shape{channels, rows, cols}, std::move(values));
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& vec() const noexcept { return data_; }

    std::span<double> channel(std::size_t c) noexcept
    {
        return std::span<double>(data_).subspan(c * shape_.spatial(), shape_.spatial());
    }
    std::span<const double> channel(std::size_t c) const noexcept
    {
        return std::span<const double>(data_).subspan(c * shape_.spatial(), shape_.spatial());
    }

    double& at(std::size_t c, std::size_t r, std::size_t col) noexcept
    {
        return data_[(c * shape_.rows + r) * shape_.cols + col];
    }
    double at(std::size_t c, std::size_t r, std::size_t col) const noexcept
    {
        return data_[(c * shape_.rows + r) * shape_.cols + col];
    }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    double mean() const noexcept
    {
        double s = 0.0;
        for (double v : data_)
            s += v;
        return data_.empty() ? 0.0 : s / static_cast<double>(data_.size());
    }

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    void check_shape() const
    {
        require(shape_.channels >= 1 && shape_.rows >= 1 && shape_.cols >= 1, ErrorCode::invalid_argument,
                "empty shape " + shape_.str());
    }

    Shape shape_{};
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// ||a - b|| / ||b||, or the absolute distance when b is zero.
inline double relative_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    const double ref = l2_norm(b);
    const double d = distance(a, b);
    return ref > 0.0 ? d / ref : d;
}

inline double max_abs_difference(std::span<const double> a, std::span<const double> b) noexcept
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Circular shift along columns (1-D) and rows: out[r][c] = x[r - dr][c - dc].
/// With dr = 0 this is the Cs operator applied `dc` times: Cs([x1..xn]) = [xn, x1, .., x(n-1)].
inline Signal circular_shift(const Signal& x, long dc, long dr = 0)
{
    const Shape& s = x.shape();
    const auto rows = static_cast<long>(s.rows);
    const auto cols = static_cast<long>(s.cols);
    const long sr = ((dr % rows) + rows) % rows;
    const long sc = ((dc % cols) + cols) % cols;
    Signal out(s);
    for (std::size_t c = 0; c < s.channels; ++c)
        for (long r = 0; r < rows; ++r)
            for (long k = 0; k < cols; ++k)
                out.at(c, static_cast<std::size_t>((r + sr) % rows), static_cast<std::size_t>((k + sc) % cols)) =
                    x.at(c, static_cast<std::size_t>(r), static_cast<std::size_t>(k));
    return out;
}

} // namespace gramtex

#pragma once

// Binary PGM (P5) and PPM (P6) with 8-bit samples. Pixels map to reals as
// v / maxval; export clamps to [0, 1] (or rescales min..max to [0, 1]) and
// rounds half-to-even to 0..255.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gramtex/signal.hpp"

namespace gramtex {

enum class ExportMode { clamp, rescale };

namespace detail {

inline std::size_t read_header_int(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& path)
{
    while (pos < buf.size()) {
        if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n')
                ++pos;
        } else if (std::isspace(buf[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
        value = value * 10 + static_cast<std::size_t>(buf[pos] - '0');
        ++pos;
        ++digits;
        require(digits <= 9, ErrorCode::io_error, path + ": header value too large");
    }
    require(digits > 0, ErrorCode::io_error, path + ": malformed netpbm header");
    return value;
}

/// Round half to even onto 0..255.
inline unsigned char quantize(double v)
{
    const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<unsigned char>(std::nearbyint(scaled));
}

} // namespace detail

inline Signal read_netpbm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path);
    const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '6'), ErrorCode::io_error,
            path + ": not a binary PGM/PPM file");
    const std::size_t channels = buf[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    const std::size_t width = detail::read_header_int(buf, pos, path);
    const std::size_t height = detail::read_header_int(buf, pos, path);
    const std::size_t maxval = detail::read_header_int(buf, pos, path);
    require(maxval >= 1 && maxval <= 255, ErrorCode::io_error, path + ": only 8-bit images are supported");
    require(pos < buf.size() && std::isspace(buf[pos]), ErrorCode::io_error, path + ": malformed header");
    ++pos;
    require(width >= 1 && height >= 1, ErrorCode::io_error, path + ": empty image");
    const std::size_t count = width * height * channels;
    require(buf.size() - pos >= count, ErrorCode::io_error, path + ": truncated pixel data");

    Signal img(Shape{channels, height, width});
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            for (std::size_t ch = 0; ch < channels; ++ch)
                img.at(ch, r, c) = static_cast<double>(buf[pos + (r * width + c) * channels + ch]) /
                                   static_cast<double>(maxval);
    return img;
}

/// Writes P5 for one channel, P6 for three.
inline void write_netpbm(const std::string& path, const Signal& img, ExportMode mode = ExportMode::clamp)
{
    const Shape& s = img.shape();
    require(s.channels == 1 || s.channels == 3, ErrorCode::channel_mismatch, "netpbm export needs 1 or 3 channels");
    double lo = 0.0;
    double scale = 1.0;
    if (mode == ExportMode::rescale) {
        const auto [mn, mx] = std::minmax_element(img.values().begin(), img.values().end());
        lo = *mn;
        scale = *mx > *mn ? 1.0 / (*mx - *mn) : 0.0;
    }
    std::vector<unsigned char> pixels(s.size());
    for (std::size_t r = 0; r < s.rows; ++r)
        for (std::size_t c = 0; c < s.cols; ++c)
            for (std::size_t ch = 0; ch < s.channels; ++ch)
                pixels[(r * s.cols + c) * s.channels + ch] = detail::quantize((img.at(ch, r, c) - lo) * scale);

    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path);
    out << (s.channels == 1 ? "P5" : "P6") << '\n' << s.cols << ' ' << s.rows << '\n' << 255 << '\n';
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    require(static_cast<bool>(out), ErrorCode::io_error, "failed writing " + path);
}

} // namespace gramtex

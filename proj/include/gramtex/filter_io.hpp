#pragma once

// Filter bank file: 16-byte little-endian header followed by the kernels.
//
//   offset  size  field
//   0       4     magic "GTFB"
//   4       4     version (u32, currently 1)
//   8       4     N, number of filters (u32)
//   12      2     f, kernel side (u16)
//   14      2     C, channels (u16)
//   16      8*N*C*f*f  kernel entries, IEEE-754 binary64, ordered
//                 filter, channel, row, col
//
// Only square 2-D kernels are representable.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gramtex/filter_bank.hpp"

namespace gramtex {

inline constexpr std::array<char, 4> kFilterMagic{'G', 'T', 'F', 'B'};
inline constexpr std::uint32_t kFilterFormatVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b)
        out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t pos)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
        bits |= static_cast<U>(static_cast<U>(in[pos + b]) << (8 * b));
    return std::bit_cast<T>(bits);
}

} // namespace detail

inline std::vector<unsigned char> encode_filter_bank(const FilterBank& bank)
{
    const Shape& ks = bank.kernel_shape();
    require(ks.rows == ks.cols && ks.rows > 1, ErrorCode::invalid_argument,
            "filter files store square 2-D kernels only");
    require(bank.size() <= UINT32_MAX && ks.rows <= UINT16_MAX && ks.channels <= UINT16_MAX,
            ErrorCode::invalid_argument, "filter bank too large for the file format");
    std::vector<unsigned char> out(kFilterMagic.begin(), kFilterMagic.end());
    detail::put_le(out, kFilterFormatVersion);
    detail::put_le(out, static_cast<std::uint32_t>(bank.size()));
    detail::put_le(out, static_cast<std::uint16_t>(ks.rows));
    detail::put_le(out, static_cast<std::uint16_t>(ks.channels));
    for (const auto& k : bank.kernels())
        for (double v : k.values())
            detail::put_le(out, v);
    return out;
}

inline FilterBank decode_filter_bank(const std::vector<unsigned char>& in)
{
    require(in.size() >= 16 && std::equal(kFilterMagic.begin(), kFilterMagic.end(), in.begin()),
            ErrorCode::io_error, "not a filter bank file");
    const auto version = detail::get_le<std::uint32_t>(in, 4);
    require(version == kFilterFormatVersion, ErrorCode::io_error,
            "unsupported filter file version " + std::to_string(version));
    const auto n = detail::get_le<std::uint32_t>(in, 8);
    const auto f = detail::get_le<std::uint16_t>(in, 12);
    const auto c = detail::get_le<std::uint16_t>(in, 14);
    require(n >= 1 && f >= 1 && c >= 1, ErrorCode::io_error, "filter file header has zero dimensions");
    const std::size_t per = static_cast<std::size_t>(c) * f * f;
    require(in.size() == 16 + 8 * per * n, ErrorCode::io_error, "filter file payload has the wrong length");
    std::vector<Signal> kernels;
    std::size_t pos = 16;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::vector<double> vals(per);
        for (auto& v : vals) {
            v = detail::get_le<double>(in, pos);
            pos += 8;
        }
        kernels.emplace_back(Shape{c, f, f}, std::move(vals));
    }
    return FilterBank(std::move(kernels));
}

inline void write_filter_bank(const std::string& path, const FilterBank& bank)
{
    const auto bytes = encode_filter_bank(bank);
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::io_error, "failed writing " + path);
}

inline FilterBank read_filter_bank(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path);
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_filter_bank(bytes);
}

} // namespace gramtex

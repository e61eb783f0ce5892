#pragma once

// Random phase noise: keep every Fourier magnitude of the input, replace the
// phases with uniform random ones. No periodic-component or windowing
// preprocessing is applied, so the usual seam artifacts along the image
// borders show up as horizontal and vertical lines.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "gramtex/fft.hpp"
#include "gramtex/random.hpp"
#include "gramtex/signal.hpp"
#include "gramtex/spectral_system.hpp"

namespace gramtex {

enum class PhaseMode { shared_phase, independent_phase };

inline std::string_view to_string(PhaseMode m) noexcept
{
    return m == PhaseMode::shared_phase ? "shared_phase" : "independent_phase";
}

inline PhaseMode parse_phase_mode(std::string_view s)
{
    if (s == "shared_phase")
        return PhaseMode::shared_phase;
    if (s == "independent_phase")
        return PhaseMode::independent_phase;
    throw Error(ErrorCode::invalid_argument, "unknown channel mode '" + std::string(s) + "'");
}

struct RpnConfig {
    std::uint64_t seed = kDefaultSeed;
    PhaseMode channel_mode = PhaseMode::shared_phase;
    /// Keep the DC bin as is. When false the DC coefficient gets a random sign.
    bool preserve_dc = true;
    /// Random sign flips on the non-DC self-conjugate (Nyquist) bins.
    bool randomize_nyquist_sign = false;
};

struct RpnResult {
    Signal output;
    double max_imaginary_residue = 0.0;       // before the imaginary part is dropped
    std::vector<std::uint64_t> phase_streams;  // seed of the phase field used per channel
};

/// Phase stream seed for channel c; all channels share stream 0 in shared mode.
inline std::uint64_t rpn_phase_stream(const RpnConfig& cfg, std::size_t channel)
{
    const std::uint64_t index = cfg.channel_mode == PhaseMode::shared_phase ? 0 : channel;
    return derive_seed(cfg.seed, 0x72706e, index);
}

inline RpnResult rpn_synthesize_detailed(const Signal& x, const RpnConfig& cfg)
{
    require(x.all_finite(), ErrorCode::invalid_argument, "rpn input must be finite");
    const Shape& sh = x.shape();
    Spectrum spec = dft(x);
    const FrequencyFolding fold(sh.rows, sh.cols);

    RpnResult result;
    for (std::size_t c = 0; c < sh.channels; ++c) {
        const std::uint64_t stream = rpn_phase_stream(cfg, c);
        result.phase_streams.push_back(stream);
        Rng rng(stream);
        auto plane = spec.channel(c);
        // Classes are visited in a fixed order, so a shared stream gives every
        // channel the same phase field and keeps cross-channel phase differences.
        for (const FrequencyClass& fc : fold.classes()) {
            if (fc.self_conjugate()) {
                const bool is_dc = fc.representative == 0;
                const bool flip_allowed = is_dc ? !cfg.preserve_dc : cfg.randomize_nyquist_sign;
                if (flip_allowed && (rng.bits() & 1ULL))
                    plane[fc.representative] = -plane[fc.representative];
                continue;
            }
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const Complex rot = std::polar(1.0, theta);
            plane[fc.representative] *= rot;
            plane[fc.partner] = std::conj(plane[fc.representative]);
        }
    }
    spec.hermitian = true;
    result.output = idft(spec, &result.max_imaginary_residue);
    return result;
}

inline Signal rpn_synthesize(const Signal& x, const RpnConfig& cfg = {})
{
    return rpn_synthesize_detailed(x, cfg).output;
}

} // namespace gramtex

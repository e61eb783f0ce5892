#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gramtex/convolution.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/gram.hpp"
#include "gramtex/random.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

enum class FilterInit { he_uniform, unit_ball_uniform };

inline std::string_view to_string(FilterInit f) noexcept
{
    return f == FilterInit::he_uniform ? "he_uniform" : "unit_ball_uniform";
}

inline FilterInit parse_filter_init(std::string_view s)
{
    if (s == "he_uniform")
        return FilterInit::he_uniform;
    if (s == "unit_ball_uniform")
        return FilterInit::unit_ball_uniform;
    throw Error(ErrorCode::invalid_argument, "unknown filter init '" + std::string(s) + "'");
}

/// Armijo backtracking along the negative gradient. The first trial step of
/// an iteration is the Barzilai-Borwein length <s,s>/<s,dg> from the last
/// accepted move when enabled and positive, else twice the previously
/// accepted step (`initial_step` on the first iteration).
struct StepPolicy {
    double initial_step = 1.0;
    double shrink = 0.5;
    double sufficient_decrease = 1e-4;
    std::size_t max_backtracks = 200;
    bool barzilai_borwein = true;
};

struct SynthConfig {
    std::uint64_t seed = kDefaultSeed;
    Nonlinearity nonlinearity = Nonlinearity::identity;
    std::size_t max_iters = 2000;
    double grad_tol = 1e-6;    // relative to the initial gradient norm
    double energy_tol = 1e-8;  // relative to ||G^x||_F
    std::size_t filter_count = 363;
    std::size_t filter_size = 11;
    FilterInit filter_init = FilterInit::he_uniform;
    StepPolicy step;

    void validate() const
    {
        require(max_iters >= 1, ErrorCode::invalid_argument, "max_iters must be positive");
        require(grad_tol > 0.0 && energy_tol > 0.0, ErrorCode::invalid_argument, "tolerances must be positive");
        require(filter_count >= 1, ErrorCode::invalid_argument, "filter count must be positive");
        require(filter_size >= 1 && filter_size % 2 == 1, ErrorCode::invalid_argument, "filter size must be odd");
        require(step.initial_step > 0.0 && step.shrink > 0.0 && step.shrink < 1.0 &&
                    step.sufficient_decrease > 0.0 && step.sufficient_decrease < 1.0,
                ErrorCode::invalid_argument, "invalid step policy");
    }
};

/// He-uniform bound sqrt(6 / fan_in); fan_in = f*f*C for 2-D kernels, f for 1-D.
inline double he_uniform_bound(std::size_t filter_size, std::size_t channels, bool one_dimensional)
{
    const double fan_in = one_dimensional ? static_cast<double>(filter_size)
                                          : static_cast<double>(filter_size * filter_size * channels);
    return std::sqrt(6.0 / fan_in);
}

/// Random bank of `cfg.filter_count` kernels, i.i.d. uniform entries.
inline FilterBank generate_filters(const SynthConfig& cfg, std::size_t channels, bool one_dimensional)
{
    require(cfg.filter_size >= 1, ErrorCode::invalid_argument, "filter size must be positive");
    require(!one_dimensional || channels == 1, ErrorCode::channel_mismatch, "1-D filters are single-channel");
    const double bound = cfg.filter_init == FilterInit::he_uniform
                             ? he_uniform_bound(cfg.filter_size, channels, one_dimensional)
                             : 1.0;
    const Shape ks = one_dimensional ? Shape{1, 1, cfg.filter_size}
                                     : Shape{channels, cfg.filter_size, cfg.filter_size};
    Rng rng(derive_seed(cfg.seed, 0x66696c74));
    std::vector<Signal> kernels;
    kernels.reserve(cfg.filter_count);
    for (std::size_t i = 0; i < cfg.filter_count; ++i) {
        Signal k(ks);
        for (auto& v : k.values())
            v = rng.uniform(-bound, bound);
        kernels.push_back(std::move(k));
    }
    return FilterBank(std::move(kernels));
}

enum class Termination { energy_tol, grad_tol, max_iters, stalled };

inline std::string_view to_string(Termination t) noexcept
{
    switch (t) {
    case Termination::energy_tol: return "energy_tol";
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
    }
    return "unknown";
}

struct SynthResult {
    Signal output;
    double final_energy = 0.0;
    double target_norm = 0.0;  // ||G^x||_F
    std::size_t iterations = 0;
    std::vector<double> energy_trace;  // entry 0 is the initial energy
    Termination termination = Termination::max_iters;
};

/// Uniform [0, 1) starting point drawn from the config seed.
inline Signal random_initialization(const Shape& shape, std::uint64_t seed)
{
    Signal y(shape);
    Rng rng(derive_seed(seed, 0x696e6974));
    for (auto& v : y.values())
        v = rng.uniform01();
    return y;
}

/// Steepest descent with Armijo backtracking on ||G^x - G^y||_F^2.
///
/// Stops on the first of: energy <= energy_tol * ||G^x||_F, gradient norm <=
/// grad_tol * initial gradient norm, max_iters iterations. If no step length
/// down to the backtracking limit decreases the energy the run ends as
/// `stalled`; the trace stays monotone either way.
inline SynthResult synthesize(const Signal& x, const FilterBank& bank, const SynthConfig& cfg,
                              std::optional<Signal> initial = std::nullopt)
{
    cfg.validate();
    require(x.all_finite(), ErrorCode::invalid_argument, "input must be finite");
    const GramMatrix target = gram(x, bank, cfg.nonlinearity);
    const GramObjective objective(bank, x.shape(), cfg.nonlinearity, target);

    SynthResult result;
    result.target_norm = target.frobenius_norm();
    const double energy_goal = cfg.energy_tol * result.target_norm;

    Signal y = initial ? std::move(*initial) : random_initialization(x.shape(), cfg.seed);
    require(y.shape() == x.shape(), ErrorCode::shape_mismatch, "initial point has the wrong shape");

    EnergyReport current = objective.evaluate(y);
    result.energy_trace.push_back(current.energy);
    const double grad0 = l2_norm(current.gradient.values());
    double step = cfg.step.initial_step;

    auto finish = [&](Termination t) {
        result.output = y;
        result.final_energy = current.energy;
        result.termination = t;
        return result;
    };

    if (current.energy <= energy_goal)
        return finish(Termination::energy_tol);

    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        const double gnorm = l2_norm(current.gradient.values());
        if (gnorm <= cfg.grad_tol * grad0)
            return finish(Termination::grad_tol);

        const double slope = gnorm * gnorm;
        bool accepted = false;
        Signal trial(x.shape());
        double trial_value = 0.0;
        for (std::size_t b = 0; b <= cfg.step.max_backtracks; ++b) {
            auto tv = trial.values();
            const auto yv = y.values();
            const auto gv = current.gradient.values();
            for (std::size_t m = 0; m < tv.size(); ++m)
                tv[m] = yv[m] - step * gv[m];
            trial_value = objective.squared_energy(trial);
            if (!std::isfinite(trial_value)) {
                step *= cfg.step.shrink;
                continue;
            }
            if (trial_value <= current.squared_energy - cfg.step.sufficient_decrease * step * slope) {
                accepted = true;
                break;
            }
            step *= cfg.step.shrink;
        }
        if (!accepted)
            return finish(Termination::stalled);

        Signal previous_gradient = std::move(current.gradient);
        y = std::move(trial);
        current = objective.evaluate(y);
        require(std::isfinite(current.squared_energy), ErrorCode::non_finite_energy,
                "energy became non-finite after an accepted step");
        result.energy_trace.push_back(current.energy);
        result.iterations = it + 1;

        // The move was -step * previous_gradient.
        double sd = 0.0;
        const auto gp = previous_gradient.values();
        const auto gc = current.gradient.values();
        for (std::size_t m = 0; m < gp.size(); ++m)
            sd += gp[m] * (gp[m] - gc[m]);
        const double bb = sd > 0.0 ? step * dot(gp, gp) / sd : 0.0;
        step = cfg.step.barzilai_borwein && std::isfinite(bb) && bb > 0.0 ? bb : 2.0 * step;
        if (current.energy <= energy_goal)
            return finish(Termination::energy_tol);
    }
    return finish(Termination::max_iters);
}

/// Generates the bank from the config, then runs the descent.
inline SynthResult synthesize(const Signal& x, const SynthConfig& cfg, std::optional<Signal> initial = std::nullopt)
{
    cfg.validate();
    const FilterBank bank = generate_filters(cfg, x.shape().channels, x.shape().one_dimensional());
    return synthesize(x, bank, cfg, std::move(initial));
}

} // namespace gramtex

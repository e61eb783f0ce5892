#pragma once

// One-dimensional ReLU machinery: circulant matrices, the cones P_i(x),
// filter families that make the ReLU Gram matrix determine x up to a
// circular shift, the decoder that recovers that shift orbit from the Gram
// matrix alone, and a Monte Carlo check of the coverage bound.
//
// Indices are 0-based throughout: cone i is the set of v whose margin
// vector C(x) v is positive exactly at position i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gramtex/convolution.hpp"
#include "gramtex/fft.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/gram.hpp"
#include "gramtex/parallel.hpp"
#include "gramtex/random.hpp"
#include "gramtex/rpn.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

/// C(x): row r is x circularly shifted r times, so C(x)[r][c] = x[c - r].
/// (C(x) v)[r] = sum_c x[c - r] v[c] is a circular cross-correlation, and
/// C(x) v = C(v) x up to the index map r -> -r.
struct CirculantMatrix {
    Signal generator;

    std::size_t n() const noexcept { return generator.size(); }

    double operator()(std::size_t r, std::size_t c) const noexcept
    {
        const std::size_t len = n();
        return generator[(c + len - r % len) % len];
    }

    Eigen::MatrixXd dense() const
    {
        const auto len = static_cast<Eigen::Index>(n());
        Eigen::MatrixXd m(len, len);
        for (Eigen::Index r = 0; r < len; ++r)
            for (Eigen::Index c = 0; c < len; ++c)
                m(r, c) = (*this)(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        return m;
    }

    std::vector<double> apply(std::span<const double> v) const
    {
        const std::size_t len = n();
        require(v.size() == len, ErrorCode::shape_mismatch, "circulant apply: length mismatch");
        std::vector<double> out(len, 0.0);
        for (std::size_t r = 0; r < len; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < len; ++c)
                acc += (*this)(r, c) * v[c];
            out[r] = acc;
        }
        return out;
    }

    /// Singular values of a circulant are the moduli of the raw DFT of its generator.
    std::vector<double> singular_values() const
    {
        const auto d = raw_dft(generator.values(), 1, n());
        std::vector<double> s(d.size());
        std::transform(d.begin(), d.end(), s.begin(), [](Complex z) { return std::abs(z); });
        std::sort(s.begin(), s.end(), std::greater<>());
        return s;
    }

    bool nonsingular(double relative = 1e-10) const
    {
        const auto s = singular_values();
        return s.front() > 0.0 && s.back() > relative * s.front();
    }
};

inline CirculantMatrix circulant(const Signal& x)
{
    require(x.shape().one_dimensional() && x.shape().channels == 1, ErrorCode::invalid_argument,
            "circulant needs a 1-D signal");
    return {x};
}

/// Kernel whose circular convolution with x gives C(v) x, i.e. the feature map
/// of filter v as a row-circulant operator: kernel[j] = v[-j mod n].
inline Signal kernel_for_filter(const Signal& v)
{
    const std::size_t n = v.size();
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j)
        k[j] = v[(n - j) % n];
    return Signal::vector(std::move(k));
}

struct ConeMembership {
    std::optional<std::size_t> index;
    std::vector<double> margins;  // C(x) v
};

/// Default strict tolerance 1e-9 * ||x|| * ||v||.
inline double default_cone_tolerance(const Signal& x, const Signal& v)
{
    return 1e-9 * l2_norm(x.values()) * l2_norm(v.values());
}

/// v is in P_i(x) iff margin i > tol and every other margin < -tol. Vectors
/// with any margin inside [-tol, tol] sit on a cone boundary and get no index.
inline ConeMembership cone_membership(const Signal& x, const Signal& v, std::optional<double> strict_tol = std::nullopt)
{
    const CirculantMatrix c = circulant(x);
    ConeMembership m;
    m.margins = c.apply(v.values());
    const double tol = strict_tol.value_or(default_cone_tolerance(x, v));
    std::optional<std::size_t> positive;
    for (std::size_t r = 0; r < m.margins.size(); ++r) {
        const double g = m.margins[r];
        if (std::abs(g) <= tol)
            return m;
        if (g > 0.0) {
            if (positive)
                return m;
            positive = r;
        }
    }
    m.index = positive;
    return m;
}

struct AlphaDistribution {
    double lo = 0.1;  // alpha ~ U(lo, hi]
    double hi = 1.0;
};

namespace detail {

inline void require_nonsingular(const CirculantMatrix& c)
{
    require(c.nonsingular(), ErrorCode::singular_circulant, "C(x) is numerically singular");
}

inline Signal cone_sample_with(const CirculantMatrix& c, const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                               std::size_t i, Rng& rng, const AlphaDistribution& alpha)
{
    const auto n = static_cast<Eigen::Index>(c.n());
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double a = rng.uniform_left_open(alpha.lo, alpha.hi);
        rhs(k) = static_cast<std::size_t>(k) == i ? a : -a;
    }
    const Eigen::VectorXd v = lu.solve(rhs);
    return Signal::vector(std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace detail

/// A point of the open cone P_i(x): v = C(x)^{-1} (alpha .* s) with alpha_k > 0
/// and the sign pattern s positive at i, negative elsewhere.
inline Signal cone_sample(const Signal& x, std::size_t i, std::uint64_t seed, const AlphaDistribution& alpha = {})
{
    const CirculantMatrix c = circulant(x);
    require(i < c.n(), ErrorCode::invalid_argument, "cone index out of range");
    detail::require_nonsingular(c);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(c.dense());
    Rng rng(derive_seed(seed, 0x636f6e65, i));
    return detail::cone_sample_with(c, lu, i, rng, alpha);
}

struct ShiftInvarianceReport {
    double max_deviation = 0.0;  // max_m ||G^x - G^{Cs^m x}||_F / ||G^x||_F
    bool passed = false;
};

/// Shift-invariance check against an arbitrary feature operator, so a
/// non-equivariant operator can be plugged in to show the check can fail.
/// `features(signal)` must return pre-activation maps.
template <typename FeatureFn>
ShiftInvarianceReport shift_invariance_with(const Signal& x, FeatureFn&& features, Nonlinearity h,
                                            double threshold = 1e-10)
{
    const GramMatrix base = gram_from_features(apply_nonlinearity(features(x), h));
    const double ref = base.frobenius_norm();
    ShiftInvarianceReport rep;
    const Shape& s = x.shape();
    auto consider = [&](const Signal& shifted) {
        const GramMatrix g = gram_from_features(apply_nonlinearity(features(shifted), h));
        const double dev = (g.entries - base.entries).norm();
        rep.max_deviation = std::max(rep.max_deviation, ref > 0.0 ? dev / ref : dev);
    };
    for (std::size_t m = 1; m <= s.cols; ++m)
        consider(circular_shift(x, static_cast<long>(m)));
    if (!s.one_dimensional())
        for (std::size_t r = 1; r <= s.rows; ++r)
            consider(circular_shift(x, 0, static_cast<long>(r)));
    rep.passed = rep.max_deviation <= threshold;
    return rep;
}

/// Gram shift invariance over every circular shift (rows and columns for
/// images), for any nonlinearity.
inline ShiftInvarianceReport verify_shift_invariance(const Signal& x, const FilterBank& bank, Nonlinearity h,
                                                     double threshold = 1e-10)
{
    const BankSpectra spectra(bank, x.shape());
    return shift_invariance_with(
        x, [&](const Signal& s) { return circular_convolve(dft(s), spectra); }, h, threshold);
}

/// n sets S_0..S_{n-1} of n filters each. Within a set every cone is hit
/// exactly once; membership[j][slot] is the cone of filter (j, slot).
struct FilterSetFamily {
    std::size_t n = 0;
    std::vector<std::vector<Signal>> sets;
    std::vector<std::vector<std::size_t>> membership;
    double strict_tol_factor = 1e-9;

    /// Filters as convolution kernels, set-major: filter (j, slot) is index j * n + slot.
    FilterBank bank() const
    {
        std::vector<Signal> kernels;
        kernels.reserve(n * n);
        for (const auto& set : sets)
            for (const auto& v : set)
                kernels.push_back(kernel_for_filter(v));
        return FilterBank(std::move(kernels));
    }

    /// Filters of all sets that land in cone i (S_{P_i}), ordered by set.
    std::vector<Signal> cone_members(std::size_t i) const
    {
        std::vector<Signal> out;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t s = 0; s < n; ++s)
                if (membership[j][s] == i)
                    out.push_back(sets[j][s]);
        return out;
    }
};

/// Smallest singular value of the row-normalized matrix stacking `vs`.
inline double normalized_min_singular_value(const std::vector<Signal>& vs)
{
    if (vs.empty())
        return 0.0;
    const auto rows = static_cast<Eigen::Index>(vs.size());
    const auto cols = static_cast<Eigen::Index>(vs.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& v = vs[static_cast<std::size_t>(r)];
        const double nrm = l2_norm(v.values());
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = nrm > 0.0 ? v[static_cast<std::size_t>(c)] / nrm : 0.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().minCoeff();
}

/// Checks every FilterSetFamily invariant against x; returns an explanation
/// of the first violation, or nothing when the family is valid.
inline std::optional<std::string> family_violation(const Signal& x, const FilterSetFamily& f)
{
    const std::size_t n = x.size();
    if (f.n != n || f.sets.size() != n || f.membership.size() != n)
        return "family dimensions do not match the signal";
    for (std::size_t j = 0; j < n; ++j) {
        if (f.sets[j].size() != n || f.membership[j].size() != n)
            return "set " + std::to_string(j) + " does not hold n filters";
        std::vector<bool> seen(n, false);
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t cone = f.membership[j][s];
            const auto m = cone_membership(x, f.sets[j][s],
                                           f.strict_tol_factor * l2_norm(x.values()) * l2_norm(f.sets[j][s].values()));
            if (cone >= n || seen[cone] || !m.index || *m.index != cone)
                return "set " + std::to_string(j) + " slot " + std::to_string(s) + " is not in its recorded cone";
            seen[cone] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (normalized_min_singular_value(f.cone_members(i)) <= 1e-8)
            return "filters in cone " + std::to_string(i) + " are linearly dependent";
    return std::nullopt;
}

/// Builds a family satisfying the uniqueness hypotheses by cone sampling.
/// Each set uses a random slot -> cone permutation; a failed independence
/// check resamples the whole family with the next attempt stream.
inline FilterSetFamily build_filter_family(const Signal& x, std::uint64_t seed, std::size_t max_attempts = 16,
                                           const AlphaDistribution& alpha = {})
{
    const CirculantMatrix c = circulant(x);
    detail::require_nonsingular(c);
    const std::size_t n = c.n();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(c.dense());

    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(derive_seed(seed, 0x66616d, attempt));
        FilterSetFamily f;
        f.n = n;
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            rng.shuffle(perm);
            std::vector<Signal> set;
            for (std::size_t s = 0; s < n; ++s)
                set.push_back(detail::cone_sample_with(c, lu, perm[s], rng, alpha));
            f.sets.push_back(std::move(set));
            f.membership.push_back(std::move(perm));
        }
        if (!family_violation(x, f))
            return f;
    }
    throw Error(ErrorCode::construction_failed,
                "no valid filter family after " + std::to_string(max_attempts) + " attempts");
}

struct DecodeOptions {
    double block_tolerance = 1e-9;   // off-diagonal / block norm inside diagonal blocks
    double align_tolerance = 1e-9;   // nonzero threshold / block norm in off-diagonal blocks
    double gram_tolerance = 1e-8;    // relative Gram match required of a candidate
};

namespace detail {

inline double block_norm(const Eigen::MatrixXd& g, std::size_t a, std::size_t b, std::size_t n)
{
    return g.block(static_cast<Eigen::Index>(a * n), static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(n),
                   static_cast<Eigen::Index>(n))
        .norm();
}

/// Row of the linear map y -> (k * y)[p] for kernel k (length n).
inline void add_convolution_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, const Signal& kernel, std::size_t p,
                                std::size_t n)
{
    for (std::size_t j = 0; j < kernel.size(); ++j)
        row(static_cast<Eigen::Index>((p + n - j % n) % n)) += kernel[j];
}

} // namespace detail

/// Recovers every y with ReLU Gram equal to `target` under the family's
/// filters. Steps: (1) each diagonal n x n block must be diagonal, since
/// each filter has a single active output; (2) off-diagonal blocks pair
/// filters of different sets that share an active position, giving n classes
/// of n filters; (3) with a_q = sqrt(G_qq), class 0 placed at offset p gives
/// n linear equations (k_q * y)[p] = a_q; (4) the solution fixes the active
/// position of every other class and all n^2 equations are solved jointly;
/// (5) a candidate is kept only if its ReLU Gram reproduces the target.
/// For a target built from x the result is the circular-shift orbit of x.
inline std::vector<Signal> decode_from_gram(const GramMatrix& target, const FilterSetFamily& family,
                                            std::optional<double> x_hint_norm = std::nullopt,
                                            const DecodeOptions& opts = {})
{
    const std::size_t n = family.n;
    const Eigen::MatrixXd& g = target.entries;
    require(target.filter_count() == n * n, ErrorCode::shape_mismatch,
            "target Gram must be n^2 x n^2 for a family of size n");
    (void)x_hint_norm;  // dimensions come from the family; the norm is not needed to decode

    const FilterBank bank = family.bank();

    // (1) diagonal blocks must be diagonal.
    for (std::size_t j = 0; j < n; ++j) {
        const double bn = detail::block_norm(g, j, j, n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && std::abs(g(static_cast<Eigen::Index>(j * n + a), static_cast<Eigen::Index>(j * n + b))) >
                                  opts.block_tolerance * bn)
                    throw Error(ErrorCode::block_not_diagonal,
                                "diagonal block " + std::to_string(j) + " has a nonzero off-diagonal entry");
    }

    // (2) exhaustive alignment through the off-diagonal blocks.
    std::vector<std::vector<std::size_t>> partner(n, std::vector<std::size_t>(n * n, 0));  // [set b][filter] -> slot
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b)
                continue;
            const double tol = opts.align_tolerance * detail::block_norm(g, a, b, n);
            std::vector<std::size_t> column_hits(n, 0);
            for (std::size_t s = 0; s < n; ++s) {
                std::size_t hits = 0;
                for (std::size_t t = 0; t < n; ++t)
                    if (g(static_cast<Eigen::Index>(a * n + s), static_cast<Eigen::Index>(b * n + t)) > tol) {
                        ++hits;
                        ++column_hits[t];
                        partner[b][a * n + s] = t;
                    }
                if (hits != 1)
                    throw Error(ErrorCode::alignment_ambiguous, "block (" + std::to_string(a) + "," +
                                                                    std::to_string(b) + ") row " + std::to_string(s) +
                                                                    " has " + std::to_string(hits) + " nonzeros");
            }
            if (std::any_of(column_hits.begin(), column_hits.end(), [](std::size_t h) { return h != 1; }))
                throw Error(ErrorCode::alignment_ambiguous, "off-diagonal block is not a one-to-one alignment");
        }
    std::vector<std::vector<std::size_t>> classes(n);  // class s -> global filter indices, one per set
    for (std::size_t s = 0; s < n; ++s) {
        classes[s].push_back(s);
        for (std::size_t b = 1; b < n; ++b)
            classes[s].push_back(b * n + partner[b][s]);
    }

    std::vector<double> active(n * n);
    for (std::size_t q = 0; q < n * n; ++q) {
        const double d = g(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
        require(d > 0.0, ErrorCode::singular_system, "filter " + std::to_string(q) + " has no active output");
        active[q] = std::sqrt(d);
    }

    const auto nn = static_cast<Eigen::Index>(n);
    const double target_norm = target.frobenius_norm();
    std::vector<Signal> candidates;
    for (std::size_t p = 0; p < n; ++p) {
        // (3) class 0 at offset p.
        Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(nn, nn);
        Eigen::VectorXd b0(nn);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t q = classes[0][r];
            detail::add_convolution_row(a0.row(static_cast<Eigen::Index>(r)), bank.kernel(q), p, n);
            b0(static_cast<Eigen::Index>(r)) = active[q];
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu0(a0);
        if (lu0.rank() < nn)
            throw Error(ErrorCode::singular_system, "class 0 system is rank deficient");
        Eigen::VectorXd y = lu0.solve(b0);

        // (4) locate every class, then solve all n^2 equations together.
        std::vector<std::size_t> position(n, p);
        {
            const Signal ys = Signal::vector(std::vector<double>(y.data(), y.data() + nn));
            const FeatureMaps pre = circular_convolve(ys, bank);
            for (std::size_t s = 1; s < n; ++s) {
                const auto map = pre.map(classes[s][0]);
                position[s] = static_cast<std::size_t>(std::max_element(map.begin(), map.end()) - map.begin());
            }
        }
        Eigen::MatrixXd a_all = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * n), nn);
        Eigen::VectorXd b_all(static_cast<Eigen::Index>(n * n));
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t q = classes[s][r];
                const auto row = static_cast<Eigen::Index>(s * n + r);
                detail::add_convolution_row(a_all.row(row), bank.kernel(q), position[s], n);
                b_all(row) = active[q];
            }
        y = a_all.colPivHouseholderQr().solve(b_all);

        // (5) keep only exact Gram matches.
        Signal cand = Signal::vector(std::vector<double>(y.data(), y.data() + nn));
        const GramMatrix gc = gram(cand, bank, Nonlinearity::relu);
        const double rel = (gc.entries - g).norm() / (target_norm > 0.0 ? target_norm : 1.0);
        if (rel > opts.gram_tolerance)
            continue;
        const double scale = std::max(1.0, l2_norm(cand.values()));
        const bool duplicate = std::any_of(candidates.begin(), candidates.end(), [&](const Signal& c) {
            return distance(c.values(), cand.values()) <= 1e-9 * scale;
        });
        if (!duplicate)
            candidates.push_back(std::move(cand));
    }
    return candidates;
}

/// Index m such that y == Cs^m(x) within `tol` elementwise, if any.
inline std::optional<std::size_t> shift_match(const Signal& x, const Signal& y, double tol)
{
    if (x.shape() != y.shape())
        return std::nullopt;
    for (std::size_t m = 0; m < x.size(); ++m)
        if (max_abs_difference(circular_shift(x, static_cast<long>(m)).values(), y.values()) <= tol)
            return m;
    return std::nullopt;
}

struct ContrastReport {
    Signal candidate;
    double linear_energy = 0.0;
    double linear_target_norm = 0.0;
    double relu_energy = 0.0;
    double relu_target_norm = 0.0;
    bool candidate_is_shift = false;
    bool degenerate = false;  // the candidate is a circular shift of x, so no contrast exists

    double linear_relative() const { return linear_target_norm > 0.0 ? linear_energy / linear_target_norm : linear_energy; }
    double relu_relative() const { return relu_target_norm > 0.0 ? relu_energy / relu_target_norm : relu_energy; }
};

/// Linear and ReLU Gram energies of a candidate y against x under the family's filters.
inline ContrastReport contrast_energies(const Signal& x, const Signal& y, const FilterSetFamily& family)
{
    const FilterBank bank = family.bank();
    ContrastReport r;
    r.candidate = y;
    const GramMatrix gl = gram(x, bank, Nonlinearity::identity);
    const GramMatrix gr = gram(x, bank, Nonlinearity::relu);
    r.linear_target_norm = gl.frobenius_norm();
    r.relu_target_norm = gr.frobenius_norm();
    r.linear_energy = energy_value(y, gl, bank, Nonlinearity::identity);
    r.relu_energy = energy_value(y, gr, bank, Nonlinearity::relu);
    r.candidate_is_shift = shift_match(x, y, 1e-9 * std::max(1.0, l2_norm(x.values()))).has_value();
    r.degenerate = r.candidate_is_shift;
    return r;
}

/// Random-phase resynthesis of x scored under both models: the linear
/// energy vanishes for any phase field, while the ReLU energy stays positive
/// unless the resynthesis happens to be a circular shift of x.
inline ContrastReport uniqueness_contrast(const Signal& x, const FilterSetFamily& family, std::uint64_t rpn_seed)
{
    RpnConfig cfg;
    cfg.seed = rpn_seed;
    return contrast_energies(x, rpn_synthesize(x, cfg), family);
}

struct CoverageOptions {
    std::size_t calibration_draws = 10000;
};

struct CoverageEstimate {
    std::vector<double> delta_hat;                   // per-cone hit probability from calibration
    std::vector<std::vector<std::size_t>> counts;    // [trial][cone] hits of group `cone`
    double empirical_success = 0.0;                  // fraction of trials with all counts >= n
    double chernoff_bound = 0.0;                     // product bound at delta_hat; 0 when vacuous
    std::vector<double> per_cone_bound;              // 1 - exp(...) per cone, 0 where c*delta <= 1
    bool insufficient_oversampling = false;          // some c * delta_hat_i <= 1
    double c = 0.0;
    std::size_t draws_per_group = 0;                 // k = c * n
    std::size_t trials = 0;
    std::size_t calibration_draws = 0;

    /// Binomial standard error of empirical_success.
    double standard_error() const
    {
        const double p = empirical_success;
        return trials > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0;
    }
};

/// Lower bound on P(count_i >= n for every i) with count_i ~ Bin(c n, delta_i):
/// prod_i (1 - exp(-((c d - 1) / (2 c d)) ((c d - 1) / (c d)) c d n)).
inline double chernoff_coverage_factor(double c, double delta, std::size_t n)
{
    const double cd = c * delta;
    if (!(cd > 1.0))
        return 0.0;
    const double eps = (cd - 1.0) / cd;
    return 1.0 - std::exp(-(eps / 2.0) * eps * cd * static_cast<double>(n));
}

namespace detail {

inline std::optional<std::size_t> cone_of_draw(const CirculantMatrix& c, double x_norm, std::span<const double> v)
{
    const std::size_t n = c.n();
    const double tol = 1e-9 * x_norm * l2_norm(v);
    std::optional<std::size_t> positive;
    for (std::size_t r = 0; r < n; ++r) {
        double g = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            g += c(r, k) * v[k];
        if (std::abs(g) <= tol)
            return std::nullopt;
        if (g > 0.0) {
            if (positive)
                return std::nullopt;
            positive = r;
        }
    }
    return positive;
}

} // namespace detail

/// Monte Carlo version of the coverage argument. Per trial, n groups of
/// k = c n filters are drawn uniformly from [-1, 1]^n (the infinity-norm unit
/// ball); count_i counts hits of cone i in group i. Every (trial, group) uses
/// its own stream derived from the seed, and a group's draws are a prefix of
/// the same stream for every c, so success is monotone in c per trial and
/// results do not depend on the worker count.
inline CoverageEstimate coverage_experiment(const Signal& x, double c, std::size_t trials, std::uint64_t seed,
                                            const CoverageOptions& opts = {})
{
    const CirculantMatrix circ = circulant(x);
    detail::require_nonsingular(circ);
    const std::size_t n = circ.n();
    require(c > 0.0, ErrorCode::invalid_argument, "oversampling factor must be positive");
    const double k_real = c * static_cast<double>(n);
    const double k_round = std::round(k_real);
    require(k_round >= 1.0 && std::abs(k_real - k_round) <= 1e-9 * std::max(1.0, k_real), ErrorCode::invalid_argument,
            "c * n must be a positive integer");
    const auto k = static_cast<std::size_t>(k_round);
    const double x_norm = l2_norm(x.values());

    CoverageEstimate est;
    est.c = c;
    est.draws_per_group = k;
    est.trials = trials;
    est.calibration_draws = opts.calibration_draws;

    // Calibration of delta_i.
    {
        std::vector<std::size_t> hits(n, 0);
        Rng rng(derive_seed(seed, 0x63616c));
        std::vector<double> v(n);
        for (std::size_t d = 0; d < opts.calibration_draws; ++d) {
            for (auto& e : v)
                e = rng.uniform(-1.0, 1.0);
            if (const auto cone = detail::cone_of_draw(circ, x_norm, v))
                ++hits[*cone];
        }
        for (std::size_t i = 0; i < n; ++i)
            est.delta_hat.push_back(opts.calibration_draws > 0 ? static_cast<double>(hits[i]) /
                                                                     static_cast<double>(opts.calibration_draws)
                                                               : 0.0);
    }

    est.counts.assign(trials, std::vector<std::size_t>(n, 0));
    parallel_for(trials, [&](std::size_t t) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(derive_seed(seed, 0x636f76, t * n + i));
            std::size_t count = 0;
            for (std::size_t d = 0; d < k; ++d) {
                for (auto& e : v)
                    e = rng.uniform(-1.0, 1.0);
                const auto cone = detail::cone_of_draw(circ, x_norm, v);
                if (cone && *cone == i)
                    ++count;
            }
            est.counts[t][i] = count;
        }
    });
    std::size_t successes = 0;
    for (const auto& row : est.counts)
        if (std::all_of(row.begin(), row.end(), [n](std::size_t cnt) { return cnt >= n; }))
            ++successes;
    est.empirical_success = trials > 0 ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;

    est.chernoff_bound = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = chernoff_coverage_factor(c, est.delta_hat[i], n);
        if (!(c * est.delta_hat[i] > 1.0))
            est.insufficient_oversampling = true;
        est.per_cone_bound.push_back(f);
        est.chernoff_bound *= f;
    }
    if (est.insufficient_oversampling)
        est.chernoff_bound = 0.0;
    return est;
}

} // namespace gramtex

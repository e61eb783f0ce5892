#pragma once

// Magnitude constraint system of the linear (no-nonlinearity) model.
//
// Under circular convolution every filter is diagonalized by the Fourier
// basis, so G_ij = sum_k |lambda_k|^2 Re(conj(D_i^k) D_j^k): the Gram matrix
// is linear in the power spectrum and blind to phase. For real signals
// |lambda_k| = |lambda_{-k}|, so the unknowns are folded into conjugate
// classes {k, -k}; a class of two bins carries weight 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gramtex/convolution.hpp"
#include "gramtex/fft.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/gram.hpp"
#include "gramtex/nnls.hpp"
#include "gramtex/random.hpp"
#include "gramtex/signal.hpp"

namespace gramtex {

struct FrequencyClass {
    std::size_t representative;  // smaller flat index of {k, -k}
    std::size_t partner;         // flat index of -k (== representative when self-conjugate)
    double weight;               // 1 or 2

    bool self_conjugate() const noexcept { return representative == partner; }
};

/// Conjugate-symmetry classes of a rows x cols grid, row-major flattening,
/// ordered by representative.
class FrequencyFolding {
public:
    FrequencyFolding() = default;

    FrequencyFolding(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), class_of_(rows * cols)
    {
        for (std::size_t k = 0; k < rows * cols; ++k) {
            const std::size_t j = conjugate_index(k, rows, cols);
            if (j < k) {
                class_of_[k] = class_of_[j];
                continue;
            }
            class_of_[k] = classes_.size();
            classes_.push_back({k, j, j == k ? 1.0 : 2.0});
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return classes_.size(); }
    const std::vector<FrequencyClass>& classes() const noexcept { return classes_; }
    const FrequencyClass& operator[](std::size_t i) const { return classes_[i]; }
    std::size_t class_of(std::size_t k) const { return class_of_.at(k); }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<FrequencyClass> classes_;
    std::vector<std::size_t> class_of_;
};

/// |lambda_k|^2 per folded class of a single-channel signal.
inline std::vector<double> folded_power(const Signal& x)
{
    require(x.shape().channels == 1, ErrorCode::channel_mismatch, "folded power needs a single-channel signal");
    const FrequencyFolding fold(x.shape().rows, x.shape().cols);
    const Spectrum s = dft(x);
    std::vector<double> p(fold.size());
    for (std::size_t c = 0; c < fold.size(); ++c)
        p[c] = std::norm(s.coeffs[fold[c].representative]);
    return p;
}

/// g = M |lambda|^2 over unordered filter pairs (i <= j) and folded classes.
struct ConstraintSystem {
    Eigen::MatrixXd m_matrix;
    Eigen::VectorXd g_vector;
    std::vector<std::pair<std::size_t, std::size_t>> pair_index;
    FrequencyFolding folding;
    std::size_t filter_count = 0;

    /// Counts before folding: one equation per ordered pair, one unknown per bin.
    std::size_t raw_equations() const noexcept { return filter_count * filter_count; }
    std::size_t raw_unknowns() const noexcept { return folding.rows() * folding.cols(); }

    double residual(const Eigen::VectorXd& squared_magnitudes) const
    {
        return (m_matrix * squared_magnitudes - g_vector).norm();
    }
};

/// Row (i, j) holds weight_c * Re(conj(D_i^k) D_j^k) at each class
/// representative k, i.e. the folded diag(D_i^H D_j).
inline ConstraintSystem build_constraint_system(const Signal& x, const FilterBank& bank)
{
    require(x.shape().channels == 1, ErrorCode::channel_mismatch,
            "the magnitude system is defined for single-channel signals");
    bank.check_compatible(x.shape());
    const BankSpectra spectra(bank, x.shape());
    const std::size_t n = bank.size();

    ConstraintSystem sys;
    sys.filter_count = n;
    sys.folding = FrequencyFolding(x.shape().rows, x.shape().cols);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            sys.pair_index.emplace_back(i, j);

    const auto rows = static_cast<Eigen::Index>(sys.pair_index.size());
    const auto cols = static_cast<Eigen::Index>(sys.folding.size());
    sys.m_matrix.resize(rows, cols);
    parallel_for(sys.pair_index.size(), [&](std::size_t r) {
        const auto [i, j] = sys.pair_index[r];
        const auto di = spectra.diagonal(i, 0);
        const auto dj = spectra.diagonal(j, 0);
        for (std::size_t c = 0; c < sys.folding.size(); ++c) {
            const FrequencyClass& fc = sys.folding[c];
            const std::size_t k = fc.representative;
            sys.m_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                fc.weight * (std::conj(di[k]) * dj[k]).real();
        }
    });

    const GramMatrix g = gram(x, bank, Nonlinearity::identity);
    sys.g_vector.resize(rows);
    for (std::size_t r = 0; r < sys.pair_index.size(); ++r)
        sys.g_vector(static_cast<Eigen::Index>(r)) = g(sys.pair_index[r].first, sys.pair_index[r].second);
    return sys;
}

struct RankReport {
    std::size_t numerical_rank = 0;
    std::vector<double> singular_values;  // descending
    std::size_t saturation_rank = 0;      // number of folded classes
    double relative_tolerance = 0.0;
    std::size_t rows = 0, cols = 0;
    std::size_t raw_equations = 0, raw_unknowns = 0;

    bool saturated() const noexcept { return numerical_rank == saturation_rank; }
};

/// Default relative rank tolerance: max(rows, cols) * machine epsilon.
inline double default_rank_tolerance(const ConstraintSystem& sys)
{
    return static_cast<double>(std::max(sys.m_matrix.rows(), sys.m_matrix.cols())) *
           std::numeric_limits<double>::epsilon();
}

/// Counts singular values above tol * sigma_max.
inline RankReport rank_analysis(const ConstraintSystem& sys, std::optional<double> relative_tolerance = std::nullopt)
{
    RankReport r;
    r.rows = static_cast<std::size_t>(sys.m_matrix.rows());
    r.cols = static_cast<std::size_t>(sys.m_matrix.cols());
    r.raw_equations = sys.raw_equations();
    r.raw_unknowns = sys.raw_unknowns();
    r.saturation_rank = sys.folding.size();
    r.relative_tolerance = relative_tolerance.value_or(default_rank_tolerance(sys));
    require(r.relative_tolerance >= 0.0, ErrorCode::invalid_argument, "rank tolerance must be nonnegative");

    const Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.m_matrix);
    const Eigen::VectorXd sv = svd.singularValues();
    r.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double cutoff = sv.size() > 0 ? r.relative_tolerance * sv(0) : 0.0;
    for (double s : r.singular_values)
        if (s > cutoff)
            ++r.numerical_rank;
    return r;
}

struct MagnitudeSolution {
    std::vector<double> squared_magnitudes;  // per folded class
    double residual = 0.0;                   // ||M s - g||_2
};

/// Nonnegative least squares for the folded power spectrum.
inline MagnitudeSolution solve_magnitudes(const ConstraintSystem& sys, const NnlsOptions& opts = {})
{
    const NnlsResult res = nnls(sys.m_matrix, sys.g_vector, opts);
    MagnitudeSolution out;
    out.squared_magnitudes.assign(res.solution.data(), res.solution.data() + res.solution.size());
    out.residual = res.residual;
    return out;
}

namespace detail {

inline double standard_normal(Rng& rng)
{
    // Box-Muller on two uniforms in (0, 1].
    const double u1 = rng.uniform_left_open(0.0, 1.0);
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

/// Samples distinct nonnegative solutions of the same system by hit-and-run
/// inside {s >= 0, M s = M s0}, starting from the NNLS solution s0. Returns
/// an empty set when the solution is unique: either the system is saturated
/// (trivial null space) or nonnegativity pins every null direction, as for
/// g = 0. Otherwise the returned set contains s0 plus up to trials - 1
/// alternatives, pairwise at least 1e-3 apart with residual <= 1e-8 ||g||.
inline std::vector<MagnitudeSolution> null_space_probe(const ConstraintSystem& sys, std::size_t trials,
                                                       std::uint64_t seed,
                                                       std::optional<double> relative_tolerance = std::nullopt)
{
    std::vector<MagnitudeSolution> found;
    if (trials == 0)
        return found;
    const RankReport rank = rank_analysis(sys, relative_tolerance);
    const auto cols = sys.m_matrix.cols();
    if (rank.numerical_rank >= static_cast<std::size_t>(cols))
        return found;

    const double g_norm = sys.g_vector.norm();
    const double max_residual = 1e-8 * g_norm;
    const double min_separation = 1e-3;

    const MagnitudeSolution base = solve_magnitudes(sys);
    if (base.residual > max_residual)
        return found;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.m_matrix, Eigen::ComputeFullV);
    const Eigen::Index null_dim = cols - static_cast<Eigen::Index>(rank.numerical_rank);
    const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(null_dim);

    Eigen::VectorXd point = Eigen::Map<const Eigen::VectorXd>(base.squared_magnitudes.data(), cols);
    std::vector<Eigen::VectorXd> kept{point};
    Rng rng(derive_seed(seed, 0x6e756c6c));

    const std::size_t max_steps = 200 * trials + 200;
    const double scale = std::max(1.0, point.cwiseAbs().maxCoeff());
    for (std::size_t step = 0; step < max_steps && kept.size() < trials; ++step) {
        Eigen::VectorXd z(null_dim);
        for (Eigen::Index i = 0; i < null_dim; ++i)
            z(i) = detail::standard_normal(rng);
        Eigen::VectorXd d = null_basis * z;
        d /= d.norm();

        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < cols; ++k) {
            if (d(k) > 1e-14)
                lo = std::max(lo, -point(k) / d(k));
            else if (d(k) < -1e-14)
                hi = std::min(hi, -point(k) / d(k));
        }
        if (!(hi - lo > 1e-12 * scale) || !std::isfinite(lo) || !std::isfinite(hi))
            continue;
        Eigen::VectorXd next = point + rng.uniform(lo, hi) * d;
        next = next.cwiseMax(0.0);
        if (sys.residual(next) > max_residual)
            continue;
        point = next;

        const bool distinct = std::all_of(kept.begin(), kept.end(), [&](const Eigen::VectorXd& p) {
            return (p - point).norm() >= min_separation;
        });
        if (distinct)
            kept.push_back(point);
    }
    if (kept.size() < 2)
        return found;
    for (const auto& p : kept)
        found.push_back({std::vector<double>(p.data(), p.data() + p.size()), sys.residual(p)});
    return found;
}

/// Real signal whose folded power spectrum equals `sol`, with uniform random
/// phases on every non-self-conjugate class (self-conjugate bins take the
/// positive root).
inline Signal synthesize_from_magnitudes(const MagnitudeSolution& sol, const Shape& shape, std::uint64_t seed)
{
    require(shape.channels == 1, ErrorCode::channel_mismatch, "magnitude synthesis is single-channel");
    const FrequencyFolding fold(shape.rows, shape.cols);
    require(sol.squared_magnitudes.size() == fold.size(), ErrorCode::shape_mismatch,
            "solution has " + std::to_string(sol.squared_magnitudes.size()) + " classes, shape needs " +
                std::to_string(fold.size()));
    Spectrum s{shape, std::vector<Complex>(shape.spatial(), Complex(0.0, 0.0)), true};
    Rng rng(derive_seed(seed, 0x6d616773));
    for (std::size_t c = 0; c < fold.size(); ++c) {
        const double p = sol.squared_magnitudes[c];
        require(p >= 0.0, ErrorCode::invalid_argument, "squared magnitudes must be nonnegative");
        const double mag = std::sqrt(p);
        const FrequencyClass& fc = fold[c];
        if (fc.self_conjugate()) {
            s.coeffs[fc.representative] = Complex(mag, 0.0);
        } else {
            const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            s.coeffs[fc.representative] = std::polar(mag, theta);
            s.coeffs[fc.partner] = std::polar(mag, -theta);
        }
    }
    return idft(s);
}

} // namespace gramtex

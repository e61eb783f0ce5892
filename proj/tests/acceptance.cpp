// Acceptance suite: one PASS/FAIL line per criterion, each timed against its
// runtime budget.
//
//   acceptance [--cli PATH] [--only N,...] [--expect-fail N,...] [--work DIR]
//
// The exit status is 0 when every criterion passes, ignoring the ones named in
// --expect-fail. Those still run and still print their real verdict. The
// lines are also written to DIR/results.txt.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <gramtex/gramtex.hpp>

#include "oracles.hpp"

using namespace gramtex;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

bool monotone(const std::vector<double>& t)
{
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] > t[i - 1])
            return false;
    return true;
}

Signal uniform_vector_signal(Rng& rng, std::size_t n, double lo, double hi)
{
    return Signal::vector(oracle::uniform_vector(rng, n, lo, hi));
}

/// sum_k |lambda_k|^2 conj(D_i^k) D_j^k from the direct DFT, single channel.
Eigen::MatrixXd formula_gram(const Signal& x, const FilterBank& bank)
{
    const std::size_t rows = x.shape().rows, cols = x.shape().cols, len = rows * cols;
    const auto lam = oracle::direct_dft(x.vec(), rows, cols);
    std::vector<std::vector<oracle::cplx>> d;
    for (const auto& k : bank.kernels()) {
        std::vector<double> ext(len, 0.0);
        for (std::size_t a = 0; a < k.shape().rows; ++a)
            for (std::size_t b = 0; b < k.shape().cols; ++b)
                ext[a * cols + b] = k.at(0, a, b);
        auto u = oracle::direct_dft(ext, rows, cols);
        for (auto& v : u)
            v *= std::sqrt(static_cast<double>(len));
        d.push_back(std::move(u));
    }
    const auto n = static_cast<Eigen::Index>(bank.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            oracle::cplx acc = 0.0;
            for (std::size_t k = 0; k < len; ++k)
                acc += std::norm(lam[k]) * std::conj(d[static_cast<std::size_t>(i)][k]) *
                       d[static_cast<std::size_t>(j)][k];
            g(i, j) = acc.real();
        }
    return g;
}

/// Margins C(x) v with C(x)[r][c] = x[c - r mod n], computed directly.
std::vector<double> direct_margins(const Signal& x, const Signal& v)
{
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            m[r] += x[(c + n - r) % n] * v[c];
    return m;
}

bool strictly_in_cone(const Signal& x, const Signal& v, std::size_t i)
{
    const auto m = direct_margins(x, v);
    const double tol = 1e-9 * l2_norm(x.values()) * l2_norm(v.values());
    for (std::size_t r = 0; r < m.size(); ++r)
        if (r == i ? !(m[r] > tol) : !(m[r] < -tol))
            return false;
    return true;
}

int run_command(const std::string& cmd)
{
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ------------------------------------------------------------------ 1

Verdict shift_invariance()
{
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 4 + rng.below(29);
        const std::size_t count = 8 + rng.below(25);
        const std::size_t f = 1 + rng.below(n);
        const Signal x = uniform_vector_signal(rng, n, -1.0, 1.0);
        const FilterBank bank(oracle::random_kernels(rng, count, Shape{1, 1, f}));
        const Nonlinearity h = t % 2 ? Nonlinearity::relu : Nonlinearity::identity;
        const GramMatrix g = gram(x, bank, h);
        for (std::size_t m = 1; m < n; ++m) {
            const GramMatrix gs = gram(circular_shift(x, static_cast<long>(m)), bank, h);
            worst = std::max(worst, (gs.entries - g.entries).norm() / g.frobenius_norm());
        }
    }
    return {worst <= 1e-10, "max relative deviation " + fmt(worst) + " (<= 1e-10)"};
}

// ------------------------------------------------------------------ 2

Verdict spectral_identity()
{
    Rng rng(202);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const bool two_d = t % 2 == 1;
        const Shape s = two_d ? Shape{1, 6 + rng.below(7), 6 + rng.below(7)} : Shape{1, 1, 8 + rng.below(57)};
        const std::size_t f = 1 + 2 * rng.below(3);
        const Shape ks = two_d ? Shape{1, f, f} : Shape{1, 1, f};
        const Signal x = oracle::random_signal(rng, s, 0.0, 1.0);
        const FilterBank bank(oracle::random_kernels(rng, 4 + rng.below(9), ks));
        const GramMatrix via_maps = gram_from_features(circular_convolve_spatial(x, bank));
        const Eigen::MatrixXd via_formula = formula_gram(x, bank);
        worst = std::max(worst, (via_maps.entries - via_formula).norm() / via_maps.frobenius_norm());
    }
    return {worst <= 1e-9, "max relative difference " + fmt(worst) + " (<= 1e-9)"};
}

// ------------------------------------------------------------------ 3

Verdict constraint_system()
{
    Rng rng(303);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const bool two_d = t % 4 == 3;
        const Shape s = two_d ? Shape{1, 4 + rng.below(5), 4 + rng.below(5)} : Shape{1, 1, 4 + rng.below(29)};
        const std::size_t f = 1 + rng.below(std::min<std::size_t>(s.rows, s.cols) == 1 ? s.cols : 3);
        const Shape ks = two_d ? Shape{1, f, f} : Shape{1, 1, f};
        const Signal x = oracle::random_signal(rng, s, 0.0, 1.0);
        const FilterBank bank(oracle::random_kernels(rng, 2 + rng.below(10), ks));
        const ConstraintSystem sys = build_constraint_system(x, bank);
        const auto lam = oracle::direct_dft(x.vec(), s.rows, s.cols);
        Eigen::VectorXd truth(static_cast<Eigen::Index>(sys.folding.size()));
        for (std::size_t c = 0; c < sys.folding.size(); ++c)
            truth(static_cast<Eigen::Index>(c)) = std::norm(lam[sys.folding[c].representative]);
        worst = std::max(worst, sys.residual(truth) / sys.g_vector.norm());
    }
    std::string detail = "max residual/||g|| " + fmt(worst) + " (<= 1e-9)";
    bool ok = worst <= 1e-9;

    for (std::size_t n : {4u, 8u, 16u}) {
        const std::size_t sat = n / 2 + 1;
        const FilterBank bank(oracle::random_kernels(rng, sat + 16, Shape{1, 1, n}));
        const Signal x = uniform_vector_signal(rng, n, 0.0, 1.0);
        std::vector<std::size_t> ranks;
        std::size_t first = 0;
        for (std::size_t k = 1; k <= bank.size(); ++k) {
            ranks.push_back(rank_analysis(build_constraint_system(x, bank.prefix(k))).numerical_rank);
            if (!first && ranks.back() == sat)
                first = k;
            if (first && k == first + 8)
                break;
        }
        bool good = first > 0 && std::is_sorted(ranks.begin(), ranks.end()) && ranks.back() <= sat;
        for (std::size_t k = first; good && k <= first + 8; ++k)
            good = ranks[k - 1] == sat;
        ok = ok && good;
        detail += "; n=" + std::to_string(n) + " saturates at rank " + std::to_string(ranks.back()) + "/" +
                  std::to_string(sat) + " from N=" + std::to_string(first) + (good ? "" : " [bad sweep]");
    }
    return {ok, detail};
}

// ------------------------------------------------------------------ 4

Verdict independent_banks()
{
    double worst = 0.0;
    std::size_t unsaturated = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(400 + seed);
        const std::size_t n = 8 + rng.below(17);
        const Signal x = uniform_vector_signal(rng, n, 0.0, 1.0);
        const FilterBank a(oracle::random_kernels(rng, 10, Shape{1, 1, n}));
        const FilterBank b(oracle::random_kernels(rng, 10, Shape{1, 1, n}));
        const ConstraintSystem sa = build_constraint_system(x, a);
        const ConstraintSystem sb = build_constraint_system(x, b);
        if (!rank_analysis(sa).saturated() || !rank_analysis(sb).saturated())
            ++unsaturated;
        const MagnitudeSolution ma = solve_magnitudes(sa);
        const MagnitudeSolution mb = solve_magnitudes(sb);
        worst = std::max(worst, relative_distance(ma.squared_magnitudes, mb.squared_magnitudes));
    }
    return {worst <= 1e-6 && unsaturated == 0,
            "max relative difference " + fmt(worst) + " (<= 1e-6), unsaturated banks " + std::to_string(unsaturated)};
}

// ------------------------------------------------------------------ 5

Verdict rpn(const std::string& cli, const fs::path& work)
{
    Rng rng(505);
    const std::vector<Shape> shapes{Shape{1, 1, 16}, Shape{1, 1, 33},  Shape{1, 9, 7},   Shape{3, 16, 16},
                                    Shape{1, 32, 48}, Shape{3, 64, 64}, Shape{1, 128, 128}, Shape{3, 128, 128}};
    double mag = 0.0, imag = 0.0, mean = 0.0, energy_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Shape s = shapes[static_cast<std::size_t>(t) % shapes.size()];
        const Signal x = oracle::random_signal(rng, s, 0.0, 1.0);
        RpnConfig cfg;
        cfg.seed = rng.bits();
        cfg.channel_mode = t % 3 ? PhaseMode::shared_phase : PhaseMode::independent_phase;
        const RpnResult r = rpn_synthesize_detailed(x, cfg);
        mag = std::max(mag, magnitude_deviation(x, r.output));
        imag = std::max(imag, r.max_imaginary_residue);
        for (std::size_t c = 0; c < s.channels; ++c) {
            double mx = 0.0, my = 0.0;
            for (double v : x.channel(c))
                mx += v;
            for (double v : r.output.channel(c))
                my += v;
            mean = std::max(mean, std::abs(mx - my) / static_cast<double>(s.spatial()));
        }
        // Independent per-channel phases change the cross-channel spectra a
        // multi-channel filter sees, so the energy clause uses shared phase.
        if (s.spatial() <= 64 * 64 && (s.channels == 1 || cfg.channel_mode == PhaseMode::shared_phase)) {
            const std::size_t f = s.one_dimensional() ? 5 : 3;
            const Shape ks = s.one_dimensional() ? Shape{1, 1, f} : Shape{s.channels, f, f};
            const FilterBank bank(oracle::random_kernels(rng, 12, ks));
            const GramMatrix target = gram(x, bank, Nonlinearity::identity);
            energy_rel = std::max(energy_rel, energy_value(r.output, target, bank, Nonlinearity::identity) /
                                                  target.frobenius_norm());
        }
    }
    bool ok = mag <= 1e-10 && imag <= 1e-12 && mean <= 1e-12 && energy_rel <= 1e-8;
    std::string detail = "magnitude " + fmt(mag) + ", imaginary " + fmt(imag) + ", mean " + fmt(mean) +
                         ", linear energy " + fmt(energy_rel);

    // Qualitative run through the command-line tool on a ridge texture.
    if (cli.empty())
        return {false, detail + "; no --cli given for the texture run"};
    const fs::path dir = work / "rpn_texture";
    fs::create_directories(dir);
    write_netpbm((dir / "input.pgm").string(), oracle::ridge_texture(128, 128, 5));
    const int code = run_command(cli + " rpn --in " + (dir / "input.pgm").string() + " --seed 1 --out " +
                                 (dir / "out").string());
    if (code != 0)
        return {false, detail + "; rpn command exited " + std::to_string(code)};
    std::ifstream in(dir / "out" / "report.json");
    const json rep = json::parse(in);
    const double rdev = rep["metrics"]["magnitude_deviation"].get<double>();
    const double dist = rep["metrics"]["relative_distance_to_input"].get<double>();
    const bool qual = rdev <= 1e-10 && dist >= 0.05;
    ok = ok && qual;
    detail += "; texture run: report magnitude " + fmt(rdev) + ", distance to input " + fmt(dist) + ", image " +
              (dir / "out" / "texture.pgm").string();
    return {ok, detail};
}

// ------------------------------------------------------------------ 6

Verdict gradients()
{
    Rng rng(606);
    double worst = 0.0;
    for (auto h : {Nonlinearity::identity, Nonlinearity::relu}) {
        int checked = 0;
        while (checked < 50) {
            const bool two_d = checked % 5 == 4;
            const Shape s = two_d ? Shape{1, 5, 6} : Shape{1, 1, 6 + rng.below(8)};
            const Shape ks = two_d ? Shape{1, 3, 3} : Shape{1, 1, 3};
            const FilterBank bank(oracle::random_kernels(rng, 4, ks));
            const Signal x = oracle::random_signal(rng, s);
            const Signal y = oracle::random_signal(rng, s);
            if (h == Nonlinearity::relu) {
                const auto pre = circular_convolve_spatial(y, bank);
                if (std::any_of(pre.values.begin(), pre.values.end(), [](double v) { return std::abs(v) < 1e-4; }))
                    continue;
            }
            const GramObjective obj(bank, s, h, gram(x, bank, h));
            const Signal analytic = obj.evaluate(y).gradient;
            const auto fd = oracle::central_difference(
                [&](const std::vector<double>& v) { return obj.squared_energy(Signal(s, v)); }, y.vec(), 1e-6);
            worst = std::max(worst, relative_distance(analytic.values(), fd));
            ++checked;
        }
    }
    return {worst <= 1e-5, "max relative error " + fmt(worst) + " (<= 1e-5), 50 points each"};
}

// ------------------------------------------------------------------ 7

Verdict gd_convergence()
{
    const Signal x = oracle::ridge_texture(64, 64, 5);
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.filter_count = 64;
    cfg.filter_size = 7;
    cfg.nonlinearity = Nonlinearity::identity;
    cfg.energy_tol = 1e-3;
    cfg.max_iters = 2000;
    const FilterBank bank = generate_filters(cfg, 1, false);
    const SynthResult r = synthesize(x, bank, cfg);
    const RankReport rank = rank_analysis(build_constraint_system(x, bank));
    const double rel = r.final_energy / r.target_norm;
    const bool energy_ok = rel <= 1e-3 && r.iterations <= 2000;
    const bool trace_ok = monotone(r.energy_trace);
    const double mag = magnitude_deviation(x, r.output);
    const bool mag_ok = mag <= 1e-2;
    return {energy_ok && trace_ok && mag_ok,
            "relative energy " + fmt(rel) + " after " + std::to_string(r.iterations) + " iterations (" +
                std::string(to_string(r.termination)) + ")" + (energy_ok ? "" : " [energy clause fails]") +
                ", monotone " + (trace_ok ? "yes" : "no") + ", magnitude deviation " + fmt(mag) +
                " (<= 1e-2)" + (mag_ok ? "" : " [magnitude clause fails]") + ", L2 magnitude deviation " +
                fmt(magnitude_l2_deviation(x, r.output)) + "; bank rank " + std::to_string(rank.numerical_rank) +
                " of " + std::to_string(rank.saturation_rank) + " frequency classes"};
}

// ------------------------------------------------------------------ 8

Verdict cone_sampling()
{
    std::size_t total = 0, good = 0;
    for (std::size_t n = 2; n <= 16; ++n)
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(derive_seed(808, n, seed));
            const Signal x = uniform_vector_signal(rng, n, 0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                ++total;
                if (strictly_in_cone(x, cone_sample(x, i, seed), i))
                    ++good;
            }
        }
    std::vector<double> e0(4, 0.0);
    e0[0] = 1.0;
    const CoverageEstimate cal = coverage_experiment(Signal::vector(e0), 1.0, 0, 8080);
    const double p = 1.0 / 16.0;
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(cal.calibration_draws));
    double worst = 0.0;
    for (double d : cal.delta_hat)
        worst = std::max(worst, std::abs(d - p) / sigma);
    return {good == total && worst <= 3.0, std::to_string(good) + "/" + std::to_string(total) +
                                               " samples strictly inside their cone; identity cones within " +
                                               fmt(worst) + " sigma of 2^-4"};
}

// ------------------------------------------------------------------ 9

Verdict decoder()
{
    std::size_t bad = 0;
    double worst_elem = 0.0, worst_gram = 0.0;
    for (std::size_t n = 2; n <= 8; ++n)
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(derive_seed(909, n, seed));
            const Signal x = uniform_vector_signal(rng, n, 0.0, 1.0);
            try {
                const FilterSetFamily family = build_filter_family(x, seed);
                const FilterBank bank = family.bank();
                const GramMatrix g = gram(x, bank, Nonlinearity::relu);
                const auto cands = decode_from_gram(g, family, l2_norm(x.values()));
                if (cands.size() != n) {
                    ++bad;
                    continue;
                }
                std::vector<bool> used(n, false);
                for (const auto& c : cands) {
                    double best = INFINITY;
                    std::size_t best_m = 0;
                    for (std::size_t m = 0; m < n; ++m) {
                        const double d = max_abs_difference(circular_shift(x, static_cast<long>(m)).values(), c.values());
                        if (d < best) {
                            best = d;
                            best_m = m;
                        }
                    }
                    worst_elem = std::max(worst_elem, best);
                    if (best > 1e-6 || used[best_m])
                        ++bad;
                    used[best_m] = true;
                    const GramMatrix gc = gram(c, bank, Nonlinearity::relu);
                    worst_gram = std::max(worst_gram, (gc.entries - g.entries).norm() / g.frobenius_norm());
                }
            } catch (const Error& e) {
                ++bad;
            }
        }
    return {bad == 0 && worst_gram <= 1e-8, std::to_string(bad) + " bad instances of 140; max elementwise error " +
                                                fmt(worst_elem) + " (<= 1e-6), max Gram mismatch " +
                                                fmt(worst_gram) + " (<= 1e-8)"};
}

// ------------------------------------------------------------------ 10

Verdict contrast()
{
    std::size_t bad = 0;
    double worst_linear = 0.0, min_margin = INFINITY;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 3 + seed % 6;
        Rng rng(derive_seed(1010, seed));
        const Signal x = uniform_vector_signal(rng, n, 0.0, 1.0);
        const FilterSetFamily family = build_filter_family(x, seed);
        std::optional<ContrastReport> rep;
        for (std::uint64_t k = 0; k < 8 && (!rep || rep->degenerate); ++k)
            rep = uniqueness_contrast(x, family, derive_seed(seed, 1011, k));
        const double margin = rep->relu_energy / rep->relu_target_norm;
        worst_linear = std::max(worst_linear, rep->linear_relative());
        min_margin = std::min(min_margin, margin);
        if (rep->degenerate || rep->linear_relative() > 1e-8 || !(margin > 1e-6))
            ++bad;
    }
    return {bad == 0, "max linear energy " + fmt(worst_linear) + " (<= 1e-8), min relu margin " + fmt(min_margin) +
                          " (> 1e-6), failing instances " + std::to_string(bad)};
}

// ------------------------------------------------------------------ 11

Verdict coverage()
{
    Rng rng(1111);
    const Signal x = uniform_vector_signal(rng, 4, 0.0, 1.0);
    bool ok = true;
    double prev = -1.0;
    std::string detail;
    for (double c : {32.0, 64.0, 256.0}) {
        const CoverageEstimate est = coverage_experiment(x, c, 500, 1112);
        const double floor = est.chernoff_bound - 3.0 * est.standard_error();
        const bool good = est.empirical_success >= prev && est.empirical_success >= floor;
        ok = ok && good;
        prev = est.empirical_success;
        detail += (detail.empty() ? "" : "; ") + std::string("c=") + fmt(c) + " success " +
                  fmt(est.empirical_success) + " bound " + fmt(est.chernoff_bound) +
                  (est.insufficient_oversampling ? " (vacuous)" : "");
    }
    return {ok, detail};
}

// ------------------------------------------------------------------ 12

Verdict determinism(const std::string& cli, const fs::path& work)
{
    if (cli.empty())
        return {false, "no --cli given"};
    const fs::path dir = work / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string tex = (dir / "tex.pgm").string();
    const std::string vec = (dir / "x.txt").string();
    write_netpbm(tex, oracle::ridge_texture(32, 32, 12));
    std::ofstream(vec) << "0.3 0.9 0.1 0.55 0.7 0.2 0.05 0.8\n";

    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "synth --in " + tex + " --filters 16 --filter-size 5 --iters 150 --trace {out}/trace.csv"},
        {"synth_relu", "synth --in " + tex + " --filters 8 --filter-size 3 --nonlinearity relu --iters 60"},
        {"rpn", "rpn --in " + tex},
        {"analyze", "analyze --in " + vec + " --filters 12 --sweep --solve --null-probe 4"},
        {"verify", "verify --n 4 --trials 40"},
        {"filters", "filters --filters 10 --filter-size 5 --channels 3"},
    };
    std::string mismatched;
    std::size_t files = 0;
    for (const auto& [name, args] : commands) {
        std::vector<fs::path> outs;
        for (const char* run : {"a", "b"}) {
            const fs::path out = dir / (name + "_" + run);
            std::string a = args;
            for (std::size_t p; (p = a.find("{out}")) != std::string::npos;)
                a.replace(p, 5, out.string());
            fs::create_directories(out);
            const int code = run_command(cli + " " + a + " --seed 99 --threads 1 --out " + out.string());
            if (code != 0 && code != 2)
                return {false, name + " exited " + std::to_string(code)};
            outs.push_back(out);
        }
        for (const auto& entry : fs::directory_iterator(outs[0])) {
            ++files;
            const fs::path other = outs[1] / entry.path().filename();
            if (!fs::exists(other) || file_bytes(entry.path()) != file_bytes(other))
                mismatched += " " + name + "/" + entry.path().filename().string();
        }
    }
    return {mismatched.empty() && files > 0, std::to_string(files) + " artifacts compared" +
                                                 (mismatched.empty() ? ", all bit-identical" : ", differ:" + mismatched)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gramtex acceptance suite"};
    std::string cli;
    std::vector<int> only;
    std::vector<int> expect_fail;
    std::string work = (fs::temp_directory_path() / "gramtex_acceptance").string();
    app.add_option("--cli", cli, "Path to the gramtex executable");
    app.add_option("--only", only, "Criteria to run")->delimiter(',');
    app.add_option("--expect-fail", expect_fail, "Criteria whose failure does not affect the exit status")
        ->delimiter(',');
    app.add_option("--work", work, "Scratch directory for command-line runs");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(work);

    const std::vector<Criterion> criteria{
        {1, "Gram shift invariance", 10, shift_invariance},
        {2, "spectral Gram identity", 5, spectral_identity},
        {3, "magnitude constraint system", 30, constraint_system},
        {4, "independent saturated banks", 30, independent_banks},
        {5, "random phase noise", 30, [&] { return rpn(cli, work); }},
        {6, "gradient vs finite differences", 10, gradients},
        {7, "gradient descent convergence", 300, gd_convergence},
        {8, "cone sampling", 30, cone_sampling},
        {9, "uniqueness decoder", 60, decoder},
        {10, "linear vs relu contrast", 60, contrast},
        {11, "cone coverage bound", 120, coverage},
        {12, "command-line determinism", 60, [&] { return determinism(cli, work); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    const std::set<int> tolerated(expect_fail.begin(), expect_fail.end());
    std::size_t passed = 0, ran = 0;
    bool gate = true;
    std::ostringstream lines;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id))
            continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs < c.budget_seconds;
        const bool pass = v.pass && in_budget;
        passed += pass;
        if (!pass && !tolerated.count(c.id))
            gate = false;
        std::ostringstream line;
        line << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << v.detail
             << " [" << fmt(secs) << " s of " << fmt(c.budget_seconds) << " s"
             << (in_budget ? "" : ", over budget") << "]";
        if (!pass && tolerated.count(c.id))
            line << " (known failure)";
        if (pass && tolerated.count(c.id))
            line << " (listed as a known failure but passed)";
        std::cout << line.str() << std::endl;
        lines << line.str() << "\n";
    }
    std::cout << passed << "/" << ran << " criteria passed" << std::endl;
    lines << passed << "/" << ran << " criteria passed\n";
    std::ofstream((fs::path(work) / "results.txt").string()) << lines.str();
    return gate ? 0 : 1;
}

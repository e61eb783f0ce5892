// gramtex command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 numerical or suite failure, 3 I/O.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <gramtex/gramtex.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gramtex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;
constexpr int kExitIo = 3;
constexpr int kSchemaVersion = 1;

/// Thrown for bad option combinations detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::io_error: return kExitIo;
    case ErrorCode::invalid_argument:
    case ErrorCode::size_mismatch:
    case ErrorCode::channel_mismatch:
    case ErrorCode::shape_mismatch: return kExitUsage;
    default: return kExitFailure;
    }
}

// ---------------------------------------------------------------- options

struct CommonOptions {
    std::string in;
    std::string out = ".";
    std::uint64_t seed = kDefaultSeed;
    std::string config;
    std::size_t threads = 0;
    std::string format;
};

struct SynthOptions {
    std::size_t filters = 363;
    std::size_t filter_size = 11;
    std::string nonlinearity = "identity";
    std::size_t iters = 2000;
    double grad_tol = 1e-6;
    double energy_tol = 1e-8;
    std::string init = "he_uniform";
    std::string bank;
    std::string trace;
    bool clamp = false;
    bool rescale = false;
};

struct RpnOptions {
    std::string channel_mode = "shared_phase";
    bool preserve_dc = true;
    bool randomize_nyquist_sign = false;
    bool clamp = false;
    bool rescale = false;
};

struct AnalyzeOptions {
    std::size_t filters = 16;
    std::optional<std::size_t> filter_size;
    std::optional<double> rank_tol;
    bool sweep = false;
    bool solve = false;
    std::size_t null_probe = 0;
};

struct VerifyOptions {
    std::vector<std::string> suites{"shift", "cone", "decode", "coverage", "contrast"};
    std::size_t n = 4;
    std::size_t trials = 20;
    std::vector<double> c{32.0, 64.0, 256.0};
};

struct FiltersOptions {
    std::size_t filters = 363;
    std::size_t filter_size = 11;
    std::size_t channels = 1;
    std::string init = "he_uniform";
};

const CLI::Validator kOdd(
    [](std::string& s) -> std::string {
        try {
            const long v = std::stol(s);
            if (v >= 1 && v % 2 == 1)
                return {};
        } catch (...) {
        }
        return "filter size must be odd";
    },
    "ODD");

void add_common(CLI::App* sub, CommonOptions& o, bool needs_input)
{
    auto* in = sub->add_option("--in", o.in, "Input image (.pgm/.ppm) or 1-D signal (.txt)");
    if (needs_input)
        in->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
    sub->add_option("--config", o.config, "JSON file whose keys mirror long flag names; flags win");
    sub->add_option("--threads", o.threads, "Worker cap (sets " + std::string(kThreadsEnv) + ")")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "Output image format")->check(CLI::IsMember({"pgm", "ppm"}));
}

// ---------------------------------------------------------------- I/O

bool has_extension(const std::string& path, const std::string& ext)
{
    std::string e = fs::path(path).extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return e == ext;
}

/// Whitespace-separated samples, one 1-D signal per file.
Signal read_text_signal(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open '" + path + "'");
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (...) {
            used = 0;
        }
        require(used == token.size(), ErrorCode::io_error, "'" + path + "': bad sample '" + token + "'");
        values.push_back(v);
    }
    return Signal::vector(std::move(values));
}

Signal load_input(const std::string& path)
{
    return has_extension(path, ".txt") ? read_text_signal(path) : read_netpbm(path);
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoFailure("cannot create directory '" + dir + "': " + ec.message());
}

std::string format_double(double v)
{
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw IoFailure("cannot write '" + path + "'");
}

/// Writes `stem`.pgm/.ppm, or `stem`.txt for 1-D signals. Returns the file name.
std::string write_signal(const std::string& dir, const std::string& stem, const Signal& s, const std::string& format,
                         ExportMode mode)
{
    if (s.shape().one_dimensional()) {
        std::string text;
        for (double v : s.values())
            text += format_double(v) + "\n";
        const std::string name = stem + ".txt";
        write_text((fs::path(dir) / name).string(), text);
        return name;
    }
    const std::string ext = format.empty() ? (s.shape().channels == 3 ? "ppm" : "pgm") : format;
    if ((ext == "pgm") != (s.shape().channels == 1))
        throw UsageError("--format " + ext + " does not fit a " + std::to_string(s.shape().channels) +
                         "-channel image");
    const std::string name = stem + "." + ext;
    write_netpbm((fs::path(dir) / name).string(), s, mode);
    return name;
}

void write_report(const std::string& dir, const std::string& command, json config, json metrics, json verdicts)
{
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["config"] = std::move(config);
    doc["metrics"] = std::move(metrics);
    doc["verdicts"] = std::move(verdicts);
    write_text((fs::path(dir) / "report.json").string(), doc.dump(2) + "\n");
}

ExportMode export_mode(bool clamp, bool rescale)
{
    if (clamp && rescale)
        throw UsageError("--clamp and --rescale are exclusive");
    return rescale ? ExportMode::rescale : ExportMode::clamp;
}

json common_config(const CommonOptions& o)
{
    return {{"in", o.in}, {"seed", o.seed}, {"threads", o.threads}, {"format", o.format}};
}

bool is_monotone(const std::vector<double>& trace)
{
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1])
            return false;
    return true;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const CommonOptions& co, const SynthOptions& o)
{
    const ExportMode mode = export_mode(o.clamp, o.rescale);
    SynthConfig cfg;
    cfg.seed = co.seed;
    cfg.nonlinearity = parse_nonlinearity(o.nonlinearity);
    cfg.max_iters = o.iters;
    cfg.grad_tol = o.grad_tol;
    cfg.energy_tol = o.energy_tol;
    cfg.filter_count = o.filters;
    cfg.filter_size = o.filter_size;
    cfg.filter_init = parse_filter_init(o.init);
    cfg.validate();

    const Signal x = load_input(co.in);
    std::optional<FilterBank> bank;
    if (!o.bank.empty()) {
        bank = read_filter_bank(o.bank);
        cfg.filter_count = bank->size();
        cfg.filter_size = bank->kernel_shape().cols;
    } else {
        bank = generate_filters(cfg, x.shape().channels, x.shape().one_dimensional());
    }
    bank->check_compatible(x.shape());
    ensure_dir(co.out);

    const SynthResult r = synthesize(x, *bank, cfg);
    const std::string image = write_signal(co.out, "texture", r.output, co.format, mode);
    if (!o.trace.empty()) {
        std::string csv = "iteration,energy\n";
        for (std::size_t i = 0; i < r.energy_trace.size(); ++i)
            csv += std::to_string(i) + "," + format_double(r.energy_trace[i]) + "\n";
        write_text(o.trace, csv);
    }

    const bool converged = r.termination == Termination::energy_tol || r.termination == Termination::grad_tol;
    json config = common_config(co);
    config.update({{"filters", cfg.filter_count},
                   {"filter-size", cfg.filter_size},
                   {"nonlinearity", to_string(cfg.nonlinearity)},
                   {"iters", cfg.max_iters},
                   {"grad-tol", cfg.grad_tol},
                   {"energy-tol", cfg.energy_tol},
                   {"init", to_string(cfg.filter_init)},
                   {"bank", o.bank},
                   {"export", mode == ExportMode::rescale ? "rescale" : "clamp"}});
    const double rel = r.target_norm > 0.0 ? r.final_energy / r.target_norm : r.final_energy;
    json metrics{{"output", image},
                 {"iterations", r.iterations},
                 {"termination", to_string(r.termination)},
                 {"initial_energy", r.energy_trace.front()},
                 {"final_energy", r.final_energy},
                 {"target_norm", r.target_norm},
                 {"relative_energy", rel},
                 {"magnitude_deviation", magnitude_deviation(x, r.output)},
                 {"shape", {x.shape().channels, x.shape().rows, x.shape().cols}}};
    json verdicts{{"converged", converged},
                  {"energy_tol_reached", r.termination == Termination::energy_tol},
                  {"monotone_trace", is_monotone(r.energy_trace)}};
    write_report(co.out, "synth", std::move(config), std::move(metrics), std::move(verdicts));
    std::cout << "synth: " << to_string(r.termination) << " after " << r.iterations
              << " iterations, relative energy " << format_double(rel) << "\n";
    return converged ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- rpn

int cmd_rpn(const CommonOptions& co, const RpnOptions& o)
{
    const ExportMode mode = export_mode(o.clamp, o.rescale);
    RpnConfig cfg;
    cfg.seed = co.seed;
    cfg.channel_mode = parse_phase_mode(o.channel_mode);
    cfg.preserve_dc = o.preserve_dc;
    cfg.randomize_nyquist_sign = o.randomize_nyquist_sign;

    const Signal x = load_input(co.in);
    ensure_dir(co.out);
    const RpnResult r = rpn_synthesize_detailed(x, cfg);
    const std::string image = write_signal(co.out, "texture", r.output, co.format, mode);

    const double dev = magnitude_deviation(x, r.output);
    double mean_dev = 0.0;
    for (std::size_t c = 0; c < x.shape().channels; ++c) {
        double mx = 0.0, my = 0.0;
        for (double v : x.channel(c))
            mx += v;
        for (double v : r.output.channel(c))
            my += v;
        mean_dev = std::max(mean_dev, std::abs(mx - my) / static_cast<double>(x.shape().spatial()));
    }
    json config = common_config(co);
    config.update({{"channel-mode", to_string(cfg.channel_mode)},
                   {"preserve-dc", cfg.preserve_dc},
                   {"randomize-nyquist-sign", cfg.randomize_nyquist_sign},
                   {"export", mode == ExportMode::rescale ? "rescale" : "clamp"}});
    json metrics{{"output", image},
                 {"magnitude_deviation", dev},
                 {"max_imaginary_residue", r.max_imaginary_residue},
                 {"mean_deviation", mean_dev},
                 {"relative_distance_to_input", relative_distance(x.values(), r.output.values())},
                 {"phase_streams", r.phase_streams},
                 {"shape", {x.shape().channels, x.shape().rows, x.shape().cols}}};
    const bool preserved = dev <= 1e-10;
    json verdicts{{"magnitude_preserved", preserved}, {"mean_preserved", cfg.preserve_dc ? mean_dev <= 1e-12 : true}};
    write_report(co.out, "rpn", std::move(config), std::move(metrics), std::move(verdicts));
    std::cout << "rpn: magnitude deviation " << format_double(dev) << "\n";
    return preserved ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- analyze

json rank_json(const RankReport& r)
{
    return {{"numerical_rank", r.numerical_rank},
            {"saturation_rank", r.saturation_rank},
            {"saturated", r.saturated()},
            {"relative_tolerance", r.relative_tolerance},
            {"folded_rows", r.rows},
            {"folded_cols", r.cols},
            {"raw_equations", r.raw_equations},
            {"raw_unknowns", r.raw_unknowns},
            {"singular_values", r.singular_values}};
}

int cmd_analyze(const CommonOptions& co, const AnalyzeOptions& o)
{
    const Signal x = load_input(co.in);
    require(x.shape().channels == 1, ErrorCode::channel_mismatch, "analyze needs a single-channel input");
    const bool one_d = x.shape().one_dimensional();
    const std::size_t limit = one_d ? x.shape().cols : std::min(x.shape().rows, x.shape().cols);
    std::size_t f = o.filter_size.value_or(std::min<std::size_t>(11, limit));
    if (!o.filter_size && f % 2 == 0)
        --f;

    SynthConfig cfg;
    cfg.seed = co.seed;
    cfg.filter_count = o.filters;
    cfg.filter_size = f;
    cfg.validate();
    const FilterBank bank = generate_filters(cfg, 1, one_d);
    bank.check_compatible(x.shape());
    ensure_dir(co.out);

    const ConstraintSystem sys = build_constraint_system(x, bank);
    const RankReport rank = rank_analysis(sys, o.rank_tol);

    json metrics{{"rank", rank_json(rank)}};
    if (o.sweep) {
        json sweep = json::array();
        for (std::size_t k = 1; k <= bank.size(); ++k) {
            const RankReport rk = rank_analysis(build_constraint_system(x, bank.prefix(k)), o.rank_tol);
            sweep.push_back({{"filters", k}, {"rank", rk.numerical_rank}, {"saturated", rk.saturated()}});
        }
        metrics["sweep"] = std::move(sweep);
    }
    if (o.solve) {
        const MagnitudeSolution sol = solve_magnitudes(sys);
        const auto truth = folded_power(x);
        metrics["solution"] = {{"squared_magnitudes", sol.squared_magnitudes},
                               {"residual", sol.residual},
                               {"g_norm", sys.g_vector.norm()},
                               {"relative_deviation_from_input",
                                relative_distance(sol.squared_magnitudes, truth)}};
    }
    if (o.null_probe > 0) {
        const auto alts = null_space_probe(sys, o.null_probe, co.seed, o.rank_tol);
        metrics["null_probe"] = {{"requested", o.null_probe}, {"distinct_solutions", alts.size()},
                                 {"unique", alts.empty()}};
    }

    json config = common_config(co);
    config.update({{"filters", o.filters}, {"filter-size", f}, {"rank-tol", rank.relative_tolerance},
                   {"sweep", o.sweep}, {"solve", o.solve}, {"null-probe", o.null_probe}});
    write_report(co.out, "analyze", std::move(config), std::move(metrics), {{"saturated", rank.saturated()}});
    std::cout << "analyze: rank " << rank.numerical_rank << " of " << rank.saturation_rank << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- verify

Signal uniform_signal(Rng& rng, std::size_t n, double lo, double hi)
{
    std::vector<double> v(n);
    for (auto& e : v)
        e = rng.uniform(lo, hi);
    return Signal::vector(std::move(v));
}

json suite_shift(const VerifyOptions& o, std::uint64_t seed)
{
    double worst = 0.0;
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng(derive_seed(seed, 0x7368, t));
        const Signal x = uniform_signal(rng, o.n, -1.0, 1.0);
        const std::size_t count = 8 + rng.below(25);
        const std::size_t f = 1 + rng.below(o.n);
        std::vector<Signal> kernels;
        for (std::size_t i = 0; i < count; ++i) {
            Signal k(Shape{1, 1, f});
            for (auto& v : k.values())
                v = rng.uniform(-1.0, 1.0);
            kernels.push_back(std::move(k));
        }
        const FilterBank bank(std::move(kernels));
        for (auto h : {Nonlinearity::identity, Nonlinearity::relu})
            worst = std::max(worst, verify_shift_invariance(x, bank, h).max_deviation);
    }
    return {{"passed", worst <= 1e-10}, {"max_deviation", worst}, {"threshold", 1e-10}};
}

json suite_cone(const VerifyOptions& o, std::uint64_t seed)
{
    std::size_t total = 0, good = 0;
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng(derive_seed(seed, 0x636f6e, t));
        const Signal x = uniform_signal(rng, o.n, 0.0, 1.0);
        for (std::size_t i = 0; i < o.n; ++i) {
            const Signal v = cone_sample(x, i, derive_seed(seed, 0x636f6e, t * o.n + i + 1));
            const auto m = cone_membership(x, v);
            ++total;
            if (m.index && *m.index == i)
                ++good;
        }
    }
    // Identity circulant: each cone is an orthant with measure 2^-n.
    std::vector<double> e0(o.n, 0.0);
    e0[0] = 1.0;
    const CoverageEstimate cal = coverage_experiment(Signal::vector(e0), 1.0, 0, seed);
    const double p = std::ldexp(1.0, -static_cast<int>(o.n));
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(cal.calibration_draws));
    double worst_z = 0.0;
    for (double d : cal.delta_hat)
        worst_z = std::max(worst_z, std::abs(d - p) / sigma);
    const bool ok = good == total && worst_z <= 3.0;
    return {{"passed", ok},
            {"samples", total},
            {"in_cone", good},
            {"identity_delta_hat", cal.delta_hat},
            {"identity_expected", p},
            {"identity_max_sigmas", worst_z}};
}

json suite_decode(const VerifyOptions& o, std::uint64_t seed)
{
    bool ok = true;
    json instances = json::array();
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng(derive_seed(seed, 0x646563, t));
        const Signal x = uniform_signal(rng, o.n, 0.0, 1.0);
        json inst{{"trial", t}};
        try {
            const FilterSetFamily family = build_filter_family(x, derive_seed(seed, 0x646563, t + o.trials));
            const FilterBank bank = family.bank();
            const GramMatrix g = gram(x, bank, Nonlinearity::relu);
            const auto candidates = decode_from_gram(g, family, l2_norm(x.values()));
            std::vector<bool> seen(o.n, false);
            double worst_gram = 0.0;
            bool shifts = true;
            for (const auto& c : candidates) {
                const auto m = shift_match(x, c, 1e-6);
                if (!m || seen[*m])
                    shifts = false;
                else
                    seen[*m] = true;
                const GramMatrix gc = gram(c, bank, Nonlinearity::relu);
                worst_gram = std::max(worst_gram, (gc.entries - g.entries).norm() / g.frobenius_norm());
            }
            const bool pass = candidates.size() == o.n && shifts && worst_gram <= 1e-8;
            inst.update({{"candidates", candidates.size()}, {"all_shifts", shifts},
                         {"max_gram_deviation", worst_gram}, {"passed", pass}});
            ok = ok && pass;
        } catch (const Error& e) {
            inst.update({{"error", e.what()}, {"passed", false}});
            ok = false;
        }
        instances.push_back(std::move(inst));
    }
    return {{"passed", ok}, {"instances", std::move(instances)}};
}

json suite_contrast(const VerifyOptions& o, std::uint64_t seed)
{
    bool ok = true;
    json instances = json::array();
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng(derive_seed(seed, 0x637472, t));
        const Signal x = uniform_signal(rng, o.n, 0.0, 1.0);
        const FilterSetFamily family = build_filter_family(x, derive_seed(seed, 0x637472, t + o.trials));
        std::optional<ContrastReport> rep;
        for (std::uint64_t k = 0; k < 8 && (!rep || rep->degenerate); ++k)
            rep = uniqueness_contrast(x, family, derive_seed(seed, 0x72706e, t * 8 + k));
        const double margin = rep->relu_energy / rep->relu_target_norm;
        const bool pass = !rep->degenerate && rep->linear_relative() <= 1e-8 && margin > 1e-6;
        instances.push_back({{"trial", t},
                             {"degenerate", rep->degenerate},
                             {"linear_relative_energy", rep->linear_relative()},
                             {"relu_relative_energy", margin},
                             {"passed", pass}});
        ok = ok && pass;
    }
    return {{"passed", ok}, {"instances", std::move(instances)}};
}

json suite_coverage(const VerifyOptions& o, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0x636f76));
    const Signal x = uniform_signal(rng, o.n, 0.0, 1.0);
    std::vector<double> cs = o.c;
    std::sort(cs.begin(), cs.end());
    bool ok = true;
    double previous = -1.0;
    json rows = json::array();
    for (double c : cs) {
        const CoverageEstimate est = coverage_experiment(x, c, o.trials, seed);
        const double floor = est.chernoff_bound - 3.0 * est.standard_error();
        const bool pass = est.empirical_success >= floor && est.empirical_success >= previous;
        previous = est.empirical_success;
        ok = ok && pass;
        rows.push_back({{"c", c},
                        {"empirical_success", est.empirical_success},
                        {"standard_error", est.standard_error()},
                        {"chernoff_bound", est.chernoff_bound},
                        {"insufficient_oversampling", est.insufficient_oversampling},
                        {"delta_hat", est.delta_hat},
                        {"passed", pass}});
    }
    return {{"passed", ok}, {"x", std::vector<double>(x.values().begin(), x.values().end())},
            {"estimates", std::move(rows)}};
}

int cmd_verify(const CommonOptions& co, const VerifyOptions& o)
{
    require(o.n >= 2, ErrorCode::invalid_argument, "--n must be at least 2");
    require(o.trials >= 1, ErrorCode::invalid_argument, "--trials must be positive");
    for (double c : o.c)
        require(c > 0.0, ErrorCode::invalid_argument, "--c values must be positive");
    ensure_dir(co.out);

    json suites = json::object();
    json verdicts = json::object();
    bool all = true;
    for (const std::string& name : o.suites) {
        json r;
        if (name == "shift")
            r = suite_shift(o, co.seed);
        else if (name == "cone")
            r = suite_cone(o, co.seed);
        else if (name == "decode")
            r = suite_decode(o, co.seed);
        else if (name == "contrast")
            r = suite_contrast(o, co.seed);
        else
            r = suite_coverage(o, co.seed);
        const bool pass = r["passed"].get<bool>();
        all = all && pass;
        verdicts[name] = pass;
        suites[name] = std::move(r);
        std::cout << "verify " << name << ": " << (pass ? "pass" : "FAIL") << "\n";
    }
    json config = common_config(co);
    config.update({{"suite", o.suites}, {"n", o.n}, {"trials", o.trials}, {"c", o.c}});
    verdicts["all"] = all;
    write_report(co.out, "verify", std::move(config), std::move(suites), std::move(verdicts));
    return all ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- filters

int cmd_filters(const CommonOptions& co, const FiltersOptions& o)
{
    SynthConfig cfg;
    cfg.seed = co.seed;
    cfg.filter_count = o.filters;
    cfg.filter_size = o.filter_size;
    cfg.filter_init = parse_filter_init(o.init);
    cfg.validate();
    const FilterBank bank = generate_filters(cfg, o.channels, false);
    ensure_dir(co.out);
    write_filter_bank((fs::path(co.out) / "filters.gtfb").string(), bank);
    json config = common_config(co);
    config.update({{"filters", o.filters}, {"filter-size", o.filter_size}, {"channels", o.channels},
                   {"init", o.init}});
    json metrics{{"output", "filters.gtfb"}, {"bound", he_uniform_bound(o.filter_size, o.channels, false)}};
    if (cfg.filter_init == FilterInit::unit_ball_uniform)
        metrics["bound"] = 1.0;
    write_report(co.out, "filters", std::move(config), std::move(metrics), json::object());
    std::cout << "filters: wrote " << bank.size() << " kernels\n";
    return kExitOk;
}

// ---------------------------------------------------------------- config file

/// Injects `--key value` for every config key whose flag is absent from the
/// command line, so flags always win.
std::vector<std::string> merge_config(CLI::App* sub, const std::vector<std::string>& args, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open config '" + path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::parse_error& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!cfg.is_object())
        throw UsageError("config '" + path + "' must be a JSON object");

    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (key == "config")
            continue;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt)
            throw UsageError("config key '" + key + "' is not an option of '" + sub->get_name() + "'");
        if (given(flag))
            continue;
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_array()) {
            for (const auto& e : value) {
                if (!text.empty())
                    text += ",";
                text += e.is_string() ? e.get<std::string>() : e.dump();
            }
        } else
            text = value.dump();
        if (opt->get_expected_min() == 0) {
            if (value.is_boolean() ? value.get<bool>() : text != "0")
                extra.push_back(flag);
        } else {
            extra.push_back(flag + "=" + text);
        }
    }
    return extra;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random-filter texture synthesis and Gram-matrix theory checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gramtex 0.1.0");

    CommonOptions common;
    SynthOptions synth;
    RpnOptions rpn;
    AnalyzeOptions analyze;
    VerifyOptions verify;
    FiltersOptions filters;

    auto* s_synth = app.add_subcommand("synth", "Gradient-descent texture synthesis");
    add_common(s_synth, common, true);
    s_synth->add_option("--filters", synth.filters, "Filter count")->check(CLI::PositiveNumber)->capture_default_str();
    s_synth->add_option("--filter-size", synth.filter_size, "Odd kernel size")->check(kOdd)->capture_default_str();
    s_synth->add_option("--nonlinearity", synth.nonlinearity)
        ->check(CLI::IsMember({"identity", "relu"}))
        ->capture_default_str();
    s_synth->add_option("--iters", synth.iters, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    s_synth->add_option("--grad-tol", synth.grad_tol)->check(CLI::PositiveNumber)->capture_default_str();
    s_synth->add_option("--energy-tol", synth.energy_tol)->check(CLI::PositiveNumber)->capture_default_str();
    s_synth->add_option("--init", synth.init)
        ->check(CLI::IsMember({"he_uniform", "unit_ball_uniform"}))
        ->capture_default_str();
    s_synth->add_option("--bank", synth.bank, "Filter bank file instead of a generated bank");
    s_synth->add_option("--trace", synth.trace, "CSV energy trace path");
    s_synth->add_flag("--clamp", synth.clamp, "Clamp to [0,1] on export (default)");
    s_synth->add_flag("--rescale", synth.rescale, "Rescale min..max to [0,1] on export");

    auto* s_rpn = app.add_subcommand("rpn", "Random-phase-noise synthesis");
    add_common(s_rpn, common, true);
    s_rpn->add_option("--channel-mode", rpn.channel_mode)
        ->check(CLI::IsMember({"shared_phase", "independent_phase"}))
        ->capture_default_str();
    s_rpn->add_option("--preserve-dc", rpn.preserve_dc)->capture_default_str();
    s_rpn->add_flag("--randomize-nyquist-sign", rpn.randomize_nyquist_sign);
    s_rpn->add_flag("--clamp", rpn.clamp);
    s_rpn->add_flag("--rescale", rpn.rescale);

    auto* s_analyze = app.add_subcommand("analyze", "Rank of the folded magnitude system");
    add_common(s_analyze, common, true);
    s_analyze->add_option("--filters", analyze.filters)->check(CLI::PositiveNumber)->capture_default_str();
    s_analyze->add_option("--filter-size", analyze.filter_size, "Odd kernel size (default min(11, n), made odd)")
        ->check(kOdd);
    s_analyze->add_option("--rank-tol", analyze.rank_tol, "Relative singular value cutoff")
        ->check(CLI::NonNegativeNumber);
    s_analyze->add_flag("--sweep", analyze.sweep, "Rank for every prefix 1..N of the bank");
    s_analyze->add_flag("--solve", analyze.solve, "Nonnegative least-squares magnitude solution");
    s_analyze->add_option("--null-probe", analyze.null_probe, "Alternative solutions to search for");

    auto* s_verify = app.add_subcommand("verify", "Numerical checks of the 1-D ReLU theory");
    add_common(s_verify, common, false);
    s_verify->add_option("--suite", verify.suites, "shift,cone,decode,coverage,contrast")
        ->delimiter(',')
        ->check(CLI::IsMember({"shift", "cone", "decode", "coverage", "contrast"}));
    s_verify->add_option("--n", verify.n, "Signal length")->capture_default_str();
    s_verify->add_option("--trials", verify.trials)->capture_default_str();
    s_verify->add_option("--c", verify.c, "Oversampling factors")->delimiter(',');

    auto* s_filters = app.add_subcommand("filters", "Generate and save a random filter bank");
    add_common(s_filters, common, false);
    s_filters->add_option("--filters", filters.filters)->check(CLI::PositiveNumber)->capture_default_str();
    s_filters->add_option("--filter-size", filters.filter_size)->check(kOdd)->capture_default_str();
    s_filters->add_option("--channels", filters.channels)
        ->check(CLI::IsMember({std::size_t{1}, std::size_t{3}}))
        ->capture_default_str();
    s_filters->add_option("--init", filters.init)
        ->check(CLI::IsMember({"he_uniform", "unit_ball_uniform"}))
        ->capture_default_str();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (!args.empty()) {
            CLI::App* sub = app.get_subcommand_no_throw(args.front());
            std::string cfg_path;
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size())
                    cfg_path = args[i + 1];
                else if (args[i].rfind("--config=", 0) == 0)
                    cfg_path = args[i].substr(9);
            }
            if (sub && !cfg_path.empty()) {
                const auto extra = merge_config(sub, args, cfg_path);
                args.insert(args.end(), extra.begin(), extra.end());
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }

    if (common.threads > 0)
        setenv(kThreadsEnv, std::to_string(common.threads).c_str(), 1);

    try {
        if (s_synth->parsed())
            return cmd_synth(common, synth);
        if (s_rpn->parsed())
            return cmd_rpn(common, rpn);
        if (s_analyze->parsed())
            return cmd_analyze(common, analyze);
        if (s_verify->parsed())
            return cmd_verify(common, verify);
        return cmd_filters(common, filters);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

#include "fastlik/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fastlik/epi_model.hpp"
#include "fastlik/error.hpp"
#include "fastlik/interp.hpp"
#include "fastlik/mixture_model.hpp"
#include "fastlik/parallel.hpp"
#include "fastlik/quadrature.hpp"
#include "fastlik/rng.hpp"
#include "fastlik/study.hpp"
#include "fastlik/validation.hpp"

namespace fastlik::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return std::isnan(v) ? std::string() : fmt::format("{:.12g}", v); }

// Number of leading significant decimal digits on which a and b agree.
double agreement_digits(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    const double diff = std::abs(a - b);
    if (diff == 0.0 || scale == 0.0) return 16.0;
    return std::clamp(-std::log10(diff / scale), 0.0, 16.0);
}

struct Common {
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out_dir = "fastlik-out";
};

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(fmt::format("cannot create output directory '{}'", dir));
    return fs::path(dir);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    body(os);
    os.close();
    if (!os) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

OptimizerConfig validated(const OptimizerConfig& c) {
    if (c.max_evaluations < 1) throw ConfigError("max-evals must be at least 1");
    if (c.restarts < 0) throw ConfigError("restarts must be non-negative");
    if (!(c.function_tolerance > 0.0) || !(c.parameter_tolerance > 0.0))
        throw ConfigError("tolerances must be positive");
    if (!(c.fd_step_scale > 0.0)) throw ConfigError("fd-step must be positive");
    return c;
}

// ---------------------------------------------------------------- power-study

struct PowerOptions {
    int sims = 1000;
    std::size_t n1 = 63350;
    std::size_t n2 = 219;
    int hermite_order = 8;
    std::string h = "auto";
    double wald = 1.96;
    bool no_interp = false;
    double jitter = 0.1;
    int dump_cohort = -1;
    OptimizerConfig optimizer{};
    epi::EpiParams truth = epi::EpiParams::truth();
};

int cmd_power_study(const Common& common, const PowerOptions& o, std::ostream& out) {
    study::StudyConfig cfg;
    cfg.n_sims = o.sims;
    cfg.design = {o.n1, o.n2, o.hermite_order};
    cfg.truth = o.truth;
    cfg.base_seed = common.seed;
    cfg.optimizer = validated(o.optimizer);
    cfg.wald_critical = o.wald;
    cfg.use_interpolation = !o.no_interp;
    cfg.start_jitter = o.jitter;
    cfg.workers = common.workers;
    if (o.h != "auto") {
        try {
            std::size_t used = 0;
            cfg.grid_h = std::stod(o.h, &used);
            if (used != o.h.size()) throw std::invalid_argument(o.h);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("h must be 'auto' or a number, got '{}'", o.h));
        }
    }
    try {
        cfg.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    const fs::path dir = prepare_out_dir(common.out_dir);

    if (o.dump_cohort >= 0) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(o.dump_cohort);
        const epi::Cohort cohort = epi::simulate_cohort(cfg.design, cfg.truth, seed);
        const fs::path path = dir / fmt::format("cohort_{}.csv", o.dump_cohort);
        write_file(path, [&](std::ostream& os) { epi::write_cohort(os, cohort); });
        fmt::print(out, "wrote {} ({} records, seed {})\n", path.string(), cohort.size(), seed);
        return kExitOk;
    }

    const study::PowerStudy result = study::run_power_study(cfg);
    write_file(dir / "records.csv", [&](std::ostream& os) { study::write_records_csv(os, result.records); });
    write_file(dir / "timings.csv", [&](std::ostream& os) { study::write_timings_csv(os, result.records); });
    write_file(dir / "report.txt", [&](std::ostream& os) { study::write_report(os, result.report, cfg); });

    const auto& r = result.report;
    fmt::print(out, "simulations: {}\n", r.n_sims);
    fmt::print(out, "significant: {}\n", r.n_significant);
    fmt::print(out, "power: {:.4f}\n", r.power);
    fmt::print(out, "non-PD Hessians: {}\n", r.n_non_pd);
    fmt::print(out, "non-converged: {}\n", r.n_non_converged);
    fmt::print(out, "wall time: {:.2f} s\n", r.total_wall_time_s);
    fmt::print(out, "outputs: {}\n", dir.string());
    return kExitOk;
}

// ---------------------------------------------------------------- fit-mixture

struct MixtureOptions {
    std::string data;
    std::size_t simulate = 0;
    double h = mixture::kDefaultSpacing;
    bool check = false;
    OptimizerConfig optimizer{};
    mixture::MixtureParams truth{};
};

std::vector<double> read_numbers(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot read data file '{}'", path));
    std::vector<double> x;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line.substr(first), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        const auto rest = line.find_first_not_of(" \t\r", first + used);
        if (used == 0 || rest != std::string::npos || !std::isfinite(v))
            throw ConfigError(fmt::format("{}:{}: expected one finite number per line", path, line_no));
        x.push_back(v);
    }
    if (is.bad()) throw ConfigError(fmt::format("cannot read data file '{}'", path));
    return x;
}

void print_fit(std::ostream& out, const std::string& label, const FitResult& fit) {
    fmt::print(out, "{}: loglik {:.10f}, converged {}, Hessian PD {}, evaluations {}\n", label,
               fit.loglik, fit.converged, fit.hessian_pd, fit.n_evaluations);
    fmt::print(out, "  {:<8} {:>14} {:>14}\n", "param", "estimate", "se");
    for (std::size_t k = 0; k < fit.estimates.size(); ++k)
        fmt::print(out, "  {:<8} {:>14.8f} {:>14}\n", mixture::kParamNames[k], fit.estimates[k],
                   fit.se.empty() ? std::string("-") : fmt::format("{:.8f}", fit.se[k]));
}

int cmd_fit_mixture(const Common& common, const MixtureOptions& o, std::ostream& out) {
    if (!o.data.empty() && o.simulate > 0) throw ConfigError("give either --data or --simulate, not both");
    if (o.data.empty() && o.simulate == 0) throw ConfigError("fit-mixture needs --data PATH or --simulate N");
    if (!(o.h > 0.0)) throw ConfigError("h must be positive");
    const OptimizerConfig opt = validated(o.optimizer);

    std::vector<double> data;
    if (!o.data.empty()) {
        data = read_numbers(o.data);
    } else {
        try {
            data = mixture::simulate_mixture(o.simulate, o.truth, common.seed);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    }
    if (data.size() < 10) throw ConfigError("fit-mixture needs at least 10 observations");
    const fs::path dir = prepare_out_dir(common.out_dir);

    auto t0 = Clock::now();
    const AggregatedWeights ctx = mixture::build_context(data, o.h);
    const double t_aggregate = seconds_since(t0);
    t0 = Clock::now();
    const FitResult fit = mixture::fit_mixture(ctx, data, opt);
    const double t_fit = seconds_since(t0);

    fmt::print(out, "observations: {}\n", data.size());
    fmt::print(out, "grid: h={} nodes={} (nonzero {})\n", o.h, ctx.grid().count(), ctx.nonzero_nodes());
    print_fit(out, "interpolated fit", fit);
    fmt::print(out, "weight aggregation time: {:.4f} s\n", t_aggregate);
    fmt::print(out, "interpolated fit time: {:.4f} s\n", t_fit);

    std::optional<FitResult> direct;
    double t_direct = 0.0, loglik_digits = 0.0, estimate_digits = 16.0;
    if (o.check) {
        const auto p = mixture::MixtureParams::from_array(fit.estimates);
        loglik_digits = agreement_digits(mixture::loglik_direct(p, data), mixture::loglik_interp(p, ctx));
        t0 = Clock::now();
        direct = mixture::fit_mixture(data, opt, {.use_interpolation = false});
        t_direct = seconds_since(t0);
        for (std::size_t k = 0; k < fit.estimates.size(); ++k)
            estimate_digits = std::min(estimate_digits, agreement_digits(fit.estimates[k], direct->estimates[k]));
        print_fit(out, "direct fit", *direct);
        fmt::print(out, "direct fit time: {:.4f} s\n", t_direct);
        fmt::print(out, "loglik agreement at the interpolated MLE: {:.2f} significant digits\n", loglik_digits);
        fmt::print(out, "estimate agreement (worst parameter): {:.2f} significant digits\n", estimate_digits);
        fmt::print(out, "fit speedup: {:.1f}x\n", t_direct / (t_aggregate + t_fit));
    }

    write_file(dir / "mixture_report.txt", [&](std::ostream& os) {
        fmt::print(os, "n: {}\n", data.size());
        fmt::print(os, "h: {}\n", num(o.h));
        fmt::print(os, "loglik: {}\n", num(fit.loglik));
        fmt::print(os, "hessian_pd: {}\n", int(fit.hessian_pd));
        fmt::print(os, "converged: {}\n", int(fit.converged));
        for (std::size_t k = 0; k < fit.estimates.size(); ++k) {
            fmt::print(os, "{}: {}\n", mixture::kParamNames[k], num(fit.estimates[k]));
            fmt::print(os, "se_{}: {}\n", mixture::kParamNames[k], fit.se.empty() ? "" : num(fit.se[k]));
        }
        if (direct) {
            fmt::print(os, "direct_loglik: {}\n", num(direct->loglik));
            for (std::size_t k = 0; k < direct->estimates.size(); ++k)
                fmt::print(os, "direct_{}: {}\n", mixture::kParamNames[k], num(direct->estimates[k]));
            fmt::print(os, "loglik_agreement_digits: {:.2f}\n", loglik_digits);
            fmt::print(os, "estimate_agreement_digits: {:.2f}\n", estimate_digits);
        }
    });
    return kExitOk;
}

// ---------------------------------------------------------------- validate-interp

struct ValidateOptions {
    int order = 20;
    std::optional<int> margin;
    double runge_h = 0.02;
};

int cmd_validate_interp(const ValidateOptions& o, std::ostream& out) {
    if (!(o.runge_h > 0.0)) throw ConfigError("runge-h must be positive");
    // without an explicit margin, keep 3 where the order allows it
    const int margin = o.margin.value_or(std::clamp((o.order - 2) / 2, 0, 3));
    std::optional<WindowSpec> window;
    try {
        window.emplace(o.order, margin);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }

    const std::vector<validation::SuiteResult> suites = {
        validation::check_published_weights(),
        validation::check_runge(o.runge_h),
        validation::check_margin_bound(*window),
        validation::check_node_schemes(),
    };
    bool all = true;
    for (const auto& s : suites) {
        const char* tag = !s.passed ? "FAIL" : s.informational ? "INFO" : "PASS";
        fmt::print(out, "{} {}: {}\n", tag, s.name, s.detail);
        all = all && s.passed;
    }
    return all ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOptions {
    std::string probe;
    double h1 = 0.02;
    double target = 1e-8;
};

struct Probe {
    double lo;
    double hi;
    std::function<double(double)> f;
};

Probe make_probe(const std::string& name) {
    if (name == "runge") return {-1.0, 1.0, [](double x) { return 1.0 / (1.0 + 25.0 * x * x); }};
    if (name == "mixture-logdensity") {
        const mixture::MixtureParams p{};
        return {-4.0, 4.0, [p](double x) { return mixture::mixture_logdensity(p, x); }};
    }
    if (name == "epi-stage1") {
        auto rule = std::make_shared<HermiteRule>(gauss_hermite(8));
        auto eval = std::make_shared<epi::Stage1Evaluator>(epi::EpiParams::truth(), *rule);
        return {-10.0, 10.0, [rule, eval](double z) { return (*eval)(1, z); }};
    }
    throw ConfigError(fmt::format("unknown probe '{}' (expected runge, mixture-logdensity or epi-stage1)", name));
}

ErrorProbeReport probe_error(const Probe& p, double h, const WindowSpec& window) {
    const NodeGrid grid = NodeGrid::covering(p.lo, p.hi, h, window);
    std::vector<double> xs(1000);
    const double a = p.lo + 0.001 * h, b = p.hi - 0.001 * h;
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = a + (b - a) * static_cast<double>(i) / 999.0;
    return estimate_error(grid, window, p.f, xs);
}

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
    const Probe p = make_probe(o.probe);
    if (!(o.h1 > 0.0) || !(o.target > 0.0)) throw ConfigError("h1 and target must be positive");
    if (o.h1 > (p.hi - p.lo) / 4.0) throw ConfigError("h1 is too coarse for the probe domain");
    const WindowSpec window{};
    const double eps1 = probe_error(p, o.h1, window).max_abs_error;
    fmt::print(out, "probe: {} on [{}, {}]\n", o.probe, p.lo, p.hi);
    fmt::print(out, "measured max error at h1={}: {:.4e}\n", o.h1, eps1);
    if (eps1 == 0.0) {
        fmt::print(out, "error is zero at h1; recommended h: {}\n", o.h1);
        return kExitOk;
    }
    const double formula_h = calibrate_spacing(o.h1, eps1, o.target, window.order());
    const double recommended = std::min(o.h1, formula_h);
    fmt::print(out, "spacing rule h1*(target/eps1)^(1/{}): {:.6g}\n", window.order(), formula_h);
    fmt::print(out, "recommended h: {:.6g}\n", recommended);
    const double eps_v = probe_error(p, recommended, window).max_abs_error;
    const bool ok = eps_v <= 10.0 * o.target;
    fmt::print(out, "verification at h={:.6g}: max error {:.4e} (target {:.1e}, allowed {:.1e}) {}\n",
               recommended, eps_v, o.target, 10.0 * o.target, ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::size_t epi_n1 = 63350;
    std::size_t epi_n2 = 219;
    std::size_t mixture_n = 1000000;
    int evals = 3;
    bool no_fits = false;
};

template <class F>
double time_per_call(int reps, F&& f) {
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    return seconds_since(t0) / reps;
}

int cmd_bench(const Common& common, const BenchOptions& o, std::ostream& out) {
    if (o.evals < 1) throw ConfigError("evals must be at least 1");
    const epi::EpiDesign design{o.epi_n1, o.epi_n2, 8};
    try {
        design.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (o.mixture_n < 10) throw ConfigError("mixture-n must be at least 10");

    const HermiteRule rule = gauss_hermite(design.hermite_order);
    const epi::EpiParams truth = epi::EpiParams::truth();
    const epi::Cohort cohort = epi::simulate_cohort(design, truth, common.seed);
    const mixture::MixtureParams mtruth{};
    const std::vector<double> mdata = mixture::simulate_mixture(o.mixture_n, mtruth, common.seed);

    struct Row {
        std::string workload;
        double direct;
        double interp;
    };
    std::vector<Row> rows;
    volatile double sink = 0.0;

    auto t0 = Clock::now();
    const epi::EpiLikContext ectx = epi::build_context(cohort);
    const double epi_build = seconds_since(t0);
    rows.push_back({"epi loglik eval",
                    time_per_call(o.evals, [&] { sink = epi::loglik_direct(truth, cohort, rule); }),
                    time_per_call(o.evals, [&] { sink = epi::loglik_interp(truth, ectx, rule); })});

    t0 = Clock::now();
    const AggregatedWeights mctx = mixture::build_context(mdata);
    const double mix_build = seconds_since(t0);
    rows.push_back({"mixture loglik eval",
                    time_per_call(o.evals, [&] { sink = mixture::loglik_direct(mtruth, mdata); }),
                    time_per_call(o.evals, [&] { sink = mixture::loglik_interp(mtruth, mctx); })});

    if (!o.no_fits) {
        study::StudyConfig cfg;
        cfg.design = design;
        cfg.base_seed = common.seed;
        const epi::EpiParams start = study::perturbed_start(truth, cfg.start_jitter, derive_seed(common.seed, 1));
        cfg.use_interpolation = false;
        t0 = Clock::now();
        (void)study::fit_cohort(cohort, start, cfg);
        const double direct = seconds_since(t0);
        cfg.use_interpolation = true;
        t0 = Clock::now();
        (void)study::fit_cohort(cohort, start, cfg);
        rows.push_back({"epi fit (one sim)", direct, seconds_since(t0)});

        t0 = Clock::now();
        (void)mixture::fit_mixture(mdata, OptimizerConfig{}, {.use_interpolation = false});
        const double mdirect = seconds_since(t0);
        t0 = Clock::now();
        (void)mixture::fit_mixture(mdata, OptimizerConfig{}, {.use_interpolation = true});
        rows.push_back({"mixture fit", mdirect, seconds_since(t0)});
    }
    (void)sink;

    fmt::print(out, "threads: {}\n", max_workers());
    fmt::print(out, "epi cohort: n1={} n2={}; mixture n={}\n", design.n_stage1, design.n_stage2, o.mixture_n);
    fmt::print(out, "weight aggregation: epi {:.4f} s, mixture {:.4f} s\n", epi_build, mix_build);
    fmt::print(out, "{:<22} {:>12} {:>12} {:>10}\n", "workload", "direct_s", "interp_s", "speedup");
    for (const auto& r : rows)
        fmt::print(out, "{:<22} {:>12.6f} {:>12.6f} {:>10.1f}\n", r.workload, r.direct, r.interp,
                   r.interp > 0.0 ? r.direct / r.interp : std::numeric_limits<double>::infinity());
    return kExitOk;
}

void add_optimizer_options(CLI::App* cmd, OptimizerConfig& c) {
    cmd->add_option("--max-evals", c.max_evaluations, "Objective evaluations per simplex run")->capture_default_str();
    cmd->add_option("--restarts", c.restarts, "Simplex restarts from the best point")->capture_default_str();
    cmd->add_option("--ftol", c.function_tolerance, "Relative simplex value spread")->capture_default_str();
    cmd->add_option("--xtol", c.parameter_tolerance, "Simplex extent on the unconstrained scale")->capture_default_str();
    cmd->add_option("--fd-step", c.fd_step_scale, "Relative finite-difference step for the Hessian")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interpolated likelihoods for large single-covariate data sets", "fastlik"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI file; keys in [command] sections, flags override file values");

    Common common;
    app.add_option("--seed", common.seed, "Base seed for all randomness")->capture_default_str();
    app.add_option("--workers", common.workers, "Worker threads (0: machine parallelism)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--out", common.out_dir, "Output directory")->capture_default_str();

    PowerOptions power;
    auto* ps = app.add_subcommand("power-study", "Simulated power of the two-stage design");
    ps->add_option("--sims", power.sims, "Number of simulated studies")->capture_default_str();
    ps->add_option("--n1", power.n1, "Cohort size (stage 1)")->capture_default_str();
    ps->add_option("--n2", power.n2, "Validation subsample size (stage 2)")->capture_default_str();
    ps->add_option("--hermite-order", power.hermite_order, "Gauss-Hermite points")->capture_default_str();
    ps->add_option("--h", power.h, "Grid spacing or 'auto' (sd of z_a / 8)")->capture_default_str();
    ps->add_option("--wald", power.wald, "Wald critical value")->capture_default_str();
    ps->add_flag("--no-interp", power.no_interp, "Fit with the direct likelihood");
    ps->add_option("--jitter", power.jitter, "Relative start perturbation")->capture_default_str();
    ps->add_option("--dump-cohort", power.dump_cohort, "Write the cohort of simulation INDEX and exit");
    ps->add_option("--mu-z", power.truth.mu_z)->capture_default_str();
    ps->add_option("--sigma-z", power.truth.sigma_z)->capture_default_str();
    ps->add_option("--mu-a", power.truth.mu_a)->capture_default_str();
    ps->add_option("--sigma-a", power.truth.sigma_a)->capture_default_str();
    ps->add_option("--rho", power.truth.rho)->capture_default_str();
    ps->add_option("--location", power.truth.location)->capture_default_str();
    ps->add_option("--scale", power.truth.scale)->capture_default_str();
    add_optimizer_options(ps, power.optimizer);

    MixtureOptions mix;
    auto* fm = app.add_subcommand("fit-mixture", "Two-component normal mixture fit");
    fm->add_option("--data", mix.data, "Text file with one number per line");
    fm->add_option("--simulate", mix.simulate, "Simulate N draws from the mixture truth");
    fm->add_option("--h", mix.h, "Grid spacing")->capture_default_str();
    fm->add_flag("--check", mix.check, "Also fit by the direct likelihood and compare");
    fm->add_option("--weight1", mix.truth.weight1)->capture_default_str();
    fm->add_option("--mu1", mix.truth.mu1)->capture_default_str();
    fm->add_option("--sigma1", mix.truth.sigma1)->capture_default_str();
    fm->add_option("--mu2", mix.truth.mu2)->capture_default_str();
    fm->add_option("--sigma2", mix.truth.sigma2)->capture_default_str();
    add_optimizer_options(fm, mix.optimizer);

    ValidateOptions val;
    auto* vi = app.add_subcommand("validate-interp", "Interpolation self-checks");
    vi->add_option("--order", val.order, "Window order for the margin-bound suite")->capture_default_str();
    vi->add_option("--margin", val.margin, "Window margin for the margin-bound suite");
    vi->add_option("--runge-h", val.runge_h, "Spacing for the Runge suite")->capture_default_str();

    CalibrateOptions cal;
    auto* ca = app.add_subcommand("calibrate", "Recommend a grid spacing for a target error");
    ca->add_option("probe,--probe", cal.probe, "runge | mixture-logdensity | epi-stage1")->required();
    ca->add_option("--h1", cal.h1, "Trial spacing")->capture_default_str();
    ca->add_option("--target", cal.target, "Target max abs error")->capture_default_str();

    BenchOptions bench;
    auto* be = app.add_subcommand("bench", "Direct vs interpolated timings");
    be->add_option("--epi-n1", bench.epi_n1)->capture_default_str();
    be->add_option("--epi-n2", bench.epi_n2)->capture_default_str();
    be->add_option("--mixture-n", bench.mixture_n)->capture_default_str();
    be->add_option("--evals", bench.evals, "Repetitions per likelihood timing")->capture_default_str();
    be->add_flag("--no-fits", bench.no_fits, "Skip the full-fit timings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        set_workers(common.workers);
        if (*ps) return cmd_power_study(common, power, out);
        if (*fm) return cmd_fit_mixture(common, mix, out);
        if (*vi) return cmd_validate_interp(val, out);
        if (*ca) return cmd_calibrate(cal, out);
        if (*be) return cmd_bench(common, bench, out);
    } catch (const ConfigError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitBadConfig;
    } catch (const InvalidInput& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitBadConfig;
    } catch (const IoError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitCheckFailed;
    }
    return kExitBadConfig;
}

}  // namespace fastlik::cli

// One PASS/FAIL line per acceptance criterion. Exit status is 1 when any criterion fails.
// --fast: 10^5 mixture draws for criteria 8 and 10, and only the 200-simulation power run.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fastlik/cli.hpp"
#include "fastlik/epi_model.hpp"
#include "fastlik/mixture_model.hpp"
#include "fastlik/quadrature.hpp"
#include "fastlik/rng.hpp"
#include "fastlik/study.hpp"
#include "fastlik/validation.hpp"

using namespace fastlik;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& text) {
    if (!pass) ++g_failures;
    fmt::print("{} [{}] {}\n", pass ? "PASS" : "FAIL", id, text);
    std::fflush(stdout);
}

void info(int id, const std::string& text) {
    fmt::print("INFO [{}] {}\n", id, text);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return seconds_since(t0);
}

double agreement_digits(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0 || a == b) return 16.0;
    return std::clamp(-std::log10(std::abs(a - b) / scale), 0.0, 16.0);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// integral of t^k exp(-t^2) over the real line
double hermite_moment(int k) {
    if (k % 2) return 0.0;
    return std::tgamma((k + 1) / 2.0);
}

struct MixtureTimings {
    double aggregate_s = 0.0;
    double interp_fit_s = 0.0;
    double direct_fit_s = 0.0;
    std::size_t n = 0;
};

struct EpiTimings {
    double direct_fit_s = 0.0;
    double interp_fit_s = 0.0;
};

void criterion_1() {
    const auto r = validation::check_published_weights();
    report(1, r.passed, r.detail);
}

void criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = validation::check_runge(0.02);
    const double s = seconds_since(t0);
    report(2, r.passed && r.measured < 1e-8 && s < 1.0,
           fmt::format("Runge max abs error {:.3e} (< 1e-8) in {:.3f} s", r.measured, s));
}

void criterion_3() {
    const auto r = validation::check_margin_bound();
    report(3, r.passed && r.measured >= 72.0 && r.measured <= 72.8,
           fmt::format("max sum of |weights| {:.6f} (in [72.0, 72.8])", r.measured));
}

void criterion_4() {
    const auto e = validation::node_scheme_errors(WindowSpec{});
    report(4, e.equispaced_mean < e.chebyshev_mean,
           fmt::format("mean abs error: piecewise equispaced {:.3e} < single Chebyshev {:.3e}",
                       e.equispaced_mean, e.chebyshev_mean));
}

void criterion_5() {
    const HermiteRule r = gauss_hermite(8);
    double worst = 0.0;
    for (int k = 0; k <= 15; ++k) {
        double q = 0.0, mass = 0.0;
        for (int i = 0; i < r.order; ++i) {
            const double v = r.weights[static_cast<std::size_t>(i)] *
                             std::pow(r.abscissae[static_cast<std::size_t>(i)], k);
            q += v;
            mass += std::abs(v);
        }
        const double exact = hermite_moment(k);
        // odd moments vanish; measure those against the quadrature mass
        const double err = std::abs(q - exact) / (exact != 0.0 ? std::abs(exact) : mass);
        worst = std::max(worst, err);
    }
    report(5, worst <= 1e-10,
           fmt::format("order-8 rule, monomials of degree 0..15: worst relative error {:.2e} (<= 1e-10)", worst));
}

void criterion_6() {
    const epi::Cohort c = epi::simulate_cohort(epi::EpiDesign{}, epi::EpiParams::truth(), 1);
    epi::EvalCounts counts;
    epi::loglik_direct(epi::EpiParams::truth(), c, gauss_hermite(8), &counts);
    report(6, counts.logistic == 505267,
           fmt::format("direct likelihood logistic-density evaluations: {} (expected 505267)", counts.logistic));
}

void criterion_7() {
    const HermiteRule rule = gauss_hermite(8);
    const auto truth = epi::EpiParams::truth();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const epi::Cohort c = epi::simulate_cohort(epi::EpiDesign{}, truth, seed);
        const epi::EpiLikContext ctx = epi::build_context(c);
        std::vector<epi::EpiParams> points = {truth};
        for (std::uint64_t k = 1; k <= 3; ++k)
            points.push_back(study::perturbed_start(truth, 0.2, derive_seed(seed, 100 + k)));
        for (const auto& p : points) {
            const double direct = epi::loglik_direct(p, c, rule);
            const double interp = epi::loglik_interp(p, ctx, rule);
            worst = std::max(worst, std::abs(interp - direct) / std::abs(direct));
        }
    }
    report(7, worst <= 1e-7,
           fmt::format("5 cohorts x 4 parameter points: worst relative loglik difference {:.2e} (<= 1e-7)", worst));
}

MixtureTimings criterion_8(std::size_t n) {
    MixtureTimings t;
    t.n = n;
    const auto x = mixture::simulate_mixture(n, mixture::MixtureParams::truth(), 1);
    AggregatedWeights ctx = [&] {
        const auto t0 = std::chrono::steady_clock::now();
        auto c = mixture::build_context(x, 0.15);
        t.aggregate_s = seconds_since(t0);
        return c;
    }();
    const auto truth = mixture::MixtureParams::truth();
    const double ll_digits =
        agreement_digits(mixture::loglik_direct(truth, x), mixture::loglik_interp(truth, ctx));

    FitResult interp, direct;
    t.interp_fit_s = timed([&] { interp = mixture::fit_mixture(ctx, x, OptimizerConfig{}); });
    t.direct_fit_s = timed([&] {
        direct = mixture::fit_mixture(x, OptimizerConfig{}, {.use_interpolation = false});
    });
    double est_digits = 16.0;
    for (std::size_t i = 0; i < interp.estimates.size(); ++i)
        est_digits = std::min(est_digits, agreement_digits(interp.estimates[i], direct.estimates[i]));
    report(8, ll_digits >= 8.0 && est_digits >= 6.0 && interp.hessian_pd && direct.hessian_pd,
           fmt::format("{} draws, h=0.15: loglik at truth agrees to {:.2f} digits (>= 8), fitted "
                       "estimates to {:.2f} digits (>= 6)",
                       n, ll_digits, est_digits));
    return t;
}

double criterion_9(bool fast) {
    study::StudyConfig cfg;
    double full_s = 0.0;
    bool pass = true;
    std::string text;
    if (!fast) {
        cfg.n_sims = 1000;
        study::PowerStudy full;
        full_s = timed([&] { full = study::run_power_study(cfg); });
        const auto& r = full.report;
        const bool ok = r.power >= 0.965 && r.power <= 0.995 && r.n_non_pd <= 10;
        pass = pass && ok;
        text += fmt::format("1000 sims: power {:.3f} (in [0.965, 0.995]), non-PD {} (<= 10), {:.1f} s; ",
                            r.power, r.n_non_pd, full_s);
    }
    cfg.n_sims = 200;
    const study::PowerStudy quick = study::run_power_study(cfg);
    pass = pass && quick.report.power >= 0.94;
    text += fmt::format("200 sims: power {:.3f} (>= 0.94)", quick.report.power);
    report(9, pass, text);
    return full_s;
}

EpiTimings criterion_10(const MixtureTimings& mix) {
    EpiTimings t;
    study::StudyConfig cfg;
    const epi::Cohort c = epi::simulate_cohort(cfg.design, cfg.truth, cfg.base_seed);
    const auto start = study::perturbed_start(cfg.truth, cfg.start_jitter, derive_seed(cfg.base_seed, 1));
    t.interp_fit_s = timed([&] { study::fit_cohort(c, start, cfg); });
    cfg.use_interpolation = false;
    t.direct_fit_s = timed([&] { study::fit_cohort(c, start, cfg); });
    const double epi_ratio = t.direct_fit_s / t.interp_fit_s;
    const double mix_ratio = mix.direct_fit_s / (mix.aggregate_s + mix.interp_fit_s);
    report(10, epi_ratio >= 20.0 && mix_ratio >= 50.0,
           fmt::format("epi fit {:.1f}x faster ({:.2f} s vs {:.3f} s, >= 20x); mixture fit at {} draws "
                       "{:.1f}x faster ({:.2f} s vs {:.3f} s incl. aggregation, >= 50x)",
                       epi_ratio, t.direct_fit_s, t.interp_fit_s, mix.n, mix_ratio, mix.direct_fit_s,
                       mix.aggregate_s + mix.interp_fit_s));
    return t;
}

void criterion_11() {
    const fs::path base = fs::temp_directory_path() / "fastlik_acceptance_determinism";
    fs::remove_all(base);
    std::vector<std::string> csvs;
    for (const char* workers : {"1", "0", "0"}) {
        const fs::path dir = base / fmt::format("run{}", csvs.size());
        const std::vector<std::string> args = {"fastlik", "--seed", "7", "--workers", workers,
                                               "--out", dir.string(), "power-study", "--sims", "20"};
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        csvs.push_back(code == cli::kExitOk ? slurp(dir / "records.csv") : std::string{});
    }
    fs::remove_all(base);
    const bool same = !csvs[0].empty() && csvs[0] == csvs[1] && csvs[1] == csvs[2];
    report(11, same,
           fmt::format("power-study records.csv over 3 runs (1 worker, then all): {} ({} bytes)",
                       same ? "byte-identical" : "DIFFERENT", csvs[0].size()));
}

}  // namespace

int main(int argc, char** argv) {
    bool fast = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--fast") == 0) {
            fast = true;
        } else {
            fmt::print(stderr, "usage: fastlik_acceptance [--fast]\n");
            return 2;
        }
    }
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        const MixtureTimings mix = criterion_8(fast ? 100000 : 1000000);
        const double study_s = criterion_9(fast);
        const EpiTimings epi = criterion_10(mix);
        criterion_11();
        info(12, fmt::format("wall clock here vs published (hardware-bound, not compared): 1000-sim "
                             "study {} vs 453 s; direct epi fit {:.2f} s vs 93 s; direct mixture fit "
                             "{:.2f} s vs 258 s; aggregation {:.3f} s vs 0.23 s; interpolated mixture "
                             "fit {:.3f} s vs 0.08 s",
                             fast ? std::string("not run") : fmt::format("{:.1f} s", study_s),
                             epi.direct_fit_s, mix.direct_fit_s, mix.aggregate_s, mix.interp_fit_s));
    } catch (const std::exception& e) {
        fmt::print("FAIL [-] aborted: {}\n", e.what());
        return 1;
    }
    fmt::print("{} criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}

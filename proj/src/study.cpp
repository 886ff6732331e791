#include "fastlik/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fastlik/error.hpp"
#include "fastlik/parallel.hpp"
#include "fastlik/rng.hpp"

namespace fastlik::study {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct Stats {
    double mean = kNaN, median = kNaN, sd = kNaN;
};

Stats stats(std::vector<double> v) {
    Stats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    return s;
}

// fixed textual form for CSV and report values
std::string num(double v) {
    if (std::isnan(v)) return "";
    return fmt::format("{:.12g}", v);
}

}  // namespace

void StudyConfig::validate() const {
    if (n_sims < 1) throw InvalidInput("n_sims must be at least 1");
    if (!(wald_critical > 0.0)) throw InvalidInput("wald_critical must be positive");
    if (grid_h && !(*grid_h > 0.0)) throw InvalidInput("grid_h must be positive");
    if (!(start_jitter >= 0.0 && start_jitter < 1.0)) throw InvalidInput("start_jitter must lie in [0, 1)");
    design.validate();
    truth.validate();
}

epi::EpiParams perturbed_start(const epi::EpiParams& truth, double jitter, std::uint64_t seed) {
    Rng rng(seed);
    auto v = truth.to_array();
    for (double& x : v) {
        const double u = 2.0 * rng.uniform() - 1.0;
        if (x > 0.0) x *= 1.0 + jitter * u;
    }
    return epi::EpiParams::from_array(v);
}

FitResult fit_cohort(const epi::Cohort& cohort, const epi::EpiParams& start,
                     const StudyConfig& config) {
    const HermiteRule rule = gauss_hermite(config.design.hermite_order);
    const ParamTransform transform = epi::epi_transform();
    const auto x0 = start.to_array();
    if (config.use_interpolation) {
        const epi::EpiLikContext ctx = epi::build_context(cohort, config.grid_h);
        const Objective f = [&](std::span<const double> c) {
            return epi::loglik_interp(epi::EpiParams::from_array(c), ctx, rule);
        };
        return maximize(f, x0, transform, config.optimizer);
    }
    const Objective f = [&](std::span<const double> c) {
        return epi::loglik_direct(epi::EpiParams::from_array(c), cohort, rule);
    };
    return maximize(f, x0, transform, config.optimizer);
}

bool wald_significant(const SimRecord& record, double critical) {
    if (!record.hessian_pd || !record.se) return false;
    const double se = (*record.se)[epi::kScaleIndex];
    return record.estimates[epi::kScaleIndex] / se > critical;
}

SimRecord run_sim(const StudyConfig& config, int sim_index) {
    const auto t0 = std::chrono::steady_clock::now();
    SimRecord rec;
    rec.sim_index = sim_index;
    rec.seed = config.base_seed + static_cast<std::uint64_t>(sim_index);
    rec.estimates.fill(kNaN);
    rec.loglik = kNaN;
    rec.wald_scale = kNaN;
    rec.wald_slope = kNaN;
    try {
        const epi::Cohort cohort = epi::simulate_cohort(config.design, config.truth, rec.seed);
        const epi::EpiParams start =
            perturbed_start(config.truth, config.start_jitter, derive_seed(rec.seed, 1));
        const FitResult fit = fit_cohort(cohort, start, config);
        std::copy(fit.estimates.begin(), fit.estimates.end(), rec.estimates.begin());
        rec.loglik = fit.loglik;
        rec.converged = fit.converged;
        rec.hessian_pd = fit.hessian_pd;
        rec.n_evaluations = fit.n_evaluations;
        if (fit.hessian_pd) {
            std::array<double, epi::EpiParams::kSize> se{};
            std::copy(fit.se.begin(), fit.se.end(), se.begin());
            rec.se = se;
            const double b = rec.estimates[epi::kScaleIndex];
            const double se_b = se[epi::kScaleIndex];
            rec.wald_scale = b / se_b;
            rec.wald_slope = (1.0 / b) / (se_b / (b * b));
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.converged = false;
        rec.hessian_pd = false;
        rec.se.reset();
    }
    rec.significant = wald_significant(rec, config.wald_critical);
    rec.wall_time_ms = elapsed_ms(t0);
    return rec;
}

PowerReport summarize(const std::vector<SimRecord>& records, double total_wall_time_s) {
    PowerReport rep;
    rep.n_sims = static_cast<int>(records.size());
    rep.total_wall_time_s = total_wall_time_s;
    for (const auto& r : records) {
        if (!r.hessian_pd) ++rep.n_non_pd;
        if (!r.converged) ++rep.n_non_converged;
        if (r.significant) ++rep.n_significant;
    }
    rep.power = rep.n_sims > 0 ? static_cast<double>(rep.n_significant) / rep.n_sims : 0.0;

    for (std::size_t k = 0; k < epi::EpiParams::kSize; ++k) {
        std::vector<double> est, se;
        for (const auto& r : records) {
            if (std::isfinite(r.estimates[k])) est.push_back(r.estimates[k]);
            if (r.se) se.push_back((*r.se)[k]);
        }
        const Stats e = stats(est);
        const Stats s = stats(se);
        rep.estimate_summary.push_back({epi::kParamNames[k], e.mean, e.median, e.sd, s.mean,
                                        s.median, s.sd, static_cast<int>(se.size())});
    }
    return rep;
}

PowerStudy run_power_study(const StudyConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SimRecord> records(static_cast<std::size_t>(config.n_sims));
    const int workers = config.workers > 0 ? config.workers : max_workers();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int i = 0; i < config.n_sims; ++i) records[static_cast<std::size_t>(i)] = run_sim(config, i);
    PowerStudy out;
    out.report = summarize(records, elapsed_ms(t0) / 1000.0);
    out.records = std::move(records);
    return out;
}

void write_records_csv(std::ostream& os, const std::vector<SimRecord>& records) {
    os << "index,seed";
    for (const char* n : epi::kParamNames) os << ',' << n;
    for (const char* n : epi::kParamNames) os << ",se_" << n;
    os << ",loglik,hessian_pd,converged,wald_scale,wald_slope,significant\n";
    for (const auto& r : records) {
        os << r.sim_index << ',' << r.seed;
        for (double v : r.estimates) os << ',' << num(v);
        for (std::size_t k = 0; k < epi::EpiParams::kSize; ++k)
            os << ',' << (r.se ? num((*r.se)[k]) : std::string());
        os << ',' << num(r.loglik) << ',' << int(r.hessian_pd) << ',' << int(r.converged) << ','
           << num(r.wald_scale) << ',' << num(r.wald_slope) << ',' << int(r.significant) << '\n';
    }
}

void write_timings_csv(std::ostream& os, const std::vector<SimRecord>& records) {
    os << "index,seed,wall_time_ms,n_evaluations\n";
    for (const auto& r : records)
        os << r.sim_index << ',' << r.seed << ',' << fmt::format("{:.3f}", r.wall_time_ms) << ','
           << r.n_evaluations << '\n';
}

void write_report(std::ostream& os, const PowerReport& rep, const StudyConfig& config) {
    fmt::print(os, "n_sims: {}\n", rep.n_sims);
    fmt::print(os, "n_stage1: {}\n", config.design.n_stage1);
    fmt::print(os, "n_stage2: {}\n", config.design.n_stage2);
    fmt::print(os, "hermite_order: {}\n", config.design.hermite_order);
    fmt::print(os, "base_seed: {}\n", config.base_seed);
    fmt::print(os, "use_interpolation: {}\n", config.use_interpolation);
    fmt::print(os, "grid_h: {}\n", config.grid_h ? num(*config.grid_h) : std::string("auto"));
    fmt::print(os, "wald_critical: {}\n", num(config.wald_critical));
    fmt::print(os, "n_non_pd: {}\n", rep.n_non_pd);
    fmt::print(os, "n_non_converged: {}\n", rep.n_non_converged);
    fmt::print(os, "n_significant: {}\n", rep.n_significant);
    fmt::print(os, "power: {}\n", num(rep.power));
    for (const auto& s : rep.estimate_summary) {
        fmt::print(os, "{}.estimate_mean: {}\n", s.name, num(s.estimate_mean));
        fmt::print(os, "{}.estimate_median: {}\n", s.name, num(s.estimate_median));
        fmt::print(os, "{}.estimate_sd: {}\n", s.name, num(s.estimate_sd));
        fmt::print(os, "{}.se_mean: {}\n", s.name, num(s.se_mean));
        fmt::print(os, "{}.se_median: {}\n", s.name, num(s.se_median));
        fmt::print(os, "{}.se_sd: {}\n", s.name, num(s.se_sd));
        fmt::print(os, "{}.n_with_se: {}\n", s.name, s.n_with_se);
    }
    fmt::print(os, "total_wall_time_s: {:.3f}\n", rep.total_wall_time_s);
}

}  // namespace fastlik::study

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fastlik/epi_model.hpp"
#include "fastlik/optimize.hpp"

namespace fastlik::study {

struct StudyConfig {
    int n_sims = 1000;
    epi::EpiDesign design{};
    epi::EpiParams truth = epi::EpiParams::truth();
    std::uint64_t base_seed = 1;
    std::optional<double> grid_h;  // nullopt: sd(stage-1 z_a) / 8
    OptimizerConfig optimizer{};
    double wald_critical = 1.96;
    bool use_interpolation = true;
    double start_jitter = 0.1;  // multiplicative perturbation of positive truth values
    int workers = 0;            // 0: all available

    void validate() const;
};

struct SimRecord {
    int sim_index = 0;
    std::uint64_t seed = 0;
    std::array<double, epi::EpiParams::kSize> estimates{};
    std::optional<std::array<double, epi::EpiParams::kSize>> se;
    double loglik = 0.0;
    bool hessian_pd = false;
    bool converged = false;
    double wald_scale = 0.0;  // scale / se(scale); NaN without SEs
    double wald_slope = 0.0;  // (1/scale) / se(1/scale), delta method; NaN without SEs
    bool significant = false;
    int n_evaluations = 0;
    double wall_time_ms = 0.0;
    std::string error;  // non-empty when the fit threw
};

struct ParameterSummary {
    std::string name;
    double estimate_mean = 0.0;
    double estimate_median = 0.0;
    double estimate_sd = 0.0;
    double se_mean = 0.0;
    double se_median = 0.0;
    double se_sd = 0.0;
    int n_with_se = 0;
};

struct PowerReport {
    int n_sims = 0;
    int n_non_pd = 0;
    int n_non_converged = 0;
    int n_significant = 0;
    double power = 0.0;
    std::vector<ParameterSummary> estimate_summary;
    double total_wall_time_s = 0.0;
};

struct PowerStudy {
    PowerReport report;
    std::vector<SimRecord> records;
};

// Truth with each positive coordinate multiplied by 1 + jitter*U(-1, 1), seeded.
epi::EpiParams perturbed_start(const epi::EpiParams& truth, double jitter, std::uint64_t seed);

// Fits one cohort by the direct or interpolated likelihood.
FitResult fit_cohort(const epi::Cohort& cohort, const epi::EpiParams& start,
                     const StudyConfig& config);

bool wald_significant(const SimRecord& record, double critical);

// simulate -> fit -> record for seed base_seed + sim_index. Fit failures are recorded.
SimRecord run_sim(const StudyConfig& config, int sim_index);

PowerReport summarize(const std::vector<SimRecord>& records, double total_wall_time_s);

// All simulations, parallel across sims; results are folded in index order.
PowerStudy run_power_study(const StudyConfig& config);

// index,seed,<7 estimates>,<7 se_*>,loglik,hessian_pd,converged,wald_scale,wald_slope,significant
void write_records_csv(std::ostream& os, const std::vector<SimRecord>& records);
// index,seed,wall_time_ms,n_evaluations
void write_timings_csv(std::ostream& os, const std::vector<SimRecord>& records);
// key: value lines
void write_report(std::ostream& os, const PowerReport& report, const StudyConfig& config);

}  // namespace fastlik::study

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fastlik/interp.hpp"
#include "fastlik/optimize.hpp"
#include "fastlik/quadrature.hpp"

namespace fastlik::epi {

/// Two-stage exposure/outcome model.
///
/// Log true exposure Z ~ N(mu_z, sigma_z^2); the surrogate Z_A is jointly normal with Z
/// with marginal N(mu_a, sigma_a^2) and correlation rho. The outcome satisfies
/// logit P(Y = 1 | Z) = (Z - location) / scale.
struct EpiParams {
    double mu_z = 0.0;
    double sigma_z = 1.0;
    double mu_a = 0.0;
    double sigma_a = 10.0 / 3.0;
    double rho = 0.3;
    double location = 4.733;
    double scale = 0.693;

    static constexpr std::size_t kSize = 7;

    static EpiParams truth() { return {}; }
    static EpiParams from_array(std::span<const double> v);
    std::array<double, kSize> to_array() const;
    // Throws InvalidInput when a domain constraint fails.
    void validate() const;
};

inline constexpr std::array<const char*, EpiParams::kSize> kParamNames = {
    "mu_z", "sigma_z", "mu_a", "sigma_a", "rho", "location", "scale"};
inline constexpr std::size_t kLocationIndex = 5;
inline constexpr std::size_t kScaleIndex = 6;

struct EpiDesign {
    std::size_t n_stage1 = 63350;  // whole cohort
    std::size_t n_stage2 = 219;    // validation subsample with true exposure measured
    int hermite_order = 8;

    void validate() const;
};

struct Stage1Record {
    int y;
    double z_a;
};

struct Stage2Record {
    int y;
    double z;
    double z_a;
};

struct Cohort {
    std::vector<Stage1Record> stage1_only;
    std::vector<Stage2Record> stage2;
    std::uint64_t seed = 0;

    std::size_t size() const { return stage1_only.size() + stage2.size(); }
};

struct ConditionalNormal {
    double mean;
    double sd;
};

Cohort simulate_cohort(const EpiDesign& design, const EpiParams& truth, std::uint64_t seed);

// Columnar text: header "stage,y,z,z_a", then one record per line; z is empty for
// stage-1-only records. Values are written with 17 significant digits.
void write_cohort(std::ostream& os, const Cohort& cohort);
Cohort read_cohort(std::istream& is);

ConditionalNormal conditional_z_given_za(const EpiParams& params, double z_a);

/// Log-likelihood contribution of a stage-1-only record,
/// log phi(z_a; mu_a, sigma_a) + log P(Y = y | z_a), with the conditional probability
/// integrated over Z | Z_A by Gauss-Hermite quadrature.
///
/// Constants depending only on the parameters are computed once, so this is the form
/// used inside likelihood loops. Each call performs rule.order logistic evaluations.
class Stage1Evaluator {
public:
    Stage1Evaluator(const EpiParams& params, const HermiteRule& rule);

    double operator()(int y, double z_a) const;
    // P(Y = 1 | z_a).
    double prob_case(double z_a) const;

private:
    EpiParams p_;
    const HermiteRule* rule_;
    double cond_slope_;
    double cond_scale_;  // sqrt(2) * conditional sd
    double log_norm_a_;
};

double stage1_term(int y, double z_a, const EpiParams& params, const HermiteRule& rule);

// log Bernoulli(y; expit((z - location)/scale)) + log bivariate normal density of (z, z_a).
// Throws EvaluationError when 1 - rho^2 < 1e-12.
double stage2_term(int y, double z, double z_a, const EpiParams& params);

/// Reusable, parameter-free summary of a cohort for interpolated likelihoods: one grid,
/// aggregated stage-1 weights per outcome stratum, and the stage-2 records verbatim.
struct EpiLikContext {
    NodeGrid grid;
    WindowSpec window;
    AggregatedWeights weights_y0;
    AggregatedWeights weights_y1;
    std::vector<Stage2Record> stage2;
};

// Default spacing: sample sd of stage-1 z_a / 8.
double default_spacing(const Cohort& cohort);

EpiLikContext build_context(const Cohort& cohort, std::optional<double> h = std::nullopt,
                            const WindowSpec& window = WindowSpec{});

struct EvalCounts {
    std::int64_t logistic = 0;       // logistic-density evaluations
    std::int64_t stage1_calls = 0;   // stage-1 term evaluations
};

// Direct log-likelihood over every record (parallel over fixed chunks).
double loglik_direct(const EpiParams& params, const Cohort& cohort, const HermiteRule& rule,
                     EvalCounts* counts = nullptr);
// Single-threaded reference for loglik_direct.
double loglik_direct_serial(const EpiParams& params, const Cohort& cohort,
                            const HermiteRule& rule, EvalCounts* counts = nullptr);

// Stage-2 terms exactly plus stage-1 terms through the aggregated weights.
double loglik_interp(const EpiParams& params, const EpiLikContext& context,
                     const HermiteRule& rule, EvalCounts* counts = nullptr);

// identity / log / identity / log / fisher-z / identity / log
ParamTransform epi_transform();

}  // namespace fastlik::epi

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fastlik/interp.hpp"
#include "fastlik/optimize.hpp"

namespace fastlik::mixture {

/// Two-component normal mixture: weight1 N(mu1, sigma1^2) + (1 - weight1) N(mu2, sigma2^2).
struct MixtureParams {
    double weight1 = 0.3;
    double mu1 = 0.0;
    double sigma1 = 1.0;
    double mu2 = 0.4;
    double sigma2 = 1.3;

    static constexpr std::size_t kSize = 5;

    static MixtureParams truth() { return {}; }
    static MixtureParams from_array(std::span<const double> v);
    std::array<double, kSize> to_array() const;
    void validate() const;
    // Same distribution with components ordered so that mu1 <= mu2.
    MixtureParams canonical() const;
};

inline constexpr std::array<const char*, MixtureParams::kSize> kParamNames = {
    "weight1", "mu1", "sigma1", "mu2", "sigma2"};

inline constexpr double kDefaultSpacing = 0.15;

std::vector<double> simulate_mixture(std::size_t n, const MixtureParams& params,
                                     std::uint64_t seed);

double mixture_logdensity(const MixtureParams& params, double x);

// Parallel over fixed chunks.
double loglik_direct(const MixtureParams& params, std::span<const double> data);
double loglik_direct_serial(const MixtureParams& params, std::span<const double> data);

AggregatedWeights build_context(std::span<const double> data, double h = kDefaultSpacing,
                                const WindowSpec& window = WindowSpec{});

double loglik_interp(const MixtureParams& params, const AggregatedWeights& context,
                     std::int64_t* density_calls = nullptr);

// logit / identity / log / identity / log
ParamTransform mixture_transform();

// weight1 = 0.5, means at the 25th and 75th percentiles, sigmas at the sample sd.
MixtureParams starting_values(std::span<const double> data);

struct MixtureFitOptions {
    bool use_interpolation = true;
    double h = kDefaultSpacing;
    WindowSpec window{};
};

/// Maximum-likelihood fit. Estimates, standard errors and Hessian are reported with
/// components relabeled so that mu1 <= mu2; the optimizer itself never relabels.
FitResult fit_mixture(std::span<const double> data, const OptimizerConfig& config,
                      const MixtureFitOptions& options = {});

// Fit against a prebuilt context, so aggregation cost can be measured separately.
FitResult fit_mixture(const AggregatedWeights& context, std::span<const double> data,
                      const OptimizerConfig& config);

}  // namespace fastlik::mixture

#include "fastlik/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastlik/error.hpp"
#include "fastlik/parallel.hpp"
#include "fastlik/rng.hpp"
#include "fastlik/summation.hpp"

namespace fastlik::mixture {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;
constexpr double kSigmaFloor = 1e-6;  // relative to the sample sd
constexpr double kInterpSigmaSpacings = 4.0;

double log_normal_pdf(double x, double mu, double sigma) {
    const double d = (x - mu) / sigma;
    return -kLogSqrtTwoPi - std::log(sigma) - 0.5 * d * d;
}

struct Moments {
    double mean;
    double sd;
};

Moments moments(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0};
}

// linear interpolation between order statistics
double quantile(std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Relabel a fit on the (logit w, mu1, log s1, mu2, log s2) scale so that mu1 <= mu2.
void canonicalize(FitResult& fit) {
    if (fit.estimates[1] <= fit.estimates[3]) return;
    const std::array<int, 5> perm = {0, 3, 4, 1, 2};
    const std::array<double, 5> sign = {-1.0, 1.0, 1.0, 1.0, 1.0};

    auto& u = fit.unconstrained_estimates;
    const std::vector<double> u_old = u;
    for (int i = 0; i < 5; ++i) u[static_cast<std::size_t>(i)] = sign[i] * u_old[static_cast<std::size_t>(perm[i])];
    fit.estimates = mixture_transform().from_unconstrained(u);

    if (fit.hessian.rows() == 5) {
        Eigen::MatrixXd h(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) h(i, j) = sign[i] * sign[j] * fit.hessian(perm[i], perm[j]);
        fit.hessian = h;
    }
    if (fit.se.size() == 5) {
        const std::vector<double> se_old = fit.se;
        for (int i = 0; i < 5; ++i) fit.se[static_cast<std::size_t>(i)] = se_old[static_cast<std::size_t>(perm[i])];
    }
}

FitResult fit_with(const std::function<double(const MixtureParams&)>& loglik,
                   std::span<const double> data, const OptimizerConfig& config,
                   double grid_h = 0.0) {
    if (data.size() < 10) throw InvalidInput("fit_mixture needs at least 10 observations");
    const double sd = moments(data).sd;
    // A component only a few spacings wide sits between nodes and the node values miss it: at
    // sigma = h the interpolated loglik is off by tens of units, at 3h by ~1e-6. Keep sigma >= 4h.
    const double interp_floor = kInterpSigmaSpacings * grid_h;
    if (!(sd > interp_floor))
        throw InvalidInput("grid spacing must be below a quarter of the sample standard deviation");
    const double floor = std::max(kSigmaFloor * sd, interp_floor);
    const Objective objective = [&](std::span<const double> c) {
        const MixtureParams p = MixtureParams::from_array(c);
        if (p.sigma1 < floor || p.sigma2 < floor) return std::numeric_limits<double>::quiet_NaN();
        return loglik(p);
    };
    const auto start = starting_values(data).to_array();
    FitResult fit = maximize(objective, start, mixture_transform(), config);
    canonicalize(fit);
    return fit;
}

}  // namespace

MixtureParams MixtureParams::from_array(std::span<const double> v) {
    if (v.size() != kSize) throw InvalidInput("mixture parameter vector must have 5 entries");
    return {v[0], v[1], v[2], v[3], v[4]};
}

std::array<double, MixtureParams::kSize> MixtureParams::to_array() const {
    return {weight1, mu1, sigma1, mu2, sigma2};
}

void MixtureParams::validate() const {
    for (double v : to_array())
        if (!std::isfinite(v)) throw InvalidInput("mixture parameters must be finite");
    if (!(weight1 >= 0.0 && weight1 <= 1.0)) throw InvalidInput("weight1 must lie in [0, 1]");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw InvalidInput("sigmas must be positive");
}

MixtureParams MixtureParams::canonical() const {
    if (mu1 <= mu2) return *this;
    return {1.0 - weight1, mu2, sigma2, mu1, sigma1};
}

std::vector<double> simulate_mixture(std::size_t n, const MixtureParams& params,
                                     std::uint64_t seed) {
    if (n < 1) throw InvalidInput("simulate_mixture needs n >= 1");
    params.validate();
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) {
        const bool first = rng.uniform() < params.weight1;
        v = first ? rng.normal(params.mu1, params.sigma1) : rng.normal(params.mu2, params.sigma2);
    }
    return x;
}

double mixture_logdensity(const MixtureParams& p, double x) {
    const double a = std::log(p.weight1) + log_normal_pdf(x, p.mu1, p.sigma1);
    // log(1 - w) rather than log1p(-w): both weights then go through the same operations, so a
    // label swap with an exactly representable 1 - w gives bit-identical values
    const double b = std::log(1.0 - p.weight1) + log_normal_pdf(x, p.mu2, p.sigma2);
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double loglik_direct_serial(const MixtureParams& params, std::span<const double> data) {
    params.validate();
    CompensatedSum s;
    for (double x : data) s += mixture_logdensity(params, x);
    return s.value();
}

double loglik_direct(const MixtureParams& params, std::span<const double> data) {
    params.validate();
    return chunked_sum(data.size(), [&](std::size_t begin, std::size_t end) {
        CompensatedSum s;
        for (std::size_t i = begin; i < end; ++i) s += mixture_logdensity(params, data[i]);
        return s.value();
    });
}

AggregatedWeights build_context(std::span<const double> data, double h,
                                const WindowSpec& window) {
    const NodeGrid grid = NodeGrid::for_samples(data, h, window);
    return accumulate_weights(grid, window, data);
}

double loglik_interp(const MixtureParams& params, const AggregatedWeights& context,
                     std::int64_t* density_calls) {
    params.validate();
    std::int64_t calls = 0;
    const double s = weighted_sum(context, [&](double x) {
        ++calls;
        return mixture_logdensity(params, x);
    });
    if (density_calls) *density_calls += calls;
    return s;
}

ParamTransform mixture_transform() {
    return ParamTransform({Transform::logit, Transform::identity, Transform::log,
                           Transform::identity, Transform::log},
                          std::vector<std::string>(kParamNames.begin(), kParamNames.end()));
}

MixtureParams starting_values(std::span<const double> data) {
    if (data.size() < 2) throw InvalidInput("starting values need at least 2 observations");
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = moments(data).sd;
    const double s = sd > 0.0 ? sd : 1.0;
    return {0.5, quantile(sorted, 0.25), s, quantile(sorted, 0.75), s};
}

FitResult fit_mixture(std::span<const double> data, const OptimizerConfig& config,
                      const MixtureFitOptions& options) {
    if (!options.use_interpolation) {
        return fit_with([&](const MixtureParams& p) { return loglik_direct(p, data); }, data,
                        config);
    }
    const AggregatedWeights ctx = build_context(data, options.h, options.window);
    return fit_mixture(ctx, data, config);
}

FitResult fit_mixture(const AggregatedWeights& context, std::span<const double> data,
                      const OptimizerConfig& config) {
    return fit_with([&](const MixtureParams& p) { return loglik_interp(p, context); }, data,
                    config, context.grid().h());
}

}  // namespace fastlik::mixture

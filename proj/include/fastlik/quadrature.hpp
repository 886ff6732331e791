#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fastlik/error.hpp"

namespace fastlik {

/// Gauss-Hermite rule for the weight function exp(-t^2); abscissae ascending.
struct HermiteRule {
    int order = 0;
    std::vector<double> abscissae;
    std::vector<double> weights;
};

// Newton iteration on orthonormal Hermite polynomials. Supports 1 <= order <= 64.
HermiteRule gauss_hermite(int order);

/// E[f(Z)] for Z ~ Normal(mean, sd^2) by the substitution z = mean + sqrt(2) sd t.
template <class F>
double expect_under_normal(const HermiteRule& rule, double mean, double sd, F&& f) {
    if (!(sd > 0.0)) throw InvalidInput("expect_under_normal requires sd > 0");
    const double scale = std::numbers::sqrt2 * sd;
    double sum = 0.0;
    for (int k = 0; k < rule.order; ++k) {
        const double z = mean + scale * rule.abscissae[static_cast<std::size_t>(k)];
        const double v = f(z);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os.precision(17);
            os << "integrand returned " << v << " at z = " << z;
            throw EvaluationError(os.str());
        }
        sum += rule.weights[static_cast<std::size_t>(k)] * v;
    }
    return sum * std::numbers::inv_sqrtpi;
}

}  // namespace fastlik

#include "fastlik/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace fastlik {

HermiteRule gauss_hermite(int order) {
    if (order < 1 || order > 64) throw InvalidInput("gauss_hermite supports orders 1..64");

    const int n = order;
    const double pi_m4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;

    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // initial guesses for the i-th largest root
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];
        }

        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pi_m4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) {
                // one more derivative evaluation at the converged root for the weight
                p1 = pi_m4;
                p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                break;
            }
        }
        if (n % 2 == 1 && i == half - 1) z = 0.0;
        x[static_cast<std::size_t>(i)] = z;
        x[static_cast<std::size_t>(n - 1 - i)] = -z;
        w[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
        w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
    }

    std::reverse(x.begin(), x.end());
    std::reverse(w.begin(), w.end());
    return HermiteRule{order, std::move(x), std::move(w)};
}

}  // namespace fastlik

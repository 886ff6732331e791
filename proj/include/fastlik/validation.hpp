#pragma once

#include <string>
#include <vector>

#include "fastlik/interp.hpp"

namespace fastlik::validation {

struct SuiteResult {
    std::string name;
    bool passed = false;
    bool informational = false;  // measured and reported, never fails
    double measured = 0.0;
    std::string detail;
};

// Published 20-node weight vector at x = 4.5 for nodes 0..19, as printed.
const std::vector<std::string>& published_weights_at_4_5();

// Half a unit in the last printed digit of a decimal literal.
double printed_half_ulp(const std::string& literal);

SuiteResult check_published_weights();

// Piecewise interpolation of 1/(1 + 25x^2) on [-1, 1] at spacing h, 1000 equispaced probes.
// At h = 0.02 the maximum error must be below 1e-8; other spacings are informational.
SuiteResult check_runge(double h, const WindowSpec& window = WindowSpec{});

// Default window: the bound must lie in [72.0, 72.8]. Other windows: agreement with a
// 10^5-point scan within 1e-6.
SuiteResult check_margin_bound(const WindowSpec& window = WindowSpec{});

// sin(5x - 0.4) on [-1, 1] at order/2 nodes per unit length: piecewise equally spaced
// windows against one Chebyshev window of the same order.
SuiteResult check_node_schemes(const WindowSpec& window = WindowSpec{});

struct NodeSchemeErrors {
    double equispaced_mean;
    double chebyshev_mean;
};
NodeSchemeErrors node_scheme_errors(const WindowSpec& window);

}  // namespace fastlik::validation

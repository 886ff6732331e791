#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastlik/error.hpp"

namespace fastlik {

/// Piecewise windowing policy for equally spaced nodes.
///
/// Each window holds `order` consecutive nodes. The interior it serves starts `margin`
/// nodes above the window's first node and is `stride = order - 2*margin - 1` spacings
/// long, so consecutive windows tile the line with a shift of `stride` nodes and every
/// served point keeps at least `margin` nodes strictly below and above it.
class WindowSpec {
public:
    WindowSpec() : WindowSpec(20, 3) {}
    WindowSpec(int order, int margin);

    int order() const { return order_; }
    int margin() const { return margin_; }
    int stride() const { return order_ - 2 * margin_ - 1; }

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

private:
    int order_;
    int margin_;
};

/// Equally spaced nodes lo + j*h, j = 0..count-1.
class NodeGrid {
public:
    NodeGrid(double lo, double h, int count);

    /// Smallest grid of whole windows whose served range covers [lo_x, hi_x], with
    /// node(margin) == lo_x.
    static NodeGrid covering(double lo_x, double hi_x, double h, const WindowSpec& window);

    /// Grid for a data set: lo = min - (margin + 0.5)*h and the fewest nodes that serve
    /// max(samples).
    static NodeGrid for_samples(std::span<const double> samples, double h,
                                const WindowSpec& window);

    double lo() const { return lo_; }
    double h() const { return h_; }
    int count() const { return count_; }
    double node(int j) const { return lo_ + j * h_; }
    std::vector<double> nodes() const;

    friend bool operator==(const NodeGrid&, const NodeGrid&) = default;

private:
    double lo_;
    double h_;
    int count_;
};

/// Closed range [node(margin), node(count - 1 - margin)] that a grid can serve.
struct ServedRange {
    double lo;
    double hi;
};
ServedRange served_range(const NodeGrid& grid, const WindowSpec& window);

/// Per-node totals W_j of interpolation weights over a data set.
class AggregatedWeights {
public:
    AggregatedWeights(NodeGrid grid, WindowSpec window, std::vector<double> totals,
                      std::size_t n_samples, std::optional<int> stratum = std::nullopt);

    const NodeGrid& grid() const { return grid_; }
    const WindowSpec& window() const { return window_; }
    const std::vector<double>& totals() const { return totals_; }
    std::size_t n_samples() const { return n_samples_; }
    const std::optional<int>& stratum() const { return stratum_; }
    int nonzero_nodes() const;

private:
    NodeGrid grid_;
    WindowSpec window_;
    std::vector<double> totals_;
    std::size_t n_samples_;
    std::optional<int> stratum_;
};

struct ErrorProbeReport {
    double max_abs_error = 0.0;
    double mean_abs_error = 0.0;
    std::size_t n_probes = 0;
    double worst_x = 0.0;
};

struct WeightSumMaximum {
    double value;
    double argmax;  // in node-index units, nodes 0..order-1
};

// Lagrange basis values l_i(x) for arbitrary strictly increasing nodes, by the product
// formula.
std::vector<double> lagrange_weights(std::span<const double> nodes, double x);

/// Lagrange weights for the nodes 0, 1, ..., order-1 evaluated at position t (in node
/// units). Denominators are tabulated once per order, so each evaluation is O(order).
class EquispacedStencil {
public:
    explicit EquispacedStencil(int order);

    int order() const { return static_cast<int>(denominator_.size()); }

    // Writes order() weights to out.
    void weights(double t, std::span<double> out) const;

private:
    std::vector<double> denominator_;
};

// Start index of the window serving x. Points on a shared window boundary go to the lower
// window. Throws CoverageError outside served_range.
int window_for(const NodeGrid& grid, const WindowSpec& window, double x);

// Aggregates interpolation weights of all samples onto the grid nodes. Samples are
// processed in fixed-size chunks in parallel; the result is independent of thread count.
AggregatedWeights accumulate_weights(const NodeGrid& grid, const WindowSpec& window,
                                     std::span<const double> samples,
                                     std::optional<int> stratum = std::nullopt);

// Single-threaded reference for accumulate_weights: one pass, sequential accumulation.
AggregatedWeights accumulate_weights_serial(const NodeGrid& grid, const WindowSpec& window,
                                            std::span<const double> samples,
                                            std::optional<int> stratum = std::nullopt);

namespace detail {
[[noreturn]] void throw_non_finite_node(double node, double value);
}

/// Sum_j W_j g(node_j), skipping zero-weight nodes. g is called at most grid.count() times.
template <class F>
double weighted_sum(const AggregatedWeights& aggw, F&& g) {
    const auto& totals = aggw.totals();
    const NodeGrid& grid = aggw.grid();
    double sum = 0.0;
    for (int j = 0; j < grid.count(); ++j) {
        const double w = totals[static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        const double x = grid.node(j);
        const double v = g(x);
        if (!std::isfinite(v)) detail::throw_non_finite_node(x, v);
        sum += w * v;
    }
    return sum;
}

// Interpolated value at x from function values tabulated on every grid node.
double interpolate_at(const NodeGrid& grid, const WindowSpec& window,
                      std::span<const double> g_values, double x);

// Max and mean |interpolate_at(x) - g(x)| over probe points.
ErrorProbeReport estimate_error(const NodeGrid& grid, const WindowSpec& window,
                                const std::function<double(double)>& g,
                                std::span<const double> probe_xs);

// Spacing expected to turn an error eps1 at spacing h1 into eps2: h1 * (eps2/eps1)^(1/order).
double calibrate_spacing(double h1, double eps1, double eps2, int order);

// Largest sum of absolute Lagrange weights over every point of one window that keeps
// `margin` nodes strictly below and above it. Dense scan followed by golden-section
// refinement of the best bracket.
WeightSumMaximum max_abs_weight_sum(const WindowSpec& window);

// Chebyshev points of the first kind mapped to [lo, hi], ascending.
std::vector<double> chebyshev_nodes(int order, double lo, double hi);

}  // namespace fastlik

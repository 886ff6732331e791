#include "fastlik/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fastlik/parallel.hpp"

namespace fastlik {

namespace {

// Relative slack, in node units, for deciding that a point sits on a node or boundary.
constexpr double kSnap = 1e-9;
// Tighter slack for snapping stencil positions onto nodes.
constexpr double kNodeSnap = 1e-11;

double snap_to_integer(double q, double tol) {
    const double r = std::round(q);
    return std::abs(q - r) < tol ? r : q;
}

std::string fmt_range(double x, const ServedRange& r) {
    std::ostringstream os;
    os.precision(17);
    os << "value " << x << " outside served range [" << r.lo << ", " << r.hi << "]";
    return os.str();
}

}  // namespace

WindowSpec::WindowSpec(int order, int margin) : order_(order), margin_(margin) {
    if (order < 2 || margin < 0 || order < 2 * margin + 2)
        throw InvalidInput("window requires order >= 2*margin + 2 and order >= 2");
}

NodeGrid::NodeGrid(double lo, double h, int count) : lo_(lo), h_(h), count_(count) {
    if (!std::isfinite(lo) || !std::isfinite(h) || h <= 0.0)
        throw InvalidInput("node grid requires finite lo and spacing h > 0");
    if (count < 2) throw InvalidInput("node grid requires at least 2 nodes");
}

NodeGrid NodeGrid::covering(double lo_x, double hi_x, double h, const WindowSpec& window) {
    if (!(hi_x > lo_x)) throw InvalidInput("covering grid requires lo < hi");
    if (!(h > 0.0)) throw InvalidInput("covering grid requires h > 0");
    const double tile = window.stride() * h;
    const int tiles = std::max(1, static_cast<int>(std::ceil(snap_to_integer((hi_x - lo_x) / tile, kSnap))));
    const int count = tiles * window.stride() + 2 * window.margin() + 1;
    return NodeGrid(lo_x - window.margin() * h, h, count);
}

NodeGrid NodeGrid::for_samples(std::span<const double> samples, double h,
                               const WindowSpec& window) {
    if (samples.empty()) throw InvalidInput("cannot size a grid for an empty sample");
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("grid spacing must be positive");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (!std::isfinite(*mn) || !std::isfinite(*mx)) throw InvalidInput("non-finite sample");
    const int m = window.margin();
    const double lo = *mn - (m + 0.5) * h;
    // served hi = lo + (count - 1 - m) h must reach max
    int count = static_cast<int>(std::ceil((*mx - lo) / h)) + 1 + m;
    while (lo + (count - 1 - m) * h < *mx) ++count;
    count = std::max(count, window.order());
    return NodeGrid(lo, h, count);
}

std::vector<double> NodeGrid::nodes() const {
    std::vector<double> out(static_cast<std::size_t>(count_));
    for (int j = 0; j < count_; ++j) out[static_cast<std::size_t>(j)] = node(j);
    return out;
}

ServedRange served_range(const NodeGrid& grid, const WindowSpec& window) {
    return {grid.node(window.margin()), grid.node(grid.count() - 1 - window.margin())};
}

AggregatedWeights::AggregatedWeights(NodeGrid grid, WindowSpec window,
                                     std::vector<double> totals, std::size_t n_samples,
                                     std::optional<int> stratum)
    : grid_(grid), window_(window), totals_(std::move(totals)), n_samples_(n_samples),
      stratum_(stratum) {
    if (totals_.size() != static_cast<std::size_t>(grid_.count()))
        throw InvalidInput("aggregated weights length must equal node count");
}

int AggregatedWeights::nonzero_nodes() const {
    return static_cast<int>(std::count_if(totals_.begin(), totals_.end(),
                                          [](double w) { return w != 0.0; }));
}

std::vector<double> lagrange_weights(std::span<const double> nodes, double x) {
    const std::size_t n = nodes.size();
    if (n < 2) throw InvalidInput("lagrange_weights needs at least 2 nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw InvalidInput("lagrange_weights needs strictly increasing nodes");

    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double num = 1.0;
        double den = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            num *= x - nodes[k];
            den *= nodes[i] - nodes[k];
        }
        w[i] = num / den;
    }
    return w;
}

EquispacedStencil::EquispacedStencil(int order) {
    if (order < 2) throw InvalidInput("stencil order must be at least 2");
    // Denominators use the same prefix/suffix products as weights() evaluated at t = i,
    // so a position exactly on node i yields a weight of exactly 1.
    const auto n = static_cast<std::size_t>(order);
    denominator_.resize(n);
    std::vector<double> prefix(n), suffix(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        prefix[0] = 1.0;
        for (std::size_t k = 1; k < n; ++k) prefix[k] = prefix[k - 1] * (t - static_cast<double>(k - 1));
        suffix[n - 1] = 1.0;
        for (std::size_t k = n - 1; k > 0; --k) suffix[k - 1] = suffix[k] * (t - static_cast<double>(k));
        denominator_[i] = prefix[i] * suffix[i];
    }
}

void EquispacedStencil::weights(double t, std::span<double> out) const {
    const std::size_t n = denominator_.size();
    // prefix pass stored in out, suffix folded in on the way back
    out[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] * (t - static_cast<double>(k - 1));
    double suffix = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        out[k] = (out[k] * suffix) / denominator_[k];
        suffix *= t - static_cast<double>(k);
    }
}

void detail::throw_non_finite_node(double node, double value) {
    std::ostringstream os;
    os.precision(17);
    os << "evaluator returned " << value << " at node " << node;
    throw EvaluationError(os.str());
}

int window_for(const NodeGrid& grid, const WindowSpec& window, double x) {
    if (grid.count() < window.order())
        throw InvalidInput("grid has fewer nodes than the window order");
    const ServedRange r = served_range(grid, window);
    const double slack = kSnap * grid.h();
    if (!std::isfinite(x) || x < r.lo - slack || x > r.hi + slack)
        throw CoverageError(fmt_range(x, r));

    const double q = snap_to_integer((x - r.lo) / (window.stride() * grid.h()), kSnap);
    const int k = std::max(0, static_cast<int>(std::ceil(q)) - 1);
    return std::min(k * window.stride(), grid.count() - window.order());
}

namespace {

// Position of x relative to node `start`, in node units.
double stencil_position(const NodeGrid& grid, int start, double x) {
    const double t = (x - grid.lo()) / grid.h() - start;
    return snap_to_integer(t, kNodeSnap);
}

void accumulate_range(const NodeGrid& grid, const WindowSpec& window,
                      const EquispacedStencil& stencil, std::span<const double> samples,
                      std::span<double> totals, std::span<double> scratch) {
    for (double x : samples) {
        const int s = window_for(grid, window, x);
        stencil.weights(stencil_position(grid, s, x), scratch);
        double* dst = totals.data() + s;
        for (int i = 0; i < window.order(); ++i) dst[i] += scratch[static_cast<std::size_t>(i)];
    }
}

}  // namespace

AggregatedWeights accumulate_weights_serial(const NodeGrid& grid, const WindowSpec& window,
                                            std::span<const double> samples,
                                            std::optional<int> stratum) {
    const EquispacedStencil stencil(window.order());
    std::vector<double> totals(static_cast<std::size_t>(grid.count()), 0.0);
    std::vector<double> scratch(static_cast<std::size_t>(window.order()));
    accumulate_range(grid, window, stencil, samples, totals, scratch);
    return AggregatedWeights(grid, window, std::move(totals), samples.size(), stratum);
}

AggregatedWeights accumulate_weights(const NodeGrid& grid, const WindowSpec& window,
                                     std::span<const double> samples,
                                     std::optional<int> stratum) {
    if (grid.count() < window.order())
        throw InvalidInput("grid has fewer nodes than the window order");
    const EquispacedStencil stencil(window.order());
    const auto count = static_cast<std::size_t>(grid.count());
    const std::size_t nchunks = chunk_count(samples.size());
    std::vector<double> partials(nchunks * count, 0.0);

    for_each_chunk(samples.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> scratch(static_cast<std::size_t>(window.order()));
        accumulate_range(grid, window, stencil, samples.subspan(begin, end - begin),
                         std::span<double>(partials).subspan(c * count, count), scratch);
    });

    std::vector<double> totals(count, 0.0);
    for (std::size_t c = 0; c < nchunks; ++c)
        for (std::size_t j = 0; j < count; ++j) totals[j] += partials[c * count + j];
    return AggregatedWeights(grid, window, std::move(totals), samples.size(), stratum);
}

double interpolate_at(const NodeGrid& grid, const WindowSpec& window,
                      std::span<const double> g_values, double x) {
    if (g_values.size() != static_cast<std::size_t>(grid.count()))
        throw InvalidInput("g_values must hold one value per grid node");
    const int s = window_for(grid, window, x);
    std::vector<double> w(static_cast<std::size_t>(window.order()));
    EquispacedStencil(window.order()).weights(stencil_position(grid, s, x), w);
    double v = 0.0;
    for (int i = 0; i < window.order(); ++i)
        v += w[static_cast<std::size_t>(i)] * g_values[static_cast<std::size_t>(s + i)];
    return v;
}

ErrorProbeReport estimate_error(const NodeGrid& grid, const WindowSpec& window,
                                const std::function<double(double)>& g,
                                std::span<const double> probe_xs) {
    if (probe_xs.empty()) throw InvalidInput("estimate_error needs at least one probe");
    std::vector<double> values(static_cast<std::size_t>(grid.count()));
    for (int j = 0; j < grid.count(); ++j) {
        const double v = g(grid.node(j));
        if (!std::isfinite(v)) detail::throw_non_finite_node(grid.node(j), v);
        values[static_cast<std::size_t>(j)] = v;
    }
    const EquispacedStencil stencil(window.order());
    std::vector<double> w(static_cast<std::size_t>(window.order()));

    ErrorProbeReport rep;
    rep.n_probes = probe_xs.size();
    double total = 0.0;
    for (double x : probe_xs) {
        const int s = window_for(grid, window, x);
        stencil.weights(stencil_position(grid, s, x), w);
        double approx = 0.0;
        for (int i = 0; i < window.order(); ++i)
            approx += w[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(s + i)];
        const double exact = g(x);
        if (!std::isfinite(exact)) {
            std::ostringstream os;
            os.precision(17);
            os << "probe function returned " << exact << " at x = " << x;
            throw EvaluationError(os.str());
        }
        const double err = std::abs(approx - exact);
        total += err;
        if (err > rep.max_abs_error) {
            rep.max_abs_error = err;
            rep.worst_x = x;
        }
    }
    if (rep.max_abs_error == 0.0) rep.worst_x = probe_xs.front();
    rep.mean_abs_error = total / static_cast<double>(probe_xs.size());
    return rep;
}

double calibrate_spacing(double h1, double eps1, double eps2, int order) {
    if (!(h1 > 0.0) || !(eps1 > 0.0) || !(eps2 > 0.0) || order < 1 || !std::isfinite(h1) ||
        !std::isfinite(eps1) || !std::isfinite(eps2))
        throw InvalidInput("calibrate_spacing needs positive h1, eps1, eps2 and order");
    return h1 * std::pow(eps2 / eps1, 1.0 / order);
}

WeightSumMaximum max_abs_weight_sum(const WindowSpec& window) {
    const int n = window.order();
    const int m = window.margin();
    // every point with m nodes strictly below and above: (m-1, n-m) in node units
    const double a = std::max(m - 1, 0);
    const double b = std::min(n - m, n - 1);

    const EquispacedStencil stencil(n);
    std::vector<double> w(static_cast<std::size_t>(n));
    auto objective = [&](double t) {
        stencil.weights(t, w);
        double s = 0.0;
        for (double v : w) s += std::abs(v);
        return s;
    };

    constexpr int kScan = 10000;
    int best = 0;
    double best_value = -1.0;
    for (int k = 0; k <= kScan; ++k) {
        const double v = objective(a + (b - a) * k / kScan);
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }

    double lo = a + (b - a) * std::max(best - 1, 0) / kScan;
    double hi = a + (b - a) * std::min(best + 1, kScan) / kScan;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    const double t = 0.5 * (lo + hi);
    const double refined = objective(t);
    if (refined > best_value) return {refined, t};
    return {best_value, a + (b - a) * best / kScan};
}

std::vector<double> chebyshev_nodes(int order, double lo, double hi) {
    if (order < 1) throw InvalidInput("chebyshev_nodes needs order >= 1");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidInput("chebyshev_nodes needs a finite range lo < hi");
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::vector<double> x(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k)
        x[static_cast<std::size_t>(k - 1)] =
            mid + half * std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * order));
    std::sort(x.begin(), x.end());
    return x;
}

}  // namespace fastlik

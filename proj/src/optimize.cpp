#include "fastlik/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fastlik/error.hpp"

namespace fastlik {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double open_unit(double v) {
    return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

}  // namespace

ParamTransform::ParamTransform(std::vector<Transform> codes, std::vector<std::string> names)
    : codes_(std::move(codes)), names_(std::move(names)) {
    if (names_.empty()) {
        for (std::size_t i = 0; i < codes_.size(); ++i) names_.push_back("p" + std::to_string(i));
    }
    if (names_.size() != codes_.size())
        throw InvalidInput("transform needs one name per coordinate");
}

std::vector<double> ParamTransform::to_unconstrained(std::span<const double> c) const {
    if (c.size() != codes_.size()) throw InvalidInput("parameter vector has the wrong length");
    std::vector<double> u(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = c[i];
        auto domain_error = [&](const char* what) {
            std::ostringstream os;
            os.precision(17);
            os << "parameter '" << names_[i] << "' = " << v << " " << what;
            throw InvalidInput(os.str());
        };
        if (!std::isfinite(v)) domain_error("is not finite");
        switch (codes_[i]) {
            case Transform::identity:
                u[i] = v;
                break;
            case Transform::log:
                if (!(v > 0.0)) domain_error("must be positive");
                u[i] = std::log(v);
                break;
            case Transform::logit:
                if (!(v > 0.0 && v < 1.0)) domain_error("must lie in (0, 1)");
                u[i] = std::log(v) - std::log1p(-v);
                break;
            case Transform::fisher_z:
                if (!(std::abs(v) < 1.0)) domain_error("must lie in (-1, 1)");
                u[i] = std::atanh(v);
                break;
        }
    }
    return u;
}

std::vector<double> ParamTransform::from_unconstrained(std::span<const double> u) const {
    if (u.size() != codes_.size()) throw InvalidInput("parameter vector has the wrong length");
    std::vector<double> c(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        switch (codes_[i]) {
            case Transform::identity:
                c[i] = u[i];
                break;
            case Transform::log:
                c[i] = std::clamp(std::exp(u[i]), std::numeric_limits<double>::min(),
                                  std::numeric_limits<double>::max());
                break;
            case Transform::logit:
                c[i] = open_unit(1.0 / (1.0 + std::exp(-u[i])));
                break;
            case Transform::fisher_z: {
                const double r = std::tanh(u[i]);
                const double lim = std::nextafter(1.0, 0.0);
                c[i] = std::clamp(r, -lim, lim);
                break;
            }
        }
    }
    return c;
}

std::vector<double> ParamTransform::jacobian_diagonal(std::span<const double> u) const {
    const auto c = from_unconstrained(u);
    std::vector<double> d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        switch (codes_[i]) {
            case Transform::identity:
                d[i] = 1.0;
                break;
            case Transform::log:
                d[i] = c[i];
                break;
            case Transform::logit:
                d[i] = c[i] * (1.0 - c[i]);
                break;
            case Transform::fisher_z:
                d[i] = 1.0 - c[i] * c[i];
                break;
        }
    }
    return d;
}

SimplexResult nelder_mead(const Objective& f, std::vector<double> start, double initial_step,
                          double ftol, double xtol, int max_evaluations) {
    const std::size_t n = start.size();
    if (n == 0) throw InvalidInput("nelder_mead needs at least one coordinate");
    const double dn = static_cast<double>(n);
    // Gao & Han adaptive coefficients; the classic ones for n = 1
    const double alpha = 1.0;
    const double beta = n >= 2 ? 1.0 + 2.0 / dn : 2.0;
    const double gamma = n >= 2 ? 0.75 - 0.5 / dn : 0.5;
    const double delta = n >= 2 ? 1.0 - 1.0 / dn : 0.5;

    if (max_evaluations < static_cast<int>(n) + 1)
        throw InvalidInput("nelder_mead needs an evaluation budget of at least n + 1");

    struct BudgetSpent {};
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        if (evals >= max_evaluations) throw BudgetSpent{};
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : kInf;
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        pts[i + 1][i] += initial_step * std::max(1.0, std::abs(start[i]));
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto affine = [&](std::vector<double>& out, const std::vector<double>& base,
                      const std::vector<double>& toward, double t) {
        for (std::size_t k = 0; k < n; ++k) out[k] = base[k] + t * (toward[k] - base[k]);
    };

    bool converged = false;
    try {
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double extent = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                extent = std::max(extent, std::abs(pts[i][k] - pts[best][k]));
        const double spread = vals[worst] - vals[best];
        if (std::isfinite(vals[best]) && extent <= xtol &&
            spread <= ftol * (1.0 + std::abs(vals[best]))) {
            converged = true;
            break;
        }
        if (evals >= max_evaluations) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k] / dn;

        affine(xr, centroid, pts[worst], -alpha);
        const double fr = eval(xr);
        if (fr < vals[best]) {
            affine(xe, centroid, xr, beta);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        bool shrink = false;
        if (fr < vals[worst]) {
            affine(xc, centroid, xr, gamma);
            const double fc = eval(xc);
            if (fc <= fr) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            affine(xc, centroid, pts[worst], gamma);
            const double fc = eval(xc);
            if (fc < vals[worst]) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) continue;
                affine(xc, pts[best], pts[i], delta);
                vals[i] = eval(xc);
                pts[i] = xc;
            }
        }
    }
    } catch (const BudgetSpent&) {
        // simplex left as of the last completed evaluation
    }

    const auto best_it = std::min_element(vals.begin(), vals.end());
    const auto best = static_cast<std::size_t>(best_it - vals.begin());
    return SimplexResult{pts[best], vals[best], evals, converged};
}

Eigen::MatrixXd fd_hessian(const Objective& objective, std::span<const double> point,
                           double step_scale) {
    const std::size_t n = point.size();
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = step_scale * std::max(1.0, std::abs(x[i]));

    auto eval = [&](const std::vector<double>& p) {
        const double v = objective(p);
        if (!std::isfinite(v)) throw EvaluationError("objective not finite on Hessian stencil");
        return v;
    };
    auto shifted = [&](std::size_t i, double si, std::size_t j, double sj) {
        std::vector<double> p = x;
        p[i] += si * step[i];
        p[j] += sj * step[j];
        return eval(p);
    };

    const double f0 = eval(x);
    Eigen::MatrixXd h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = x;
        p[i] = x[i] + step[i];
        const double fp = eval(p);
        p[i] = x[i] - step[i];
        const double fm = eval(p);
        h(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const double fpp = shifted(i, 1, j, 1);
            const double fpm = shifted(i, 1, j, -1);
            const double fmp = shifted(i, -1, j, 1);
            const double fmm = shifted(i, -1, j, -1);
            h(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
            h(j, i) = h(i, j);
        }
    }
    return 0.5 * (h + h.transpose());
}

std::vector<double> fd_gradient(const Objective& objective, std::span<const double> point,
                                double step_scale) {
    std::vector<double> p(point.begin(), point.end());
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = step_scale * std::max(1.0, std::abs(point[i]));
        p[i] = point[i] + s;
        const double fp = objective(p);
        p[i] = point[i] - s;
        const double fm = objective(p);
        p[i] = point[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw EvaluationError("objective not finite on gradient stencil");
        g[i] = (fp - fm) / (2.0 * s);
    }
    return g;
}

StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const ParamTransform& transform,
                               std::span<const double> unconstrained_estimates) {
    const auto n = static_cast<Eigen::Index>(transform.size());
    if (hessian.rows() != n || hessian.cols() != n || !hessian.allFinite()) return {};
    const Eigen::MatrixXd neg = -hessian;
    const Eigen::LLT<Eigen::MatrixXd> llt(neg);
    if (llt.info() != Eigen::Success) return {};

    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const auto jac = transform.jacobian_diagonal(unconstrained_estimates);
    StandardErrors out;
    out.se.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double var = cov(i, i);
        const double se = std::sqrt(var) * std::abs(jac[static_cast<std::size_t>(i)]);
        if (!(var > 0.0) || !std::isfinite(se) || !(se > 0.0)) return {};
        out.se[static_cast<std::size_t>(i)] = se;
    }
    out.pd = true;
    return out;
}

FitResult maximize(const Objective& objective, std::span<const double> start,
                   const ParamTransform& transform, const OptimizerConfig& config) {
    if (config.max_evaluations < 1 || !(config.function_tolerance > 0.0) ||
        !(config.parameter_tolerance > 0.0) || config.restarts < 0 ||
        !(config.fd_step_scale > 0.0) || !(config.initial_step > 0.0) || config.newton_steps < 0)
        throw InvalidInput("invalid optimizer configuration");

    const double f_start = objective(start);
    if (!std::isfinite(f_start)) throw EvaluationError("objective is not finite at the start point");

    // simplex minimizes the negated objective on the unconstrained scale
    // domain failures inside the objective count as infeasible points
    int evals = 0;
    const Objective unconstrained = [&](std::span<const double> u) {
        ++evals;
        try {
            const auto c = transform.from_unconstrained(u);
            return objective(c);
        } catch (const InvalidInput&) {
            return std::numeric_limits<double>::quiet_NaN();
        } catch (const EvaluationError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    const Objective negated = [&](std::span<const double> u) { return -unconstrained(u); };

    std::vector<double> x = transform.to_unconstrained(start);
    double best = -f_start;
    evals = 1;
    bool converged = false;
    for (int run = 0; run <= config.restarts; ++run) {
        const int budget = config.max_evaluations - evals;
        if (budget < static_cast<int>(x.size()) + 1) break;
        const SimplexResult r = nelder_mead(negated, x, config.initial_step,
                                            config.function_tolerance,
                                            config.parameter_tolerance, budget);
        const double improvement = best - r.value;
        if (r.value <= best) {
            x = r.x;
            best = r.value;
        }
        converged = r.converged;
        if (!converged) continue;
        if (run > 0 && improvement <= config.function_tolerance * (1.0 + std::abs(best))) break;
    }
    if (!std::isfinite(best)) throw EvaluationError("no finite objective value found");

    for (int k = 0; k < config.newton_steps; ++k) {
        Eigen::MatrixXd h;
        std::vector<double> g;
        try {
            h = fd_hessian(unconstrained, x, config.fd_step_scale);
            g = fd_gradient(unconstrained, x, config.fd_step_scale);
        } catch (const EvaluationError&) {
            break;
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(-h);
        if (!h.allFinite() || llt.info() != Eigen::Success) break;
        const Eigen::VectorXd d = llt.solve(Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()));
        if (!d.allFinite()) break;
        std::vector<double> trial = x;
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += d(static_cast<Eigen::Index>(i));
        const double f_trial = unconstrained(trial);
        if (!std::isfinite(f_trial) || -f_trial > best + config.function_tolerance * (1.0 + std::abs(best)))
            break;
        x = std::move(trial);
        best = -f_trial;
        if (d.lpNorm<Eigen::Infinity>() <= config.parameter_tolerance) break;
    }

    FitResult fit;
    fit.unconstrained_estimates = x;
    fit.estimates = transform.from_unconstrained(x);
    fit.loglik = -best;
    fit.converged = converged;
    fit.n_evaluations = evals;
    try {
        fit.hessian = fd_hessian(unconstrained, x, config.fd_step_scale);
        auto se = standard_errors(fit.hessian, transform, x);
        fit.hessian_pd = se.pd;
        fit.se = std::move(se.se);
    } catch (const EvaluationError&) {
        const auto n = static_cast<Eigen::Index>(x.size());
        fit.hessian = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
        fit.hessian_pd = false;
    }
    return fit;
}

}  // namespace fastlik

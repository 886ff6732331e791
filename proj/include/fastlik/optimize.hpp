#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fastlik {

enum class Transform {
    identity,
    log,       // positive scale parameters
    logit,     // proportions in (0, 1)
    fisher_z,  // correlations: constrained = tanh(unconstrained)
};

/// Per-coordinate map between a constrained parameter space and R^n.
class ParamTransform {
public:
    ParamTransform(std::vector<Transform> codes, std::vector<std::string> names);

    std::size_t size() const { return codes_.size(); }
    const std::vector<Transform>& codes() const { return codes_; }
    const std::vector<std::string>& names() const { return names_; }

    std::vector<double> to_unconstrained(std::span<const double> constrained) const;
    std::vector<double> from_unconstrained(std::span<const double> unconstrained) const;
    // d constrained_i / d unconstrained_i at the given unconstrained point.
    std::vector<double> jacobian_diagonal(std::span<const double> unconstrained) const;

private:
    std::vector<Transform> codes_;
    std::vector<std::string> names_;
};

struct OptimizerConfig {
    int max_evaluations = 20000;
    double function_tolerance = 1e-12;   // simplex value spread, relative to 1 + |f|
    double parameter_tolerance = 1e-7;   // simplex extent on the unconstrained scale
    int restarts = 2;
    double fd_step_scale = 1e-4;
    double initial_step = 0.1;
    int newton_steps = 3;  // polish of the simplex optimum; 0 disables
};

struct FitResult {
    std::vector<double> estimates;
    std::vector<double> unconstrained_estimates;
    double loglik = 0.0;
    std::vector<double> se;  // constrained scale; empty unless hessian_pd
    Eigen::MatrixXd hessian;  // unconstrained scale
    bool hessian_pd = false;
    bool converged = false;
    int n_evaluations = 0;
};

struct StandardErrors {
    std::vector<double> se;
    bool pd = false;
};

using Objective = std::function<double(std::span<const double>)>;

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Nelder-Mead minimization with dimension-adaptive coefficients. Non-finite objective
// values are treated as +infinity.
SimplexResult nelder_mead(const Objective& f, std::vector<double> start, double initial_step,
                          double ftol, double xtol, int max_evaluations);

// Central-difference Hessian; step_i = step_scale * max(1, |x_i|). Symmetrized.
// Throws EvaluationError if the objective is non-finite at a stencil point.
Eigen::MatrixXd fd_hessian(const Objective& objective, std::span<const double> point,
                           double step_scale);

// Central-difference gradient with the same steps as fd_hessian.
std::vector<double> fd_gradient(const Objective& objective, std::span<const double> point,
                                double step_scale);

// Cholesky of -H. On success: unconstrained SEs from the inverse diagonal, mapped to the
// constrained scale by the delta method. On failure pd is false and se is empty.
StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const ParamTransform& transform,
                               std::span<const double> unconstrained_estimates);

// Maximizes objective over the constrained space by simplex search on the unconstrained
// scale, restarting from the best point. The simplex optimum is refined by Newton steps
// on finite-difference derivatives while -H stays positive definite and the objective does
// not drop beyond function_tolerance. Hessian and standard errors are taken at the result.
FitResult maximize(const Objective& objective, std::span<const double> start,
                   const ParamTransform& transform, const OptimizerConfig& config);

}  // namespace fastlik

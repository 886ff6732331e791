#include "fastlik/epi_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "fastlik/error.hpp"
#include "fastlik/parallel.hpp"
#include "fastlik/rng.hpp"
#include "fastlik/summation.hpp"

namespace fastlik::epi {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kLogTwoPi = 1.8378770664093454836;

double expit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double log_expit(double u) {
    return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

double clamped_log(double p) { return std::log(std::clamp(p, kProbFloor, 1.0)); }

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

EpiParams EpiParams::from_array(std::span<const double> v) {
    if (v.size() != kSize) throw InvalidInput("epi parameter vector must have 7 entries");
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

std::array<double, EpiParams::kSize> EpiParams::to_array() const {
    return {mu_z, sigma_z, mu_a, sigma_a, rho, location, scale};
}

void EpiParams::validate() const {
    for (double v : to_array())
        if (!std::isfinite(v)) throw InvalidInput("epi parameters must be finite");
    if (!(sigma_z > 0.0)) throw InvalidInput("sigma_z must be positive");
    if (!(sigma_a > 0.0)) throw InvalidInput("sigma_a must be positive");
    if (!(std::abs(rho) < 1.0)) throw InvalidInput("rho must lie in (-1, 1)");
    if (!(scale > 0.0)) throw InvalidInput("scale must be positive");
}

void EpiDesign::validate() const {
    if (n_stage2 == 0 || n_stage2 > n_stage1)
        throw InvalidInput("design requires 0 < n_stage2 <= n_stage1");
    if (hermite_order < 1 || hermite_order > 64)
        throw InvalidInput("hermite_order must lie in 1..64");
}

Cohort simulate_cohort(const EpiDesign& design, const EpiParams& truth, std::uint64_t seed) {
    design.validate();
    truth.validate();
    Rng rng(seed);
    const std::size_t n = design.n_stage1;
    const double resid = std::sqrt(1.0 - truth.rho * truth.rho);

    std::vector<Stage2Record> all(n);
    for (auto& r : all) {
        const double zs = rng.normal();
        r.z = truth.mu_z + truth.sigma_z * zs;
        r.z_a = truth.mu_a + truth.sigma_a * (truth.rho * zs + resid * rng.normal());
        r.y = rng.bernoulli(expit((r.z - truth.location) / truth.scale)) ? 1 : 0;
    }

    // partial Fisher-Yates draw of the validation subsample
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<char> selected(n, 0);
    for (std::size_t k = 0; k < design.n_stage2; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(idx[k], idx[j]);
        selected[idx[k]] = 1;
    }

    Cohort c;
    c.seed = seed;
    c.stage2.reserve(design.n_stage2);
    c.stage1_only.reserve(n - design.n_stage2);
    for (std::size_t i = 0; i < n; ++i) {
        if (selected[i])
            c.stage2.push_back(all[i]);
        else
            c.stage1_only.push_back({all[i].y, all[i].z_a});
    }
    return c;
}

void write_cohort(std::ostream& os, const Cohort& cohort) {
    char buf[96];
    os << "# seed=" << cohort.seed << '\n' << "stage,y,z,z_a\n";
    for (const auto& r : cohort.stage2) {
        std::snprintf(buf, sizeof buf, "2,%d,%.17g,%.17g\n", r.y, r.z, r.z_a);
        os << buf;
    }
    for (const auto& r : cohort.stage1_only) {
        std::snprintf(buf, sizeof buf, "1,%d,,%.17g\n", r.y, r.z_a);
        os << buf;
    }
}

Cohort read_cohort(std::istream& is) {
    Cohort c;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw InvalidInput("cohort line " + std::to_string(lineno) + ": " + why);
    };
    auto parse_double = [&](std::string_view s) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
        return v;
    };
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# seed=", 0) == 0) c.seed = std::stoull(line.substr(7));
            continue;
        }
        if (!header) {
            if (line != "stage,y,z,z_a") fail("expected header 'stage,y,z,z_a'");
            header = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            f.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        f.push_back(rest);
        if (f.size() != 4) fail("expected 4 fields");
        const int y = f[1] == "1" ? 1 : (f[1] == "0" ? 0 : -1);
        if (y < 0) fail("y must be 0 or 1");
        if (f[0] == "1") {
            if (!f[2].empty()) fail("stage-1 records carry no z");
            c.stage1_only.push_back({y, parse_double(f[3])});
        } else if (f[0] == "2") {
            c.stage2.push_back({y, parse_double(f[2]), parse_double(f[3])});
        } else {
            fail("stage must be 1 or 2");
        }
    }
    if (!header) throw InvalidInput("cohort input has no header");
    return c;
}

ConditionalNormal conditional_z_given_za(const EpiParams& p, double z_a) {
    return {p.mu_z + p.rho * (p.sigma_z / p.sigma_a) * (z_a - p.mu_a),
            p.sigma_z * std::sqrt(1.0 - p.rho * p.rho)};
}

Stage1Evaluator::Stage1Evaluator(const EpiParams& params, const HermiteRule& rule)
    : p_(params), rule_(&rule) {
    const double one_minus = 1.0 - p_.rho * p_.rho;
    if (!(one_minus >= 1e-12)) throw EvaluationError("1 - rho^2 below 1e-12");
    cond_slope_ = p_.rho * p_.sigma_z / p_.sigma_a;
    cond_scale_ = std::numbers::sqrt2 * p_.sigma_z * std::sqrt(one_minus);
    log_norm_a_ = -0.5 * kLogTwoPi - std::log(p_.sigma_a);
}

double Stage1Evaluator::prob_case(double z_a) const {
    const double mean = p_.mu_z + cond_slope_ * (z_a - p_.mu_a);
    double sum = 0.0;
    for (int k = 0; k < rule_->order; ++k) {
        const double z = mean + cond_scale_ * rule_->abscissae[static_cast<std::size_t>(k)];
        sum += rule_->weights[static_cast<std::size_t>(k)] * expit((z - p_.location) / p_.scale);
    }
    return sum * std::numbers::inv_sqrtpi;
}

double Stage1Evaluator::operator()(int y, double z_a) const {
    const double mean = p_.mu_z + cond_slope_ * (z_a - p_.mu_a);
    // P(Y = 0 | z_a) uses expit(-u) directly rather than 1 - P(Y = 1 | z_a)
    const double sign = y == 1 ? 1.0 : -1.0;
    double sum = 0.0;
    for (int k = 0; k < rule_->order; ++k) {
        const double z = mean + cond_scale_ * rule_->abscissae[static_cast<std::size_t>(k)];
        sum += rule_->weights[static_cast<std::size_t>(k)] * expit(sign * (z - p_.location) / p_.scale);
    }
    const double prob = sum * std::numbers::inv_sqrtpi;
    const double da = (z_a - p_.mu_a) / p_.sigma_a;
    return log_norm_a_ - 0.5 * da * da + clamped_log(prob);
}

double stage1_term(int y, double z_a, const EpiParams& params, const HermiteRule& rule) {
    return Stage1Evaluator(params, rule)(y, z_a);
}

double stage2_term(int y, double z, double z_a, const EpiParams& p) {
    const double one_minus = 1.0 - p.rho * p.rho;
    if (!(one_minus >= 1e-12)) throw EvaluationError("1 - rho^2 below 1e-12");
    const double u = (z - p.location) / p.scale;
    const double bern = y == 1 ? log_expit(u) : log_expit(-u);
    const double dz = (z - p.mu_z) / p.sigma_z;
    const double da = (z_a - p.mu_a) / p.sigma_a;
    const double quad = (dz * dz - 2.0 * p.rho * dz * da + da * da) / one_minus;
    const double logdens = -kLogTwoPi - std::log(p.sigma_z) - std::log(p.sigma_a) -
                           0.5 * std::log(one_minus) - 0.5 * quad;
    return bern + logdens;
}

double default_spacing(const Cohort& cohort) {
    std::vector<double> za;
    za.reserve(cohort.stage1_only.size());
    for (const auto& r : cohort.stage1_only) za.push_back(r.z_a);
    const double sd = sample_sd(za);
    return sd > 0.0 ? sd / 8.0 : 0.125;
}

EpiLikContext build_context(const Cohort& cohort, std::optional<double> h,
                            const WindowSpec& window) {
    const double spacing = h.value_or(default_spacing(cohort));
    std::vector<double> all, y0, y1;
    all.reserve(cohort.stage1_only.size());
    for (const auto& r : cohort.stage1_only) {
        all.push_back(r.z_a);
        (r.y == 1 ? y1 : y0).push_back(r.z_a);
    }
    const NodeGrid grid = all.empty() ? NodeGrid::covering(0.0, spacing, spacing, window)
                                      : NodeGrid::for_samples(all, spacing, window);
    return EpiLikContext{grid, window, accumulate_weights(grid, window, y0, 0),
                         accumulate_weights(grid, window, y1, 1), cohort.stage2};
}

namespace {

double stage2_sum(const EpiParams& params, std::span<const Stage2Record> records) {
    double s = 0.0;
    for (const auto& r : records) s += stage2_term(r.y, r.z, r.z_a, params);
    return s;
}

}  // namespace

double loglik_direct_serial(const EpiParams& params, const Cohort& cohort,
                            const HermiteRule& rule, EvalCounts* counts) {
    params.validate();
    const Stage1Evaluator g(params, rule);
    CompensatedSum s;
    s += stage2_sum(params, cohort.stage2);
    for (const auto& r : cohort.stage1_only) s += g(r.y, r.z_a);
    if (counts) {
        const auto n1 = static_cast<std::int64_t>(cohort.stage1_only.size());
        counts->stage1_calls += n1;
        counts->logistic += static_cast<std::int64_t>(cohort.stage2.size()) + n1 * rule.order;
    }
    return s.value();
}

double loglik_direct(const EpiParams& params, const Cohort& cohort, const HermiteRule& rule,
                     EvalCounts* counts) {
    params.validate();
    const Stage1Evaluator g(params, rule);
    const auto& recs = cohort.stage1_only;
    const std::size_t nchunks = chunk_count(recs.size());
    std::vector<double> partial(nchunks, 0.0);
    std::vector<std::int64_t> calls(nchunks, 0);
    for_each_chunk(recs.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
        CompensatedSum s;
        std::int64_t k = 0;
        for (std::size_t i = begin; i < end; ++i, ++k) s += g(recs[i].y, recs[i].z_a);
        partial[c] = s.value();
        calls[c] = k;
    });
    CompensatedSum s;
    s += stage2_sum(params, cohort.stage2);
    std::int64_t n1 = 0;
    for (std::size_t c = 0; c < nchunks; ++c) {
        s += partial[c];
        n1 += calls[c];
    }
    if (counts) {
        counts->stage1_calls += n1;
        counts->logistic += static_cast<std::int64_t>(cohort.stage2.size()) + n1 * rule.order;
    }
    return s.value();
}

double loglik_interp(const EpiParams& params, const EpiLikContext& context,
                     const HermiteRule& rule, EvalCounts* counts) {
    params.validate();
    const Stage1Evaluator g(params, rule);
    std::int64_t calls = 0;
    double s = stage2_sum(params, context.stage2);
    s += weighted_sum(context.weights_y0, [&](double z_a) {
        ++calls;
        return g(0, z_a);
    });
    s += weighted_sum(context.weights_y1, [&](double z_a) {
        ++calls;
        return g(1, z_a);
    });
    if (counts) {
        counts->stage1_calls += calls;
        counts->logistic += static_cast<std::int64_t>(context.stage2.size()) + calls * rule.order;
    }
    return s;
}

ParamTransform epi_transform() {
    return ParamTransform(
        {Transform::identity, Transform::log, Transform::identity, Transform::log,
         Transform::fisher_z, Transform::identity, Transform::log},
        std::vector<std::string>(kParamNames.begin(), kParamNames.end()));
}

}  // namespace fastlik::epi

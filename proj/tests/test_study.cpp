#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "fastlik/study.hpp"

using namespace fastlik;
using namespace fastlik::study;

namespace {

SimRecord record_with(double b, double se_b, bool pd) {
    SimRecord r;
    r.estimates = epi::EpiParams::truth().to_array();
    r.estimates[epi::kScaleIndex] = b;
    r.hessian_pd = pd;
    if (pd) {
        std::array<double, 7> se{};
        se.fill(0.1);
        se[epi::kScaleIndex] = se_b;
        r.se = se;
    }
    return r;
}

StudyConfig small_config(int sims) {
    StudyConfig c;
    c.n_sims = sims;
    return c;
}

}  // namespace

TEST_CASE("wald significance") {
    CHECK(wald_significant(record_with(0.693, 0.2, true), 1.96));
    CHECK_FALSE(wald_significant(record_with(0.693, 0.5, true), 1.96));
    CHECK_FALSE(wald_significant(record_with(0.693, 0.01, false), 1.96));
    CHECK_FALSE(wald_significant(record_with(0.392, 0.2, true), 1.96));
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(StudyConfig{}.validate());
    auto c = StudyConfig{};
    c.n_sims = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = StudyConfig{};
    c.wald_critical = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = StudyConfig{};
    c.grid_h = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = StudyConfig{};
    c.design.n_stage2 = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("perturbed start is seeded and bounded") {
    const auto t = epi::EpiParams::truth();
    const auto a = perturbed_start(t, 0.1, 5), b = perturbed_start(t, 0.1, 5);
    CHECK(a.to_array() == b.to_array());
    CHECK(a.mu_z == 0.0);
    CHECK(std::abs(a.sigma_a / t.sigma_a - 1.0) <= 0.1);
    CHECK(std::abs(a.location / t.location - 1.0) <= 0.1);
    CHECK(perturbed_start(t, 0.0, 5).to_array() == t.to_array());
}

TEST_CASE("run_sim is a pure function of config and index") {
    const auto c = small_config(3);
    const SimRecord a = run_sim(c, 2), b = run_sim(c, 2);
    CHECK(a.seed == c.base_seed + 2);
    CHECK(a.estimates == b.estimates);
    CHECK(a.loglik == b.loglik);
    CHECK(a.se == b.se);
    CHECK(a.significant == b.significant);
    CHECK(a.error.empty());
    if (a.significant) CHECK(a.hessian_pd);
    CHECK(a.wald_slope == doctest::Approx(a.wald_scale).epsilon(1e-12));
}

TEST_CASE("direct and interpolated paths agree on one simulation") {
    auto c = small_config(1);
    const SimRecord interp = run_sim(c, 0);
    c.use_interpolation = false;
    const SimRecord direct = run_sim(c, 0);
    for (std::size_t i = 0; i < 7; ++i) {
        CAPTURE(i);
        CHECK(interp.estimates[i] == doctest::Approx(direct.estimates[i]).epsilon(1e-5).scale(1e-5));
    }
    CHECK(interp.significant == direct.significant);
}

TEST_CASE("degenerate design is recorded, not fatal") {
    auto c = small_config(2);
    c.truth.location = 40.0;  // prevalence effectively zero
    c.design = {5000, 50, 8};
    const PowerStudy s = run_power_study(c);
    REQUIRE(s.records.size() == 2);
    for (const auto& r : s.records) {
        CHECK((!r.hessian_pd || !r.converged || !r.error.empty() || !r.significant));
        CHECK_FALSE(r.significant);
    }
    CHECK(s.report.power == 0.0);
}

TEST_CASE("single-simulation power is zero or one") {
    const PowerStudy s = run_power_study(small_config(1));
    CHECK((s.report.power == 0.0 || s.report.power == 1.0));
    CHECK(s.records.size() == 1);
}

TEST_CASE("power study: report invariants, determinism and csv schema") {
    auto c = small_config(6);
    c.base_seed = 11;
    const PowerStudy a = run_power_study(c);
    c.workers = 1;
    const PowerStudy b = run_power_study(c);
    const auto& r = a.report;
    CHECK(r.n_sims == 6);
    CHECK(r.power * r.n_sims == doctest::Approx(r.n_significant));
    CHECK(r.n_significant <= r.n_sims - r.n_non_pd);
    int pd = 0;
    for (const auto& rec : a.records) pd += rec.hessian_pd;
    CHECK(r.n_non_pd + pd == r.n_sims);
    CHECK(r.estimate_summary.size() == 7);
    CHECK(r.estimate_summary[6].name == "scale");

    std::ostringstream ra, rb, pa, pb;
    write_records_csv(ra, a.records);
    write_records_csv(rb, b.records);
    CHECK(ra.str() == rb.str());
    write_report(pa, a.report, c);
    write_report(pb, b.report, c);
    const auto strip = [](std::string s) { return s.substr(0, s.find("total_wall_time_s")); };
    CHECK(strip(pa.str()) == strip(pb.str()));

    std::istringstream lines(ra.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "index,seed,mu_z,sigma_z,mu_a,sigma_a,rho,location,scale,se_mu_z,se_sigma_z,se_mu_a,se_sigma_a,"
          "se_rho,se_location,se_scale,loglik,hessian_pd,converged,wald_scale,wald_slope,significant");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 21);
    }
    CHECK(rows == 6);

    std::ostringstream t;
    write_timings_csv(t, a.records);
    CHECK(t.str().rfind("index,seed,wall_time_ms,n_evaluations\n", 0) == 0);
}

TEST_CASE("summaries skip missing standard errors") {
    std::vector<SimRecord> recs = {record_with(0.7, 0.2, true), record_with(0.5, 0.3, false)};
    recs[0].significant = true;
    const PowerReport r = summarize(recs, 1.0);
    CHECK(r.n_non_pd == 1);
    CHECK(r.power == 0.5);
    CHECK(r.estimate_summary[6].n_with_se == 1);
    CHECK(r.estimate_summary[6].estimate_mean == doctest::Approx(0.6));
    CHECK(r.estimate_summary[6].se_mean == doctest::Approx(0.2));
}

TEST_CASE("interpolation toggle preserves significance decisions") {
    auto c = small_config(100);
    c.base_seed = 500;
    const PowerStudy interp = run_power_study(c);
    c.use_interpolation = false;
    c.n_sims = 100;
    const PowerStudy direct = run_power_study(c);
    int agree = 0;
    for (std::size_t i = 0; i < 100; ++i) agree += interp.records[i].significant == direct.records[i].significant;
    CHECK(agree >= 98);
}

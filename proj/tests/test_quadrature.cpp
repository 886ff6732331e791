#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fastlik/quadrature.hpp"
#include "oracles.hpp"

using namespace fastlik;

namespace {

// Integral of t^k exp(-t^2) over the real line: 0 for odd k, (k-1)!! sqrt(pi) / 2^(k/2) for even k.
double hermite_moment(int k) {
    if (k % 2) return 0.0;
    double df = 1.0;
    for (int j = k - 1; j > 0; j -= 2) df *= j;
    return df * std::sqrt(std::numbers::pi) / std::pow(2.0, k / 2);
}

double rule_moment(const HermiteRule& r, int k) {
    double s = 0.0;
    for (int i = 0; i < r.order; ++i) s += r.weights[static_cast<std::size_t>(i)] * std::pow(r.abscissae[static_cast<std::size_t>(i)], k);
    return s;
}

}  // namespace

TEST_CASE("gauss_hermite closed forms") {
    const auto r1 = gauss_hermite(1);
    REQUIRE(r1.order == 1);
    CHECK(r1.abscissae[0] == 0.0);
    CHECK(r1.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));

    const auto r2 = gauss_hermite(2);
    CHECK(r2.abscissae[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r2.abscissae[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r2.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-15));
    CHECK(r2.weights[1] == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-15));
}

TEST_CASE("gauss_hermite order 8 reproduces the degree-14 moment") {
    const auto r = gauss_hermite(8);
    const double exact = 135135.0 * std::sqrt(std::numbers::pi) / 128.0;
    CHECK(hermite_moment(14) == doctest::Approx(exact).epsilon(1e-15));
    CHECK(std::abs(rule_moment(r, 14) - exact) <= 1e-10 * exact);
}

TEST_CASE("gauss_hermite structure and exactness for many orders") {
    for (int n : {1, 2, 3, 5, 8, 12, 16, 20, 32}) {
        CAPTURE(n);
        const auto r = gauss_hermite(n);
        REQUIRE(r.abscissae.size() == static_cast<std::size_t>(n));
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
            CHECK(r.abscissae[a] == doctest::Approx(-r.abscissae[b]).epsilon(1e-13).scale(1e-14));
            CHECK(r.weights[a] == doctest::Approx(r.weights[b]).epsilon(1e-12));
            CHECK(r.weights[a] > 0.0);
            if (i > 0) CHECK(r.abscissae[a] > r.abscissae[a - 1]);
            wsum += r.weights[a];
        }
        CHECK(std::abs(wsum - std::sqrt(std::numbers::pi)) <= 1e-12);
        const int max_degree = n <= 12 ? 2 * n - 1 : 23;
        for (int k = 0; k <= max_degree; ++k) {
            const double exact = hermite_moment(k);
            if (exact == 0.0)
                CHECK(std::abs(rule_moment(r, k)) <= 1e-10 * hermite_moment(k + 1));
            else
                CHECK(std::abs(rule_moment(r, k) - exact) <= 1e-10 * exact);
        }
    }
}

TEST_CASE("gauss_hermite supports 64 and rejects unsupported orders") {
    const auto r = gauss_hermite(64);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(std::abs(wsum - std::sqrt(std::numbers::pi)) <= 1e-12);
    CHECK_THROWS_AS(gauss_hermite(0), InvalidInput);
    CHECK_THROWS_AS(gauss_hermite(65), InvalidInput);
}

TEST_CASE("expect_under_normal on polynomials") {
    const auto r = gauss_hermite(8);
    for (double mean : {-3.0, 0.0, 2.5})
        for (double sd : {0.1, 1.0, 4.0}) {
            CHECK(expect_under_normal(r, mean, sd, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(std::abs(expect_under_normal(r, mean, sd, [](double z) { return z; }) - mean) <= 1e-12 * (1.0 + std::abs(mean)));
            // E[Z^4] = mean^4 + 6 mean^2 sd^2 + 3 sd^4
            const double m4 = std::pow(mean, 4) + 6 * mean * mean * sd * sd + 3 * std::pow(sd, 4);
            CHECK(expect_under_normal(r, mean, sd, [](double z) { return z * z * z * z; }) == doctest::Approx(m4).epsilon(1e-12));
        }
    CHECK(std::abs(expect_under_normal(r, 0.0, 1.0, [](double z) { return z * z; }) - 1.0) <= 1e-12);
}

TEST_CASE("expect_under_normal of the logistic response matches a dense trapezoid") {
    const double sd = std::sqrt(0.91);
    auto f = [](double z) { return oracle::expit((z - 4.733) / 0.693); };
    for (double za : {-5.0, 0.0, 5.0}) {
        CAPTURE(za);
        const double mean = 0.09 * za;
        const double ref = oracle::normal_expectation(f, mean, sd);
        CHECK(oracle::rel_diff(expect_under_normal(gauss_hermite(16), mean, sd, f), ref) <= 1e-6);
        CHECK(oracle::rel_diff(expect_under_normal(gauss_hermite(64), mean, sd, f), ref) <= 1e-12);
        // 8 points resolve this tail probability to about 1.6e-5 relative
        CHECK(oracle::rel_diff(expect_under_normal(gauss_hermite(8), mean, sd, f), ref) <= 2e-5);
    }
}

TEST_CASE("expect_under_normal errors") {
    const auto r = gauss_hermite(4);
    CHECK_THROWS_AS(expect_under_normal(r, 0.0, 0.0, [](double) { return 1.0; }), InvalidInput);
    CHECK_THROWS_AS(expect_under_normal(r, 0.0, -1.0, [](double) { return 1.0; }), InvalidInput);
    CHECK_THROWS_AS(expect_under_normal(r, 0.0, 1.0, [](double z) { return z > 0 ? INFINITY : 0.0; }), EvaluationError);
}

// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rmt/rng.hpp"
#include "rmt/stats.hpp"

using namespace rmt;

TEST_CASE("summary moments against hand values", "[stats]") {
    std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
    auto s = summarize(xs);
    REQUIRE(s.reps == 8);
    REQUIRE(s.mean == Catch::Approx(5.0));
    REQUIRE(s.variance == Catch::Approx(32.0 / 7.0));  // unbiased
    // jackknife SE of the mean equals sd/sqrt(n) exactly
    REQUIRE(s.se_mean == Catch::Approx(std::sqrt(32.0 / 7.0 / 8.0)).epsilon(1e-12));
    REQUIRE_THROWS_AS(summarize(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("kolmogorov tail at classical critical points", "[stats]") {
    REQUIRE(kolmogorov_q(1.3581) == Catch::Approx(0.05).margin(5e-4));
    REQUIRE(kolmogorov_q(1.6276) == Catch::Approx(0.01).margin(2e-4));
    REQUIRE(kolmogorov_q(0.0) == 1.0);
    REQUIRE(kolmogorov_q(10.0) < 1e-8);
}

TEST_CASE("ks normality calibration", "[stats]") {
    splitmix64 g(2024);
    std::vector<double> normal(2000), expo(2000);
    for (auto& x : normal) x = 1.5 + 0.7 * g.gaussian();
    for (auto& x : expo) x = -std::log(g.uniform_pos());
    REQUIRE(ks_normal_fitted_p(normal) > 0.05);
    REQUIRE(ks_normal_fitted_p(expo) < 1e-6);
}

TEST_CASE("two-sample ks calibration", "[stats]") {
    splitmix64 g(7);
    std::vector<double> a(1500), b(1500), c(1500);
    for (auto& x : a) x = g.gaussian();
    for (auto& x : b) x = g.gaussian();
    for (auto& x : c) x = 0.25 + g.gaussian();
    REQUIRE(ks_two_sample_p(a, b) > 0.01);
    REQUIRE(ks_two_sample_p(a, c) < 0.01);
    REQUIRE(ks_two_sample_p(a, a) == Catch::Approx(1.0));
}

TEST_CASE("gaussianity gate calibration", "[stats]") {
    splitmix64 g(11);
    std::vector<double> normal(1200), expo(1200);
    for (auto& x : normal) x = g.gaussian();
    for (auto& x : expo) x = -std::log(g.uniform_pos());

    auto pass = gaussianity_report(normal);
    REQUIRE(pass.pass);
    REQUIRE(pass.skew_ok);
    REQUIRE(pass.kurt_ok);
    REQUIRE(pass.ks_ok);

    auto fail = gaussianity_report(expo);
    REQUIRE_FALSE(fail.pass);
    REQUIRE_FALSE(fail.skew_ok);  // exponential skewness is 2, far beyond 3 SE
    REQUIRE_THROWS_AS(gaussianity_report(std::vector<double>(100, 0.0)), std::invalid_argument);
}

TEST_CASE("jackknife standard errors scale like 1/sqrt(n)", "[stats]") {
    splitmix64 g(5);
    std::vector<double> small(500), large(2000);
    for (auto& x : small) x = g.gaussian();
    for (auto& x : large) x = g.gaussian();
    auto s = summarize(small);
    auto l = summarize(large);
    REQUIRE(l.se_mean < s.se_mean);
    REQUIRE(l.se_skewness < s.se_skewness);
    // skewness SE of a normal sample is about sqrt(6/n)
    REQUIRE(l.se_skewness == Catch::Approx(std::sqrt(6.0 / 2000.0)).epsilon(0.35));
}

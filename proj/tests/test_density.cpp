// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "rmt/density.hpp"
#include "rmt/ensembles.hpp"

using namespace rmt;

namespace {

// Narayana-number moments of the MP law with unit variance atoms: the k-th
// moment is sum_r C(k,r) C(k-1,r) y^r / (r+1).
double mp_moment(int k, double y) {
    auto binom = [](int a, int b) {
        double r = 1.0;
        for (int i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
        return r;
    };
    double m = 0.0;
    for (int r = 0; r < k; ++r) m += binom(k, r) * binom(k - 1, r) * std::pow(y, r) / (r + 1);
    return m;
}

}  // namespace

TEST_CASE("MP density: edges, mass, moments", "[density]") {
    auto h = spectral_weights::point_mass();
    double y = 0.5;
    grid_density gd = invert_density(ratio::limit(y), h);

    double lo = (1.0 - std::sqrt(y)) * (1.0 - std::sqrt(y));
    double hi = (1.0 + std::sqrt(y)) * (1.0 + std::sqrt(y));
    REQUIRE(std::abs(gd.support_lo - lo) < 2e-4);
    REQUIRE(std::abs(gd.support_hi - hi) < 2e-4);
    REQUIRE(gd.atom_at_zero == 0.0);
    REQUIRE(std::abs(gd.total_mass() - 1.0) < 1e-4);
    REQUIRE(std::abs(gd.integrate([](double x) { return x; }) - mp_moment(1, y)) < 1e-3);
    REQUIRE(std::abs(gd.integrate([](double x) { return x * x; }) - mp_moment(2, y)) < 1e-3);
    REQUIRE(mp_moment(1, y) == 1.0);
    REQUIRE(mp_moment(2, y) == 1.5);

    // nonnegative everywhere, negligible outside the located support
    for (std::size_t i = 0; i < gd.xs.size(); ++i) {
        REQUIRE(gd.density[i] >= 0.0);
        if (gd.xs[i] < gd.support_lo || gd.xs[i] > gd.support_hi)
            REQUIRE(gd.density[i] <= 1e-6);
    }
}

TEST_CASE("MP density with an atom when y > 1", "[density]") {
    auto h = spectral_weights::point_mass();
    grid_density gd = invert_density(ratio::limit(2.0), h, 1024);
    REQUIRE(gd.atom_at_zero == Catch::Approx(0.5).epsilon(1e-12));
    double lo = (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0);
    double hi = (std::sqrt(2.0) + 1.0) * (std::sqrt(2.0) + 1.0);
    REQUIRE(std::abs(gd.support_lo - lo) < 5e-4);
    REQUIRE(std::abs(gd.support_hi - hi) < 5e-4);
    REQUIRE(std::abs(gd.total_mass() - 1.0) < 1e-4);
}

TEST_CASE("two-level population spectrum keeps unit mass", "[density]") {
    auto h = spectral_weights({1.0, 2.0}, {0.5, 0.5});
    grid_density gd = invert_density(ratio::limit(0.3), h, 1024);
    REQUIRE(std::abs(gd.total_mass() - 1.0) < 1e-4);
    // population mean is preserved by the first moment of the LSD
    REQUIRE(std::abs(gd.integrate([](double x) { return x; }) - h.mean()) < 2e-3);
}

TEST_CASE("inversion validates its inputs", "[density]") {
    auto h = spectral_weights::point_mass();
    REQUIRE_THROWS_AS(invert_density(ratio::limit(0.5), h, 100), std::invalid_argument);
    REQUIRE_THROWS_AS(invert_density(ratio::limit(0.5), h, 512, {1e-3}), std::invalid_argument);
    REQUIRE_THROWS_AS(invert_density(ratio::limit(0.5), h, 512, {1e-3, 1e-2}), std::invalid_argument);
    REQUIRE_THROWS_AS(invert_density(ratio::limit(0.5), h, 512, {1e-3, 1e-7}), std::invalid_argument);
    REQUIRE_THROWS_AS(invert_density(ratio::limit(0.0), h), std::invalid_argument);
}

TEST_CASE("density matches a realized spectrum", "[density]") {
    auto h = spectral_weights::point_mass();
    auto shape = population_shape::identity(200);
    auto sample = make_sample<double>(200, 400, entry_law::real_gaussian(), shape, 20240613);
    grid_density gd = invert_density(ratio::limit(0.5), h, 1024);

    // one-sample Kolmogorov distance against the model CDF
    std::vector<double> eigs = sample.eigs_B;
    std::sort(eigs.begin(), eigs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        double u = gd.cdf(eigs[i]);
        d = std::max(d, std::max((i + 1.0) / eigs.size() - u, u - static_cast<double>(i) / eigs.size()));
    }
    REQUIRE(d < 0.05);
}

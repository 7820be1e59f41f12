// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "rmt/contour.hpp"
#include "rmt/stieltjes.hpp"

using namespace rmt;

TEST_CASE("residue of a simple pole inside the rectangle", "[contour]") {
    cdouble c(1.2, 0.0);
    auto I = contour_integrate([&](cdouble z) { return 1.0 / (z - c); }, {0.5, 2.0});
    REQUIRE(std::abs(I - 1.0) < 1e-10);
}

TEST_CASE("analytic integrands vanish", "[contour]") {
    auto I = contour_integrate([](cdouble z) { return z * z * z - 2.0 * z + 1.0; }, {0.0, 3.0});
    REQUIRE(std::abs(I) < 1e-10);
    // pole outside the rectangle contributes nothing
    auto J = contour_integrate([](cdouble z) { return 1.0 / (z - cdouble(10.0, 0.0)); }, {0.5, 2.0});
    REQUIRE(std::abs(J) < 1e-10);
}

TEST_CASE("second moment of the MP law by contour", "[contour]") {
    auto h = spectral_weights::point_mass();
    double y = 0.5;
    auto I = contour_integrate(
        [&](cdouble z) { return -z * z * solve_companion(z, ratio::limit(y), h, 1e-13).m; },
        support_bounds(y, h), 0.5, 1024, 1e-13);
    REQUIRE(std::abs(I.real() - (1.0 + y)) < 1e-11);
    REQUIRE(std::abs(I.imag()) < 1e-11);
}

TEST_CASE("origin exclusion", "[contour]") {
    // support near zero: the log-safe contour clamps its left margin
    auto I = contour_integrate([](cdouble z) { return 1.0 / (z - cdouble(1.0, 0.0)); }, {0.2, 2.0},
                               0.5, 1024, 1e-10, true);
    REQUIRE(std::abs(I - 1.0) < 1e-9);
    REQUIRE_THROWS_AS(contour_integrate([](cdouble z) { return z; }, {-0.1, 2.0}, 0.5, 1024, 1e-9, true),
                      origin_inside);
    REQUIRE_THROWS_AS(contour_integrate([](cdouble z) { return z; }, {2.0, 1.0}),
                      std::invalid_argument);
}

TEST_CASE("node budget exhaustion reports nonconvergence", "[contour]") {
    // essential singularity on the contour path defeats the quadrature
    REQUIRE_THROWS_AS(contour_integrate([](cdouble z) { return std::exp(1.0 / (z - cdouble(0.9, 0.5))); },
                                        {0.0, 2.0}, 0.5, 64, 1e-14, false, 4096),
                      non_convergence);
}

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace rmt {

// Numerical failures thrown by the transform solvers and quadrature.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iteration budget exhausted; carries the best residual reached.
struct non_convergence : numeric_error {
    double best_residual;
    explicit non_convergence(const std::string& what, double residual)
        : numeric_error(what + " (best residual " + format_residual(residual) + ")"),
          best_residual(residual) {}

  private:
    static std::string format_residual(double r) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", r);
        return buf;
    }
};

// Real evaluation point on or too close to the spectrum support.
struct invalid_point : numeric_error {
    using numeric_error::numeric_error;
};

// A denominator fell below the safe threshold (evaluation too close to
// a support edge or a zero of the dispersion derivative).
struct near_singular : numeric_error {
    using numeric_error::numeric_error;
};

// Could not select a Stieltjes branch (real point at a support edge, or an
// inner transform evaluation crossed onto the wrong sheet).
struct branch_error : numeric_error {
    using numeric_error::numeric_error;
};

// Nonpositive eigenvalue (or otherwise singular matrix) where a positive
// definite input is required.
struct singular_input : numeric_error {
    using numeric_error::numeric_error;
};

// Contour would enclose the origin while the integrand has a branch cut there.
struct origin_inside : numeric_error {
    using numeric_error::numeric_error;
};

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct not_hermitian : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Results file failed schema/version/integrity checks.
struct schema_mismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rmt

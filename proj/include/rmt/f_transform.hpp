// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/ratio.hpp"
#include "rmt/spectral_weights.hpp"
#include "rmt/stieltjes.hpp"

namespace rmt {

// Plain Stieltjes transform of the Marchenko-Pastur law at w (either
// half-plane, or real w off the support), recovered from the closed-form
// companion value.
inline cdouble mp_stieltjes(cdouble w, double y) {
    cdouble mu = mp_quadratic(w, y);
    return (mu + (1.0 - y) / w) / y;
}

inline cdouble mp_stieltjes_derivative(cdouble w, double y) {
    cdouble mu = mp_quadratic(w, y);
    cdouble d1 = 1.0 + mu;
    cdouble denom = 1.0 / (mu * mu) - y / (d1 * d1);
    if (std::abs(denom) <= 1e-14) throw near_singular("mp_stieltjes_derivative: w too close to support");
    cdouble mup = 1.0 / denom;
    return (mup - (1.0 - y) / (w * w)) / y;
}

// Support of the continuous part of the F-matrix LSD:
// ((1-h)^2/(1-y2)^2, (1+h)^2/(1-y2)^2) with h = sqrt(y1 + y2 - y1*y2).
inline std::pair<double, double> f_support(double y1, double y2) {
    if (!(y1 > 0.0)) throw std::invalid_argument("f_support: y1 must be > 0");
    if (!(y2 > 0.0 && y2 < 1.0)) throw std::invalid_argument("f_support: y2 must be in (0, 1)");
    const double h = std::sqrt(y1 + y2 - y1 * y2);
    const double d = (1.0 - y2) * (1.0 - y2);
    return {(1.0 - h) * (1.0 - h) / d, (1.0 + h) * (1.0 + h) / d};
}

namespace detail {

// Generic solver for equations of the form z = -1/m + y * K(m) where K is an
// analytic kernel with derivative K'. The same upper-half-plane invariance as
// the covariance dispersion map applies: Im K(m) < 0 for Im m > 0, so the
// fixed-point step -1/(z - y K(m)) stays in C+ whenever Im z > 0.
template <typename Kernel, typename KernelPrime>
bool solve_inverse_kernel(cdouble z, double y, Kernel&& K, KernelPrime&& Kp, cdouble& m,
                          double tol, int max_iter, double& best_residual) {
    cdouble best = m;
    best_residual = std::numeric_limits<double>::infinity();
    const bool upper = z.imag() > 0.0;
    auto residual = [&](cdouble mm) -> cdouble { return -1.0 / mm + y * K(mm) - z; };
    double r = std::abs(residual(m));
    for (int it = 0; it < max_iter; ++it) {
        if (!std::isfinite(r)) {
            m = -1.0 / z;
            r = std::abs(residual(m));
        }
        if (r < best_residual) {
            best_residual = r;
            best = m;
        }
        if (r <= tol) return true;

        cdouble deriv = 1.0 / (m * m) + y * Kp(m);
        bool newton_ok = false;
        if (std::abs(deriv) > 1e-300) {
            cdouble cand = m - residual(m) / deriv;
            // same growth cap as the covariance solver: the residual flattens
            // at infinity, so unbounded steps can masquerade as progress
            bool bounded = std::abs(cand) <= 30.0 * (1.0 + std::abs(m));
            if (bounded && (!upper || cand.imag() > 0.0)) {
                double rc = std::abs(residual(cand));
                if (std::isfinite(rc) && rc < r) {
                    m = cand;
                    r = rc;
                    newton_ok = true;
                }
            }
        }
        if (!newton_ok) {
            cdouble cand = 0.5 * (m - 1.0 / (z - y * K(m)));
            double rc = std::abs(residual(cand));
            if (!std::isfinite(rc)) {
                cand = -1.0 / (z - y * K(m));
                rc = std::abs(residual(cand));
            }
            m = cand;
            r = rc;
        }
    }
    m = best;
    return best_residual <= tol;
}

}  // namespace detail

// Companion transform of the F-matrix LSD: solves
//   z = -1/m_under + y1 * int (t + m_under)^-1 dF_{y2}(t)
// where F_{y2} is the Marchenko-Pastur law, so the inner integral is the MP
// Stieltjes transform evaluated at -m_under. Real z off the support is
// handled by continuation from the upper half-plane.
inline cdouble f_lsd_transform(cdouble z, double y1, double y2, double tol = 1e-12,
                               const cdouble* guess = nullptr) {
    if (y1 < 0.0) throw std::invalid_argument("f_lsd_transform: y1 must be >= 0");
    if (!(y2 > 0.0 && y2 < 1.0)) throw std::invalid_argument("f_lsd_transform: y2 must be in (0, 1)");
    if (z == 0.0) throw invalid_point("f_lsd_transform: z = 0");
    if (y1 == 0.0) return -1.0 / z;

    if (z.imag() < 0.0) {
        const cdouble cg = guess ? std::conj(*guess) : cdouble();
        return std::conj(f_lsd_transform(std::conj(z), y1, y2, tol, guess ? &cg : nullptr));
    }

    // the inner MP evaluation sits at -m_under; for Im m_under > 0 that is the
    // lower half-plane, where mp_stieltjes continues by conjugation
    auto K = [&](cdouble m) { return mp_stieltjes(-m, y2); };
    auto Kp = [&](cdouble m) { return -mp_stieltjes_derivative(-m, y2); };

    if (z.imag() == 0.0) {
        auto [lo, hi] = f_support(y1, y2);
        double margin = 1e-3 * (hi - lo);
        if (z.real() > lo - margin && z.real() < hi + margin)
            throw invalid_point("f_lsd_transform: real z on or too near the support");
        // descend to the axis from above, then polish at the real point
        cdouble m = guess ? *guess : -1.0 / cdouble(z.real(), 1.0);
        double best = 0.0;
        for (double v : {1.0, 1e-1, 1e-2, 1e-4, 1e-6, 1e-9})
            detail::solve_inverse_kernel(cdouble(z.real(), v), y1, K, Kp, m, tol, 200, best);
        bool ok = detail::solve_inverse_kernel(z, y1, K, Kp, m, tol, 100, best);
        if (!ok) throw non_convergence("f_lsd_transform: real-axis polish failed", best);
        return m;
    }

    cdouble m = guess ? *guess : -1.0 / z;
    double best = 0.0;
    bool ok = detail::solve_inverse_kernel(z, y1, K, Kp, m, tol, 500, best);
    if (!ok) {
        // continuation from high above the axis
        m = -1.0 / cdouble(z.real(), std::max(z.imag(), 2.0));
        for (double v : {2.0, 1.0, 0.5, 0.2})
            if (v > z.imag())
                detail::solve_inverse_kernel(cdouble(z.real(), v), y1, K, Kp, m, tol, 300, best);
        ok = detail::solve_inverse_kernel(z, y1, K, Kp, m, tol, 500, best);
        if (!ok) throw non_convergence("f_lsd_transform: iteration budget exhausted", best);
    }
    if (m.imag() <= 0.0)
        throw branch_error("f_lsd_transform: converged off the upper half-plane");
    return m;
}

// Plain Stieltjes transform of the F-matrix LSD via the companion relation at
// ratio y1.
inline cdouble f_lsd_stieltjes(cdouble z, double y1, double y2, double tol = 1e-12,
                               const cdouble* guess = nullptr) {
    cdouble mu = f_lsd_transform(z, y1, y2, tol, guess);
    return (mu + (1.0 - y1) / z) / y1;
}

// Conditional companion transform driven by the realized spectrum of S_y:
// solves z = -1/m_under + y * (1/p) sum_i (t_i + m_under)^-1 over the observed
// eigenvalues t_i. Equivalent to the covariance dispersion equation with
// population measure F^{S_y^{-1}} (atoms 1/t_i), which is how it is solved.
inline cdouble empirical_conditional_transform(cdouble z, const ratio& r,
                                               const std::vector<double>& sy_eigs,
                                               double tol = 1e-12) {
    if (sy_eigs.empty()) throw singular_input("empirical_conditional_transform: empty spectrum");
    std::vector<double> recip(sy_eigs.size());
    for (std::size_t i = 0; i < sy_eigs.size(); ++i) {
        if (!(sy_eigs[i] > 0.0))
            throw singular_input("empirical_conditional_transform: nonpositive eigenvalue");
        recip[i] = 1.0 / sy_eigs[i];
    }
    spectral_weights h = spectral_weights::from_eigenvalues(recip);
    return solve_companion(z, r, h, tol).m_under;
}

}  // namespace rmt

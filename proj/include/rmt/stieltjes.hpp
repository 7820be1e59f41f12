// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <utility>

#include "rmt/complex_util.hpp"
#include "rmt/errors.hpp"
#include "rmt/ratio.hpp"
#include "rmt/spectral_weights.hpp"

namespace rmt {

// A solved companion transform value at z: m_under together with the plain
// Stieltjes transform m recovered through m_under = -(1-y)/z + y*m, the ratio
// and distribution it was solved against, and the dispersion-equation
// residual |z - (-1/m_under + y*int t/(1+t*m_under) dH)|.
struct companion_value {
    cdouble z;
    cdouble m_under;
    cdouble m;
    double y;
    double residual;
};

// Conservative bracket for the continuous support of the sample-covariance
// LSD with population spectrum h and ratio y. Exact for point-mass h; an
// enclosing interval otherwise (the shaped spectrum sits within [t_min, t_max]
// multiples of the white edges (1 -+ sqrt y)^2, the lower one applying to the
// nonzero part when y > 1).
inline std::pair<double, double> support_bounds(double y, const spectral_weights& h) {
    double sq = std::sqrt(y);
    double hi = h.max_atom() * (1.0 + sq) * (1.0 + sq);
    double lo = h.min_atom() * (1.0 - sq) * (1.0 - sq);
    return {lo, hi};
}

namespace detail {

struct dispersion {
    cdouble z;
    double y;
    const spectral_weights* h;

    cdouble integral_t(cdouble m) const {
        return h->integrate([&](double t) { return t / (1.0 + t * m); });
    }
    cdouble integral_t2(cdouble m) const {
        return h->integrate([&](double t) {
            cdouble d = 1.0 + t * m;
            return t * t / (d * d);
        });
    }
    cdouble residual(cdouble m) const { return -1.0 / m + y * integral_t(m) - z; }
    cdouble derivative(cdouble m) const { return 1.0 / (m * m) - y * integral_t2(m); }
    cdouble fixed_point(cdouble m) const { return -1.0 / (z - y * integral_t(m)); }
};

// Damped fixed-point iteration with Newton acceleration. The fixed-point map
// keeps iterates in the closed upper half-plane whenever Im z > 0, so Newton
// steps are accepted only when they stay there and reduce the residual.
inline bool solve_dispersion(const dispersion& eq, cdouble& m, double tol, int max_iter,
                             double& best_residual) {
    cdouble best = m;
    best_residual = std::numeric_limits<double>::infinity();
    const bool upper = eq.z.imag() > 0.0;
    double r = std::abs(eq.residual(m));
    for (int it = 0; it < max_iter; ++it) {
        if (!std::isfinite(r)) {
            m = -1.0 / eq.z;
            r = std::abs(eq.residual(m));
        }
        if (r < best_residual) {
            best_residual = r;
            best = m;
        }
        if (r <= tol) return true;

        cdouble fp = eq.derivative(m);
        bool newton_ok = false;
        if (std::abs(fp) > 1e-300) {
            cdouble cand = m - eq.residual(m) / fp;
            // the residual flattens towards |z| as |m| grows, so an unbounded
            // Newton step can "improve" it while escaping to infinity; cap the
            // per-step growth to keep the iteration on the attracting root
            bool bounded = std::abs(cand) <= 30.0 * (1.0 + std::abs(m));
            if (bounded && (!upper || cand.imag() > 0.0)) {
                double rc = std::abs(eq.residual(cand));
                if (std::isfinite(rc) && rc < r) {
                    m = cand;
                    r = rc;
                    newton_ok = true;
                }
            }
        }
        if (!newton_ok) {
            cdouble cand = 0.5 * (m + eq.fixed_point(m));
            double rc = std::abs(eq.residual(cand));
            if (!std::isfinite(rc)) cand = eq.fixed_point(m), rc = std::abs(eq.residual(cand));
            m = cand;
            r = rc;
        }
    }
    m = best;
    return best_residual <= tol;
}

inline void check_real_point(double x, double y, const spectral_weights& h) {
    auto [lo, hi] = support_bounds(y, h);
    double width = std::max({hi - lo, 0.1 * hi, 1e-6});
    double margin = 1e-3 * width;
    bool off_support = (x <= lo - margin) || (x >= hi + margin);
    if (!off_support || std::abs(x) < margin)
        throw invalid_point("solve_companion: real z at " + std::to_string(x) +
                            " is on or too near the support");
}

inline cdouble stieltjes_of_measure(const spectral_weights& h, cdouble z) {
    return h.integrate([&](double t) { return 1.0 / (t - z); });
}

}  // namespace detail

// Solves the dispersion equation z = -1/m_under + y * int t/(1+t*m_under) dH(t)
// for the companion transform in the upper half-plane (or its real-axis
// continuation off the support). `guess` optionally warm-starts continuation
// sweeps. y = 0 is the degenerate limit m_under = -1/z.
inline companion_value solve_companion(cdouble z, const ratio& r, const spectral_weights& h,
                                       double tol = 1e-12, const cdouble* guess = nullptr) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_companion: tol must be > 0");
    const double y = r.value();

    if (z.imag() < 0.0) {
        const cdouble cg = guess ? std::conj(*guess) : cdouble();
        companion_value v = solve_companion(std::conj(z), r, h, tol, guess ? &cg : nullptr);
        return {z, std::conj(v.m_under), std::conj(v.m), v.y, v.residual};
    }

    if (y == 0.0) {
        if (z == 0.0) throw invalid_point("solve_companion: z = 0");
        cdouble mu = -1.0 / z;
        // at y = 0 the sample spectrum collapses onto the population spectrum
        return {z, mu, detail::stieltjes_of_measure(h, z), y, 0.0};
    }

    if (z.imag() == 0.0) detail::check_real_point(z.real(), y, h);

    detail::dispersion eq{z, y, &h};
    cdouble m;
    if (guess) {
        m = *guess;
    } else if (z.imag() == 0.0) {
        // On the real axis both roots of the dispersion relation are real and
        // only one continues the upper half-plane branch: probe just above the
        // axis first, then polish on the axis from that side.
        const double delta = 1e-9 * std::max(1.0, std::abs(z.real()));
        companion_value probe = solve_companion(cdouble(z.real(), delta), r, h, 1e-10);
        m = cdouble(probe.m_under.real(), 0.0);
    } else {
        m = -1.0 / z;
    }
    double best = 0.0;
    bool ok = detail::solve_dispersion(eq, m, tol, 500, best);

    if (!ok) {
        // continuation from small y, where -1/z is an excellent start
        m = -1.0 / z;
        for (int k = 1; k <= 8; ++k) {
            detail::dispersion stage{z, y * k / 8.0, &h};
            double stage_best = 0.0;
            detail::solve_dispersion(stage, m, tol, 500, stage_best);
        }
        ok = detail::solve_dispersion(eq, m, tol, 500, best);
        if (!ok) throw non_convergence("solve_companion: iteration budget exhausted", best);
    }

    if (z.imag() > 0.0 && m.imag() <= 0.0)
        throw branch_error("solve_companion: converged off the upper half-plane");

    cdouble ms = (m + (1.0 - y) / z) / y;
    return {z, m, ms, y, best};
}

inline companion_value solve_companion(cdouble z, double y, const spectral_weights& h,
                                       double tol = 1e-12) {
    return solve_companion(z, ratio::limit(y), h, tol);
}

// Closed-form companion transform of the Marchenko-Pastur law (H a point mass
// at 1): the dispersion equation collapses to z*m^2 + (z+1-y)*m + 1 = 0; the
// Stieltjes branch has Im m > 0 for Im z > 0 and continues through the real
// axis off [(1-sqrt y)^2, (1+sqrt y)^2].
inline cdouble mp_quadratic(cdouble z, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("mp_quadratic: y must be > 0");
    if (z == 0.0) {
        if (y > 1.0) return cdouble(1.0 / (y - 1.0), 0.0);
        throw invalid_point("mp_quadratic: z = 0");
    }

    const cdouble b = z + (1.0 - y);
    const cdouble disc = b * b - 4.0 * z;
    cdouble s = std::sqrt(disc);
    if (std::real(std::conj(b) * s) < 0.0) s = -s;  // avoid cancellation in b + s
    const cdouble q = -0.5 * (b + s);
    const cdouble r1 = q / z;
    const cdouble r2 = 1.0 / q;

    if (z.imag() > 0.0) return r1.imag() > 0.0 ? r1 : r2;
    if (z.imag() < 0.0) return r1.imag() < 0.0 ? r1 : r2;

    // real z: continue from just above the axis and take the nearest real root
    const double sq = std::sqrt(y);
    const double lo = (1.0 - sq) * (1.0 - sq), hi = (1.0 + sq) * (1.0 + sq);
    if (z.real() > lo && z.real() < hi)
        throw invalid_point("mp_quadratic: real z inside the support");
    const double delta = 1e-8;
    const cdouble probe = mp_quadratic(cdouble(z.real(), delta), y);
    if (std::abs(r1 - r2) < 100.0 * delta)
        throw branch_error("mp_quadratic: real z at a support edge, branch ambiguous");
    return std::abs(r1 - probe) < std::abs(r2 - probe) ? r1 : r2;
}

// d m_under / dz from the differentiated dispersion equation.
inline cdouble companion_derivative(const companion_value& cv, const spectral_weights& h) {
    if (cv.y == 0.0) return cv.m_under * cv.m_under;  // m_under = -1/z
    detail::dispersion eq{cv.z, cv.y, &h};
    cdouble denom = eq.derivative(cv.m_under);
    if (std::abs(denom) <= 1e-14)
        throw near_singular("companion_derivative: dispersion derivative vanishes (z too close to support)");
    return 1.0 / denom;
}

// g(z) = 1 + z*m_under(z); its derivative is m_under + z*m_under'.
inline cdouble g_factor(const companion_value& cv) { return 1.0 + cv.z * cv.m_under; }

inline cdouble g_factor_derivative(const companion_value& cv, const spectral_weights& h) {
    return cv.m_under + cv.z * companion_derivative(cv, h);
}

// Finite-n Stieltjes transforms (m_n^0, m_{n-1}^0): the dispersion equation
// solved at ratios p/n and p/(n-1), with m recovered through the companion
// relation at each ratio.
inline std::pair<cdouble, cdouble> finite_n_pair(cdouble z, int p, int n,
                                                 const spectral_weights& h_p,
                                                 double tol = 1e-12) {
    if (n < 2) throw std::invalid_argument("finite_n_pair: n >= 2 required");
    companion_value a = solve_companion(z, ratio::of_counts(p, n), h_p, tol);
    companion_value b = solve_companion(z, ratio::of_counts(p, n - 1), h_p, tol);
    return {a.m, b.m};
}

// Limit of p*(m_n^0 - m_{n-1}^0): (1 + z*m_under) (m_under + z*m_under') / (z*m_under).
inline cdouble shift_limit(cdouble z, double y, const spectral_weights& h, double tol = 1e-12) {
    companion_value cv = solve_companion(z, ratio::limit(y), h, tol);
    if (cv.y == 0.0) return 0.0;  // 1 + z*m_under vanishes identically
    cdouble g = g_factor(cv);
    cdouble gp = g_factor_derivative(cv, h);
    return g * gp / (z * cv.m_under);
}

// Correction-term integrand of the alternative bias treatment:
// P(z) = y*m_under*int t dH/(1+t*m_under)^2 / ( z*(1 - y*int m_under^2 t^2 dH/(1+t*m_under)^2) ).
// Computed for side-by-side diagnostics only; no identity with shift_limit is
// asserted anywhere.
inline cdouble pan_integrand(cdouble z, double y, const spectral_weights& h, double tol = 1e-12) {
    if (y == 0.0) return 0.0;
    companion_value cv = solve_companion(z, ratio::limit(y), h, tol);
    const cdouble mu = cv.m_under;
    cdouble num = h.integrate([&](double t) {
        cdouble d = 1.0 + t * mu;
        return t / (d * d);
    });
    cdouble sub = h.integrate([&](double t) {
        cdouble d = 1.0 + t * mu;
        return mu * mu * t * t / (d * d);
    });
    cdouble denom = z * (1.0 - y * sub);
    if (std::abs(denom) <= 1e-14) throw near_singular("pan_integrand: denominator vanishes");
    return y * mu * num / denom;
}

}  // namespace rmt

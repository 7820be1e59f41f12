// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/f_transform.hpp"
#include "rmt/ratio.hpp"
#include "rmt/spectral_weights.hpp"
#include "rmt/stieltjes.hpp"

namespace rmt {

// Density of a limiting spectral distribution on a grid, recovered by
// Stieltjes inversion, plus an explicit point mass at zero when the ratio
// forces one. support_lo/support_hi are the located edges of the continuous
// part.
struct grid_density {
    double support_lo = 0.0;
    double support_hi = 0.0;
    std::vector<double> xs;
    std::vector<double> density;
    double atom_at_zero = 0.0;
    // pointwise re-evaluation of the extrapolated density, used by the
    // edge-refined quadrature; not part of the serialized surface
    std::function<double(double)> probe;
    double eps_final = 0.0;  // smallest broadening of the schedule that built this grid

    double continuous_mass() const {
        double s = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            s += 0.5 * (density[i] + density[i - 1]) * (xs[i] - xs[i - 1]);
        return s;
    }

    double total_mass() const { return continuous_mass() + atom_at_zero; }

    // int f(x) dF(x): trapezoid against the continuous part plus the atom.
    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            s += 0.5 * (f(xs[i]) * density[i] + f(xs[i - 1]) * density[i - 1]) * (xs[i] - xs[i - 1]);
        if (atom_at_zero > 0.0) s += atom_at_zero * f(0.0);
        return s;
    }

    // int f(x) dF(x) with square-root-edge handling: composite Simpson over
    // the interior and model panels at the edges. The density near an edge is
    // fitted as sqrt(x - a)(c0 + c1 (x - a)) with the edge location a itself a
    // fit parameter (the threshold-located edge carries the leftover
    // epsilon-extrapolation bias, the interior grid values do not), then the
    // model panel integrates smoothly under x = a + s^2.
    template <typename F>
    double integrate_refined(F&& f) const {
        if (xs.size() < 256 || !(support_hi > support_lo)) return integrate(f);
        const double h = xs[1] - xs[0];
        const long panel_cells = 12;
        long first_inside =
            std::lower_bound(xs.begin(), xs.end(), support_lo + panel_cells * h) - xs.begin();
        long last_inside =
            std::upper_bound(xs.begin(), xs.end(), support_hi - panel_cells * h) - xs.begin() - 1;
        if (first_inside + 8 > last_inside) return integrate(f);
        if ((last_inside - first_inside) % 2 != 0) --last_inside;

        double total = 0.0;
        for (long k = first_inside; k < last_inside; k += 2)
            total += h / 3.0 *
                     (f(xs[k]) * density[k] + 4.0 * f(xs[k + 1]) * density[k + 1] +
                      f(xs[k + 2]) * density[k + 2]);

        total += edge_panel(f, support_lo, first_inside, +1);
        total += edge_panel(f, support_hi, last_inside, -1);
        if (atom_at_zero > 0.0) total += atom_at_zero * f(0.0);
        return total;
    }

  private:
    // In the pure sqrt regime rho = c sqrt(x - a), two probe values at depths
    // d and 2d pin the edge: a = (x2 rho1^2 - x1 rho2^2)/(rho1^2 - rho2^2).
    // The threshold-located edge carries the leftover epsilon-extrapolation
    // bias (~1e-5); this refinement is good to ~1e-7.
    double refine_edge(double edge_guess, int dir) const {
        if (!probe) return edge_guess;
        const double h = xs[1] - xs[0];
        const double d1 = h / 8.0;
        double x1 = edge_guess + dir * d1;
        double x2 = edge_guess + dir * 2.0 * d1;
        double r1 = probe(x1), r2 = probe(x2);
        if (!(r1 > 0.0) || !(r2 > r1)) return edge_guess;
        double q1 = r1 * r1, q2 = r2 * r2;
        double a = (x2 * q1 - x1 * q2) / (q1 - q2);
        if (std::abs(a - edge_guess) > 2.0 * h) return edge_guess;
        return a;
    }

    // Integrates f times the density over the edge panel [a, xs[inner_idx]]
    // by composite Simpson in s with x = a + dir s^2: the substitution turns
    // the sqrt edge profile into a smooth integrand, and probing the density
    // at the quadrature nodes avoids any model assumption (steep 1/x-type
    // edges have structure below the grid resolution). dir = +1 lower edge,
    // -1 upper.
    template <typename F>
    double edge_panel(F&& f, double edge_guess, long inner_idx, int dir) const {
        const double h = xs[1] - xs[0];
        if (!probe) {  // no way to evaluate off-grid; plain trapezoid over the panel cells
            double acc = 0.0;
            long klo = std::min(inner_idx, inner_idx - dir * 12L);
            for (long k = std::max(0L, klo); k + 1 < static_cast<long>(xs.size()) && k < klo + 12; ++k)
                acc += 0.5 * (f(xs[k]) * density[k] + f(xs[k + 1]) * density[k + 1]) * h;
            return acc;
        }
        const double a = refine_edge(edge_guess, dir);
        const double inner = xs[inner_idx];
        const double depth = dir > 0 ? inner - a : a - inner;
        if (depth <= 0) return 0.0;
        const double smax = std::sqrt(depth);

        // innermost sliver, depth below ~20 eps: probes there carry the
        // residual broadening bias, but the profile is exactly c sqrt(d), so
        // integrate the model with c read off at a safely deeper point
        double d_sliver = std::min(20.0 * eps_final, 0.25 * depth);
        double acc = 0.0;
        if (d_sliver > 0.0) {
            double d_c = 2.0 * d_sliver;
            double c_est = probe(dir > 0 ? a + d_c : a - d_c) / std::sqrt(d_c);
            double edge_val = f(dir > 0 ? a + 0.5 * d_sliver : a - 0.5 * d_sliver);
            acc += edge_val * (2.0 / 3.0) * c_est * d_sliver * std::sqrt(d_sliver);
        }

        const double s1 = std::sqrt(d_sliver);
        auto g = [&](double s) {
            double x = dir > 0 ? a + s * s : a - s * s;
            return 2.0 * s * f(x) * std::max(0.0, probe(x));
        };
        const int cells = 64;
        const double hs = (smax - s1) / cells;
        for (int k = 0; k < cells; k += 2)
            acc += hs / 3.0 *
                   (g(s1 + k * hs) + 4.0 * g(s1 + (k + 1) * hs) + g(s1 + (k + 2) * hs));
        return acc;
    }

  public:
    // piecewise-linear CDF of the continuous part plus the atom
    double cdf(double x) const {
        double c = (x >= 0.0) ? atom_at_zero : 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            if (x <= xs[i - 1]) break;
            double xc = std::min(x, xs[i]);
            double frac = (xc - xs[i - 1]) / (xs[i] - xs[i - 1]);
            double d_at = density[i - 1] + frac * (density[i] - density[i - 1]);
            c += 0.5 * (density[i - 1] + d_at) * (xc - xs[i - 1]);
        }
        return c;
    }
};

namespace detail {

inline void check_schedule(const std::vector<double>& eps) {
    if (eps.size() < 2) throw std::invalid_argument("invert_density: eps schedule needs >= 2 entries");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("invert_density: eps must be > 0");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw std::invalid_argument("invert_density: eps schedule must be decreasing");
    }
    if (!(eps.back() >= 1e-6 - 1e-18))
        throw std::invalid_argument("invert_density: final eps must be >= 1e-6");
}

inline std::vector<double> default_eps_schedule() {
    return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 2e-6, 1e-6};
}

// One x-location probe: runs the full schedule cold and Richardson-
// extrapolates the smallest epsilon levels to eps -> 0 (three levels when the
// schedule has them, two otherwise). The eps-linear leakage of the Poisson
// kernel off the support cancels, which is what makes a 1e-6 threshold usable
// for edge location; the quadratic term matters near very steep edges.
template <typename Solve, typename ToM>
double extrapolated_density_at(double x, const std::vector<double>& eps, Solve&& solve,
                               ToM&& to_m) {
    cdouble state = cdouble(0, 0);
    bool warm = false;
    double d_prev = 0.0, d_last = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        cdouble z(x, eps[k]);
        state = solve(z, warm ? &state : nullptr);
        warm = true;
        if (k + 2 == eps.size()) d_prev = to_m(state, z).imag() / std::numbers::pi;
        if (k + 1 == eps.size()) d_last = to_m(state, z).imag() / std::numbers::pi;
    }
    double r = eps[eps.size() - 2] / eps.back();
    return std::max(0.0, (r * d_last - d_prev) / (r - 1.0));
}

template <typename Solve, typename ToM>
grid_density invert_engine(double lo, double hi, double atom, int grid_size,
                           const std::vector<double>& eps, Solve&& solve, ToM&& to_m) {
    if (grid_size < 256) throw std::invalid_argument("invert_density: grid_size must be >= 256");
    check_schedule(eps);
    if (!(hi > lo)) throw std::invalid_argument("invert_density: empty support bracket");

    const double w = hi - lo;
    const double x0 = lo - 0.1 * w, x1 = hi + 0.1 * w;

    grid_density out;
    out.atom_at_zero = atom;
    out.xs.resize(grid_size);
    for (int i = 0; i < grid_size; ++i)
        out.xs[i] = x0 + (x1 - x0) * i / static_cast<double>(grid_size - 1);

    std::vector<cdouble> prev(grid_size), cur(grid_size);
    std::vector<double> d_prev(grid_size), d_last(grid_size);
    for (std::size_t k = 0; k < eps.size(); ++k) {
        for (int i = 0; i < grid_size; ++i) {
            cdouble z(out.xs[i], eps[k]);
            const cdouble* warm = nullptr;
            if (k > 0)
                warm = &prev[i];
            else if (i > 0)
                warm = &cur[i - 1];
            cur[i] = solve(z, warm);
            if (k + 2 == eps.size()) d_prev[i] = to_m(cur[i], z).imag() / std::numbers::pi;
            if (k + 1 == eps.size()) d_last[i] = to_m(cur[i], z).imag() / std::numbers::pi;
        }
        std::swap(prev, cur);
    }

    const double r = eps[eps.size() - 2] / eps.back();
    out.density.resize(grid_size);
    for (int i = 0; i < grid_size; ++i)
        out.density[i] = std::max(0.0, (r * d_last[i] - d_prev[i]) / (r - 1.0));

    // locate edges: first/last crossings of the 1e-6 threshold, refined by
    // bisection with fresh probes. With a point mass at zero the scan starts
    // clear of the atom's leakage (the continuous part begins at or above the
    // conservative bracket edge).
    const double tau = 1e-6;
    const double scan_from = atom > 0.0 ? 0.5 * lo : -std::numeric_limits<double>::infinity();
    int ilo = -1, ihi = -1;
    for (int i = 0; i < grid_size; ++i) {
        if (out.xs[i] < scan_from) continue;
        if (out.density[i] > tau) {
            if (ilo < 0) ilo = i;
            ihi = i;
        }
    }
    auto probe = [&](double x) { return extrapolated_density_at(x, eps, solve, to_m); };
    auto bisect = [&](double xa, double xb) {
        // density at xb is above threshold, at xa below
        for (int it = 0; it < 60 && std::abs(xb - xa) > 1e-12 * std::max(1.0, std::abs(xb)); ++it) {
            double xm = 0.5 * (xa + xb);
            (probe(xm) > tau ? xb : xa) = xm;
        }
        return 0.5 * (xa + xb);
    };
    if (ilo < 0) {
        out.support_lo = lo;
        out.support_hi = hi;
    } else {
        out.support_lo = (ilo == 0) ? out.xs[0] : bisect(out.xs[ilo - 1], out.xs[ilo]);
        out.support_hi =
            (ihi == grid_size - 1) ? out.xs[grid_size - 1] : bisect(out.xs[ihi + 1], out.xs[ihi]);
    }
    out.probe = [eps, solve, to_m](double x) {
        return extrapolated_density_at(x, eps, solve, to_m);
    };
    out.eps_final = eps.back();
    return out;
}

}  // namespace detail

// Stieltjes inversion of the sample-covariance LSD with population spectrum h
// at the given ratio. The epsilon schedule descends with warm starts; the
// density is the eps -> 0 extrapolation of Im m(x + i eps)/pi from the two
// smallest levels.
inline grid_density invert_density(const ratio& r, const spectral_weights& h,
                                   int grid_size = 2048,
                                   std::vector<double> eps_schedule = {}) {
    const double y = r.value();
    if (!(y > 0.0)) throw std::invalid_argument("invert_density: y must be > 0");
    if (eps_schedule.empty()) eps_schedule = detail::default_eps_schedule();

    double atom = 0.0;
    if (y > 1.0) {
        if (h.mass_at_zero() > 0.0)
            throw std::invalid_argument("invert_density: population mass at 0 with y > 1 unsupported");
        atom = 1.0 - 1.0 / y;
    }
    auto [lo, hi] = support_bounds(y, h);
    if (hi - lo < 1e-9) {  // near-degenerate bracket (tiny y); widen around it
        double c = 0.5 * (lo + hi);
        lo = c - 0.5;
        hi = c + 0.5;
    }

    auto solve = [h, y](cdouble z, const cdouble* warm) {
        return solve_companion(z, ratio::limit(y), h, 1e-12, warm).m_under;
    };
    auto to_m = [y](cdouble mu, cdouble z) { return (mu + (1.0 - y) / z) / y; };
    return detail::invert_engine(lo, hi, atom, grid_size, eps_schedule, solve, to_m);
}

// Stieltjes inversion of the F-matrix LSD at ratios (y1, y2).
inline grid_density invert_f_density(double y1, double y2, int grid_size = 2048,
                                     std::vector<double> eps_schedule = {}) {
    if (eps_schedule.empty()) eps_schedule = detail::default_eps_schedule();
    auto [lo, hi] = f_support(y1, y2);
    double atom = (y1 > 1.0) ? 1.0 - 1.0 / y1 : 0.0;

    auto solve = [y1, y2](cdouble z, const cdouble* warm) {
        return f_lsd_transform(z, y1, y2, 1e-12, warm);
    };
    auto to_m = [y1](cdouble mu, cdouble z) { return (mu + (1.0 - y1) / z) / y1; };
    return detail::invert_engine(lo, hi, atom, grid_size, eps_schedule, solve, to_m);
}

}  // namespace rmt

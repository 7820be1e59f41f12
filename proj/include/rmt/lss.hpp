// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rmt/contour.hpp"
#include "rmt/density.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/f_transform.hpp"
#include "rmt/stieltjes.hpp"
#include "rmt/test_function.hpp"

namespace rmt {

enum class statistic_kind { x_p, w_p };

struct lss_value {
    double value = 0;
    statistic_kind kind = statistic_kind::x_p;
    double ratio1 = 0;  // covariance ratio, or the x-side F ratio
    double ratio2 = 0;  // y-side F ratio (0 for covariance statistics)
    std::string f_name;
};

struct lss_options {
    double contour_tol = 1e-13;
    int grid_size = 2048;
    // the density route is a cross-check on the authoritative contour route
    bool cross_check_density = true;
    double cross_check_tol = 1e-6;
};

namespace detail {

inline double atom_at_zero_for(double y, const spectral_weights& h) {
    if (y <= 1.0) return 0.0;
    if (h.mass_at_zero() > 0.0)
        throw std::invalid_argument("centering_integral: population mass at 0 with y > 1 unsupported");
    return 1.0 - 1.0 / y;
}

inline void check_admissible(const test_function& f, double support_lo, double atom) {
    if (f.is_log() && (atom > 0.0 || !(support_lo > 0.0)))
        throw std::invalid_argument("test function log needs a support bounded away from 0 and no mass at 0");
}

}  // namespace detail

// int f dF^{y,H}: contour route -(1/2 pi i) \oint f(z) m(z) dz around the
// continuous support (plus the explicit atom term), cross-checked against
// quadrature of the inverted density. The contour value is returned.
inline double centering_integral(const test_function& f, const ratio& r, const spectral_weights& h,
                                 const lss_options& opts = {}) {
    const double y = r.value();
    if (y == 0.0) return h.integrate([&](double t) { return f(t); });  // degenerate limit: F^{0,H} = H

    const double atom = detail::atom_at_zero_for(y, h);
    auto bounds = support_bounds(y, h);
    detail::check_admissible(f, bounds.first, atom);

    const bool keep_origin_out = f.is_log() || atom > 0.0;
    cdouble contour_val = contour_integrate(
        [&](cdouble z) { return -f(z) * solve_companion(z, r, h, 1e-13).m; }, bounds, 0.5, 1024,
        opts.contour_tol, keep_origin_out);
    double value = contour_val.real() + (atom > 0.0 ? atom * f(0.0) : 0.0);

    if (opts.cross_check_density) {
        grid_density gd = invert_density(r, h, opts.grid_size);
        double via_density = gd.integrate_refined([&](double x) { return f(x); });
        if (std::abs(via_density - value) > opts.cross_check_tol)
            throw numeric_error("centering_integral: contour and density routes disagree by " +
                                std::to_string(std::abs(via_density - value)));
    }
    return value;
}

// int f dF_{(y1,y2)} for the F-matrix LSD, same dual-route contract.
inline double f_centering_integral(const test_function& f, double y1, double y2,
                                   const lss_options& opts = {}) {
    if (y1 == 0.0) return f(1.0);  // spectrum collapses to a point mass at 1
    auto bounds = f_support(y1, y2);
    const double atom = (y1 > 1.0) ? 1.0 - 1.0 / y1 : 0.0;
    detail::check_admissible(f, bounds.first, atom);

    const bool keep_origin_out = f.is_log() || atom > 0.0;
    cdouble contour_val = contour_integrate(
        [&](cdouble z) { return -f(z) * f_lsd_stieltjes(z, y1, y2, 1e-13); }, bounds, 0.5, 1024,
        opts.contour_tol, keep_origin_out);
    double value = contour_val.real() + (atom > 0.0 ? atom * f(0.0) : 0.0);

    if (opts.cross_check_density) {
        grid_density gd = invert_f_density(y1, y2, opts.grid_size);
        double via_density = gd.integrate_refined([&](double x) { return f(x); });
        if (std::abs(via_density - value) > opts.cross_check_tol)
            throw numeric_error("f_centering_integral: contour and density routes disagree by " +
                                std::to_string(std::abs(via_density - value)));
    }
    return value;
}

inline double lss_sum(const std::vector<double>& eigs, const test_function& f) {
    double s = 0.0;
    for (double x : eigs) s += f(x);
    return s;
}

// X_p(f) from a precomputed centering constant (the replication loop computes
// the centering once per configuration).
inline double lss_from_eigs(const std::vector<double>& eigs, const test_function& f, int p,
                            double centering) {
    return lss_sum(eigs, f) - static_cast<double>(p) * centering;
}

// X_p(f) = sum_i f(lambda_i) - p * int f dF^{ratio, H_p}, with lambda from the
// centralized matrix at ratio p/(n-1) or the simplified one at p/n.
template <typename Scalar>
lss_value lss_covariance(const matrix_sample<Scalar>& sample, const test_function& f,
                         bool use_centralized, const population_shape& shape,
                         const lss_options& opts = {}) {
    if (shape.dim() != sample.p) throw dimension_error("lss_covariance: shape dimension mismatch");
    ratio r = use_centralized ? ratio::of_counts(sample.p, sample.n).centralized()
                              : ratio::of_counts(sample.p, sample.n);
    double c = centering_integral(f, r, shape.esd(), opts);
    lss_value v;
    v.value = lss_from_eigs(use_centralized ? sample.eigs_S : sample.eigs_B, f, sample.p, c);
    v.kind = statistic_kind::x_p;
    v.ratio1 = r.value();
    v.f_name = f.name();
    return v;
}

// W_p(f) = sum_i f(lambda_i^F) - p * int f dF_{(r1, r2)}, with the ratio pair
// at (p/(n-1), p/(N-1)) for the centralized F-matrix and (p/n, p/N) for the
// simplified one.
template <typename Scalar>
lss_value lss_f_matrix(const f_pair<Scalar>& pair, const test_function& f, bool use_centralized,
                       const lss_options& opts = {}) {
    const int p = pair.sample_x.p;
    const int n = pair.sample_x.n, N = pair.sample_y.n;
    ratio r1 = use_centralized ? ratio::of_counts(p, n).centralized() : ratio::of_counts(p, n);
    ratio r2 = use_centralized ? ratio::of_counts(p, N).centralized() : ratio::of_counts(p, N);
    double c = f_centering_integral(f, r1.value(), r2.value(), opts);
    lss_value v;
    v.value = lss_from_eigs(use_centralized ? pair.eigs_F : pair.eigs_G, f, p, c);
    v.kind = statistic_kind::w_p;
    v.ratio1 = r1.value();
    v.ratio2 = r2.value();
    v.f_name = f.name();
    return v;
}

struct centering_gap {
    double gap = 0;               // p * [int f dF^{p/(n-1)} - int f dF^{p/n}]
    double limit_prediction = 0;  // (1/2 pi i) \oint f(z) L(z) dz
};

// Fixed deterministic offset between the two centering conventions, computed
// as a single contour integral of f(z) * p * (m_n^0(z) - m_{n-1}^0(z)) so the
// O(1) difference is integrated directly instead of as a difference of two
// large integrals. The large-n limit replaces the bracket by its shift limit.
inline centering_gap deterministic_centering_gap(const test_function& f, int p, int n,
                                                 const spectral_weights& h_p,
                                                 double contour_tol = 1e-13) {
    if (n < 2) throw std::invalid_argument("deterministic_centering_gap: n >= 2 required");
    const double yn = static_cast<double>(p) / n;
    const double yn1 = static_cast<double>(p) / (n - 1);
    auto ba = support_bounds(yn, h_p);
    auto bb = support_bounds(yn1, h_p);
    std::pair<double, double> bounds{std::min(ba.first, bb.first), std::max(ba.second, bb.second)};

    const double atom_n = detail::atom_at_zero_for(yn, h_p);
    const double atom_n1 = detail::atom_at_zero_for(yn1, h_p);
    detail::check_admissible(f, bounds.first, std::max(atom_n, atom_n1));
    const bool keep_origin_out = f.is_log() || atom_n1 > 0.0;

    centering_gap out;
    cdouble gap = contour_integrate(
        [&](cdouble z) {
            auto [mn, mn1] = finite_n_pair(z, p, n, h_p, 1e-13);
            return f(z) * static_cast<double>(p) * (mn - mn1);
        },
        bounds, 0.5, 1024, contour_tol, keep_origin_out);
    out.gap = gap.real() + static_cast<double>(p) * (atom_n1 - atom_n) * (f.is_log() ? 0.0 : f(0.0));

    cdouble lim = contour_integrate(
        [&](cdouble z) { return f(z) * shift_limit(z, yn, h_p, 1e-13); }, bounds, 0.5, 1024,
        contour_tol, keep_origin_out);
    out.limit_prediction = lim.real();
    return out;
}

}  // namespace rmt

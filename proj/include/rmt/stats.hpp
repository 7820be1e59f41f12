// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rmt {

// Monte Carlo aggregate of one statistic's replications: central moments with
// jackknife standard errors and a Kolmogorov-Smirnov p-value against the
// fitted normal.
struct summary_stats {
    int reps = 0;
    double mean = 0;
    double variance = 0;  // unbiased
    double skewness = 0;
    double excess_kurtosis = 0;
    double se_mean = 0;
    double se_variance = 0;
    double se_skewness = 0;
    double se_kurtosis = 0;
    double ks_normal_p = 0;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov limiting tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {

struct central_moments {
    double mean, m2, m3, m4;  // m_k are averages of centered powers
};

// moments from raw power sums over data pre-shifted by `origin`
inline central_moments moments_from_sums(double p1, double p2, double p3, double p4, double n) {
    double mu = p1 / n;
    double m2 = p2 / n - mu * mu;
    double m3 = p3 / n - 3.0 * mu * p2 / n + 2.0 * mu * mu * mu;
    double m4 = p4 / n - 4.0 * mu * p3 / n + 6.0 * mu * mu * p2 / n - 3.0 * mu * mu * mu * mu;
    return {mu, m2, m3, m4};
}

struct stat_vector {
    double mean, variance, skewness, exkurt;
};

inline stat_vector stats_of(const central_moments& c, double n) {
    stat_vector s{};
    s.mean = c.mean;
    s.variance = (n > 1) ? c.m2 * n / (n - 1.0) : 0.0;
    double sd = std::sqrt(std::max(c.m2, 0.0));
    s.skewness = (sd > 0) ? c.m3 / (sd * sd * sd) : 0.0;
    s.exkurt = (c.m2 > 0) ? c.m4 / (c.m2 * c.m2) - 3.0 : 0.0;
    return s;
}

}  // namespace detail

// One-sample KS statistic of `xs` against the normal fitted to its own mean
// and variance; p-value from the Kolmogorov tail with the usual finite-n
// scaling. Parameter fitting makes the p-value conservative, which is the
// right direction for a pass/fail normality gate.
inline double ks_normal_fitted_p(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 8) throw std::invalid_argument("ks_normal_fitted_p: need at least 8 samples");
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    double sd = std::sqrt(var);
    std::vector<double> sorted(xs);
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double u = normal_cdf((sorted[i] - mean) / sd);
        d = std::max(d, std::max((i + 1.0) / n - u, u - static_cast<double>(i) / n));
    }
    double rn = std::sqrt(static_cast<double>(n));
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

// Two-sample KS p-value (asymptotic, with the Stephens finite-n scaling).
inline double ks_two_sample_p(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("ks_two_sample_p: need >= 2 samples each");
    std::vector<double> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    while (i < sa.size() && j < sb.size()) {
        double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;  // step over tie groups on both sides
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

// Mean/variance/skewness/excess-kurtosis summary with jackknife standard
// errors. Data are shifted by the sample mean before accumulating power sums
// so the fourth-power sums stay well conditioned; all reported statistics are
// translation-exact.
inline summary_stats summarize(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 8) throw std::invalid_argument("summarize: need at least 8 samples");
    const double nn = static_cast<double>(n);

    double shift = 0;
    for (double x : xs) shift += x;
    shift /= nn;

    double p1 = 0, p2 = 0, p3 = 0, p4 = 0;
    for (double x : xs) {
        double d = x - shift;
        double d2 = d * d;
        p1 += d;
        p2 += d2;
        p3 += d2 * d;
        p4 += d2 * d2;
    }

    auto full = detail::stats_of(detail::moments_from_sums(p1, p2, p3, p4, nn), nn);

    // leave-one-out statistics from the same power sums
    double sm = 0, sv = 0, ss = 0, sk = 0;
    double cm = 0, cv = 0, cs = 0, ck = 0;
    std::vector<detail::stat_vector> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = xs[i] - shift, d2 = d * d;
        auto c = detail::moments_from_sums(p1 - d, p2 - d2, p3 - d2 * d, p4 - d2 * d2, nn - 1.0);
        loo[i] = detail::stats_of(c, nn - 1.0);
        cm += loo[i].mean;
        cv += loo[i].variance;
        cs += loo[i].skewness;
        ck += loo[i].exkurt;
    }
    cm /= nn;
    cv /= nn;
    cs /= nn;
    ck /= nn;
    for (std::size_t i = 0; i < n; ++i) {
        sm += (loo[i].mean - cm) * (loo[i].mean - cm);
        sv += (loo[i].variance - cv) * (loo[i].variance - cv);
        ss += (loo[i].skewness - cs) * (loo[i].skewness - cs);
        sk += (loo[i].exkurt - ck) * (loo[i].exkurt - ck);
    }
    const double factor = (nn - 1.0) / nn;

    summary_stats out;
    out.reps = static_cast<int>(n);
    out.mean = full.mean + shift;
    out.variance = full.variance;
    out.skewness = full.skewness;
    out.excess_kurtosis = full.exkurt;
    out.se_mean = std::sqrt(factor * sm);
    out.se_variance = std::sqrt(factor * sv);
    out.se_skewness = std::sqrt(factor * ss);
    out.se_kurtosis = std::sqrt(factor * sk);
    out.ks_normal_p = ks_normal_fitted_p(xs);
    return out;
}

struct gaussianity_verdict {
    summary_stats stats;
    bool skew_ok = false;
    bool kurt_ok = false;
    bool ks_ok = false;
    bool pass = false;
};

// Normality gate: skewness and excess kurtosis within 3 jackknife SEs of 0,
// KS against the fitted normal above 0.01.
inline gaussianity_verdict gaussianity_report(const std::vector<double>& samples) {
    if (samples.size() < 500)
        throw std::invalid_argument("gaussianity_report: need at least 500 replications");
    gaussianity_verdict v;
    v.stats = summarize(samples);
    v.skew_ok = std::abs(v.stats.skewness) <= 3.0 * v.stats.se_skewness;
    v.kurt_ok = std::abs(v.stats.excess_kurtosis) <= 3.0 * v.stats.se_kurtosis;
    v.ks_ok = v.stats.ks_normal_p > 0.01;
    v.pass = v.skew_ok && v.kurt_ok && v.ks_ok;
    return v;
}

}  // namespace rmt

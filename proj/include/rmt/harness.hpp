// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmt/ensembles.hpp"
#include "rmt/lss.hpp"
#include "rmt/parallel.hpp"
#include "rmt/rng.hpp"
#include "rmt/stats.hpp"

namespace rmt {

enum class pipeline_kind { cov_centralized, cov_simplified, f_centralized, f_simplified };

enum class centering_convention { nminus1, n_plain };

inline bool is_f_pipeline(pipeline_kind k) {
    return k == pipeline_kind::f_centralized || k == pipeline_kind::f_simplified;
}

inline bool is_centralized(pipeline_kind k) {
    return k == pipeline_kind::cov_centralized || k == pipeline_kind::f_centralized;
}

// One Monte Carlo experiment: a pipeline (which matrix ensemble and spectrum),
// sizes, entry laws, population shape, test function, replication count and
// master seed, and the centering convention (ratio p/(n-1) vs p/n).
struct experiment_config {
    pipeline_kind pipeline = pipeline_kind::cov_centralized;
    int p = 0, n = 0, N = 0;
    entry_law law_x = entry_law::real_gaussian();
    entry_law law_y = entry_law::real_gaussian();
    population_shape shape = population_shape::identity(1);
    test_function f = test_function::monomial(1);
    int reps = 0;
    std::uint64_t master_seed = 1;
    centering_convention convention = centering_convention::nminus1;

    void validate() const {
        if (p < 1 || n < 2) throw std::invalid_argument("experiment_config: need p >= 1, n >= 2");
        if (reps < 1) throw std::invalid_argument("experiment_config: reps must be >= 1");
        if (shape.dim() != p) throw std::invalid_argument("experiment_config: shape dimension != p");
        if (is_f_pipeline(pipeline)) {
            if (N < 2) throw std::invalid_argument("experiment_config: F pipeline needs N >= 2");
            if (p > N - 1) throw std::invalid_argument("experiment_config: F pipeline needs p <= N - 1");
        }
    }
};

struct experiment_result {
    experiment_config config;
    std::vector<double> samples;
    std::vector<std::uint64_t> rep_seeds;
    summary_stats stats;
    double ratio1 = 0, ratio2 = 0;
    double centering = 0;
    int resampled = 0;
};

namespace detail {

template <typename Scalar>
std::vector<double> pipeline_draw_eigs(const experiment_config& cfg, std::uint64_t seed) {
    const bool central = is_centralized(cfg.pipeline);
    if (!is_f_pipeline(cfg.pipeline)) {
        auto e = draw_entries<Scalar>(cfg.p, cfg.n, cfg.law_x, seed);
        return central ? centralized_cov<Scalar>(e, cfg.shape).second
                       : simplified_cov<Scalar>(e, cfg.shape).second;
    }
    auto ex = draw_entries<Scalar>(cfg.p, cfg.n, cfg.law_x, split_seed(seed, 1));
    auto ey = draw_entries<Scalar>(cfg.p, cfg.N, cfg.law_y, split_seed(seed, 2));
    if (central) {
        auto sx = centralized_cov<Scalar>(ex, cfg.shape).first;
        auto sy = centralized_cov<Scalar>(ey, cfg.shape).first;
        return generalized_spectrum<Scalar>(sx, sy);
    }
    auto bx = simplified_cov<Scalar>(ex, cfg.shape).first;
    auto by = simplified_cov<Scalar>(ey, cfg.shape).first;
    return generalized_spectrum<Scalar>(bx, by);
}

inline std::vector<double> pipeline_eigs(const experiment_config& cfg, std::uint64_t seed) {
    if (cfg.law_x.is_complex() || (is_f_pipeline(cfg.pipeline) && cfg.law_y.is_complex()))
        return pipeline_draw_eigs<cdouble>(cfg, seed);
    return pipeline_draw_eigs<double>(cfg, seed);
}

struct centering_info {
    double ratio1 = 0, ratio2 = 0, value = 0;
};

inline centering_info pipeline_centering(const experiment_config& cfg, const lss_options& opts) {
    const bool nm1 = cfg.convention == centering_convention::nminus1;
    centering_info ci;
    ratio r1 = nm1 ? ratio::of_counts(cfg.p, cfg.n).centralized() : ratio::of_counts(cfg.p, cfg.n);
    ci.ratio1 = r1.value();
    if (!is_f_pipeline(cfg.pipeline)) {
        ci.value = centering_integral(cfg.f, r1, cfg.shape.esd(), opts);
        return ci;
    }
    ratio r2 = nm1 ? ratio::of_counts(cfg.p, cfg.N).centralized() : ratio::of_counts(cfg.p, cfg.N);
    ci.ratio2 = r2.value();
    ci.value = f_centering_integral(cfg.f, r1.value(), r2.value(), opts);
    return ci;
}

// Per-replication eigenvalue sums with deterministic retry-on-singular seeds.
struct sum_f_result {
    std::vector<double> sums;
    std::vector<std::uint64_t> seeds;
    int resampled = 0;
};

inline sum_f_result collect_sum_f(const experiment_config& cfg) {
    sum_f_result out;
    out.sums.resize(static_cast<std::size_t>(cfg.reps));
    out.seeds.resize(static_cast<std::size_t>(cfg.reps));
    std::vector<int> retries(static_cast<std::size_t>(cfg.reps), 0);
    const bool needs_positive = cfg.f.is_log();
    parallel_for(static_cast<std::size_t>(cfg.reps), [&](std::size_t r) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 64) throw numeric_error("run_experiment: too many singular draws");
            std::uint64_t s = split_seed(cfg.master_seed, r * 64 + attempt);
            try {
                std::vector<double> eigs = pipeline_eigs(cfg, s);
                if (needs_positive && eigs.back() <= 0.0) {
                    ++retries[r];
                    continue;
                }
                out.sums[r] = lss_sum(eigs, cfg.f);
                out.seeds[r] = s;
                return;
            } catch (const singular_input&) {
                ++retries[r];
            }
        }
    });
    for (int v : retries) out.resampled += v;
    if (out.resampled > 0.01 * cfg.reps)
        throw numeric_error("run_experiment: resampled draws exceed 1% of replications");
    return out;
}

}  // namespace detail

// Runs the configured pipeline: the deterministic centering is computed once,
// each replication contributes sum_i f(lambda_i) - p * centering with a seed
// split from the master seed, and the samples are summarized.
inline experiment_result run_experiment(const experiment_config& cfg, const lss_options& opts = {}) {
    cfg.validate();
    experiment_result res;
    res.config = cfg;

    detail::centering_info ci = detail::pipeline_centering(cfg, opts);
    res.ratio1 = ci.ratio1;
    res.ratio2 = ci.ratio2;
    res.centering = ci.value;

    detail::sum_f_result sums = detail::collect_sum_f(cfg);
    res.resampled = sums.resampled;
    res.rep_seeds = std::move(sums.seeds);
    res.samples.resize(sums.sums.size());
    for (std::size_t i = 0; i < sums.sums.size(); ++i)
        res.samples[i] = sums.sums[i] - static_cast<double>(cfg.p) * ci.value;
    res.stats = summarize(res.samples);
    return res;
}

// Two-pipeline distributional comparison: mean-difference z-test, variance
// ratio window, and two-sample KS. Thresholds are recorded in the report.
struct comparison_report {
    summary_stats stats_a, stats_b;
    double mean_diff = 0, mean_diff_se = 0;
    double var_ratio = 0, var_ratio_se = 0;
    double ks_p = 0;
    double mean_threshold_sigmas = 3.0;
    double var_ratio_lo = 0.8, var_ratio_hi = 1.25;
    double ks_alpha = 0.01;
    bool mean_ok = false, var_ok = false, ks_ok = false, pass = false;
};

inline comparison_report compare_pipelines(const experiment_config& a, const experiment_config& b,
                                           const lss_options& opts = {}) {
    if (a.p != b.p || a.n != b.n || (is_f_pipeline(a.pipeline) != is_f_pipeline(b.pipeline)) ||
        (is_f_pipeline(a.pipeline) && a.N != b.N) || a.f.name() != b.f.name())
        throw std::invalid_argument("compare_pipelines: configs must share p, n(, N) and f");

    experiment_result ra = run_experiment(a, opts);
    experiment_result rb = run_experiment(b, opts);

    comparison_report rep;
    rep.stats_a = ra.stats;
    rep.stats_b = rb.stats;
    rep.mean_diff = ra.stats.mean - rb.stats.mean;
    rep.mean_diff_se = std::hypot(ra.stats.se_mean, rb.stats.se_mean);
    rep.var_ratio = ra.stats.variance / rb.stats.variance;
    rep.var_ratio_se = rep.var_ratio * std::hypot(ra.stats.se_variance / ra.stats.variance,
                                                  rb.stats.se_variance / rb.stats.variance);
    rep.ks_p = ks_two_sample_p(ra.samples, rb.samples);

    rep.mean_ok = std::abs(rep.mean_diff) <= rep.mean_threshold_sigmas * rep.mean_diff_se;
    rep.var_ok = rep.var_ratio >= rep.var_ratio_lo && rep.var_ratio <= rep.var_ratio_hi;
    rep.ks_ok = rep.ks_p > rep.ks_alpha;
    rep.pass = rep.mean_ok && rep.var_ok && rep.ks_ok;
    return rep;
}

// Wrong-centering demonstration: the centralized pipeline evaluated with the
// p/n centering is offset from the p/(n-1) one by a data-free constant that
// equals deterministic_centering_gap; its large-n limit is the contour
// integral of f times the shift limit, and the alternative correction-term
// integral is reported alongside as a diagnostic.
struct bias_report {
    double mean_correct = 0, mean_wrong = 0;
    double offset = 0;            // mean_wrong - mean_correct
    double gap_bookkeeping = 0;   // deterministic_centering_gap
    double limit_prediction = 0;  // (1/2 pi i) oint f L
    double pan_diagnostic = 0;    // (1/2 pi i) oint f P
    double bookkeeping_error = 0;
};

inline bias_report bias_demonstration(const experiment_config& cfg, const lss_options& opts = {}) {
    if (is_f_pipeline(cfg.pipeline))
        throw std::invalid_argument("bias_demonstration: covariance pipelines only");
    experiment_config central = cfg;
    central.pipeline = pipeline_kind::cov_centralized;
    central.validate();

    const spectral_weights h_p = cfg.shape.esd();
    double c_right = centering_integral(cfg.f, ratio::of_counts(cfg.p, cfg.n).centralized(), h_p, opts);
    double c_wrong = centering_integral(cfg.f, ratio::of_counts(cfg.p, cfg.n), h_p, opts);

    detail::sum_f_result sums = detail::collect_sum_f(central);
    double mean_right = 0, mean_wrong = 0;
    for (double s : sums.sums) {
        mean_right += s - cfg.p * c_right;
        mean_wrong += s - cfg.p * c_wrong;
    }
    mean_right /= static_cast<double>(cfg.reps);
    mean_wrong /= static_cast<double>(cfg.reps);

    centering_gap gap = deterministic_centering_gap(cfg.f, cfg.p, cfg.n, h_p, opts.contour_tol);

    bias_report rep;
    rep.mean_correct = mean_right;
    rep.mean_wrong = mean_wrong;
    rep.offset = mean_wrong - mean_right;
    rep.gap_bookkeeping = gap.gap;
    rep.limit_prediction = gap.limit_prediction;
    rep.bookkeeping_error = std::abs(rep.offset - rep.gap_bookkeeping);

    const double yn = static_cast<double>(cfg.p) / cfg.n;
    auto bounds = support_bounds(std::max(yn, static_cast<double>(cfg.p) / (cfg.n - 1)), h_p);
    rep.pan_diagnostic = contour_integrate(
                             [&](cdouble z) { return cfg.f(z) * pan_integrand(z, yn, h_p, 1e-13); },
                             bounds, 0.5, 1024, opts.contour_tol, cfg.f.is_log())
                             .real();
    return rep;
}

}  // namespace rmt

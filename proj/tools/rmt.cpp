// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: solve spectral transforms, emit densities and
// support intervals, run lemma verifiers and Monte Carlo experiments from
// JSON configs, compare pipelines, and demonstrate the centering bias.
//
// Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 verdict fail, 4 I/O.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rmt/density.hpp"
#include "rmt/errors.hpp"
#include "rmt/harness.hpp"
#include "rmt/json_io.hpp"
#include "rmt/lemma_checks.hpp"
#include "rmt/lss.hpp"
#include "rmt/stieltjes.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numeric = 2;
constexpr int exit_verdict = 3;
constexpr int exit_io = 4;

rmt::cdouble parse_z_or_throw(const std::string& text) {
    auto z = rmt::parse_complex(text);
    if (!z) throw std::invalid_argument("malformed complex number: " + text + " (expected a+bi)");
    return *z;
}

rmt::spectral_weights parse_h_spec(const std::string& spec) {
    if (spec == "mp") return rmt::spectral_weights::point_mass();
    const std::string prefix = "atoms=";
    if (spec.rfind(prefix, 0) != 0)
        throw std::invalid_argument("h-spec must be 'mp' or 'atoms=t1:w1,t2:w2,...'");
    std::vector<double> atoms, weights;
    std::string body = spec.substr(prefix.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("h-spec atom needs t:w form");
        atoms.push_back(std::stod(item.substr(0, colon)));
        weights.push_back(std::stod(item.substr(colon + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return rmt::spectral_weights(std::move(atoms), std::move(weights));
}

rmt::test_function parse_f_spec(const std::string& spec) {
    if (spec == "log") return rmt::test_function::log();
    if (spec == "exp") return rmt::test_function::exp();
    if (spec == "x") return rmt::test_function::monomial(1);
    if (spec.rfind("x^", 0) == 0) return rmt::test_function::monomial(std::stoi(spec.substr(2)));
    const std::string prefix = "poly:";
    if (spec.rfind(prefix, 0) == 0) {
        std::vector<double> coeffs;
        std::string body = spec.substr(prefix.size());
        std::size_t pos = 0;
        while (pos <= body.size()) {
            std::size_t comma = body.find(',', pos);
            coeffs.push_back(std::stod(body.substr(pos, comma == std::string::npos
                                                             ? std::string::npos
                                                             : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return rmt::test_function::polynomial(std::move(coeffs));
    }
    throw std::invalid_argument("f-spec must be one of x, x^k, poly:c0,c1,..., log, exp");
}

rmt::entry_law parse_law_spec(const std::string& spec) {
    if (spec == "real-gaussian" || spec == "gaussian") return rmt::entry_law::real_gaussian();
    if (spec == "complex-gaussian") return rmt::entry_law::complex_gaussian();
    if (spec == "real-threepoint" || spec == "threepoint") return rmt::entry_law::real_three_point();
    throw std::invalid_argument("law must be real-gaussian, complex-gaussian or real-threepoint");
}

rmt::json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rmt::io_error("cannot open config file " + path);
    rmt::json j;
    try {
        in >> j;
    } catch (const rmt::json::exception& e) {
        throw rmt::io_error(std::string("unparseable config file ") + path + ": " + e.what());
    }
    return j;
}

void echo_line(const std::string& text) { std::cerr << "[rmt] " << text << "\n"; }

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        out.push_back(std::stoi(csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                           : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// Deterministic shift-limit convergence report (no sampling): the finite-n
// bracket p(m_n^0 - m_{n-1}^0) against its limit, halving as n doubles.
rmt::verifier_report shift_limit_report(rmt::cdouble z, double y, const std::vector<int>& ns) {
    auto h = rmt::spectral_weights::point_mass();
    rmt::verifier_report rep;
    rep.lemma_id = "4.1";
    rep.n_values = ns;
    rep.predicted_limit = rmt::shift_limit(z, y, h);
    rep.reps = 1;
    rep.pass_criteria = "|p(m_n - m_{n-1}) - L| halves (ratio in [0.25, 0.75]) as n doubles";
    for (int n : ns) {
        int p = static_cast<int>(std::lround(y * n));
        auto [mn, mn1] = rmt::finite_n_pair(z, p, n, h);
        rmt::cdouble bracket = static_cast<double>(p) * (mn - mn1);
        rep.estimates.push_back(bracket);
        rep.mse.push_back(std::abs(bracket - rep.predicted_limit));
    }
    bool ok = true;
    for (std::size_t i = 0; i + 1 < rep.mse.size(); ++i) {
        double ratio = rep.mse[i + 1] / rep.mse[i];
        rep.rate_ratios.push_back(ratio);
        if (!(ratio >= 0.25 && ratio <= 0.75)) ok = false;
    }
    rep.pass = ok;
    return rep;
}

void write_output(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw rmt::io_error("cannot open output file " + out_path);
    out << payload;
    if (!out) throw rmt::io_error("write failed for " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-matrix spectral statistics toolkit"};
    app.require_subcommand(1);

    std::string z_text = "0+1i", h_text = "mp", f_text = "x", law_text = "real-gaussian";
    double y = 0.5, y1 = -1.0, y2 = -1.0, tol = 1e-12;
    int p = 0, n = 0, N = 0, reps = 0, grid = 2048;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_path, config_path, config_a, config_b, lemma, n_list = "100,200,400";
    std::string convention = "nminus1";

    auto* solve = app.add_subcommand("solve", "solve the companion transform at one point");
    solve->set_help_flag("--help", "print help");  // frees -h for the spectrum flag
    solve->add_option("--z", z_text, "evaluation point a+bi");
    solve->add_option("--y", y, "dimension-to-sample ratio")->required();
    solve->add_option("--h", h_text, "population spectrum: mp or atoms=t:w,...");
    solve->add_option("--tol", tol, "residual tolerance");

    auto* density = app.add_subcommand("density", "emit LSD density as CSV (x,density)");
    density->set_help_flag("--help", "print help");
    density->add_option("--y", y, "covariance ratio");
    density->add_option("--y1", y1, "F-matrix x-side ratio");
    density->add_option("--y2", y2, "F-matrix y-side ratio");
    density->add_option("--h", h_text, "population spectrum (covariance case)");
    density->add_option("--grid", grid, "grid points");
    density->add_option("--out", out_path, "output CSV path (default stdout)");

    auto* support = app.add_subcommand("support", "print F-matrix LSD support endpoints");
    support->add_option("--y1", y1, "x-side ratio")->required();
    support->add_option("--y2", y2, "y-side ratio")->required();

    std::string pipeline_text = "cov-centralized";
    auto* lss_cmd = app.add_subcommand("lss", "one linear spectral statistic from a seeded draw");
    lss_cmd->add_option("--pipeline", pipeline_text, "cov-centralized|cov-simplified|f-centralized|f-simplified");
    lss_cmd->add_option("--p", p, "dimension")->required();
    lss_cmd->add_option("--n", n, "x-side sample size")->required();
    lss_cmd->add_option("--N", N, "y-side sample size (F pipelines)");
    lss_cmd->add_option("--law", law_text, "entry law");
    lss_cmd->add_option("--f", f_text, "test function");
    lss_cmd->add_option("--seed", seed, "draw seed");
    lss_cmd->add_option("--centering", convention, "nminus1|n");

    auto* verify = app.add_subcommand("verify", "run a lemma verifier");
    verify->add_option("--lemma", lemma, "4.1|4.2|4.3|4.4|4.6|F|interlacing")->required();
    verify->add_option("--z", z_text, "evaluation point");
    verify->add_option("--y", y, "ratio");
    verify->add_option("--n", n_list, "comma-separated n values (or single n)");
    verify->add_option("--p", p, "dimension (interlacing / F)");
    verify->add_option("--N", N, "y-side sample size (F)");
    verify->add_option("--reps", reps, "replications");
    verify->add_option("--law", law_text, "entry law");
    verify->add_option("--seed", seed, "master seed");

    auto* experiment = app.add_subcommand("experiment", "run an experiment from a JSON config");
    experiment->add_option("--config", config_path, "config JSON path")->required();
    experiment->add_option("--out", out_path, "results JSON path (CSV written alongside)");
    auto* exp_seed_opt = experiment->add_option("--seed", seed, "override master seed");

    auto* compare = app.add_subcommand("compare", "two-pipeline distributional comparison");
    compare->add_option("--config-a", config_a, "first config JSON")->required();
    compare->add_option("--config-b", config_b, "second config JSON")->required();
    compare->add_option("--out", out_path, "report JSON path");

    auto* bias = app.add_subcommand("bias-demo", "wrong-centering offset demonstration");
    bias->add_option("--config", config_path, "cov pipeline config JSON");
    bias->add_option("--p", p, "dimension");
    bias->add_option("--n", n, "sample size");
    bias->add_option("--f", f_text, "test function");
    bias->add_option("--law", law_text, "entry law");
    bias->add_option("--reps", reps, "replications (default 200)");
    auto* bias_seed_opt = bias->add_option("--seed", seed, "master seed");
    bias->add_option("--out", out_path, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    seed_given = exp_seed_opt->count() > 0 || bias_seed_opt->count() > 0 ||
                 lss_cmd->count("--seed") > 0 || verify->count("--seed") > 0;

    try {
        if (solve->parsed()) {
            rmt::cdouble z = parse_z_or_throw(z_text);
            auto h = parse_h_spec(h_text);
            echo_line("solve z=" + rmt::format_complex(z) + " y=" + std::to_string(y) +
                      " h=" + h_text + " tol=" + std::to_string(tol));
            auto cv = rmt::solve_companion(z, rmt::ratio::limit(y), h, tol);
            std::cout << rmt::companion_to_json(cv).dump(2) << "\n";
            return exit_ok;
        }

        if (support->parsed()) {
            auto [lo, hi] = rmt::f_support(y1, y2);
            echo_line("support y1=" + std::to_string(y1) + " y2=" + std::to_string(y2));
            std::printf("%.6f %.6f\n", lo, hi);
            return exit_ok;
        }

        if (density->parsed()) {
            rmt::grid_density gd;
            if (y1 >= 0.0 && y2 >= 0.0) {
                echo_line("density F-matrix y1=" + std::to_string(y1) + " y2=" + std::to_string(y2) +
                          " grid=" + std::to_string(grid));
                gd = rmt::invert_f_density(y1, y2, grid);
            } else {
                echo_line("density covariance y=" + std::to_string(y) + " grid=" + std::to_string(grid));
                gd = rmt::invert_density(rmt::ratio::limit(y), parse_h_spec(h_text), grid);
            }
            std::string csv = "x,density\n";
            char buf[64];
            for (std::size_t i = 0; i < gd.xs.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", gd.xs[i], gd.density[i]);
                csv += buf;
            }
            write_output(out_path, csv);
            std::fprintf(stderr, "support: %.6f %.6f  atom_at_zero: %.6f\n", gd.support_lo,
                         gd.support_hi, gd.atom_at_zero);
            return exit_ok;
        }

        if (lss_cmd->parsed()) {
            rmt::experiment_config cfg;
            cfg.pipeline = rmt::pipeline_from_name(pipeline_text);
            cfg.p = p;
            cfg.n = n;
            cfg.N = N;
            cfg.law_x = parse_law_spec(law_text);
            cfg.law_y = cfg.law_x;
            cfg.shape = rmt::population_shape::identity(p);
            cfg.f = parse_f_spec(f_text);
            cfg.reps = 1;
            cfg.master_seed = seed;
            cfg.convention = convention == "n" ? rmt::centering_convention::n_plain
                                               : rmt::centering_convention::nminus1;
            cfg.validate();
            echo_line("lss pipeline=" + pipeline_text + " p=" + std::to_string(p) +
                      " n=" + std::to_string(n) + " N=" + std::to_string(N) + " f=" + f_text +
                      " seed=" + std::to_string(seed));
            auto ci = rmt::detail::pipeline_centering(cfg, rmt::lss_options{});
            auto eigs = rmt::detail::pipeline_eigs(cfg, rmt::split_seed(cfg.master_seed, 0));
            double value = rmt::lss_from_eigs(eigs, cfg.f, cfg.p, ci.value);
            rmt::json out{{"value", value},
                          {"statistic", rmt::is_f_pipeline(cfg.pipeline) ? "W_p" : "X_p"},
                          {"ratio1", ci.ratio1},
                          {"ratio2", ci.ratio2},
                          {"centering", ci.value},
                          {"f", cfg.f.name()},
                          {"seed", seed}};
            std::cout << out.dump(2) << "\n";
            return exit_ok;
        }

        if (verify->parsed()) {
            rmt::cdouble z = parse_z_or_throw(z_text);
            auto law = parse_law_spec(law_text);
            std::vector<int> ns = parse_int_list(n_list);
            if (reps <= 0) reps = 200;
            echo_line("verify lemma=" + lemma + " z=" + rmt::format_complex(z) +
                      " y=" + std::to_string(y) + " reps=" + std::to_string(reps) +
                      " seed=" + std::to_string(seed));
            rmt::verifier_report rep;
            if (lemma == "4.1") {
                rep = shift_limit_report(z, y, ns);
            } else if (lemma == "4.2") {
                rep = rmt::verify_quadform(z, y, law, ns, reps, seed);
            } else if (lemma == "4.3") {
                rep = rmt::verify_trace_delta(z, y, law, ns, reps, seed);
            } else if (lemma == "4.4") {
                rep = rmt::verify_delta_quadratic(z, y, law, ns, reps, seed);
            } else if (lemma == "4.6") {
                rep = rmt::verify_combined_correction(z, y, law, ns, reps, seed);
            } else if (lemma == "F" || lemma == "eqF") {
                if (p <= 0 || n <= 0 || N <= 0)
                    throw std::invalid_argument("verify F needs --p, --n (single value) and --N");
                rep = rmt::verify_f_decomposition(z, p, ns.size() == 1 ? ns[0] : n, N, law, reps, seed);
            } else if (lemma == "interlacing") {
                if (p <= 0) throw std::invalid_argument("verify interlacing needs --p and --n");
                int nn = ns.size() == 1 ? ns[0] : n;
                if (nn < 2) throw std::invalid_argument("verify interlacing needs n >= 2");
                auto shape = rmt::population_shape::identity(p);
                int violations = 0;
                for (int r = 0; r < reps; ++r) {
                    auto sample = rmt::make_sample<double>(p, nn, law, shape,
                                                           rmt::split_seed(seed, static_cast<std::uint64_t>(r)));
                    if (!rmt::verify_interlacing(sample, shape)) ++violations;
                }
                rep.lemma_id = "interlacing";
                rep.n_values = {nn};
                rep.reps = reps;
                rep.seed = seed;
                rep.pass = violations == 0;
                rep.pass_criteria = "zero interlacing/trace-bound violations";
                rep.worst_identity_error = violations;
            } else {
                throw std::invalid_argument("unknown lemma id: " + lemma);
            }
            std::cout << rmt::report_to_json(rep).dump(2) << "\n";
            return rep.pass ? exit_ok : exit_verdict;
        }

        if (experiment->parsed()) {
            rmt::experiment_config cfg = rmt::config_from_json(load_config_json(config_path));
            if (seed_given) cfg.master_seed = seed;
            echo_line("experiment config=" + config_path + " resolved: " +
                      rmt::config_to_json(cfg).dump() + " seed=" + std::to_string(cfg.master_seed));
            auto res = rmt::run_experiment(cfg);
            if (out_path.empty()) out_path = "results.json";
            rmt::persist_results(res, out_path);
            std::printf("PASS mean=%.6g se=%.3g variance=%.6g resampled=%d -> %s\n",
                        res.stats.mean, res.stats.se_mean, res.stats.variance, res.resampled,
                        out_path.c_str());
            return exit_ok;
        }

        if (compare->parsed()) {
            rmt::experiment_config a = rmt::config_from_json(load_config_json(config_a));
            rmt::experiment_config b = rmt::config_from_json(load_config_json(config_b));
            echo_line("compare a=" + config_a + " b=" + config_b);
            auto rep = rmt::compare_pipelines(a, b);
            if (!out_path.empty()) write_output(out_path, rmt::comparison_to_json(rep).dump(2) + "\n");
            if (rep.pass) {
                std::printf("PASS mean_diff=%.4g (%.2f se) var_ratio=%.4f ks_p=%.4f\n",
                            rep.mean_diff, std::abs(rep.mean_diff) / std::max(rep.mean_diff_se, 1e-300),
                            rep.var_ratio, rep.ks_p);
                return exit_ok;
            }
            std::printf("FAIL%s%s%s mean_diff=%.4g se=%.3g var_ratio=%.4f ks_p=%.4f\n",
                        rep.mean_ok ? "" : " mean-diff", rep.var_ok ? "" : " var-ratio",
                        rep.ks_ok ? "" : " ks", rep.mean_diff, rep.mean_diff_se, rep.var_ratio,
                        rep.ks_p);
            return exit_verdict;
        }

        if (bias->parsed()) {
            rmt::experiment_config cfg;
            if (!config_path.empty()) {
                cfg = rmt::config_from_json(load_config_json(config_path));
            } else {
                if (p <= 0 || n <= 0) throw std::invalid_argument("bias-demo needs --config or --p/--n");
                cfg.pipeline = rmt::pipeline_kind::cov_centralized;
                cfg.p = p;
                cfg.n = n;
                cfg.law_x = parse_law_spec(law_text);
                cfg.shape = rmt::population_shape::identity(p);
                cfg.f = parse_f_spec(f_text);
                cfg.reps = reps > 0 ? reps : 200;
                cfg.master_seed = seed;
            }
            if (seed_given) cfg.master_seed = seed;
            echo_line("bias-demo " + rmt::config_to_json(cfg).dump() +
                      " seed=" + std::to_string(cfg.master_seed));
            auto rep = rmt::bias_demonstration(cfg);
            rmt::json out{{"mean_correct", rep.mean_correct},
                          {"mean_wrong", rep.mean_wrong},
                          {"offset", rep.offset},
                          {"gap_bookkeeping", rep.gap_bookkeeping},
                          {"limit_prediction", rep.limit_prediction},
                          {"pan_diagnostic", rep.pan_diagnostic},
                          {"bookkeeping_error", rep.bookkeeping_error}};
            if (!out_path.empty()) write_output(out_path, out.dump(2) + "\n");
            std::printf("offset=%.10f limit=%.10f pan_diagnostic=%.10f bookkeeping_error=%.3g\n",
                        rep.offset, rep.limit_prediction, rep.pan_diagnostic, rep.bookkeeping_error);
            return exit_ok;
        }
    } catch (const rmt::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const rmt::schema_mismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const rmt::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_usage;
}

// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rmt/harness.hpp"
#include "rmt/json_io.hpp"
#include "rmt/parallel.hpp"

using namespace rmt;

namespace {

experiment_config small_cov_config() {
    experiment_config cfg;
    cfg.pipeline = pipeline_kind::cov_centralized;
    cfg.p = 40;
    cfg.n = 80;
    cfg.shape = population_shape::identity(40);
    cfg.f = test_function::monomial(1);
    cfg.reps = 400;
    cfg.master_seed = 0xAB12;
    return cfg;
}

}  // namespace

TEST_CASE("experiments are deterministic and schedule-independent", "[harness]") {
    auto cfg = small_cov_config();
    lss_options opts;
    opts.cross_check_density = false;
    auto r1 = run_experiment(cfg, opts);
    auto r2 = run_experiment(cfg, opts);
    REQUIRE(r1.samples == r2.samples);  // bit identical

    // forced single-thread run agrees with the parallel one
    if (setenv("RMT_THREADS", "1", 1) == 0) {
        auto r3 = run_experiment(cfg, opts);
        REQUIRE(r1.samples == r3.samples);
        unsetenv("RMT_THREADS");
    }
}

TEST_CASE("parallel for covers every index once", "[harness]") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
    for (int h : hits) REQUIRE(h == 1);
}

TEST_CASE("trace statistic has the Wishart mean and variance", "[harness]") {
    auto cfg = small_cov_config();
    lss_options opts;
    opts.cross_check_density = false;
    auto res = run_experiment(cfg, opts);
    // E tr S = p exactly, so the statistic is centered at 0
    REQUIRE(std::abs(res.stats.mean) < 3.0 * res.stats.se_mean);
    // Var(tr S) = 2p/(n-1) for real gaussian entries, identity shape
    double expect = 2.0 * cfg.p / (cfg.n - 1.0);
    REQUIRE(res.stats.variance == Catch::Approx(expect).epsilon(0.15));
    REQUIRE(res.resampled == 0);
}

TEST_CASE("scalar sanity: p = 1 reduces to a variance estimate", "[harness]") {
    experiment_config cfg;
    cfg.pipeline = pipeline_kind::cov_centralized;
    cfg.p = 1;
    cfg.n = 400;
    cfg.shape = population_shape::identity(1);
    cfg.f = test_function::monomial(1);
    cfg.reps = 500;
    cfg.master_seed = 9;
    lss_options opts;
    opts.cross_check_density = false;
    auto res = run_experiment(cfg, opts);
    REQUIRE(std::isfinite(res.stats.mean));
    REQUIRE(std::abs(res.stats.mean) < 3.0 * res.stats.se_mean);
}

TEST_CASE("self-comparison is exactly neutral", "[harness]") {
    auto cfg = small_cov_config();
    lss_options opts;
    opts.cross_check_density = false;
    auto rep = compare_pipelines(cfg, cfg, opts);
    REQUIRE(rep.mean_diff == 0.0);
    REQUIRE(rep.var_ratio == 1.0);
    REQUIRE(rep.ks_p == Catch::Approx(1.0));
    REQUIRE(rep.pass);
}

TEST_CASE("pipeline comparison at desk scale", "[harness]") {
    auto a = small_cov_config();
    a.reps = 600;
    auto b = a;
    b.pipeline = pipeline_kind::cov_simplified;
    b.convention = centering_convention::n_plain;
    b.master_seed = 0xCD34;  // independent draws
    lss_options opts;
    opts.cross_check_density = false;
    auto rep = compare_pipelines(a, b, opts);
    CAPTURE(rep.mean_diff, rep.mean_diff_se, rep.var_ratio, rep.ks_p);
    REQUIRE(rep.pass);
    // mismatched shapes must be rejected
    auto c = b;
    c.p = 41;
    c.shape = population_shape::identity(41);
    REQUIRE_THROWS_AS(compare_pipelines(a, c, opts), std::invalid_argument);
}

TEST_CASE("f pipelines run and compare", "[harness]") {
    experiment_config a;
    a.pipeline = pipeline_kind::f_centralized;
    a.p = 24;
    a.n = 48;
    a.N = 96;
    a.shape = population_shape::identity(24);
    a.f = test_function::monomial(1);
    a.reps = 300;
    a.master_seed = 51;
    auto b = a;
    b.pipeline = pipeline_kind::f_simplified;
    b.convention = centering_convention::n_plain;
    b.master_seed = 52;
    lss_options opts;
    opts.cross_check_density = false;
    auto rep = compare_pipelines(a, b, opts);
    CAPTURE(rep.mean_diff, rep.mean_diff_se, rep.var_ratio, rep.ks_p);
    REQUIRE(rep.pass);
}

TEST_CASE("gaussianity of the log statistic", "[harness]") {
    experiment_config cfg;
    cfg.pipeline = pipeline_kind::cov_centralized;
    cfg.p = 64;
    cfg.n = 256;
    cfg.shape = population_shape::identity(64);
    cfg.f = test_function::log();
    cfg.reps = 800;
    cfg.master_seed = 4242;
    lss_options opts;
    opts.cross_check_density = false;
    auto res = run_experiment(cfg, opts);
    auto verdict = gaussianity_report(res.samples);
    CAPTURE(verdict.stats.skewness, verdict.stats.excess_kurtosis, verdict.stats.ks_normal_p);
    REQUIRE(verdict.pass);
}

TEST_CASE("bias demonstration bookkeeping", "[harness]") {
    auto cfg = small_cov_config();
    cfg.reps = 100;
    cfg.f = test_function::monomial(2);
    auto rep = bias_demonstration(cfg);
    // offset = p^2/(n(n-1)) for f = x^2, identity shape
    double expect = 1600.0 / (80.0 * 79.0);
    REQUIRE(std::abs(rep.offset - expect) < 1e-10);
    REQUIRE(rep.bookkeeping_error < 1e-10);
    REQUIRE(rep.limit_prediction == Catch::Approx(0.25).margin(1e-7));
    REQUIRE(std::isfinite(rep.pan_diagnostic));

    // the offset is data-free: a different entry law gives the same value
    auto cfg3 = cfg;
    cfg3.law_x = entry_law::real_three_point();
    auto rep3 = bias_demonstration(cfg3);
    REQUIRE(rep3.offset == Catch::Approx(rep.offset).margin(1e-12));

    // f = x: the gap vanishes at every ratio
    auto cfgx = cfg;
    cfgx.f = test_function::monomial(1);
    auto repx = bias_demonstration(cfgx);
    REQUIRE(std::abs(repx.offset) < 1e-9);
}

TEST_CASE("results persist and reload exactly", "[harness]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rmt_harness_io";
    fs::create_directories(dir);
    auto path = (dir / "run.json").string();

    auto cfg = small_cov_config();
    cfg.reps = 50;
    lss_options opts;
    opts.cross_check_density = false;
    auto res = run_experiment(cfg, opts);
    persist_results(res, path);

    auto back = load_results(path);
    REQUIRE(back.samples == res.samples);
    REQUIRE(back.config.master_seed == cfg.master_seed);
    REQUIRE(back.config.p == cfg.p);

    // companion CSV: header plus one row per replication
    std::ifstream csv(csv_companion_path(path));
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    REQUIRE(header == "index,seed,value");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++rows;
    REQUIRE(rows == cfg.reps);

    // tampering with the stored config trips the hash check
    {
        std::ifstream in(path);
        json doc;
        in >> doc;
        doc["config"]["n"] = 81;
        std::ofstream out(path);
        out << doc.dump();
    }
    REQUIRE_THROWS_AS(load_results(path), schema_mismatch);

    std::ofstream(dir / "corrupt.json") << "{\"schema_version\": 99}";
    REQUIRE_THROWS_AS(load_results((dir / "corrupt.json").string()), schema_mismatch);
    std::ofstream(dir / "garbage.json") << "not json at all";
    REQUIRE_THROWS_AS(load_results((dir / "garbage.json").string()), schema_mismatch);
    REQUIRE_THROWS_AS(load_results((dir / "missing.json").string()), io_error);
    fs::remove_all(dir);
}

TEST_CASE("config json round trip", "[harness]") {
    experiment_config cfg;
    cfg.pipeline = pipeline_kind::f_simplified;
    cfg.p = 12;
    cfg.n = 30;
    cfg.N = 40;
    cfg.law_x = entry_law::real_three_point();
    cfg.law_y = entry_law::complex_gaussian();
    cfg.shape = population_shape::two_level(12, 2.0, 0.5);
    cfg.f = test_function::polynomial({0.0, 1.0, 0.5});
    cfg.reps = 77;
    cfg.master_seed = 0xFEEDFACE;
    cfg.convention = centering_convention::n_plain;

    auto j = config_to_json(cfg);
    auto back = config_from_json(j);
    REQUIRE(config_to_json(back) == j);
    REQUIRE(config_hash(back) == config_hash(cfg));

    experiment_config bad = cfg;
    bad.p = 0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    experiment_config badf = cfg;
    badf.N = 12;  // p > N - 1
    REQUIRE_THROWS_AS(badf.validate(), std::invalid_argument);
}

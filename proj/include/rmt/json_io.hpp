// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rmt/harness.hpp"
#include "rmt/lemma_checks.hpp"
#include "rmt/stieltjes.hpp"

namespace rmt {

using json = nlohmann::json;

inline json to_json(cdouble z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline cdouble complex_from_json(const json& j) {
    return cdouble(j.at("re").get<double>(), j.at("im").get<double>());
}

inline std::string pipeline_name(pipeline_kind k) {
    switch (k) {
        case pipeline_kind::cov_centralized: return "cov-centralized";
        case pipeline_kind::cov_simplified: return "cov-simplified";
        case pipeline_kind::f_centralized: return "f-centralized";
        default: return "f-simplified";
    }
}

inline pipeline_kind pipeline_from_name(const std::string& s) {
    if (s == "cov-centralized") return pipeline_kind::cov_centralized;
    if (s == "cov-simplified") return pipeline_kind::cov_simplified;
    if (s == "f-centralized") return pipeline_kind::f_centralized;
    if (s == "f-simplified") return pipeline_kind::f_simplified;
    throw std::invalid_argument("unknown pipeline: " + s);
}

inline json law_to_json(const entry_law& law) {
    switch (law.kind()) {
        case entry_law_kind::real_gaussian: return json{{"kind", "real-gaussian"}};
        case entry_law_kind::complex_gaussian: return json{{"kind", "complex-gaussian"}};
        case entry_law_kind::real_three_point: return json{{"kind", "real-threepoint"}};
        default:
            return json{{"kind", "custom-discrete"},
                        {"values", law.custom_values()},
                        {"probs", law.custom_probs()}};
    }
}

inline entry_law law_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "real-gaussian") return entry_law::real_gaussian();
    if (kind == "complex-gaussian") return entry_law::complex_gaussian();
    if (kind == "real-threepoint") return entry_law::real_three_point();
    if (kind == "custom-discrete")
        return entry_law::custom_discrete(j.at("values").get<std::vector<double>>(),
                                          j.at("probs").get<std::vector<double>>());
    throw std::invalid_argument("unknown entry law: " + kind);
}

inline json shape_to_json(const population_shape& s) {
    if (s.is_identity()) return json{{"kind", "identity"}, {"p", s.dim()}};
    return json{{"kind", "diagonal"}, {"diag_values", s.diag()}};
}

inline population_shape shape_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return population_shape::identity(j.at("p").get<int>());
    if (kind == "diagonal")
        return population_shape::diagonal(j.at("diag_values").get<std::vector<double>>());
    throw std::invalid_argument("unknown shape: " + kind);
}

inline json f_to_json(const test_function& f) {
    switch (f.kind()) {
        case test_function_kind::logarithm: return json{{"kind", "log"}};
        case test_function_kind::exponential: return json{{"kind", "exp"}};
        default: return json{{"kind", "polynomial"}, {"coefficients", f.coefficients()}};
    }
}

inline test_function f_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "log") return test_function::log();
    if (kind == "exp") return test_function::exp();
    if (kind == "polynomial")
        return test_function::polynomial(j.at("coefficients").get<std::vector<double>>());
    throw std::invalid_argument("unknown test function: " + kind);
}

inline json config_to_json(const experiment_config& c) {
    return json{{"pipeline", pipeline_name(c.pipeline)},
                {"p", c.p},
                {"n", c.n},
                {"N", c.N},
                {"law_x", law_to_json(c.law_x)},
                {"law_y", law_to_json(c.law_y)},
                {"shape", shape_to_json(c.shape)},
                {"f", f_to_json(c.f)},
                {"reps", c.reps},
                {"master_seed", c.master_seed},
                {"centering_convention",
                 c.convention == centering_convention::nminus1 ? "nminus1" : "n"}};
}

inline experiment_config config_from_json(const json& j) {
    experiment_config c;
    c.pipeline = pipeline_from_name(j.at("pipeline").get<std::string>());
    c.p = j.at("p").get<int>();
    c.n = j.at("n").get<int>();
    c.N = j.value("N", 0);
    if (j.contains("law_x")) c.law_x = law_from_json(j.at("law_x"));
    if (j.contains("law_y")) c.law_y = law_from_json(j.at("law_y"));
    c.shape = j.contains("shape") ? shape_from_json(j.at("shape"))
                                  : population_shape::identity(c.p);
    if (j.contains("f")) c.f = f_from_json(j.at("f"));
    c.reps = j.at("reps").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    const std::string conv = j.value("centering_convention", "nminus1");
    if (conv == "nminus1")
        c.convention = centering_convention::nminus1;
    else if (conv == "n")
        c.convention = centering_convention::n_plain;
    else
        throw std::invalid_argument("unknown centering convention: " + conv);
    return c;
}

inline json stats_to_json(const summary_stats& s) {
    return json{{"reps", s.reps},
                {"mean", s.mean},
                {"variance", s.variance},
                {"skewness", s.skewness},
                {"excess_kurtosis", s.excess_kurtosis},
                {"se_mean", s.se_mean},
                {"se_variance", s.se_variance},
                {"se_skewness", s.se_skewness},
                {"se_kurtosis", s.se_kurtosis},
                {"ks_normal_p", s.ks_normal_p}};
}

inline json report_to_json(const verifier_report& r) {
    json estimates = json::array();
    for (auto e : r.estimates) estimates.push_back(to_json(e));
    return json{{"lemma_id", r.lemma_id},
                {"n_values", r.n_values},
                {"estimates", estimates},
                {"mse", r.mse},
                {"mse_aux", r.mse_aux},
                {"predicted_limit", to_json(r.predicted_limit)},
                {"rate_ratios", r.rate_ratios},
                {"worst_identity_error", r.worst_identity_error},
                {"pass", r.pass},
                {"reps", r.reps},
                {"seed", r.seed},
                {"resampled", r.resampled},
                {"pass_criteria", r.pass_criteria}};
}

inline json comparison_to_json(const comparison_report& r) {
    return json{{"stats_a", stats_to_json(r.stats_a)},
                {"stats_b", stats_to_json(r.stats_b)},
                {"mean_diff", r.mean_diff},
                {"mean_diff_se", r.mean_diff_se},
                {"var_ratio", r.var_ratio},
                {"var_ratio_se", r.var_ratio_se},
                {"two_sample_ks_p", r.ks_p},
                {"thresholds",
                 {{"mean_sigmas", r.mean_threshold_sigmas},
                  {"var_ratio_lo", r.var_ratio_lo},
                  {"var_ratio_hi", r.var_ratio_hi},
                  {"ks_alpha", r.ks_alpha}}},
                {"mean_ok", r.mean_ok},
                {"var_ok", r.var_ok},
                {"ks_ok", r.ks_ok},
                {"pass", r.pass}};
}

inline json companion_to_json(const companion_value& cv) {
    return json{{"z", to_json(cv.z)},
                {"m_under", to_json(cv.m_under)},
                {"m", to_json(cv.m)},
                {"y", cv.y},
                {"residual", cv.residual}};
}

// FNV-1a over the canonical (sorted-key) dump; stored with results so a load
// can detect configs edited after the fact.
inline std::uint64_t config_hash(const experiment_config& c) {
    std::string dump = config_to_json(c).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string csv_companion_path(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return path.substr(0, path.size() - 5) + ".csv";
    return path + ".csv";
}

// Results file: versioned JSON (exact-round-trip samples) plus a plot-ready
// CSV with one row per replication.
inline void persist_results(const experiment_result& res, const std::string& path) {
    json doc{{"schema_version", 1},
             {"config", config_to_json(res.config)},
             {"config_hash", config_hash(res.config)},
             {"samples", res.samples},
             {"rep_seeds", res.rep_seeds},
             {"stats", stats_to_json(res.stats)},
             {"seed", res.config.master_seed},
             {"centering", res.centering},
             {"ratio1", res.ratio1},
             {"ratio2", res.ratio2},
             {"resampled", res.resampled},
             {"timestamp", static_cast<std::int64_t>(
                               std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count())}};
    std::ofstream out(path);
    if (!out) throw io_error("persist_results: cannot open " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw io_error("persist_results: write failed for " + path);

    std::ofstream csv(csv_companion_path(path));
    if (!csv) throw io_error("persist_results: cannot open " + csv_companion_path(path));
    csv << "index,seed,value\n";
    csv.precision(17);
    for (std::size_t i = 0; i < res.samples.size(); ++i)
        csv << i << "," << res.rep_seeds[i] << "," << res.samples[i] << "\n";
}

inline experiment_result load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_results: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw schema_mismatch(std::string("load_results: unparseable results file: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema_version", -1) != 1)
        throw schema_mismatch("load_results: missing or unsupported schema_version");

    experiment_result res;
    try {
        res.config = config_from_json(doc.at("config"));
        if (doc.contains("config_hash") &&
            doc.at("config_hash").get<std::uint64_t>() != config_hash(res.config))
            throw schema_mismatch("load_results: config hash mismatch");
        res.samples = doc.at("samples").get<std::vector<double>>();
        res.rep_seeds = doc.value("rep_seeds", std::vector<std::uint64_t>{});
        res.centering = doc.value("centering", 0.0);
        res.ratio1 = doc.value("ratio1", 0.0);
        res.ratio2 = doc.value("ratio2", 0.0);
        res.resampled = doc.value("resampled", 0);
        res.stats = summarize(res.samples);
    } catch (const json::exception& e) {
        throw schema_mismatch(std::string("load_results: malformed results file: ") + e.what());
    }
    return res;
}

}  // namespace rmt

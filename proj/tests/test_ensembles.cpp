// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rmt/density.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/lemma_checks.hpp"
#include "rmt/matrix_io.hpp"

using namespace rmt;

TEST_CASE("three-point law moments", "[ensembles]") {
    // exact: E X^2 = 2 (1/6) 3 = 1, E X^4 = 2 (1/6) 9 = 3
    auto law = entry_law::real_three_point();
    REQUIRE(law.fourth_abs_moment() == 3.0);
    REQUIRE(law.beta() == 0.0);
    splitmix64 g(99);
    const int n = 1'000'000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        double x = law.sample_real(g);
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    s1 /= n;
    s2 /= n;
    s4 /= n;
    // 3 standard errors: Var(X)=1, Var(X^2)=EX^4-1=2, Var(X^4)=EX^8-9=18
    REQUIRE(std::abs(s1) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(s2 - 1.0) < 3.0 * std::sqrt(2.0 / n));
    REQUIRE(std::abs(s4 - 3.0) < 3.0 * std::sqrt(18.0 / n));
}

TEST_CASE("gaussian laws and custom laws validate", "[ensembles]") {
    REQUIRE(entry_law::real_gaussian().fourth_abs_moment() == 3.0);
    REQUIRE(entry_law::real_gaussian().kappa() == 2);
    REQUIRE(entry_law::complex_gaussian().fourth_abs_moment() == 2.0);
    REQUIRE(entry_law::complex_gaussian().kappa() == 1);
    REQUIRE(entry_law::complex_gaussian().second_raw_moment() == cdouble(0.0, 0.0));

    // complex gaussian: empirical E X^2 near 0, E |X|^2 near 1
    auto law = entry_law::complex_gaussian();
    splitmix64 g(3);
    cdouble sum2 = 0;
    double abs2 = 0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        cdouble x = law.sample_complex(g);
        sum2 += x * x;
        abs2 += std::norm(x);
    }
    REQUIRE(std::abs(sum2) / n < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(abs2 / n - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));

    REQUIRE_THROWS_AS(entry_law::custom_discrete({1.0, -1.0}, {0.6, 0.3}), std::invalid_argument);
    REQUIRE_THROWS_AS(entry_law::custom_discrete({1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
    auto rademacher = entry_law::custom_discrete({1.0, -1.0}, {0.5, 0.5});
    REQUIRE(rademacher.fourth_abs_moment() == 1.0);
}

TEST_CASE("entry draws are reproducible bit for bit", "[ensembles]") {
    auto law = entry_law::real_gaussian();
    auto a = draw_entries<double>(13, 17, law, 42);
    auto b = draw_entries<double>(13, 17, law, 42);
    REQUIRE(a == b);
    auto c = draw_entries<double>(13, 17, law, 43);
    REQUIRE(a != c);
    REQUIRE_THROWS_AS(draw_entries<double>(4, 4, entry_law::complex_gaussian(), 1),
                      std::invalid_argument);
}

TEST_CASE("centralized covariance contracts", "[ensembles]") {
    auto shape = population_shape::identity(4);
    // equal columns: centering annihilates everything
    dense_matrix<double> x(4, 2);
    x.col(0) << 1, 2, 3, 4;
    x.col(1) = x.col(0);
    auto [s, eigs] = centralized_cov<double>(x, shape);
    REQUIRE(s.norm() < 1e-14);

    // column-shift invariance
    auto e = draw_entries<double>(6, 12, entry_law::real_gaussian(), 7);
    auto s1 = centralized_cov<double>(e, population_shape::identity(6)).first;
    dense_matrix<double> shifted = e;
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(6, -1.0, 2.5);
    for (int j = 0; j < shifted.cols(); ++j) shifted.col(j) += c;
    auto s2 = centralized_cov<double>(shifted, population_shape::identity(6)).first;
    REQUIRE((s1 - s2).norm() <= 1e-12 * s1.norm());

    // unbiasedness: E tr S = p
    const int p = 30, n = 60, reps = 400;
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
        auto er = draw_entries<double>(p, n, entry_law::real_gaussian(), split_seed(1234, r));
        acc += centralized_cov<double>(er, population_shape::identity(p)).first.trace();
    }
    acc /= reps;
    double se = std::sqrt(2.0 * p / (n - 1.0) / reps);
    REQUIRE(std::abs(acc - p) < 3.0 * se);
}

TEST_CASE("simplified covariance and delta", "[ensembles]") {
    auto shape = population_shape::identity(5);
    // single column: rank one, trace |T^(1/2)x|^2 / n
    dense_matrix<double> x(5, 1);
    x.col(0) << 1, -1, 2, 0, 1;
    auto [b, eigs] = simplified_cov<double>(x, shape);
    REQUIRE(eigs[0] == Catch::Approx(7.0 / 1.0));
    for (std::size_t i = 1; i < eigs.size(); ++i) REQUIRE(std::abs(eigs[i]) < 1e-12);

    // S = B - Delta on random draws, and the scaling identity
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto e = draw_entries<double>(8, 16, entry_law::real_three_point(), seed);
        auto sample = make_sample<double>(8, 16, entry_law::real_three_point(),
                                          population_shape::identity(8), seed);
        REQUIRE((sample.S - (sample.B - sample.Delta)).norm() <= 1e-12 * sample.B.norm());
        // S = (n/(n-1)) (B - n gbar gbar*)
        const int n = 16;
        dense_matrix<double> g = e / std::sqrt(static_cast<double>(n));
        Eigen::VectorXd gbar = g.rowwise().mean();
        dense_matrix<double> alt =
            (static_cast<double>(n) / (n - 1)) * (sample.B - n * (gbar * gbar.transpose()));
        REQUIRE((sample.S - alt).norm() <= 1e-12 * sample.B.norm());
    }

    // antithetic columns: mean vanishes, Delta = -B/(n-1)
    auto half = draw_entries<double>(6, 8, entry_law::real_gaussian(), 99);
    dense_matrix<double> anti(6, 16);
    anti << half, -half;
    auto delta = delta_matrix<double>(anti, population_shape::identity(6));
    auto bb = simplified_cov<double>(anti, population_shape::identity(6)).first;
    REQUIRE((delta + bb / 15.0).norm() <= 1e-12 * bb.norm());

    // Delta has at most one eigenvalue above the shifted bulk -B/(n-1)
    auto e2 = draw_entries<double>(10, 20, entry_law::real_gaussian(), 5);
    auto d2 = delta_matrix<double>(e2, population_shape::identity(10));
    auto b2 = simplified_cov<double>(e2, population_shape::identity(10)).first;
    auto d_eigs = hermitian_eigs<double>(d2);
    double bulk_top = -hermitian_eigs<double>(b2).back() / 19.0;
    int above = 0;
    for (double v : d_eigs)
        if (v > bulk_top + 1e-10) ++above;
    REQUIRE(above <= 1);
}

TEST_CASE("population shaping", "[ensembles]") {
    auto two = population_shape::two_level(10, 2.0, 0.5);
    auto esd = two.esd();
    REQUIRE(esd.atoms() == std::vector<double>{1.0, 2.0});
    REQUIRE(esd.weights()[0] == Catch::Approx(0.5));
    // E tr B = tr T
    const int p = 10, n = 40, reps = 300;
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
        auto e = draw_entries<double>(p, n, entry_law::real_gaussian(), split_seed(777, r));
        acc += simplified_cov<double>(e, two).first.trace();
    }
    REQUIRE(std::abs(acc / reps - 15.0) < 0.3);
    REQUIRE_THROWS_AS(population_shape::diagonal({1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("hermitian eigensolver contract", "[ensembles]") {
    dense_matrix<double> id = dense_matrix<double>::Identity(4, 4);
    auto ones = hermitian_eigs<double>(id);
    for (double v : ones) REQUIRE(v == Catch::Approx(1.0));

    dense_matrix<double> d = dense_matrix<double>::Zero(3, 3);
    d.diagonal() << 3, 1, 2;
    auto sorted = hermitian_eigs<double>(d);
    REQUIRE(sorted == std::vector<double>{3.0, 2.0, 1.0});

    auto e = draw_entries<double>(40, 40, entry_law::real_gaussian(), 1);
    dense_matrix<double> sym = 0.5 * (e + e.transpose());
    auto eigs = hermitian_eigs<double>(sym);
    double tr = 0;
    for (double v : eigs) tr += v;
    REQUIRE(std::abs(tr - sym.trace()) <= 1e-11 * std::abs(sym.trace()) + 1e-11);

    // backward stability through the factorization itself
    Eigen::SelfAdjointEigenSolver<dense_matrix<double>> es(sym);
    dense_matrix<double> rec = es.eigenvectors() * es.eigenvalues().asDiagonal() *
                               es.eigenvectors().transpose();
    REQUIRE((rec - sym).norm() <= 1e-12 * sym.norm());

    dense_matrix<double> bad = e;  // not symmetric
    REQUIRE_THROWS_AS(hermitian_eigs<double>(bad), not_hermitian);
}

TEST_CASE("f-pair construction", "[ensembles]") {
    // same entries on both sides with n = N: F is the identity
    auto e = draw_entries<double>(6, 14, entry_law::real_gaussian(), 21);
    auto fp = build_f_pair<double>(e, e, population_shape::identity(6));
    for (double v : fp.eigs_F) REQUIRE(v == Catch::Approx(1.0).margin(1e-10));
    for (double v : fp.eigs_G) REQUIRE(v == Catch::Approx(1.0).margin(1e-10));

    // eigenvalues of F do not depend on the population shape
    auto ex = draw_entries<double>(8, 30, entry_law::real_gaussian(), 31);
    auto ey = draw_entries<double>(8, 40, entry_law::real_gaussian(), 32);
    auto fi = build_f_pair<double>(ex, ey, population_shape::identity(8));
    auto ft = build_f_pair<double>(ex, ey, population_shape::two_level(8, 2.0, 0.5));
    for (std::size_t i = 0; i < fi.eigs_F.size(); ++i) {
        REQUIRE(fi.eigs_F[i] == Catch::Approx(ft.eigs_F[i]).margin(1e-10));
        REQUIRE(fi.eigs_G[i] == Catch::Approx(ft.eigs_G[i]).margin(1e-10));
    }

    REQUIRE_THROWS_AS(build_f_pair<double>(ex, draw_entries<double>(8, 8, entry_law::real_gaussian(), 3),
                                           population_shape::identity(8)),
                      dimension_error);
}

TEST_CASE("interlacing after the rank-one downdate", "[ensembles]") {
    auto shape = population_shape::identity(2);
    auto tiny = make_sample<double>(2, 3, entry_law::real_gaussian(), shape, 8);
    REQUIRE(verify_interlacing(tiny, shape));

    auto shape50 = population_shape::identity(50);
    for (int r = 0; r < 200; ++r) {
        auto sample = make_sample<double>(50, 100, entry_law::real_gaussian(), shape50,
                                          split_seed(0x1A, static_cast<std::uint64_t>(r)));
        REQUIRE(verify_interlacing(sample, shape50));
    }

    // degenerate equal columns: the downdated matrix acquires a zero eigenvalue
    dense_matrix<double> x(3, 4);
    for (int j = 0; j < 4; ++j) x.col(j) << 1, 2, 1;
    matrix_sample<double> degen;
    degen.p = 3;
    degen.n = 4;
    degen.entries = x;
    auto shape3 = population_shape::identity(3);
    degen.B = simplified_cov<double>(x, shape3).first;
    degen.eigs_B = hermitian_eigs<double>(degen.B);
    REQUIRE(verify_interlacing(degen, shape3));
}

TEST_CASE("matrix dump round trip", "[ensembles]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rmt_matrix_io_test";
    fs::create_directories(dir);

    auto m = draw_entries<double>(5, 7, entry_law::real_gaussian(), 4);
    write_matrix<double>((dir / "real.bin").string(), m);
    REQUIRE(read_matrix<double>((dir / "real.bin").string()) == m);

    auto c = draw_entries<cdouble>(4, 3, entry_law::complex_gaussian(), 5);
    write_matrix<cdouble>((dir / "cplx.bin").string(), c);
    REQUIRE(read_matrix<cdouble>((dir / "cplx.bin").string()) == c);

    REQUIRE_THROWS_AS(read_matrix<cdouble>((dir / "real.bin").string()), schema_mismatch);
    std::ofstream((dir / "junk.bin").string()) << "not a matrix";
    REQUIRE_THROWS_AS(read_matrix<double>((dir / "junk.bin").string()), schema_mismatch);
    REQUIRE_THROWS_AS(read_matrix<double>((dir / "missing.bin").string()), io_error);
    fs::remove_all(dir);
}

TEST_CASE("simplified f-matrix spectrum tracks the f-lsd", "[ensembles]") {
    const int p = 50, n = 100, N = 200;
    auto ex = draw_entries<double>(p, n, entry_law::real_gaussian(), 1001);
    auto ey = draw_entries<double>(p, N, entry_law::real_gaussian(), 1002);
    auto fp = build_f_pair<double>(ex, ey, population_shape::identity(p));
    grid_density gd = invert_f_density(0.5, 0.25, 1024);

    std::vector<double> eigs = fp.eigs_G;
    std::sort(eigs.begin(), eigs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < eigs.size(); ++i) {
        double u = gd.cdf(eigs[i]);
        d = std::max(d, std::max((i + 1.0) / eigs.size() - u, u - static_cast<double>(i) / eigs.size()));
    }
    REQUIRE(d < 0.05);
}

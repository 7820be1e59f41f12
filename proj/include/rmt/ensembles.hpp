// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/rng.hpp"
#include "rmt/spectral_weights.hpp"

namespace rmt {

enum class entry_law_kind { real_gaussian, complex_gaussian, real_three_point, custom_discrete };

// Entry distribution for the data matrices: mean zero, unit absolute second
// moment, with the fourth-moment bookkeeping |EX^4| = beta + 1 + kappa
// (kappa = 2 real, 1 complex).
class entry_law {
  public:
    static entry_law real_gaussian() {
        entry_law l;
        l.kind_ = entry_law_kind::real_gaussian;
        l.fourth_abs_moment_ = 3.0;
        l.second_raw_moment_ = 1.0;
        l.kappa_ = 2;
        return l;
    }

    static entry_law complex_gaussian() {
        entry_law l;
        l.kind_ = entry_law_kind::complex_gaussian;
        l.fourth_abs_moment_ = 2.0;
        l.second_raw_moment_ = 0.0;
        l.kappa_ = 1;
        return l;
    }

    // +-sqrt(3) with probability 1/6 each, 0 with probability 2/3: the
    // simplest discrete law with EX^2 = 1 and EX^4 = 3.
    static entry_law real_three_point() {
        entry_law l;
        l.kind_ = entry_law_kind::real_three_point;
        l.fourth_abs_moment_ = 3.0;
        l.second_raw_moment_ = 1.0;
        l.kappa_ = 2;
        return l;
    }

    static entry_law custom_discrete(std::vector<double> values, std::vector<double> probs) {
        if (values.empty() || values.size() != probs.size())
            throw std::invalid_argument("entry_law: values/probs size mismatch");
        double total = 0, m1 = 0, m2 = 0, m4 = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(probs[i] > 0.0)) throw std::invalid_argument("entry_law: probabilities must be > 0");
            total += probs[i];
            m1 += probs[i] * values[i];
            m2 += probs[i] * values[i] * values[i];
            m4 += probs[i] * std::pow(values[i], 4);
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("entry_law: probabilities must sum to 1");
        if (std::abs(m1) > 1e-12) throw std::invalid_argument("entry_law: mean must be 0");
        if (std::abs(m2 - 1.0) > 1e-12) throw std::invalid_argument("entry_law: second moment must be 1");
        entry_law l;
        l.kind_ = entry_law_kind::custom_discrete;
        l.fourth_abs_moment_ = m4;
        l.second_raw_moment_ = m2;
        l.kappa_ = 2;
        l.values_ = std::move(values);
        std::vector<double> cum(probs.size());
        double acc = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = (acc += probs[i]);
        cum.back() = 1.0;
        l.cum_probs_ = std::move(cum);
        l.probs_ = std::move(probs);
        return l;
    }

    entry_law_kind kind() const { return kind_; }
    bool is_complex() const { return kind_ == entry_law_kind::complex_gaussian; }
    double fourth_abs_moment() const { return fourth_abs_moment_; }
    std::complex<double> second_raw_moment() const { return second_raw_moment_; }
    int kappa() const { return kappa_; }
    double beta() const { return fourth_abs_moment_ - 1.0 - kappa_; }
    const std::vector<double>& custom_values() const { return values_; }
    const std::vector<double>& custom_probs() const { return probs_; }

    double sample_real(splitmix64& g) const {
        switch (kind_) {
            case entry_law_kind::real_gaussian:
                return g.gaussian();
            case entry_law_kind::real_three_point: {
                double u = g.uniform();
                if (u < 1.0 / 6.0) return std::sqrt(3.0);
                if (u < 1.0 / 3.0) return -std::sqrt(3.0);
                return 0.0;
            }
            case entry_law_kind::custom_discrete: {
                double u = g.uniform();
                auto it = std::upper_bound(cum_probs_.begin(), cum_probs_.end(), u);
                std::size_t idx = std::min<std::size_t>(it - cum_probs_.begin(), values_.size() - 1);
                return values_[idx];
            }
            default:
                throw std::logic_error("entry_law: complex law sampled as real");
        }
    }

    std::complex<double> sample_complex(splitmix64& g) const {
        if (kind_ != entry_law_kind::complex_gaussian)
            return std::complex<double>(sample_real(g), 0.0);
        double re = g.gaussian(), im = g.gaussian();
        return std::complex<double>(re, im) / std::sqrt(2.0);
    }

  private:
    entry_law() = default;
    entry_law_kind kind_ = entry_law_kind::real_gaussian;
    double fourth_abs_moment_ = 3.0;
    std::complex<double> second_raw_moment_ = 1.0;
    int kappa_ = 2;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cum_probs_;
};

// Diagonal population shaping T_p. Keeping T_p diagonal makes its ESD an
// exact spectral_weights and the square root elementwise.
class population_shape {
  public:
    static population_shape identity(int p) {
        population_shape s;
        s.diag_.assign(static_cast<std::size_t>(p), 1.0);
        s.identity_ = true;
        return s;
    }

    static population_shape diagonal(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("population_shape: empty diagonal");
        for (double v : values)
            if (!(v > 0.0)) throw std::invalid_argument("population_shape: diagonal must be > 0");
        population_shape s;
        s.identity_ = std::all_of(values.begin(), values.end(), [](double v) { return v == 1.0; });
        s.diag_ = std::move(values);
        return s;
    }

    // diag(1,...,1, level,...,level) with the given fraction of raised entries
    static population_shape two_level(int p, double level, double raised_fraction) {
        std::vector<double> d(static_cast<std::size_t>(p), 1.0);
        auto raised = static_cast<std::size_t>(std::lround(raised_fraction * p));
        for (std::size_t i = d.size() - std::min(raised, d.size()); i < d.size(); ++i) d[i] = level;
        return diagonal(std::move(d));
    }

    int dim() const { return static_cast<int>(diag_.size()); }
    bool is_identity() const { return identity_; }
    const std::vector<double>& diag() const { return diag_; }

    spectral_weights esd() const {
        std::map<double, int> counts;
        for (double v : diag_) ++counts[v];
        std::vector<double> atoms, weights;
        for (auto& [v, c] : counts) {
            atoms.push_back(v);
            weights.push_back(static_cast<double>(c) / diag_.size());
        }
        return spectral_weights(std::move(atoms), std::move(weights));
    }

    // T^{1/2} M, rowwise scaling
    template <typename Derived>
    auto apply_sqrt(const Eigen::MatrixBase<Derived>& m) const {
        using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        Mat out = m;
        if (!identity_) {
            if (m.rows() != dim()) throw dimension_error("population_shape: dimension mismatch");
            for (int i = 0; i < out.rows(); ++i) out.row(i) *= std::sqrt(diag_[static_cast<std::size_t>(i)]);
        }
        return out;
    }

  private:
    std::vector<double> diag_;
    bool identity_ = true;
};

// i.i.d. entry matrix, p x n, deterministic for a given seed: entries are
// drawn column-major from a single splitmix64 stream.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> draw_entries(int p, int n,
                                                                   const entry_law& law,
                                                                   std::uint64_t seed) {
    if (p < 1 || n < 1) throw dimension_error("draw_entries: p, n must be >= 1");
    if constexpr (std::is_same_v<Scalar, double>) {
        if (law.is_complex()) throw std::invalid_argument("draw_entries: complex law needs complex scalar");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(p, n);
    splitmix64 g(seed);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < p; ++i) {
            if constexpr (std::is_same_v<Scalar, double>)
                m(i, j) = law.sample_real(g);
            else
                m(i, j) = law.sample_complex(g);
        }
    return m;
}

template <typename Scalar>
using dense_matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Full descending spectrum of a Hermitian matrix.
template <typename Scalar>
std::vector<double> hermitian_eigs(const dense_matrix<Scalar>& m) {
    if (m.rows() != m.cols()) throw not_hermitian("hermitian_eigs: matrix not square");
    double scale = m.norm();
    if ((m - m.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300))
        throw not_hermitian("hermitian_eigs: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<dense_matrix<Scalar>> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> eigs(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(eigs.begin(), eigs.end(), std::greater<>());
    return eigs;
}

// One realized draw: entry matrix, the centralized and simplified covariance
// matrices, their difference Delta, and both spectra. S is accumulated from
// mean-centered columns, B from raw columns and Delta from the rank-one
// formula, so S = B - Delta is a genuine floating-point identity rather than
// a definition.
template <typename Scalar>
struct matrix_sample {
    int p = 0, n = 0;
    std::uint64_t seed = 0;
    dense_matrix<Scalar> entries;  // p x n
    dense_matrix<Scalar> S, B, Delta;
    std::vector<double> eigs_S, eigs_B;
};

template <typename Scalar>
std::pair<dense_matrix<Scalar>, std::vector<double>> simplified_cov(
    const dense_matrix<Scalar>& entries, const population_shape& shape) {
    const int n = static_cast<int>(entries.cols());
    dense_matrix<Scalar> g = shape.apply_sqrt(entries) / std::sqrt(static_cast<double>(n));
    dense_matrix<Scalar> b = g * g.adjoint();
    b = ((b + b.adjoint()) * Scalar(0.5)).eval();
    return {b, hermitian_eigs<Scalar>(b)};
}

template <typename Scalar>
std::pair<dense_matrix<Scalar>, std::vector<double>> centralized_cov(
    const dense_matrix<Scalar>& entries, const population_shape& shape) {
    const int n = static_cast<int>(entries.cols());
    if (n < 2) throw dimension_error("centralized_cov: n >= 2 required");
    dense_matrix<Scalar> y = shape.apply_sqrt(entries);
    dense_matrix<Scalar> centered = y.colwise() - y.rowwise().mean();
    dense_matrix<Scalar> s = centered * centered.adjoint() / Scalar(static_cast<double>(n - 1));
    s = ((s + s.adjoint()) * Scalar(0.5)).eval();
    return {s, hermitian_eigs<Scalar>(s)};
}

// Delta = (n^2/(n-1)) gbar gbar* - B/(n-1), with gbar the mean of the scaled
// columns gamma_i = T^{1/2} X_i / sqrt(n); satisfies S = B - Delta.
template <typename Scalar>
dense_matrix<Scalar> delta_matrix(const dense_matrix<Scalar>& entries,
                                  const population_shape& shape) {
    const int n = static_cast<int>(entries.cols());
    if (n < 2) throw dimension_error("delta_matrix: n >= 2 required");
    dense_matrix<Scalar> g = shape.apply_sqrt(entries) / std::sqrt(static_cast<double>(n));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gbar = g.rowwise().mean();
    dense_matrix<Scalar> b = g * g.adjoint();
    const double c1 = static_cast<double>(n) * n / (n - 1.0);
    dense_matrix<Scalar> d = Scalar(c1) * (gbar * gbar.adjoint()) - b / Scalar(n - 1.0);
    return ((d + d.adjoint()) * Scalar(0.5)).eval();
}

template <typename Scalar>
matrix_sample<Scalar> make_sample(int p, int n, const entry_law& law,
                                  const population_shape& shape, std::uint64_t seed) {
    matrix_sample<Scalar> s;
    s.p = p;
    s.n = n;
    s.seed = seed;
    s.entries = draw_entries<Scalar>(p, n, law, seed);
    auto [B, eigsB] = simplified_cov<Scalar>(s.entries, shape);
    auto [S, eigsS] = centralized_cov<Scalar>(s.entries, shape);
    s.B = std::move(B);
    s.S = std::move(S);
    s.Delta = delta_matrix<Scalar>(s.entries, shape);
    s.eigs_B = std::move(eigsB);
    s.eigs_S = std::move(eigsS);
    return s;
}

// An (X, Y) draw with the two F-matrix spectra: eigs_F from the centralized
// pair, eigs_G from the simplified pair, both computed through the symmetric
// generalized eigenproblem (S_x v = lambda S_y v).
template <typename Scalar>
struct f_pair {
    matrix_sample<Scalar> sample_x;  // p x n
    matrix_sample<Scalar> sample_y;  // p x N
    std::vector<double> eigs_F, eigs_G;
};

namespace detail {

template <typename Scalar>
std::vector<double> generalized_spectrum(const dense_matrix<Scalar>& num,
                                         const dense_matrix<Scalar>& den) {
    double scale = den.norm();
    Eigen::SelfAdjointEigenSolver<dense_matrix<Scalar>> check(den, Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() <= 1e-10 * std::max(scale, 1e-300))
        throw singular_input("build_f_pair: S_y numerically singular");
    Eigen::GeneralizedSelfAdjointEigenSolver<dense_matrix<Scalar>> ges(num, den,
                                                                       Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    std::vector<double> eigs(ges.eigenvalues().data(), ges.eigenvalues().data() + num.rows());
    std::sort(eigs.begin(), eigs.end(), std::greater<>());
    return eigs;
}

}  // namespace detail

template <typename Scalar>
f_pair<Scalar> build_f_pair(const dense_matrix<Scalar>& entries_x,
                            const dense_matrix<Scalar>& entries_y, const population_shape& shape) {
    if (entries_x.rows() != entries_y.rows()) throw dimension_error("build_f_pair: row mismatch");
    const int p = static_cast<int>(entries_x.rows());
    const int N = static_cast<int>(entries_y.cols());
    if (p > N - 1) throw dimension_error("build_f_pair: p <= N - 1 required");

    f_pair<Scalar> fp;
    fp.sample_x.p = p;
    fp.sample_x.n = static_cast<int>(entries_x.cols());
    fp.sample_x.entries = entries_x;
    auto [Bx, eigsBx] = simplified_cov<Scalar>(entries_x, shape);
    auto [Sx, eigsSx] = centralized_cov<Scalar>(entries_x, shape);
    fp.sample_x.B = std::move(Bx);
    fp.sample_x.S = std::move(Sx);
    fp.sample_x.Delta = delta_matrix<Scalar>(entries_x, shape);
    fp.sample_x.eigs_B = std::move(eigsBx);
    fp.sample_x.eigs_S = std::move(eigsSx);

    fp.sample_y.p = p;
    fp.sample_y.n = N;
    fp.sample_y.entries = entries_y;
    auto [By, eigsBy] = simplified_cov<Scalar>(entries_y, shape);
    auto [Sy, eigsSy] = centralized_cov<Scalar>(entries_y, shape);
    fp.sample_y.B = std::move(By);
    fp.sample_y.S = std::move(Sy);
    fp.sample_y.Delta = delta_matrix<Scalar>(entries_y, shape);
    fp.sample_y.eigs_B = std::move(eigsBy);
    fp.sample_y.eigs_S = std::move(eigsSy);

    fp.eigs_F = detail::generalized_spectrum<Scalar>(fp.sample_x.S, fp.sample_y.S);
    fp.eigs_G = detail::generalized_spectrum<Scalar>(fp.sample_x.B, fp.sample_y.B);
    return fp;
}

}  // namespace rmt

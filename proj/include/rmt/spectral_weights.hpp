// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rmt {

// Discrete spectral distribution: atoms t_i >= 0 with positive weights
// summing to one. Population spectra and empirical eigenvalue measures are
// both carried in this form, so integrals against it are exact finite sums.
class spectral_weights {
  public:
    spectral_weights(std::vector<double> atoms, std::vector<double> weights)
        : atoms_(std::move(atoms)), weights_(std::move(weights)) {
        if (atoms_.empty() || atoms_.size() != weights_.size())
            throw std::invalid_argument("spectral_weights: need equally many atoms and weights, at least one");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!(atoms_[i] >= 0.0)) throw std::invalid_argument("spectral_weights: atoms must be >= 0");
            if (!(weights_[i] > 0.0)) throw std::invalid_argument("spectral_weights: weights must be > 0");
            total += weights_[i];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("spectral_weights: weights must sum to 1");
    }

    static spectral_weights point_mass(double t = 1.0) { return spectral_weights({t}, {1.0}); }

    // Equal-weight measure on a list of eigenvalues (mass 1/k each).
    static spectral_weights from_eigenvalues(const std::vector<double>& eigs) {
        if (eigs.empty()) throw std::invalid_argument("spectral_weights: empty eigenvalue list");
        std::vector<double> w(eigs.size(), 1.0 / static_cast<double>(eigs.size()));
        return spectral_weights(eigs, std::move(w));
    }

    template <typename F>
    auto integrate(F&& phi) const {
        auto acc = weights_[0] * phi(atoms_[0]);
        for (std::size_t i = 1; i < atoms_.size(); ++i) acc += weights_[i] * phi(atoms_[i]);
        return acc;
    }

    double mean() const {
        return integrate([](double t) { return t; });
    }

    double min_atom() const { return *std::min_element(atoms_.begin(), atoms_.end()); }
    double max_atom() const { return *std::max_element(atoms_.begin(), atoms_.end()); }

    double mass_at_zero() const {
        double m = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i] == 0.0) m += weights_[i];
        return m;
    }

    std::size_t size() const { return atoms_.size(); }
    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }

    bool is_point_mass_at_one() const {
        return atoms_.size() == 1 && atoms_[0] == 1.0;
    }

  private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
};

}  // namespace rmt

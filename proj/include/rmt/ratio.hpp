// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace rmt {

// Dimension-to-sample ratio. Either an exact p/n pair or a bare limiting
// value y. The "centralized" ratio of a (p, n) pair is p/(n-1).
class ratio {
  public:
    static ratio limit(double y) {
        if (y < 0.0) throw std::invalid_argument("ratio: limiting y must be >= 0");
        ratio r;
        r.value_ = y;
        return r;
    }

    static ratio of_counts(int p, int n) {
        if (p < 1 || n < 1) throw std::invalid_argument("ratio: p, n must be positive");
        ratio r;
        r.p_ = p;
        r.n_ = n;
        r.value_ = static_cast<double>(p) / n;
        return r;
    }

    // p/(n-1); only meaningful for count-backed ratios with n >= 2.
    ratio centralized() const {
        if (!has_counts()) throw std::logic_error("ratio: centralized() needs (p, n) counts");
        if (n_ < 2) throw std::invalid_argument("ratio: centralized() needs n >= 2");
        return of_counts(p_, n_ - 1);
    }

    double value() const { return value_; }
    bool has_counts() const { return n_ > 0; }
    int p() const { return p_; }
    int n() const { return n_; }

  private:
    ratio() = default;
    double value_ = 0.0;
    int p_ = 0;
    int n_ = 0;
};

}  // namespace rmt

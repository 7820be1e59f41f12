// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rmt {

// splitmix64 (Vigna 2015). Chosen over std engines because the entire entry
// stream must be bit-identical across platforms and standard library
// distributions are implementation-defined.
class splitmix64 {
  public:
    explicit splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1]; strictly positive so log() below is safe
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller; consumes exactly two uniforms per pair, no rejection, so the
    // stream layout is deterministic.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derives an independent stream seed from (master, index). Used to hand each
// Monte Carlo replication its own generator so results do not depend on the
// execution schedule.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    splitmix64 g(master ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    g.next();
    return g.next();
}

}  // namespace rmt

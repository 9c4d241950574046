#pragma once

#include <cstdint>
#include <random>

#include "dichoteq/linalg.hpp"

namespace dichoteq {

/// Seeded sample source. All randomness in pipelines and reports flows
/// through one instance so a fixed seed reproduces runs byte for byte.
class Sampler {
public:
    explicit Sampler(uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(rng_);
    }

    int index(int lo, int hi) { // inclusive
        std::uniform_int_distribution<int> d(lo, hi);
        return d(rng_);
    }

    Vec box(int dim, double radius) {
        Vec v(static_cast<size_t>(dim));
        for (double& x : v) x = uniform(-radius, radius);
        return v;
    }

    /// Direction with |u|_inf = 1.
    Vec unit_inf(int dim) {
        for (;;) {
            Vec v = box(dim, 1.0);
            const double n = inf_norm(v);
            if (n < 1e-3) continue;
            for (double& x : v) x /= n;
            return v;
        }
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace dichoteq

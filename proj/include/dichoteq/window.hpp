#pragma once

#include <string>

#include "dichoteq/errors.hpp"

namespace dichoteq {

/// Finite index window [n_min, n_max] on which coefficient sequences live.
/// Solution sequences extend one step further, to n_max + 1 (state indices),
/// since the last coefficient A_{n_max} maps index n_max to n_max + 1.
struct Window {
    int n_min = 0;
    int n_max = 0;

    Window() = default;
    Window(int lo, int hi) : n_min(lo), n_max(hi) {
        if (!(n_min < n_max))
            throw InvalidParams("window requires n_min < n_max, got [" + std::to_string(lo) +
                                "," + std::to_string(hi) + "]");
    }

    int length() const { return n_max - n_min; }

    bool contains_coeff(int n) const { return n >= n_min && n <= n_max; }
    bool contains_state(int n) const { return n >= n_min && n <= n_max + 1; }

    void require_coeff(int n) const {
        if (!contains_coeff(n))
            throw IndexOutOfWindow("index " + std::to_string(n) + " outside coefficient window [" +
                                   std::to_string(n_min) + "," + std::to_string(n_max) + "]");
    }
    void require_state(int n) const {
        if (!contains_state(n))
            throw IndexOutOfWindow("index " + std::to_string(n) + " outside state window [" +
                                   std::to_string(n_min) + "," + std::to_string(n_max + 1) + "]");
    }

    /// Number of indices frozen out on each side when taking the "outer 10%".
    int edge_span() const {
        const int s = (length() + 9) / 10;
        return s < 1 ? 1 : s;
    }

    /// Interior sub-window (middle fraction, default 80%): truncation effects
    /// are charged to the boundary bands.
    Window interior(double frac = 0.8) const {
        const int cut = static_cast<int>((1.0 - frac) * 0.5 * length() + 0.999999);
        int lo = n_min + cut, hi = n_max - cut;
        if (lo >= hi) { lo = n_min; hi = n_max; }
        return Window(lo, hi);
    }

    Window doubled() const {
        const int half = (length() + 1) / 2;
        return Window(n_min - half, n_max + half);
    }

    bool operator==(const Window& o) const { return n_min == o.n_min && n_max == o.n_max; }
};

} // namespace dichoteq

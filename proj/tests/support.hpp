#pragma once

#include <cmath>
#include <cstdint>

#include "netgain/linalg.hpp"
#include "netgain/matrix.hpp"

namespace testsupport {

/// Deterministic generator for test instances (splitmix64 core); kept
/// independent of the library's internals so oracle comparisons stay honest.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double canonical() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

inline netgain::Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0,
                                     double hi = 1.0) {
    netgain::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

/// Random square matrix rescaled to the requested spectral norm.
inline netgain::Matrix random_with_norm(Rng& rng, int n, double target_norm) {
    netgain::Matrix m = random_matrix(rng, n, n);
    const double s = netgain::spectral_norm(m);
    if (s == 0.0) return random_with_norm(rng, n, target_norm);
    return (target_norm / s) * m;
}

inline netgain::Vec random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
    netgain::Vec v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline netgain::Vec random_unit_vec(Rng& rng, int n) {
    netgain::Vec v = random_vec(rng, n);
    const double s = netgain::norm2(v);
    if (s < 1e-6) return random_unit_vec(rng, n);
    for (double& x : v) x /= s;
    return v;
}

}  // namespace testsupport

// Shared stability classification for equilibria (by eigenvalue real parts)
// and periodic orbits (by return-map multiplier).
#pragma once

#include <cmath>

namespace spherefsb {

enum class Stability { stable, unstable, marginal };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        default: return "marginal";
    }
}

// Classify from the largest eigenvalue real part; values within
// 1e-12 * omega0 of zero are indistinguishable from neutral at the working
// precision and are reported as marginal.
inline Stability classify_real_part(double max_re, double omega0) {
    if (std::abs(max_re) < 1e-12 * omega0) return Stability::marginal;
    return max_re < 0.0 ? Stability::stable : Stability::unstable;
}

// Classify a return-map multiplier against |m| = 1 with a 1e-10 dead band.
inline Stability classify_multiplier(double m) {
    const double mag = std::abs(m);
    if (mag < 1.0 - 1e-10) return Stability::stable;
    if (mag > 1.0 + 1e-10) return Stability::unstable;
    return Stability::marginal;
}

} // namespace spherefsb

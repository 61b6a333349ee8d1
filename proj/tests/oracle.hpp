#pragma once

// Brute-force references used by the tests. Deliberately written without the
// library's rounding helpers.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

enum class Snap { floor, nearest };

inline std::vector<double> uniform(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> quadratic(double hi, std::size_t n) {
    std::vector<double> v(n);
    const double r = std::sqrt(hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(n - 1);
        v[i] = u < 0 ? -u * u : u * u;
    }
    return v;
}

// Nearest value by linear scan; ties to the lower index.
inline std::size_t nearest_index(const std::vector<double>& v, double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(x - v[i]) < std::abs(x - v[best])) best = i;
    return best;
}

// Relative tolerance for "lands exactly on an edge".
inline double tol(const std::vector<double>& v) { return 1e-12 * (v.back() - v.front()); }

// Snap s onto v (which contains 0): clamp, then floor toward zero or nearest
// with ties going to the larger magnitude.
inline std::size_t snap(const std::vector<double>& v, double s, Snap mode) {
    const double eps = tol(v);
    if (s < v.front()) s = v.front();
    if (s > v.back()) s = v.back();
    std::size_t best = 0;
    bool have = false;
    if (mode == Snap::floor) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool same_side = v[i] == 0.0 || (v[i] > 0) == (s > 0);
            if (!same_side || std::abs(v[i]) > std::abs(s) + eps) continue;
            if (!have || std::abs(v[i]) > std::abs(v[best])) best = i, have = true;
        }
        return best;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!have) {
            best = i, have = true;
            continue;
        }
        const double d = std::abs(s - v[i]), db = std::abs(s - v[best]);
        if (d < db - eps || (std::abs(d - db) <= eps && std::abs(v[i]) > std::abs(v[best]))) best = i;
    }
    return best;
}

struct Pid {
    std::vector<double> pos, err, integ, der, out;
    double kp, ti, td, dt, decay;
    Snap mode;
    std::size_t i_bin;

    std::size_t step(double target, double meas, double deriv) {
        const double r = pos[nearest_index(pos, target)];
        const double y = pos[nearest_index(pos, meas)];
        const double d = der[nearest_index(der, deriv)];
        const double e = err[snap(err, r - y, mode)];
        i_bin = snap(integ, decay * integ[i_bin] + dt * e, mode);
        const double i = integ[i_bin];
        return snap(out, kp * e + (kp / ti) * i + (kp * td) * d, mode);
    }
};

}  // namespace oracle

#include "neuropid/value_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace neuropid {

std::string_view to_string(Distribution d) {
    return d == Distribution::uniform ? "uniform" : "quadratic";
}

Distribution parse_distribution(std::string_view name) {
    if (name == "uniform") return Distribution::uniform;
    if (name == "quadratic") return Distribution::quadratic;
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

std::string_view to_string(RoundingMode m) {
    return m == RoundingMode::nearest ? "nearest" : "floor";
}

RoundingMode parse_rounding_mode(std::string_view name) {
    if (name == "nearest") return RoundingMode::nearest;
    if (name == "floor" || name == "floor_toward_zero") return RoundingMode::floor_toward_zero;
    throw std::invalid_argument("unknown rounding mode '" + std::string(name) + "'");
}

ValueGrid ValueGrid::make(double lo, double hi, std::size_t n, Distribution distribution) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
        throw std::invalid_argument("value grid needs lo < hi");
    if (n < 2) throw std::invalid_argument("value grid needs at least two values");
    const bool symmetric = lo == -hi;
    if (distribution == Distribution::quadratic && !symmetric)
        throw std::invalid_argument("quadratic grid needs a symmetric range (lo == -hi)");

    std::vector<double> values(n);
    const double last = static_cast<double>(n - 1);
    if (distribution == Distribution::uniform) {
        for (std::size_t i = 0; i < n; ++i)
            values[i] = lo + (hi - lo) * (static_cast<double>(i) / last);
    } else {
        const double root = std::sqrt(hi);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = -root + 2.0 * root * (static_cast<double>(i) / last);
            values[i] = std::copysign(u * u, u);
        }
    }
    // Mirror the lower half so symmetric grids are exactly symmetric and odd
    // symmetric grids hold an exact zero.
    if (symmetric) {
        for (std::size_t i = 0; i < n / 2; ++i) values[n - 1 - i] = -values[i];
        if (n % 2 == 1) values[n / 2] = 0.0;
    }
    values.front() = lo;
    values.back() = hi;
    for (std::size_t i = 1; i < n; ++i)
        if (!(values[i - 1] < values[i]))
            throw std::invalid_argument("value grid resolution exceeds floating-point precision");
    return ValueGrid(std::move(values), distribution);
}

std::size_t ValueGrid::encode(double x) const noexcept {
    if (!(x > values_.front())) return 0;  // also maps NaN to bin 0
    if (x >= values_.back()) return values_.size() - 1;
    const auto it = std::lower_bound(values_.begin(), values_.end(), x);
    const auto upper = static_cast<std::size_t>(it - values_.begin());
    const std::size_t lower = upper - 1;
    return (x - values_[lower] <= values_[upper] - x) ? lower : upper;
}

double ValueGrid::decode(std::size_t i) const {
    if (i >= values_.size()) throw std::out_of_range("bin index outside value grid");
    return values_[i];
}

std::optional<std::size_t> ValueGrid::zero_index() const noexcept {
    const auto it = std::lower_bound(values_.begin(), values_.end(), 0.0);
    if (it == values_.end() || *it != 0.0) return std::nullopt;
    return static_cast<std::size_t>(it - values_.begin());
}

double ValueGrid::max_gap() const noexcept {
    double gap = 0.0;
    for (std::size_t i = 1; i < values_.size(); ++i) gap = std::max(gap, values_[i] - values_[i - 1]);
    return gap;
}

double ValueGrid::gap_at(std::size_t i) const noexcept {
    double gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = values_[i] - values_[i - 1];
    if (i + 1 < values_.size()) gap = std::min(gap, values_[i + 1] - values_[i]);
    return gap;
}

double magnitude_threshold(const ValueGrid& grid, std::size_t i, RoundingMode mode, bool slack) {
    const auto zero = grid.zero_index();
    if (!zero) throw std::invalid_argument("grid has no zero value");
    if (i == *zero) return 0.0;
    const double magnitude = std::abs(grid[i]);
    // Neighbour one step closer to zero on the same side.
    const double inner = std::abs(grid[i > *zero ? i - 1 : i + 1]);
    // Sums of grid values can land a few ulps short of a bin edge they hit
    // exactly in real arithmetic.
    const double below = slack ? kEdgeSlack * (magnitude - inner) : 0.0;
    if (mode == RoundingMode::floor_toward_zero) return magnitude - below;
    return (inner + magnitude) / 2.0 - below;
}

std::size_t ValueGrid::round(double s, RoundingMode mode) const {
    const auto zero = zero_index();
    if (!zero) throw std::invalid_argument("rounding onto a grid without a zero value");
    const std::size_t z = *zero;
    std::size_t best = z;
    if (s >= 0.0) {
        for (std::size_t k = z + 1; k < values_.size(); ++k) {
            if (s >= magnitude_threshold(*this, k, mode)) best = k;
            else break;
        }
    } else {
        const double t = -s;
        for (std::size_t k = z; k-- > 0;) {
            if (t >= magnitude_threshold(*this, k, mode)) best = k;
            else break;
        }
    }
    return best;
}

}  // namespace neuropid

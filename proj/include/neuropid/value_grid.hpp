#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neuropid {

enum class Distribution { uniform, quadratic };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view name);

/// How an arbitrary real is snapped onto a grid by an adder unit.
///
/// floor_toward_zero picks the largest-magnitude value v with |v| <= |s| and
/// the sign of s. nearest picks the value whose cell contains s, where cells
/// are bounded by the arithmetic midpoints of adjacent values and a sum lying
/// exactly on a midpoint goes to the larger-magnitude value.
enum class RoundingMode { floor_toward_zero, nearest };

std::string_view to_string(RoundingMode m);
RoundingMode parse_rounding_mode(std::string_view name);

/// Ordered set of values represented by a position-coded population.
///
/// One neuron per value; a real is represented by the single neuron whose
/// value is closest to it.
class ValueGrid {
public:
    /// Builds a uniform or quadratic grid over [lo, hi] with n values.
    ///
    /// Quadratic grids place sign(u)*u^2 for u uniform over
    /// [-sqrt(hi), sqrt(hi)] and therefore require lo == -hi.
    /// Throws std::invalid_argument on lo >= hi, n < 2, or an asymmetric
    /// quadratic range.
    static ValueGrid make(double lo, double hi, std::size_t n, Distribution distribution);

    std::size_t size() const noexcept { return values_.size(); }
    double lo() const noexcept { return values_.front(); }
    double hi() const noexcept { return values_.back(); }
    Distribution distribution() const noexcept { return distribution_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Index of the nearest value; ties go to the lower index and
    /// out-of-range inputs clamp to the end bins.
    std::size_t encode(double x) const noexcept;

    /// Value of bin i. Throws std::out_of_range when i >= size().
    double decode(std::size_t i) const;

    /// Index of the exact zero value, if the grid contains one.
    std::optional<std::size_t> zero_index() const noexcept;

    /// Largest distance between adjacent values.
    double max_gap() const noexcept;

    /// Distance from bin i to its nearest neighbour.
    double gap_at(std::size_t i) const noexcept;

    /// Clamps s to [lo, hi] and snaps it onto the grid with the given rule.
    /// Requires the grid to contain zero; throws std::invalid_argument otherwise.
    std::size_t round(double s, RoundingMode mode) const;

    friend bool operator==(const ValueGrid&, const ValueGrid&) = default;

private:
    ValueGrid(std::vector<double> values, Distribution distribution)
        : values_(std::move(values)), distribution_(distribution) {}

    std::vector<double> values_;
    Distribution distribution_;
};

inline ValueGrid make_grid(double lo, double hi, std::size_t n, Distribution distribution) {
    return ValueGrid::make(lo, hi, n, distribution);
}

/// Fraction of a cell by which every rounding boundary is lowered, so that
/// sums landing exactly on an edge count as reaching it despite rounding error.
inline constexpr double kEdgeSlack = 1e-9;

/// Lower rounding boundary of the magnitude |values[i]| for a nonzero value i,
/// measured on the magnitude axis of its sign side. For the zero bin this is 0.
///
/// This is the quantity an aggregate neuron compares its potential against.
/// `slack` lowers it by kEdgeSlack of the cell; integer thresholds skip it.
double magnitude_threshold(const ValueGrid& grid, std::size_t i, RoundingMode mode, bool slack = true);

}  // namespace neuropid

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neuropid/value_grid.hpp"

namespace neuropid {

/// Firing indicators of one population for one tick.
struct SpikePattern {
    std::vector<std::uint8_t> fired;

    static SpikePattern one_hot(std::size_t size, std::size_t index);

    std::size_t size() const noexcept { return fired.size(); }
    std::size_t count() const noexcept;
    /// Index of the single firing neuron, or nullopt unless exactly one fired.
    std::optional<std::size_t> winner() const noexcept;

    friend bool operator==(const SpikePattern&, const SpikePattern&) = default;
};

enum class Layer : std::uint8_t { input, aggregate_pos, aggregate_neg, reduce };

std::string_view to_string(Layer layer);
Layer parse_layer(std::string_view name);

/// Largest legal magnitude of a positive quantized weight.
inline constexpr int kWeightMax = 254;
/// Most negative legal quantized weight.
inline constexpr int kWeightMin = -256;

/// Maps a real weight onto the even-integer range [-256, 254]:
/// 2 * round(w * scale / 2), halves rounding away from zero, then clamped.
int quantize_weight(double w, int scale) noexcept;

/// Largest integer scale with max|w| * scale <= 254 (at least 1).
/// Throws std::invalid_argument when every weight is zero.
int choose_scale(std::span<const double> weights);

/// One operand of an adder: the population it reads, the sign it enters the
/// sum with and the gain fused into its synaptic weights.
struct AdderInput {
    ValueGrid grid;
    int sign = +1;
    double gain = 1.0;
};

/// Output of evaluating a unit for one tick.
struct UnitActivity {
    std::size_t output_bin = 0;
    /// Aggregate firing flags; positive sub-population first, then negative.
    std::vector<std::uint8_t> aggregate;
    std::vector<double> aggregate_potential;
    std::vector<double> reduce_potential;
};

/// Spiking adder/subtractor: aggregate layer (positive and negative
/// sub-populations) followed by a winner-takes-all reduce layer.
///
/// Local neuron layout is [aggregate-pos | aggregate-neg | reduce]. The
/// positive sub-population holds one neuron per output value >= 0 ordered by
/// magnitude, the negative one per value <= 0, so zero is represented twice
/// and the unit has 2 * N_out + 1 neurons. The reduce layer holds one neuron
/// per output bin in grid order.
class AdderUnit {
public:
    /// Builds the unit. Throws std::invalid_argument for an empty input list,
    /// an output grid without an exact zero, a sign other than +-1, or (when
    /// quantized) all-zero weights.
    AdderUnit(std::vector<AdderInput> inputs, ValueGrid output, RoundingMode mode, bool quantized = false);

    const std::vector<AdderInput>& inputs() const noexcept { return inputs_; }
    const ValueGrid& output() const noexcept { return output_; }
    RoundingMode mode() const noexcept { return mode_; }
    bool quantized() const noexcept { return quantized_; }
    /// Integer units per real unit; 0 for float weights.
    int scale() const noexcept { return scale_; }

    std::size_t neuron_count() const noexcept { return thresholds_.size(); }
    std::size_t positive_count() const noexcept { return positive_count_; }
    std::size_t negative_count() const noexcept { return negative_count_; }
    std::size_t aggregate_count() const noexcept { return positive_count_ + negative_count_; }
    std::size_t reduce_offset() const noexcept { return aggregate_count(); }
    /// Output bin represented by aggregate neuron j (local index).
    std::size_t aggregate_bin(std::size_t j) const noexcept;
    Layer layer_of(std::size_t local) const noexcept;

    double threshold(std::size_t local) const noexcept { return thresholds_[local]; }
    /// Weight from input g, bin i into each positive aggregate neuron.
    double positive_weight(std::size_t g, std::size_t i) const noexcept { return pos_weights_[g][i]; }
    /// Weight from input g, bin i into each negative aggregate neuron.
    double negative_weight(std::size_t g, std::size_t i) const noexcept { return neg_weights_[g][i]; }

    struct ReduceSynapse {
        std::uint32_t src;  // local aggregate index
        std::uint32_t dst;  // output bin
        double weight;
    };
    std::span<const ReduceSynapse> reduce_synapses() const noexcept { return reduce_synapses_; }
    double reduce_weight() const noexcept { return quantized_ ? 2.0 : 1.0; }

    /// Propagates one spike per input (given as bin indices) through the
    /// aggregate and reduce layers. Throws std::out_of_range on a bad bin and
    /// std::logic_error if the reduce layer does not produce exactly one spike.
    void propagate(std::span<const std::size_t> input_bins, UnitActivity& activity) const;
    std::size_t evaluate(std::span<const std::size_t> input_bins) const;

private:
    std::vector<AdderInput> inputs_;
    ValueGrid output_;
    RoundingMode mode_;
    bool quantized_;
    int scale_ = 0;
    std::size_t zero_ = 0;
    std::size_t positive_count_ = 0;
    std::size_t negative_count_ = 0;
    std::vector<double> thresholds_;
    std::vector<std::vector<double>> pos_weights_;
    std::vector<std::vector<double>> neg_weights_;
    std::vector<ReduceSynapse> reduce_synapses_;
    // CSR over reduce_synapses_ keyed by aggregate source.
    std::vector<std::uint32_t> reduce_begin_;
};

inline AdderUnit build_adder(std::vector<AdderInput> inputs, ValueGrid output, RoundingMode mode,
                             bool quantized = false) {
    return AdderUnit(std::move(inputs), std::move(output), mode, quantized);
}

struct UnitOutput {
    SpikePattern output;
    SpikePattern aggregate;
};

/// Evaluates a unit on one one-hot pattern per input.
/// Throws std::invalid_argument if a pattern is not one-hot or has the wrong size.
UnitOutput eval_unit(const AdderUnit& unit, std::span<const SpikePattern> inputs);

}  // namespace neuropid

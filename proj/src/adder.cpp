#include "neuropid/adder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace neuropid {

SpikePattern SpikePattern::one_hot(std::size_t size, std::size_t index) {
    if (index >= size) throw std::out_of_range("one-hot index outside population");
    SpikePattern p;
    p.fired.assign(size, 0);
    p.fired[index] = 1;
    return p;
}

std::size_t SpikePattern::count() const noexcept {
    return static_cast<std::size_t>(std::count_if(fired.begin(), fired.end(), [](auto f) { return f != 0; }));
}

std::optional<std::size_t> SpikePattern::winner() const noexcept {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < fired.size(); ++i) {
        if (!fired[i]) continue;
        if (found) return std::nullopt;
        found = i;
    }
    return found;
}

std::string_view to_string(Layer layer) {
    switch (layer) {
        case Layer::input: return "input";
        case Layer::aggregate_pos: return "aggregate-pos";
        case Layer::aggregate_neg: return "aggregate-neg";
        case Layer::reduce: return "reduce";
    }
    return "?";
}

Layer parse_layer(std::string_view name) {
    if (name == "input") return Layer::input;
    if (name == "aggregate-pos") return Layer::aggregate_pos;
    if (name == "aggregate-neg") return Layer::aggregate_neg;
    if (name == "reduce") return Layer::reduce;
    throw std::invalid_argument("unknown layer '" + std::string(name) + "'");
}

int quantize_weight(double w, int scale) noexcept {
    const double halves = std::round(w * static_cast<double>(scale) / 2.0);
    const double q = std::clamp(2.0 * halves, static_cast<double>(kWeightMin), static_cast<double>(kWeightMax));
    return static_cast<int>(q);
}

int choose_scale(std::span<const double> weights) {
    double largest = 0.0;
    for (double w : weights) largest = std::max(largest, std::abs(w));
    if (!(largest > 0.0)) throw std::invalid_argument("cannot scale an all-zero weight set");
    const double bound = static_cast<double>(kWeightMax);
    double scale = std::floor(bound / largest);
    while (scale > 1.0 && scale * largest > bound) scale -= 1.0;
    while ((scale + 1.0) * largest <= bound) scale += 1.0;
    if (scale > static_cast<double>(std::numeric_limits<int>::max() / 4))
        throw std::invalid_argument("weights too small to scale");
    return std::max(1, static_cast<int>(scale));
}

AdderUnit::AdderUnit(std::vector<AdderInput> inputs, ValueGrid output, RoundingMode mode, bool quantized)
    : inputs_(std::move(inputs)), output_(std::move(output)), mode_(mode), quantized_(quantized) {
    if (inputs_.empty()) throw std::invalid_argument("adder needs at least one input");
    const auto zero = output_.zero_index();
    if (!zero) throw std::invalid_argument("adder output grid must contain an exact zero");
    zero_ = *zero;
    for (const auto& in : inputs_) {
        if (in.sign != 1 && in.sign != -1) throw std::invalid_argument("adder input sign must be +1 or -1");
        if (!std::isfinite(in.gain)) throw std::invalid_argument("adder input gain must be finite");
    }

    const std::size_t n = output_.size();
    positive_count_ = n - zero_;
    negative_count_ = zero_ + 1;

    // Real-valued input weights: gain * sign * value into the positive group.
    std::vector<double> all;
    pos_weights_.resize(inputs_.size());
    for (std::size_t g = 0; g < inputs_.size(); ++g) {
        const auto& in = inputs_[g];
        const double sign = static_cast<double>(in.sign);
        for (double v : in.grid.values()) {
            pos_weights_[g].push_back(in.gain * sign * v);
            all.push_back(pos_weights_[g].back());
        }
    }
    if (quantized_) {
        scale_ = choose_scale(all);
        for (auto& row : pos_weights_)
            for (auto& w : row) w = static_cast<double>(quantize_weight(w, scale_));
    }
    neg_weights_ = pos_weights_;
    for (auto& row : neg_weights_)
        for (auto& w : row) w = -w;

    thresholds_.assign(2 * n + 1, 0.0);
    for (std::size_t j = 0; j < aggregate_count(); ++j) {
        const std::size_t bin = aggregate_bin(j);
        double t = magnitude_threshold(output_, bin, mode_, !quantized_);
        const bool negative_zero = j == positive_count_;
        if (quantized_) {
            t = std::round(t * static_cast<double>(scale_));
            // Nonzero values keep a positive threshold so a zero sum cannot reach them.
            if (bin != zero_ || negative_zero) t = std::max(t, 1.0);
        } else if (negative_zero) {
            // Fires only for a strictly negative sum.
            t = std::numeric_limits<double>::denorm_min();
        }
        thresholds_[j] = t;
    }
    for (std::size_t k = 0; k < n; ++k) thresholds_[reduce_offset() + k] = reduce_weight();

    // Each aggregate neuron excites the reduce neuron of its own value and
    // inhibits the reduce neuron one step closer to zero.
    const double w = reduce_weight();
    reduce_begin_.push_back(0);
    for (std::size_t j = 0; j < aggregate_count(); ++j) {
        const std::size_t bin = aggregate_bin(j);
        reduce_synapses_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(bin), w});
        if (bin != zero_) {
            const std::size_t inner = bin > zero_ ? bin - 1 : bin + 1;
            reduce_synapses_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(inner), -w});
        }
        reduce_begin_.push_back(static_cast<std::uint32_t>(reduce_synapses_.size()));
    }
}

std::size_t AdderUnit::aggregate_bin(std::size_t j) const noexcept {
    return j < positive_count_ ? zero_ + j : zero_ - (j - positive_count_);
}

Layer AdderUnit::layer_of(std::size_t local) const noexcept {
    if (local < positive_count_) return Layer::aggregate_pos;
    if (local < aggregate_count()) return Layer::aggregate_neg;
    return Layer::reduce;
}

void AdderUnit::propagate(std::span<const std::size_t> input_bins, UnitActivity& act) const {
    if (input_bins.size() != inputs_.size()) throw std::invalid_argument("wrong number of adder inputs");
    const std::size_t agg = aggregate_count();
    act.aggregate_potential.assign(agg, 0.0);
    act.aggregate.assign(agg, 0);
    act.reduce_potential.assign(output_.size(), 0.0);

    for (std::size_t g = 0; g < inputs_.size(); ++g) {
        const std::size_t i = input_bins[g];
        if (i >= inputs_[g].grid.size()) throw std::out_of_range("adder input bin outside its grid");
        const double wp = pos_weights_[g][i];
        const double wn = neg_weights_[g][i];
        for (std::size_t j = 0; j < positive_count_; ++j) act.aggregate_potential[j] += wp;
        for (std::size_t j = positive_count_; j < agg; ++j) act.aggregate_potential[j] += wn;
    }

    for (std::size_t j = 0; j < agg; ++j) {
        if (act.aggregate_potential[j] < thresholds_[j]) continue;
        act.aggregate[j] = 1;
        for (auto s = reduce_begin_[j]; s < reduce_begin_[j + 1]; ++s)
            act.reduce_potential[reduce_synapses_[s].dst] += reduce_synapses_[s].weight;
    }

    std::size_t winners = 0;
    const double threshold = reduce_weight();
    for (std::size_t k = 0; k < output_.size(); ++k) {
        if (act.reduce_potential[k] >= threshold) {
            act.output_bin = k;
            ++winners;
        }
    }
    if (winners != 1)
        throw std::logic_error("reduce layer produced " + std::to_string(winners) + " spikes");
}

std::size_t AdderUnit::evaluate(std::span<const std::size_t> input_bins) const {
    UnitActivity act;
    propagate(input_bins, act);
    return act.output_bin;
}

UnitOutput eval_unit(const AdderUnit& unit, std::span<const SpikePattern> inputs) {
    if (inputs.size() != unit.inputs().size()) throw std::invalid_argument("wrong number of input patterns");
    std::vector<std::size_t> bins;
    bins.reserve(inputs.size());
    for (std::size_t g = 0; g < inputs.size(); ++g) {
        if (inputs[g].size() != unit.inputs()[g].grid.size())
            throw std::invalid_argument("input pattern size does not match its grid");
        const auto w = inputs[g].winner();
        if (!w) throw std::invalid_argument("input pattern is not one-hot");
        bins.push_back(*w);
    }
    UnitActivity act;
    unit.propagate(bins, act);
    UnitOutput out;
    out.output = SpikePattern::one_hot(unit.output().size(), act.output_bin);
    out.aggregate.fired = std::move(act.aggregate);
    return out;
}

}  // namespace neuropid

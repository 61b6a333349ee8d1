#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "neuropid/adder.hpp"
#include "neuropid/value_grid.hpp"

namespace neuropid {

struct NeuronSpec {
    int id = 0;
    Layer layer = Layer::input;
    double threshold = 0.0;
};

struct SynapseSpec {
    int src = 0;
    int dst = 0;
    double weight = 0.0;
    int delay = 0;  // 0 feed-forward, 1 recurrent
};

/// An input population: one neuron per bin of grids[grid], in bin order.
struct PopulationSpec {
    std::string name;
    std::size_t grid = 0;
    std::vector<int> neurons;
};

struct UnitSpec {
    std::string name;
    std::size_t output_grid = 0;
    int scale = 0;
    int first_neuron = 0;
    int neuron_count = 0;
    /// Reduce neuron ids in output-bin order.
    std::vector<int> reduce;
};

struct NetlistMeta {
    RoundingMode mode = RoundingMode::nearest;
    bool quantized = false;
    std::vector<ValueGrid> grids;
    std::vector<PopulationSpec> populations;
    std::vector<UnitSpec> units;
    /// Neurons treated as having fired on the tick before the first one.
    std::vector<int> initial_spikes;
};

struct Netlist {
    std::vector<NeuronSpec> neurons;
    std::vector<SynapseSpec> synapses;
    NetlistMeta meta;

    /// Throws std::invalid_argument on dangling endpoints, illegal delays,
    /// a feed-forward cycle, or an illegal quantized weight.
    void validate() const;

    nlohmann::json to_json() const;
    static Netlist from_json(const nlohmann::json& j);
};

/// Where an adder input reads its spikes from.
struct Source {
    enum class Kind { population, unit };
    Kind kind = Kind::population;
    std::size_t index = 0;
    int delay = 0;

    static Source population(std::size_t i) { return {Kind::population, i, 0}; }
    static Source unit(std::size_t i, int delay = 0) { return {Kind::unit, i, delay}; }
};

struct UnitBinding {
    const AdderUnit* unit = nullptr;
    std::vector<Source> sources;  // one per unit input
    std::string name;
    /// Output bin spiking before the first tick, if any.
    std::optional<std::size_t> initial_bin;
};

/// Flattens bound units and input populations into one graph. Neuron ids are
/// assigned populations first, then each unit as [pos | neg | reduce].
Netlist export_netlist(std::span<const UnitBinding> units, std::span<const ValueGrid> inputs);

/// Convenience form: unit inputs read the populations in order, one
/// population per unit input across all units.
Netlist export_netlist(std::span<const AdderUnit> units, std::span<const ValueGrid> inputs);

/// Tick-synchronous evaluator for an arbitrary netlist.
///
/// Each neuron sums the weights of its incoming synapses whose source fired
/// (this tick for delay 0, last tick for delay 1) in file order and fires
/// when the sum reaches its threshold. Input neurons are driven externally.
class NetlistSimulator {
public:
    explicit NetlistSimulator(Netlist netlist);

    void reset();

    /// Runs one tick with one active bin per population and returns the
    /// output bin of every unit. Throws std::logic_error when a unit's reduce
    /// layer does not fire exactly once.
    std::vector<std::size_t> step(std::span<const std::size_t> population_bins);

    /// Ids of neurons that fired on the last tick, ascending.
    std::vector<int> fired() const;

    const Netlist& netlist() const noexcept { return netlist_; }

private:
    Netlist netlist_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> in_begin_;
    std::vector<std::size_t> in_synapses_;
    std::vector<std::uint8_t> now_;
    std::vector<std::uint8_t> previous_;
};

}  // namespace neuropid

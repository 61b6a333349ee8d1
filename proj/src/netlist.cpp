#include "neuropid/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace neuropid {

namespace {

bool legal_quantized_weight(double w) {
    if (w != std::floor(w)) return false;
    const auto i = static_cast<long long>(w);
    return i % 2 == 0 && i >= kWeightMin && i <= kWeightMax;
}

nlohmann::json number(double v, bool as_integer) {
    if (as_integer && v == std::floor(v) && std::abs(v) < 1e15) return static_cast<long long>(v);
    return v;
}

nlohmann::json grid_to_json(const ValueGrid& g) {
    return {{"lo", g.lo()},
            {"hi", g.hi()},
            {"n", g.size()},
            {"distribution", std::string(to_string(g.distribution()))},
            {"values", std::vector<double>(g.values().begin(), g.values().end())}};
}

ValueGrid grid_from_json(const nlohmann::json& j) {
    auto g = ValueGrid::make(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n").get<std::size_t>(),
                             parse_distribution(j.at("distribution").get<std::string>()));
    if (j.contains("values")) {
        const auto values = j.at("values").get<std::vector<double>>();
        if (!std::equal(values.begin(), values.end(), g.values().begin(), g.values().end()))
            throw std::invalid_argument("netlist grid values do not match their construction parameters");
    }
    return g;
}

}  // namespace

void Netlist::validate() const {
    const auto n = static_cast<long long>(neurons.size());
    for (std::size_t i = 0; i < neurons.size(); ++i) {
        if (neurons[i].id != static_cast<int>(i)) throw std::invalid_argument("neuron ids must be 0..n-1 in order");
        if (!(neurons[i].threshold >= 0.0)) throw std::invalid_argument("neuron threshold must be non-negative");
    }
    for (const auto& s : synapses) {
        if (s.src < 0 || s.src >= n || s.dst < 0 || s.dst >= n)
            throw std::invalid_argument("synapse references a missing neuron");
        if (s.delay != 0 && s.delay != 1) throw std::invalid_argument("synapse delay must be 0 or 1");
        if (neurons[static_cast<std::size_t>(s.dst)].layer == Layer::input)
            throw std::invalid_argument("input neurons cannot receive synapses");
        if (meta.quantized && !legal_quantized_weight(s.weight))
            throw std::invalid_argument("quantized weight is not an even integer in [-256, 254]");
    }
    for (const auto& p : meta.populations) {
        if (p.grid >= meta.grids.size()) throw std::invalid_argument("population references a missing grid");
        if (p.neurons.size() != meta.grids[p.grid].size())
            throw std::invalid_argument("population size does not match its grid");
        for (int id : p.neurons)
            if (id < 0 || id >= n) throw std::invalid_argument("population references a missing neuron");
    }
    for (const auto& u : meta.units) {
        if (u.output_grid >= meta.grids.size()) throw std::invalid_argument("unit references a missing grid");
        if (u.reduce.size() != meta.grids[u.output_grid].size())
            throw std::invalid_argument("unit reduce layer does not match its grid");
        for (int id : u.reduce)
            if (id < 0 || id >= n) throw std::invalid_argument("unit references a missing neuron");
    }
    for (int id : meta.initial_spikes)
        if (id < 0 || id >= n) throw std::invalid_argument("initial spike references a missing neuron");

    // Feed-forward edges must form a DAG.
    std::vector<std::size_t> indegree(neurons.size(), 0);
    std::vector<std::vector<std::size_t>> out(neurons.size());
    for (const auto& s : synapses) {
        if (s.delay != 0) continue;
        out[static_cast<std::size_t>(s.src)].push_back(static_cast<std::size_t>(s.dst));
        ++indegree[static_cast<std::size_t>(s.dst)];
    }
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < neurons.size(); ++i)
        if (indegree[i] == 0) ready.push(i);
    std::size_t visited = 0;
    while (!ready.empty()) {
        const auto i = ready.front();
        ready.pop();
        ++visited;
        for (auto d : out[i])
            if (--indegree[d] == 0) ready.push(d);
    }
    if (visited != neurons.size()) throw std::invalid_argument("netlist has a cycle without delay");
}

nlohmann::json Netlist::to_json() const {
    const bool ints = meta.quantized;
    nlohmann::json j;
    auto& jn = j["neurons"] = nlohmann::json::array();
    for (const auto& n : neurons)
        jn.push_back({{"id", n.id}, {"layer", std::string(to_string(n.layer))}, {"threshold", number(n.threshold, ints)}});
    auto& js = j["synapses"] = nlohmann::json::array();
    for (const auto& s : synapses)
        js.push_back({{"src", s.src}, {"dst", s.dst}, {"weight", number(s.weight, ints)}, {"delay", s.delay}});

    auto& m = j["meta"];
    m["mode"] = std::string(to_string(meta.mode));
    m["quantized"] = meta.quantized;
    m["scale"] = nlohmann::json::array();
    for (const auto& u : meta.units) m["scale"].push_back(u.scale);
    m["grids"] = nlohmann::json::array();
    for (const auto& g : meta.grids) m["grids"].push_back(grid_to_json(g));
    m["populations"] = nlohmann::json::array();
    for (const auto& p : meta.populations)
        m["populations"].push_back({{"name", p.name}, {"grid", p.grid}, {"neurons", p.neurons}});
    m["units"] = nlohmann::json::array();
    for (const auto& u : meta.units)
        m["units"].push_back({{"name", u.name},
                              {"output_grid", u.output_grid},
                              {"scale", u.scale},
                              {"first_neuron", u.first_neuron},
                              {"neuron_count", u.neuron_count},
                              {"reduce", u.reduce}});
    m["initial_spikes"] = meta.initial_spikes;
    return j;
}

Netlist Netlist::from_json(const nlohmann::json& j) {
    Netlist nl;
    for (const auto& n : j.at("neurons"))
        nl.neurons.push_back({n.at("id").get<int>(), parse_layer(n.at("layer").get<std::string>()),
                              n.at("threshold").get<double>()});
    for (const auto& s : j.at("synapses"))
        nl.synapses.push_back({s.at("src").get<int>(), s.at("dst").get<int>(), s.at("weight").get<double>(),
                               s.at("delay").get<int>()});
    const auto& m = j.at("meta");
    nl.meta.mode = parse_rounding_mode(m.at("mode").get<std::string>());
    nl.meta.quantized = m.value("quantized", false);
    for (const auto& g : m.at("grids")) nl.meta.grids.push_back(grid_from_json(g));
    if (m.contains("populations"))
        for (const auto& p : m.at("populations"))
            nl.meta.populations.push_back(
                {p.at("name").get<std::string>(), p.at("grid").get<std::size_t>(), p.at("neurons").get<std::vector<int>>()});
    if (m.contains("units"))
        for (const auto& u : m.at("units"))
            nl.meta.units.push_back({u.at("name").get<std::string>(), u.at("output_grid").get<std::size_t>(),
                                     u.at("scale").get<int>(), u.at("first_neuron").get<int>(),
                                     u.at("neuron_count").get<int>(), u.at("reduce").get<std::vector<int>>()});
    if (m.contains("initial_spikes")) nl.meta.initial_spikes = m.at("initial_spikes").get<std::vector<int>>();
    nl.validate();
    return nl;
}

Netlist export_netlist(std::span<const UnitBinding> units, std::span<const ValueGrid> inputs) {
    Netlist nl;
    if (!units.empty()) {
        nl.meta.mode = units.front().unit->mode();
        nl.meta.quantized = units.front().unit->quantized();
    }
    for (const auto& b : units) {
        if (b.unit == nullptr) throw std::invalid_argument("unit binding without a unit");
        if (b.unit->mode() != nl.meta.mode || b.unit->quantized() != nl.meta.quantized)
            throw std::invalid_argument("all units of a netlist must share rounding mode and weight format");
        if (b.sources.size() != b.unit->inputs().size())
            throw std::invalid_argument("unit binding needs one source per unit input");
    }

    int next_id = 0;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        nl.meta.grids.push_back(inputs[p]);
        PopulationSpec pop{"input" + std::to_string(p), p, {}};
        for (std::size_t i = 0; i < inputs[p].size(); ++i) {
            nl.neurons.push_back({next_id, Layer::input, 0.0});
            pop.neurons.push_back(next_id++);
        }
        nl.meta.populations.push_back(std::move(pop));
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
        const AdderUnit& unit = *units[u].unit;
        UnitSpec spec;
        spec.name = units[u].name.empty() ? "unit" + std::to_string(u) : units[u].name;
        spec.output_grid = nl.meta.grids.size();
        nl.meta.grids.push_back(unit.output());
        spec.scale = unit.scale();
        spec.first_neuron = next_id;
        spec.neuron_count = static_cast<int>(unit.neuron_count());
        for (std::size_t local = 0; local < unit.neuron_count(); ++local)
            nl.neurons.push_back({next_id++, unit.layer_of(local), unit.threshold(local)});
        for (std::size_t k = 0; k < unit.output().size(); ++k)
            spec.reduce.push_back(spec.first_neuron + static_cast<int>(unit.reduce_offset() + k));
        if (units[u].initial_bin) {
            if (*units[u].initial_bin >= unit.output().size())
                throw std::invalid_argument("initial bin outside unit output grid");
            nl.meta.initial_spikes.push_back(spec.reduce[*units[u].initial_bin]);
        }
        nl.meta.units.push_back(std::move(spec));
    }

    for (std::size_t u = 0; u < units.size(); ++u) {
        const AdderUnit& unit = *units[u].unit;
        const UnitSpec& spec = nl.meta.units[u];
        const int pos_begin = spec.first_neuron;
        const int neg_begin = pos_begin + static_cast<int>(unit.positive_count());
        const int neg_end = neg_begin + static_cast<int>(unit.negative_count());
        for (std::size_t g = 0; g < unit.inputs().size(); ++g) {
            const Source& src = units[u].sources[g];
            const std::vector<int>* ids = nullptr;
            const ValueGrid* grid = nullptr;
            if (src.kind == Source::Kind::population) {
                if (src.index >= nl.meta.populations.size()) throw std::invalid_argument("source population missing");
                ids = &nl.meta.populations[src.index].neurons;
                grid = &inputs[src.index];
            } else {
                if (src.index >= units.size()) throw std::invalid_argument("source unit missing");
                ids = &nl.meta.units[src.index].reduce;
                grid = &units[src.index].unit->output();
            }
            if (!(*grid == unit.inputs()[g].grid))
                throw std::invalid_argument("source grid does not match the unit input grid");
            for (std::size_t i = 0; i < ids->size(); ++i) {
                for (int d = pos_begin; d < neg_begin; ++d)
                    nl.synapses.push_back({(*ids)[i], d, unit.positive_weight(g, i), src.delay});
                for (int d = neg_begin; d < neg_end; ++d)
                    nl.synapses.push_back({(*ids)[i], d, unit.negative_weight(g, i), src.delay});
            }
        }
        for (const auto& rs : unit.reduce_synapses())
            nl.synapses.push_back({pos_begin + static_cast<int>(rs.src), spec.reduce[rs.dst], rs.weight, 0});
    }
    nl.validate();
    return nl;
}

Netlist export_netlist(std::span<const AdderUnit> units, std::span<const ValueGrid> inputs) {
    std::vector<UnitBinding> bindings;
    std::size_t next = 0;
    for (std::size_t u = 0; u < units.size(); ++u) {
        UnitBinding b{&units[u], {}, "unit" + std::to_string(u), std::nullopt};
        for (std::size_t g = 0; g < units[u].inputs().size(); ++g) b.sources.push_back(Source::population(next++));
        bindings.push_back(std::move(b));
    }
    return export_netlist(std::span<const UnitBinding>(bindings), inputs);
}

NetlistSimulator::NetlistSimulator(Netlist netlist) : netlist_(std::move(netlist)) {
    netlist_.validate();
    const std::size_t n = netlist_.neurons.size();

    in_begin_.assign(n + 1, 0);
    for (const auto& s : netlist_.synapses) ++in_begin_[static_cast<std::size_t>(s.dst) + 1];
    for (std::size_t i = 0; i < n; ++i) in_begin_[i + 1] += in_begin_[i];
    in_synapses_.resize(netlist_.synapses.size());
    std::vector<std::size_t> fill(in_begin_.begin(), in_begin_.end() - 1);
    for (std::size_t s = 0; s < netlist_.synapses.size(); ++s)
        in_synapses_[fill[static_cast<std::size_t>(netlist_.synapses[s].dst)]++] = s;

    // Topological order over delay-0 edges, lowest id first among ready neurons.
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& s : netlist_.synapses) {
        if (s.delay != 0) continue;
        out[static_cast<std::size_t>(s.src)].push_back(static_cast<std::size_t>(s.dst));
        ++indegree[static_cast<std::size_t>(s.dst)];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push(i);
    while (!ready.empty()) {
        const auto i = ready.top();
        ready.pop();
        order_.push_back(i);
        for (auto d : out[i])
            if (--indegree[d] == 0) ready.push(d);
    }
    reset();
}

void NetlistSimulator::reset() {
    now_.assign(netlist_.neurons.size(), 0);
    previous_.assign(netlist_.neurons.size(), 0);
    for (int id : netlist_.meta.initial_spikes) previous_[static_cast<std::size_t>(id)] = 1;
}

std::vector<std::size_t> NetlistSimulator::step(std::span<const std::size_t> population_bins) {
    const auto& pops = netlist_.meta.populations;
    if (population_bins.size() != pops.size()) throw std::invalid_argument("one bin per population required");
    std::fill(now_.begin(), now_.end(), 0);
    for (std::size_t p = 0; p < pops.size(); ++p) {
        if (population_bins[p] >= pops[p].neurons.size()) throw std::out_of_range("population bin out of range");
        now_[static_cast<std::size_t>(pops[p].neurons[population_bins[p]])] = 1;
    }
    for (std::size_t i : order_) {
        const auto& neuron = netlist_.neurons[i];
        if (neuron.layer == Layer::input) continue;
        double potential = 0.0;
        for (std::size_t k = in_begin_[i]; k < in_begin_[i + 1]; ++k) {
            const auto& s = netlist_.synapses[in_synapses_[k]];
            const auto src = static_cast<std::size_t>(s.src);
            if (s.delay == 0 ? now_[src] : previous_[src]) potential += s.weight;
        }
        now_[i] = potential >= neuron.threshold ? 1 : 0;
    }

    std::vector<std::size_t> bins;
    for (const auto& u : netlist_.meta.units) {
        std::size_t winners = 0, bin = 0;
        for (std::size_t k = 0; k < u.reduce.size(); ++k)
            if (now_[static_cast<std::size_t>(u.reduce[k])]) {
                bin = k;
                ++winners;
            }
        if (winners != 1) throw std::logic_error("unit '" + u.name + "' reduce layer did not fire exactly once");
        bins.push_back(bin);
    }
    previous_ = now_;
    return bins;
}

std::vector<int> NetlistSimulator::fired() const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < previous_.size(); ++i)
        if (previous_[i]) ids.push_back(static_cast<int>(i));
    return ids;
}

}  // namespace neuropid

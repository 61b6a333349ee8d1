#include <random>
#include <stdexcept>

#include "doctest.h"
#include "neuropid/netlist.hpp"
#include "neuropid/npid.hpp"

using namespace neuropid;

namespace {

struct Example {
    ValueGrid in = make_grid(-1, 1, 3, Distribution::uniform);
    ValueGrid out = make_grid(-2, 2, 5, Distribution::uniform);
    std::vector<AdderUnit> units;
    std::vector<ValueGrid> inputs{in, in};

    explicit Example(bool quantized, RoundingMode m = RoundingMode::nearest) {
        units.emplace_back(std::vector<AdderInput>{{in, +1, 1.0}, {in, +1, 1.0}}, out, m, quantized);
    }
    Netlist netlist() const {
        return export_netlist(std::span<const AdderUnit>(units), std::span<const ValueGrid>(inputs));
    }
};

bool legal_weight(double w) {
    return w == std::floor(w) && static_cast<long>(w) % 2 == 0 && w >= kWeightMin && w <= kWeightMax;
}

}  // namespace

TEST_CASE("example adder netlist structure") {
    const Example f(true);
    const Netlist nl = f.netlist();
    CHECK(nl.neurons.size() == 6 + 5 + 2 * 3);
    std::size_t inputs = 0;
    for (const auto& n : nl.neurons) inputs += n.layer == Layer::input;
    CHECK(inputs == 6);
    for (const auto& s : nl.synapses) CHECK(legal_weight(s.weight));
    for (const auto& n : nl.neurons) CHECK(n.threshold == std::floor(n.threshold));
    CHECK_NOTHROW(nl.validate());
    CHECK(nl.meta.units.size() == 1);
    CHECK(nl.meta.units[0].neuron_count == 11);
}

TEST_CASE("empty unit list") {
    const Netlist nl = export_netlist(std::span<const AdderUnit>(), std::span<const ValueGrid>());
    CHECK(nl.neurons.empty());
    CHECK(nl.synapses.empty());
    CHECK_NOTHROW(nl.validate());
}

TEST_CASE("simulated netlist reproduces the unit") {
    for (bool q : {false, true})
        for (auto m : {RoundingMode::floor_toward_zero, RoundingMode::nearest}) {
            const Example f(q, m);
            NetlistSimulator sim(Netlist::from_json(f.netlist().to_json()));
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b) {
                    const std::size_t bins[2] = {a, b};
                    const auto out = sim.step(bins);
                    REQUIRE(out.size() == 1);
                    CHECK(out[0] == f.units[0].evaluate(bins));
                }
        }
}

TEST_CASE("json round trip") {
    const Netlist nl = NpidNetwork(NpidConfig::reference(15, Distribution::quadratic)).export_netlist();
    const auto j = nl.to_json();
    CHECK(j.contains("neurons"));
    CHECK(j.contains("synapses"));
    CHECK(j.at("meta").contains("scale"));
    CHECK(j.at("meta").contains("grids"));
    CHECK(j.at("meta").contains("mode"));
    const Netlist back = Netlist::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.to_json() == j);
    REQUIRE(back.synapses.size() == nl.synapses.size());
    for (std::size_t i = 0; i < nl.synapses.size(); ++i) CHECK(back.synapses[i].weight == nl.synapses[i].weight);
}

TEST_CASE("npid netlist matches the network tick by tick") {
    for (bool q : {false, true}) {
        NpidConfig c = NpidConfig::reference(15, Distribution::quadratic);
        c.decay = 0.9;
        c.quantized = q;
        NpidNetwork net(c);
        const Netlist nl = net.export_netlist();
        CHECK(nl.neurons.size() == 93 + 45);
        for (const auto& s : nl.synapses) {
            if (q) CHECK(legal_weight(s.weight));
            CHECK((s.delay == 0 || s.delay == 1));
        }
        NetlistSimulator sim(Netlist::from_json(nl.to_json()));
        const ValueGrid pos = c.position.build(), der = c.derivative.build();
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> p(0, 4), d(-0.5, 0.5);
        for (int k = 0; k < 2000; ++k) {
            const double t = p(rng), y = p(rng), dv = d(rng);
            net.step(t, y, dv);
            const std::size_t bins[3] = {pos.encode(t), pos.encode(y), der.encode(dv)};
            const auto out = sim.step(bins);
            REQUIRE(out.size() == 3);
            CHECK(out[0] == net.last_tick().error_bin);
            CHECK(out[1] == net.last_tick().integral_bin);
            CHECK(out[2] == net.last_tick().output_bin);
        }
    }
}

TEST_CASE("validation rejects broken graphs") {
    const Example f(true);
    Netlist nl = f.netlist();

    Netlist dangling = nl;
    dangling.synapses.push_back({0, static_cast<int>(nl.neurons.size()), 2, 0});
    CHECK_THROWS_AS(dangling.validate(), std::invalid_argument);

    Netlist odd = nl;
    odd.synapses.front().weight = 3;
    CHECK_THROWS_AS(odd.validate(), std::invalid_argument);

    Netlist big = nl;
    big.synapses.front().weight = 256;
    CHECK_THROWS_AS(big.validate(), std::invalid_argument);

    Netlist delay = nl;
    delay.synapses.front().delay = 2;
    CHECK_THROWS_AS(delay.validate(), std::invalid_argument);

    Netlist negative = nl;
    negative.neurons.back().threshold = -1;
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

    Netlist cycle = nl;
    const int r = nl.meta.units[0].reduce[2];  // zero bin, fed by the first aggregate neuron
    const int a = nl.meta.units[0].first_neuron;
    cycle.synapses.push_back({r, a, 2, 0});
    CHECK_THROWS_AS(cycle.validate(), std::invalid_argument);
    cycle.synapses.back().delay = 1;
    CHECK_NOTHROW(cycle.validate());

    auto j = nl.to_json();
    j["synapses"].push_back({{"src", 0}, {"dst", 999}, {"weight", 2}, {"delay", 0}});
    CHECK_THROWS(NetlistSimulator(Netlist::from_json(j)));
}

TEST_CASE("fired ids and reset") {
    const Example f(false);
    NetlistSimulator sim(f.netlist());
    const std::size_t bins[2] = {2, 2};
    sim.step(bins);
    const auto fired = sim.fired();
    CHECK(std::is_sorted(fired.begin(), fired.end()));
    // Two inputs, aggregate-pos {0, 1, 2}, one reduce.
    CHECK(fired.size() == 2 + 3 + 1);
    sim.reset();
    CHECK(sim.fired().empty());
}

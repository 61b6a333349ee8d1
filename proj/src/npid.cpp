#include "neuropid/npid.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace neuropid {

NpidConfig NpidConfig::reference(std::size_t n, Distribution output_distribution) {
    NpidConfig c;
    c.position = {0.0, 4.0, n, Distribution::uniform};
    c.error = {-2.0, 2.0, n, Distribution::uniform};
    c.derivative = {-0.5, 0.5, n, Distribution::uniform};
    c.output = {-1.25, 1.25, n, output_distribution};
    const double bound = c.default_integral_bound();
    c.integral = {-bound, bound, n, output_distribution};
    return c;
}

void NpidConfig::validate() const {
    if (!(std::isfinite(kp) && std::isfinite(ti) && std::isfinite(td)))
        throw std::invalid_argument("PID gains must be finite");
    if (!(ti > 0.0)) throw std::invalid_argument("integral time T_I must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("control period must be positive");
    if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in (0, 1]");
    for (const GridSpec* g : {&position, &error, &integral, &derivative, &output}) (void)g->build();
    for (const GridSpec* g : {&error, &integral, &output})
        if (!g->build().zero_index())
            throw std::invalid_argument("error, integral and output grids must contain an exact zero");
}

namespace {

const NpidConfig& checked(const NpidConfig& c) {
    c.validate();
    return c;
}

AdderUnit make_error_unit(const NpidConfig& c) {
    const ValueGrid pos = c.position.build();
    return AdderUnit({{pos, +1, 1.0}, {pos, -1, 1.0}}, c.error.build(), c.mode, c.quantized);
}

AdderUnit make_integral_unit(const NpidConfig& c) {
    return AdderUnit({{c.integral.build(), +1, c.decay}, {c.error.build(), +1, c.dt}}, c.integral.build(), c.mode,
                     c.quantized);
}

AdderUnit make_control_unit(const NpidConfig& c) {
    return AdderUnit({{c.error.build(), +1, c.kp}, {c.integral.build(), +1, c.kp / c.ti},
                      {c.derivative.build(), +1, c.kp * c.td}},
                     c.output.build(), c.mode, c.quantized);
}

}  // namespace

NpidNetwork::NpidNetwork(NpidConfig config)
    : config_(checked(config)),
      position_(config_.position.build()),
      derivative_(config_.derivative.build()),
      error_unit_(make_error_unit(config_)),
      integral_unit_(make_integral_unit(config_)),
      control_unit_(make_control_unit(config_)) {
    integral_zero_ = *integral_unit_.output().zero_index();
    reset();
}

void NpidNetwork::reset() {
    integral_bin_ = integral_zero_;
    last_output_bin_ = *control_unit_.output().zero_index();
    tick_ = 0;
    last_ = {};
    trace_ = {};
}

void NpidNetwork::record(bool on, bool full_raster) {
    recording_ = on;
    full_raster_ = on && full_raster;
}

double NpidNetwork::step(double target, double measurement, double derivative) {
    const std::size_t inputs[3] = {position_.encode(target), position_.encode(measurement),
                                   derivative_.encode(derivative)};

    const std::size_t error_in[2] = {inputs[0], inputs[1]};
    error_unit_.propagate(error_in, error_act_);

    // The recurrent input carries the integral bin of the previous tick.
    const std::size_t integral_in[2] = {integral_bin_, error_act_.output_bin};
    integral_unit_.propagate(integral_in, integral_act_);

    const std::size_t control_in[3] = {error_act_.output_bin, integral_act_.output_bin, inputs[2]};
    control_unit_.propagate(control_in, control_act_);

    integral_bin_ = integral_act_.output_bin;
    last_output_bin_ = control_act_.output_bin;
    const double out = control_unit_.output()[last_output_bin_];

    last_ = {tick_,
             static_cast<double>(tick_) * config_.dt,
             inputs[0],
             inputs[1],
             error_act_.output_bin,
             integral_bin_,
             inputs[2],
             last_output_bin_,
             out};
    if (recording_) {
        trace_.ticks.push_back(last_);
        if (full_raster_) append_raster(tick_, inputs);
    }
    ++tick_;
    return out;
}

void NpidNetwork::append_raster(std::size_t tick, const std::size_t* input_bins) {
    const std::size_t n_pos = position_.size();
    const std::size_t offsets[3] = {0, n_pos, 2 * n_pos};
    for (int p = 0; p < 3; ++p)
        trace_.raster.push_back({tick, static_cast<int>(offsets[p] + input_bins[p]), Layer::input});

    std::size_t base = 2 * n_pos + derivative_.size();
    const std::pair<const AdderUnit*, const UnitActivity*> units[3] = {
        {&error_unit_, &error_act_}, {&integral_unit_, &integral_act_}, {&control_unit_, &control_act_}};
    for (const auto& [unit, act] : units) {
        for (std::size_t j = 0; j < act->aggregate.size(); ++j)
            if (act->aggregate[j])
                trace_.raster.push_back({tick, static_cast<int>(base + j), unit->layer_of(j)});
        trace_.raster.push_back({tick, static_cast<int>(base + unit->reduce_offset() + act->output_bin), Layer::reduce});
        base += unit->neuron_count();
    }
}

NeuronCount NpidNetwork::neuron_count() const noexcept {
    return {error_unit_.neuron_count() + integral_unit_.neuron_count() + control_unit_.neuron_count(),
            2 * position_.size() + derivative_.size()};
}

Netlist NpidNetwork::export_netlist() const {
    const ValueGrid inputs[3] = {position_, position_, derivative_};
    const UnitBinding units[3] = {
        {&error_unit_, {Source::population(0), Source::population(1)}, "error", std::nullopt},
        {&integral_unit_, {Source::unit(1, 1), Source::unit(0)}, "integral", integral_zero_},
        {&control_unit_, {Source::unit(0), Source::unit(1), Source::population(2)}, "control", std::nullopt},
    };
    Netlist nl = neuropid::export_netlist(std::span<const UnitBinding>(units), std::span<const ValueGrid>(inputs));
    nl.meta.populations[0].name = "target";
    nl.meta.populations[1].name = "measurement";
    nl.meta.populations[2].name = "derivative";
    return nl;
}

void write_trace_csv(std::ostream& out, const SpikeTrace& trace) {
    out << "tick,t_seconds,error_bin,integral_bin,deriv_bin,output_bin,output_newton\n";
    char buf[64];
    for (const auto& t : trace.ticks) {
        out << t.tick << ',';
        std::snprintf(buf, sizeof buf, "%.6f", t.t);
        out << buf << ',' << t.error_bin << ',' << t.integral_bin << ',' << t.deriv_bin << ',' << t.output_bin << ',';
        std::snprintf(buf, sizeof buf, "%.9g", t.output_newton);
        out << buf << '\n';
    }
}

void write_raster_csv(std::ostream& out, const SpikeTrace& trace) {
    out << "tick,neuron_id,layer\n";
    for (const auto& e : trace.raster) out << e.tick << ',' << e.neuron << ',' << to_string(e.layer) << '\n';
}

}  // namespace neuropid

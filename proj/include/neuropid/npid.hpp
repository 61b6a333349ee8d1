#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "neuropid/adder.hpp"
#include "neuropid/netlist.hpp"
#include "neuropid/value_grid.hpp"

namespace neuropid {

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;
    Distribution distribution = Distribution::uniform;

    ValueGrid build() const { return ValueGrid::make(lo, hi, n, distribution); }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct NpidConfig {
    double kp = 0.87;
    double ti = 0.17;
    double td = 2.76;
    /// Control period in seconds.
    double dt = 1.0 / 70.0;

    /// Shared by target and measurement (meters).
    GridSpec position{0.0, 4.0, 151, Distribution::uniform};
    GridSpec error{-2.0, 2.0, 151, Distribution::uniform};
    GridSpec integral{-1.25 * 0.17 / 0.87, 1.25 * 0.17 / 0.87, 151, Distribution::uniform};
    /// Error derivative fed directly to the control unit (meters/second).
    GridSpec derivative{-0.5, 0.5, 151, Distribution::uniform};
    /// Thrust offset from hover (Newtons).
    GridSpec output{-1.25, 1.25, 151, Distribution::uniform};

    /// Factor applied to the recurrent integral weights, in (0, 1].
    double decay = 1.0;
    RoundingMode mode = RoundingMode::nearest;
    bool quantized = false;

    /// Gains, ranges and resolution used in the altitude experiments, with
    /// every population at resolution n. The output and integral grids use
    /// output_distribution; all other grids are uniform.
    static NpidConfig reference(std::size_t n = 151, Distribution output_distribution = Distribution::uniform);

    /// Symmetric integral half-range at which the integral term alone just
    /// saturates the output: output.hi * ti / kp.
    double default_integral_bound() const noexcept { return output.hi * ti / kp; }

    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;
};

struct TraceTick {
    std::size_t tick = 0;
    double t = 0.0;
    std::size_t target_bin = 0;
    std::size_t measurement_bin = 0;
    std::size_t error_bin = 0;
    std::size_t integral_bin = 0;
    std::size_t deriv_bin = 0;
    std::size_t output_bin = 0;
    double output_newton = 0.0;

    friend bool operator==(const TraceTick&, const TraceTick&) = default;
};

struct RasterEvent {
    std::size_t tick = 0;
    int neuron = 0;
    Layer layer = Layer::input;

    friend bool operator==(const RasterEvent&, const RasterEvent&) = default;
};

struct SpikeTrace {
    std::vector<TraceTick> ticks;
    std::vector<RasterEvent> raster;

    friend bool operator==(const SpikeTrace&, const SpikeTrace&) = default;
};

/// Columns: tick, t_seconds, error_bin, integral_bin, deriv_bin, output_bin, output_newton.
void write_trace_csv(std::ostream& out, const SpikeTrace& trace);
/// Columns: tick, neuron_id, layer.
void write_raster_csv(std::ostream& out, const SpikeTrace& trace);

struct NeuronCount {
    std::size_t unit = 0;
    std::size_t input = 0;
};

/// Spiking PID: an error subtractor, an integral adder with a delayed
/// self-connection, and a control adder with the gains fused into its
/// weights. The error derivative enters as its own encoded population.
class NpidNetwork {
public:
    explicit NpidNetwork(NpidConfig config);

    const NpidConfig& config() const noexcept { return config_; }
    const ValueGrid& position_grid() const noexcept { return position_; }
    const ValueGrid& derivative_grid() const noexcept { return derivative_; }
    const AdderUnit& error_unit() const noexcept { return error_unit_; }
    const AdderUnit& integral_unit() const noexcept { return integral_unit_; }
    const AdderUnit& control_unit() const noexcept { return control_unit_; }

    /// One control tick. Inputs are clamped by their encoders. Returns the
    /// decoded thrust offset in Newtons.
    double step(double target, double measurement, double derivative);

    /// Returns to the freshly built state: zero-bin integral, tick 0, empty
    /// trace. The recording flags are kept.
    void reset();

    std::size_t integral_bin() const noexcept { return integral_bin_; }
    std::size_t last_output_bin() const noexcept { return last_output_bin_; }
    const TraceTick& last_tick() const noexcept { return last_; }

    NeuronCount neuron_count() const noexcept;

    /// Enables per-tick trace recording, optionally with every firing neuron.
    void record(bool on, bool full_raster = false);
    const SpikeTrace& trace() const noexcept { return trace_; }
    void clear_trace() { trace_ = {}; }

    /// Whole network as a netlist: populations target, measurement,
    /// derivative, then units error, integral, control.
    Netlist export_netlist() const;

private:
    void append_raster(std::size_t tick, const std::size_t* input_bins);

    NpidConfig config_;
    ValueGrid position_;
    ValueGrid derivative_;
    AdderUnit error_unit_;
    AdderUnit integral_unit_;
    AdderUnit control_unit_;
    std::size_t integral_zero_ = 0;
    std::size_t integral_bin_ = 0;
    std::size_t last_output_bin_ = 0;
    std::size_t tick_ = 0;
    TraceTick last_{};
    bool recording_ = false;
    bool full_raster_ = false;
    SpikeTrace trace_;
    UnitActivity error_act_;
    UnitActivity integral_act_;
    UnitActivity control_act_;
};

inline NpidNetwork build_npid(NpidConfig config) { return NpidNetwork(std::move(config)); }

}  // namespace neuropid

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "neuropid/npid.hpp"
#include "neuropid/plant.hpp"

namespace neuropid {

enum class ControllerKind { npid, baseline };

std::string_view to_string(ControllerKind k);
ControllerKind parse_controller(std::string_view name);

struct ExperimentConfig {
    ControllerKind controller = ControllerKind::npid;
    NpidConfig npid = default_npid();
    PlantParams plant = default_plant();
    double sensor_quantum = 0.01;
    std::size_t derivative_window = 1;
    /// Battery thrust loss rate in N/s.
    double battery_beta = 0.0;

    double setpoint = 1.0;
    double initial_altitude = 0.0;
    double duration = 20.0;
    double rate = 70.0;
    /// Physics steps per control tick.
    std::size_t substeps = 10;
    std::uint64_t seed = 0;

    static NpidConfig default_npid();
    static PlantParams default_plant();

    double dt() const noexcept { return 1.0 / rate; }
    std::size_t ticks() const noexcept;

    /// Throws std::invalid_argument on any invalid field.
    void validate() const;

    /// Sections: gains, grids, plant, sensor, experiment. Missing keys keep
    /// their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    /// Resizes every population to n, using the quadratic output and
    /// integral distribution when requested; ranges are kept.
    void set_resolution(std::size_t n, Distribution output_distribution);
};

struct TraceRow {
    double t = 0.0;
    double z = 0.0;
    double vz = 0.0;
    double z_meas = 0.0;
    double target = 0.0;
    long error_bin = -1;
    long integral_bin = -1;
    long deriv_bin = -1;
    long u_bin = -1;
    double u_newton = 0.0;
    double thrust_total = 0.0;
};

struct TraceRecord {
    std::vector<TraceRow> rows;
};

struct RunMetrics {
    /// 10% to 90% of the step; NaN when never reached.
    double rise_time = 0.0;
    double overshoot_m = 0.0;
    double overshoot_pct = 0.0;
    /// Time after which the altitude stays in the settling band; NaN if the
    /// run ends outside it.
    double settling_time = 0.0;
    bool settled = false;
    double steady_state_error = 0.0;
    double saturation_fraction = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    /// Cell of the set-point bin on the position grid.
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    /// Time after which the altitude stays inside the set-point bin; NaN if
    /// the run ends outside it.
    double bin_settling_time = 0.0;
};

struct SettlingBand {
    double lo = 0.0;
    double hi = 0.0;
};

/// Altitudes encoding to the set-point bin, widened by `extra_bins` bins on
/// each side of the position grid.
SettlingBand setpoint_band(const ValueGrid& position, double setpoint, std::size_t extra_bins);

RunMetrics compute_metrics(const TraceRecord& trace, const ExperimentConfig& cfg);

struct RunResult {
    TraceRecord trace;
    RunMetrics metrics;
    SpikeTrace spikes;  // filled for N-PID runs
};

/// Closed loop from rest at the initial altitude.
RunResult run_step_response(const ExperimentConfig& cfg, bool record_raster = false);

struct SummaryRow {
    std::string controller;
    std::size_t neurons = 0;
    std::string distribution;
    double setpoint = 0.0;
    RunMetrics metrics;
};

/// Runs every configuration (in parallel when threads > 1) and returns one
/// row per configuration in input order.
std::vector<SummaryRow> compare(const std::vector<ExperimentConfig>& cfgs, unsigned threads = 0);

/// Cross product of resolutions and set-points, resolution-major.
/// Resolutions below quadratic_below use the quadratic output distribution.
std::vector<ExperimentConfig> sweep_configs(const ExperimentConfig& base, const std::vector<double>& setpoints,
                                            const std::vector<std::size_t>& neurons,
                                            std::size_t quadratic_below = 32);

std::vector<SummaryRow> sweep(const ExperimentConfig& base, const std::vector<double>& setpoints,
                              const std::vector<std::size_t>& neurons, std::size_t quadratic_below = 32,
                              unsigned threads = 0);

/// Columns: t, z, vz, z_meas, target, error_bin, integral_bin, deriv_bin,
/// u_bin, u_newton, thrust_total.
void write_trace_csv(std::ostream& out, const TraceRecord& trace);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct PlotSeries {
    std::string label;
    const TraceRecord* trace = nullptr;
    SettlingBand band;
};

/// Static SVG of altitude over time: one polyline per series plus its band.
void write_svg(std::ostream& out, const std::vector<PlotSeries>& series);

struct AdderReport {
    std::size_t pairs = 0;
    std::size_t exact = 0;
    std::size_t within_one = 0;
    std::size_t max_deviation = 0;
    double seconds = 0.0;

    bool passed(bool quantized) const noexcept {
        return quantized ? within_one == pairs : exact == pairs;
    }
};

struct AdderCase {
    std::size_t input_neurons = 3;
    std::size_t output_neurons = 5;
    Distribution distribution = Distribution::uniform;
    RoundingMode mode = RoundingMode::nearest;
    bool quantized = false;

    /// Two inputs over [-1, 1] with n bins, output over [-2, 2] with n bins.
    static AdderCase square(std::size_t n, Distribution d, RoundingMode m, bool quantized);
    /// Two inputs [-1, 0, 1], output [-2, -1, 0, 1, 2].
    static AdderCase example(RoundingMode m = RoundingMode::nearest, bool quantized = false);
};

/// Enumerates every pair of input bins and compares the spiking output bin
/// with arithmetic rounding of the float sum.
AdderReport verify_adder(const AdderCase& c);

struct BenchResult {
    std::size_t ticks = 0;
    double seconds = 0.0;
    double ticks_per_second = 0.0;
    double mean_ns = 0.0;
    double p99_ns = 0.0;
};

/// Times N-PID ticks on pseudo-random in-range inputs.
BenchResult bench(const NpidConfig& config, std::size_t ticks = 1'000'000, std::uint64_t seed = 0);

}  // namespace neuropid

#pragma once

#include <cstddef>
#include <optional>

#include "neuropid/npid.hpp"
#include "neuropid/value_grid.hpp"

namespace neuropid {

struct PidGains {
    double kp = 0.87;
    double ti = 0.17;
    double td = 2.76;
};

struct OutputRange {
    double lo = -1.25;
    double hi = 1.25;
};

struct PidState {
    double integral = 0.0;
    double previous_error = 0.0;
    bool initialized = false;
};

/// Discrete PID:
///   e = r - y,  i = decay*i + e*dt,  d = (e - e_prev)/dt,
///   u = kp*e + (kp/ti)*i + kp*td*d.
/// The first step seeds e_prev with e so d = 0. The output is clamped when a
/// range is given; the integral itself is never clamped.
double pid_step(PidState& state, double r, double y, double dt, const PidGains& gains,
                std::optional<OutputRange> clamp = OutputRange{}, double decay = 1.0);

/// Arithmetic mirror of the N-PID state: the integral bin.
struct QuantPidState {
    std::size_t integral_bin = 0;
};

/// Everything the bin-level reference PID needs, taken from an NpidConfig.
struct QuantPidSpec {
    ValueGrid position;
    ValueGrid error;
    ValueGrid integral;
    ValueGrid derivative;
    ValueGrid output;
    PidGains gains;
    double dt = 1.0 / 70.0;
    double decay = 1.0;
    RoundingMode mode = RoundingMode::nearest;

    static QuantPidSpec from(const NpidConfig& config);

    /// Zero-bin starting state.
    QuantPidState initial_state() const;
};

/// Bin-level reference PID. Snaps each intermediate onto its grid with the
/// configured rounding mode, in the order the network evaluates them:
///   e^ = snap(target^ - measurement^)
///   i^ = snap(decay*i^_prev + dt*e^)
///   u^ = snap(kp*e^ + (kp/ti)*i^ + kp*td*d^)
/// Returns the output bin and advances the state. Throws std::invalid_argument
/// when the state's bin lies outside the integral grid or a rounding grid has
/// no zero.
std::size_t quantized_pid_step(QuantPidState& state, double target, double measurement, double derivative,
                               const QuantPidSpec& spec);

}  // namespace neuropid

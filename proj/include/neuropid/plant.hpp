#pragma once

#include <cstddef>
#include <deque>

namespace neuropid {

inline constexpr double kGravity = 9.81;

struct PlantParams {
    double mass = 0.68;             // kg
    double g = kGravity;            // m/s^2
    double drag = 0.0;              // N*s/m
    double motor_time_constant = 0.0;  // s, 0 = instantaneous
    /// Thrust limits in Newtons; a negative max means 4x hover thrust.
    double thrust_min = 0.0;
    double thrust_max = -1.0;
    double hover_adjust = 0.0;      // N

    double effective_thrust_max() const noexcept;
    /// Throws std::invalid_argument unless mass > 0, drag >= 0, tau >= 0 and
    /// thrust_min <= hover <= thrust_max.
    void validate() const;
};

struct PlantState {
    double z = 0.0;
    double vz = 0.0;
    double thrust = 0.0;  // after motor lag
    double t = 0.0;
};

/// mass * g + hover_adjust.
double hover_thrust(const PlantParams& params) noexcept;

/// Linear thrust loss of a draining battery: -beta * t.
double battery_sag(double t, double beta) noexcept;

/// Advances the vertical dynamics by dt with semi-implicit Euler after
/// clamping the command and applying first-order motor lag. The ground
/// holds z >= 0 and cancels downward velocity on contact.
PlantState plant_step(const PlantState& state, double thrust_command, double dt, const PlantParams& params);

struct SensorReading {
    double z = 0.0;           // quantized altitude, m
    double derivative = 0.0;  // finite difference of quantized altitude, m/s
};

/// Range sensor with a fixed quantum (floor quantization) and a windowed
/// finite-difference rate estimate.
class AltitudeSensor {
public:
    explicit AltitudeSensor(double quantum = 0.01, std::size_t window = 1);

    double quantum() const noexcept { return quantum_; }
    std::size_t window() const noexcept { return window_; }

    double quantize(double z) const noexcept;
    /// Reads the plant once per control tick. The rate stays 0 until
    /// `window` earlier readings exist.
    SensorReading sense(const PlantState& state, double dt_ctrl);
    void reset() { history_.clear(); }

private:
    double quantum_;
    std::size_t window_;
    std::deque<double> history_;
};

}  // namespace neuropid

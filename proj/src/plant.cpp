#include "neuropid/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neuropid {

double hover_thrust(const PlantParams& p) noexcept { return p.mass * p.g + p.hover_adjust; }

double PlantParams::effective_thrust_max() const noexcept {
    return thrust_max < 0.0 ? 4.0 * hover_thrust(*this) : thrust_max;
}

void PlantParams::validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("plant mass must be positive");
    if (!(drag >= 0.0)) throw std::invalid_argument("drag coefficient must be non-negative");
    if (!(motor_time_constant >= 0.0)) throw std::invalid_argument("motor time constant must be non-negative");
    const double hover = hover_thrust(*this);
    if (!(thrust_min <= hover && hover <= effective_thrust_max()))
        throw std::invalid_argument("hover thrust must lie within the thrust limits");
}

double battery_sag(double t, double beta) noexcept { return -beta * t; }

PlantState plant_step(const PlantState& s, double thrust_command, double dt, const PlantParams& p) {
    PlantState next = s;
    const double command = std::clamp(thrust_command, p.thrust_min, p.effective_thrust_max());
    if (p.motor_time_constant > 0.0)
        next.thrust = s.thrust + (command - s.thrust) * (1.0 - std::exp(-dt / p.motor_time_constant));
    else
        next.thrust = command;

    const double accel = (next.thrust - p.mass * p.g - p.drag * s.vz) / p.mass;
    next.vz = s.vz + accel * dt;
    next.z = s.z + next.vz * dt;
    if (next.z <= 0.0) {
        next.z = 0.0;
        next.vz = std::max(next.vz, 0.0);
    }
    next.t = s.t + dt;
    return next;
}

AltitudeSensor::AltitudeSensor(double quantum, std::size_t window) : quantum_(quantum), window_(window) {
    if (!(quantum > 0.0)) throw std::invalid_argument("sensor quantum must be positive");
    if (window < 1) throw std::invalid_argument("derivative window must be at least one tick");
}

double AltitudeSensor::quantize(double z) const noexcept {
    // Guard against z/quantum landing a hair below an integer.
    return quantum_ * std::floor(z / quantum_ + 1e-9);
}

SensorReading AltitudeSensor::sense(const PlantState& state, double dt_ctrl) {
    SensorReading r;
    r.z = quantize(state.z);
    if (history_.size() >= window_)
        r.derivative = (r.z - history_[history_.size() - window_]) / (static_cast<double>(window_) * dt_ctrl);
    history_.push_back(r.z);
    while (history_.size() > window_) history_.pop_front();
    return r;
}

}  // namespace neuropid

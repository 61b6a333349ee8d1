#include "neuropid/baseline_pid.hpp"

#include <algorithm>
#include <stdexcept>

namespace neuropid {

double pid_step(PidState& state, double r, double y, double dt, const PidGains& gains,
                std::optional<OutputRange> clamp, double decay) {
    const double e = r - y;
    if (!state.initialized) {
        state.previous_error = e;
        state.initialized = true;
    }
    state.integral = decay * state.integral + e * dt;
    const double d = (e - state.previous_error) / dt;
    state.previous_error = e;
    double u = gains.kp * e + (gains.kp / gains.ti) * state.integral + gains.kp * gains.td * d;
    if (clamp) u = std::clamp(u, clamp->lo, clamp->hi);
    return u;
}

QuantPidSpec QuantPidSpec::from(const NpidConfig& c) {
    c.validate();
    return {c.position.build(), c.error.build(),  c.integral.build(), c.derivative.build(), c.output.build(),
            {c.kp, c.ti, c.td}, c.dt,           c.decay,            c.mode};
}

QuantPidState QuantPidSpec::initial_state() const {
    const auto zero = integral.zero_index();
    if (!zero) throw std::invalid_argument("integral grid has no zero");
    return {*zero};
}

std::size_t quantized_pid_step(QuantPidState& state, double target, double measurement, double derivative,
                               const QuantPidSpec& spec) {
    if (state.integral_bin >= spec.integral.size())
        throw std::invalid_argument("integral state outside the integral grid");

    const double r = spec.position[spec.position.encode(target)];
    const double y = spec.position[spec.position.encode(measurement)];
    const double d = spec.derivative[spec.derivative.encode(derivative)];

    const std::size_t e_bin = spec.error.round(r - y, spec.mode);
    const double e = spec.error[e_bin];

    const double i_prev = spec.integral[state.integral_bin];
    const std::size_t i_bin = spec.integral.round(spec.decay * i_prev + spec.dt * e, spec.mode);
    const double i = spec.integral[i_bin];

    const auto& g = spec.gains;
    const std::size_t u_bin = spec.output.round(g.kp * e + (g.kp / g.ti) * i + (g.kp * g.td) * d, spec.mode);
    state.integral_bin = i_bin;
    return u_bin;
}

}  // namespace neuropid

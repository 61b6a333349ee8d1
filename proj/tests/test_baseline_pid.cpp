#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "neuropid/baseline_pid.hpp"

using namespace neuropid;

TEST_CASE("zero error gives zero output") {
    PidState s;
    for (int k = 0; k < 100; ++k) CHECK(pid_step(s, 1.0, 1.0, 1.0 / 70, {}) == 0.0);
}

TEST_CASE("first step from rest") {
    PidState s;
    const PidGains g;
    const double dt = 1.0 / 70;
    const double raw = pid_step(s, 1.5, 0.0, dt, g, std::nullopt);
    CHECK(s.integral == doctest::Approx(1.5 / 70));
    CHECK(raw == doctest::Approx(1.305 + (0.87 / 0.17) * (1.5 / 70)));
    CHECK(raw == doctest::Approx(1.41467).epsilon(1e-5));
    PidState t;
    CHECK(pid_step(t, 1.5, 0.0, dt, g) == 1.25);
}

TEST_CASE("reduces to the textbook recursion") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> x(-1, 1);
    const PidGains g;
    const double dt = 0.01;
    PidState s;
    double i = 0, prev = 0;
    bool first = true;
    for (int k = 0; k < 500; ++k) {
        const double r = x(rng), y = x(rng), e = r - y;
        if (first) prev = e, first = false;
        i += e * dt;
        const double want = g.kp * e + (g.kp / g.ti) * i + g.kp * g.td * (e - prev) / dt;
        prev = e;
        CHECK(pid_step(s, r, y, dt, g, std::nullopt) == doctest::Approx(want));
    }
}

TEST_CASE("integral grows linearly under constant error") {
    PidState s;
    const PidGains g;
    const double dt = 1.0 / 70, eps = 0.01;
    double last = pid_step(s, eps, 0.0, dt, g, std::nullopt);
    for (int k = 0; k < 50; ++k) {
        const double u = pid_step(s, eps, 0.0, dt, g, std::nullopt);
        CHECK(u - last == doctest::Approx(g.kp / g.ti * eps * dt));
        last = u;
    }
}

TEST_CASE("decay leaks the integral") {
    PidState s;
    pid_step(s, 1.0, 0.0, 0.1, {}, std::nullopt, 0.5);
    CHECK(s.integral == doctest::Approx(0.1));
    pid_step(s, 1.0, 0.0, 0.1, {}, std::nullopt, 0.5);
    CHECK(s.integral == doctest::Approx(0.15));
}

TEST_CASE("quantized reference examples") {
    const QuantPidSpec spec = QuantPidSpec::from(NpidConfig::reference());
    QuantPidState st = spec.initial_state();
    CHECK(st.integral_bin == 75);
    CHECK(spec.output[quantized_pid_step(st, 2.0, 2.0, 0.0, spec)] == 0.0);
    st = spec.initial_state();
    CHECK(spec.output[quantized_pid_step(st, 1.5, 0.0, 0.0, spec)] == 1.25);
    QuantPidState bad{999};
    CHECK_THROWS_AS(quantized_pid_step(bad, 0, 0, 0, spec), std::invalid_argument);
}

namespace {

NpidConfig fine(std::size_t n) {
    NpidConfig c = NpidConfig::reference(n);
    c.decay = 0.9;
    return c;
}

// Largest output difference between the bin-level and the continuous PID
// over a random walk of grid-aligned measurements around a fixed target.
double sequence_gap(std::size_t n, std::uint64_t seed) {
    const NpidConfig c = fine(n);
    const QuantPidSpec spec = QuantPidSpec::from(c);
    QuantPidState st = spec.initial_state();
    PidState ps;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> walk(-2, 2);
    const std::size_t target = spec.position.encode(2.0);
    std::size_t y = target;
    double worst = 0.0;
    for (int k = 0; k < 400; ++k) {
        const long next = static_cast<long>(y) + walk(rng);
        y = static_cast<std::size_t>(std::clamp<long>(next, target - n / 16, target + n / 16));
        const double r = spec.position[target], m = spec.position[y];
        const double e_prev = ps.initialized ? ps.previous_error : r - m;
        const double d = std::clamp(((r - m) - e_prev) / c.dt, -0.5, 0.5);
        PidGains g = spec.gains;
        const double u = pid_step(ps, r, m, c.dt, {g.kp, g.ti, 0.0}, std::nullopt, c.decay) + g.kp * g.td * d;
        const auto bin = quantized_pid_step(st, r, m, d, spec);
        worst = std::max(worst, std::abs(spec.output[bin] - std::clamp(u, -1.25, 1.25)));
    }
    return worst;
}

}  // namespace

TEST_CASE("one tick on fine grids lands within one output bin") {
    const QuantPidSpec spec = QuantPidSpec::from(NpidConfig::reference(1001));
    const double bin = spec.output[1] - spec.output[0];
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> pos(300, 700);
    for (int k = 0; k < 5000; ++k) {
        const double r = spec.position[pos(rng)], y = spec.position[pos(rng)];
        QuantPidState st = spec.initial_state();
        PidState ps;
        const double u = pid_step(ps, r, y, spec.dt, spec.gains, OutputRange{});
        const double got = spec.output[quantized_pid_step(st, r, y, 0.0, spec)];
        CHECK(std::abs(got - u) <= bin + 1e-12);
    }
}

TEST_CASE("bin-level PID converges to the continuous one as grids refine") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const double g63 = sequence_gap(63, seed), g151 = sequence_gap(151, seed), g1001 = sequence_gap(1001, seed);
        CHECK(g151 < g63);
        CHECK(g1001 < g151);
        // Output and derivative snaps, plus the integral snap accumulated
        // under the decay.
        const NpidConfig c = fine(1001);
        const double out_bin = 2.5 / 1000.0, der_bin = 1.0 / 1000.0, int_bin = 2 * c.integral.hi / 1000.0;
        CHECK(g1001 <= out_bin / 2 + c.kp * c.td * der_bin / 2 + (c.kp / c.ti) * (int_bin / 2) / (1.0 - c.decay) + 1e-9);
    }
}

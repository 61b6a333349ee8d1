#include <random>
#include <stdexcept>

#include "doctest.h"
#include "neuropid/experiment.hpp"
#include "neuropid/plant.hpp"

using namespace neuropid;

TEST_CASE("hover thrust") {
    PlantParams p;
    CHECK(hover_thrust(p) == doctest::Approx(6.6708));
    p.hover_adjust = 0.1;
    CHECK(hover_thrust(p) == doctest::Approx(6.7708));
    PlantParams one;
    one.mass = 1.0;
    CHECK(hover_thrust(one) == doctest::Approx(9.81));
}

TEST_CASE("parameter validation") {
    PlantParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.effective_thrust_max() == doctest::Approx(4 * 6.6708));
    p.mass = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.drag = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.thrust_max = 5.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("equilibrium, acceleration and ground") {
    PlantParams p;
    PlantState s{1.0, 0.0, hover_thrust(p), 0.0};
    const auto h = plant_step(s, hover_thrust(p), 0.001, p);
    CHECK(h.z == s.z);
    CHECK(h.vz == 0.0);

    const auto up = plant_step(s, hover_thrust(p) + 1.25, 0.001, p);
    CHECK(up.vz / 0.001 == doctest::Approx(1.25 / 0.68));
    CHECK(up.vz / 0.001 == doctest::Approx(1.8382).epsilon(1e-4));
    CHECK(up.z == doctest::Approx(1.0 + up.vz * 0.001));

    PlantState ground{};
    for (int k = 0; k < 100; ++k) {
        ground = plant_step(ground, 0.0, 0.001, p);
        CHECK(ground.z == 0.0);
        CHECK(ground.vz >= 0.0);
    }
    CHECK(ground.t == doctest::Approx(0.1));
}

TEST_CASE("thrust clamp and motor lag") {
    PlantParams p;
    PlantState s{1.0, 0.0, hover_thrust(p), 0.0};
    const auto clamped = plant_step(s, 1e6, 0.001, p);
    CHECK(clamped.thrust == doctest::Approx(p.effective_thrust_max()));
    const auto low = plant_step(s, -50.0, 0.001, p);
    CHECK(low.thrust == 0.0);

    p.motor_time_constant = 0.05;
    PlantState m{1.0, 0.0, hover_thrust(p), 0.0};
    const double target = hover_thrust(p) + 1.0;
    m = plant_step(m, target, 0.05, p);
    CHECK(m.thrust == doctest::Approx(hover_thrust(p) + (1.0 - std::exp(-1.0))));
    for (int k = 0; k < 200; ++k) m = plant_step(m, target, 0.05, p);
    CHECK(m.thrust == doctest::Approx(target));
}

TEST_CASE("drag dissipates velocity at hover") {
    PlantParams p;
    p.drag = 0.5;
    PlantState s{5.0, 1.5, hover_thrust(p), 0.0};
    double prev = std::abs(s.vz);
    for (int k = 0; k < 20000; ++k) {
        s = plant_step(s, hover_thrust(p), 0.001, p);
        CHECK(std::abs(s.vz) <= prev);
        prev = std::abs(s.vz);
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("battery sag") {
    CHECK(battery_sag(0.0, 0.7) == 0.0);
    CHECK(battery_sag(60.0, 0.005) == doctest::Approx(-0.3));
    for (double t = 0; t < 100; t += 7) CHECK(battery_sag(t, 0.0) == 0.0);
}

TEST_CASE("sensor quantization") {
    AltitudeSensor s;
    CHECK(s.quantize(1.507) == doctest::Approx(1.50));
    CHECK(s.quantize(1.5) == doctest::Approx(1.5));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> z(0, 5);
    for (int k = 0; k < 10000; ++k) {
        const double x = z(rng), q = s.quantize(x);
        CHECK(x - q >= -1e-8);
        CHECK(x - q < 0.01);
    }
    CHECK_THROWS_AS(AltitudeSensor(0.0), std::invalid_argument);
    CHECK_THROWS_AS(AltitudeSensor(0.01, 0), std::invalid_argument);
}

TEST_CASE("sensor derivative") {
    const double dt = 1.0 / 70.0;
    AltitudeSensor s;
    CHECK(s.sense({1.0, 0, 0, 0}, dt).derivative == 0.0);
    CHECK(s.sense({1.0, 0, 0, 0}, dt).derivative == 0.0);

    AltitudeSensor rising;
    rising.sense({1.0, 0, 0, 0}, dt);
    for (int k = 1; k < 10; ++k) {
        const auto r = rising.sense({1.0 + 0.01 * k + 0.001, 0, 0, 0}, dt);
        CHECK(r.derivative == doctest::Approx(0.70));
    }

    AltitudeSensor windowed(0.01, 3);
    for (int k = 0; k < 3; ++k) CHECK(windowed.sense({0.02 * k + 0.001, 0, 0, 0}, dt).derivative == 0.0);
    CHECK(windowed.sense({0.061, 0, 0, 0}, dt).derivative == doctest::Approx(0.06 / (3 * dt)));
    windowed.reset();
    CHECK(windowed.sense({3.0, 0, 0, 0}, dt).derivative == 0.0);
}

TEST_CASE("halving the physics step barely moves the closed loop") {
    ExperimentConfig c;
    c.setpoint = 2.0;
    ExperimentConfig fine = c;
    fine.substeps = 2 * c.substeps;
    const double z1 = run_step_response(c).trace.rows.back().z;
    const double z2 = run_step_response(fine).trace.rows.back().z;
    CHECK(std::abs(z1 - z2) < 1e-3);
}

TEST_CASE("plant is deterministic") {
    PlantParams p;
    p.drag = 0.3;
    p.motor_time_constant = 0.02;
    PlantState a{}, b{};
    for (int k = 0; k < 1000; ++k) {
        const double u = hover_thrust(p) + std::sin(0.01 * k);
        a = plant_step(a, u, 0.001, p);
        b = plant_step(b, u, 0.001, p);
    }
    CHECK(a.z == b.z);
    CHECK(a.vz == b.vz);
}

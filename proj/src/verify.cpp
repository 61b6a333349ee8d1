#include <algorithm>
#include <chrono>
#include <random>

#include "neuropid/experiment.hpp"

namespace neuropid {

AdderCase AdderCase::square(std::size_t n, Distribution d, RoundingMode m, bool quantized) {
    return {n, n, d, m, quantized};
}

AdderCase AdderCase::example(RoundingMode m, bool quantized) { return {3, 5, Distribution::uniform, m, quantized}; }

AdderReport verify_adder(const AdderCase& c) {
    const auto start = std::chrono::steady_clock::now();
    const ValueGrid in = ValueGrid::make(-1.0, 1.0, c.input_neurons, c.distribution);
    const ValueGrid out = ValueGrid::make(-2.0, 2.0, c.output_neurons, c.distribution);
    const AdderUnit unit({{in, +1, 1.0}, {in, +1, 1.0}}, out, c.mode, c.quantized);

    AdderReport report;
    UnitActivity act;
    for (std::size_t a = 0; a < in.size(); ++a) {
        for (std::size_t b = 0; b < in.size(); ++b) {
            const std::size_t bins[2] = {a, b};
            unit.propagate(bins, act);
            const std::size_t expected = out.round(in[a] + in[b], c.mode);
            const std::size_t dev = act.output_bin > expected ? act.output_bin - expected : expected - act.output_bin;
            ++report.pairs;
            if (dev == 0) ++report.exact;
            if (dev <= 1) ++report.within_one;
            report.max_deviation = std::max(report.max_deviation, dev);
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

BenchResult bench(const NpidConfig& config, std::size_t ticks, std::uint64_t seed) {
    NpidNetwork net(config);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(config.position.lo, config.position.hi);
    std::uniform_real_distribution<double> der(config.derivative.lo, config.derivative.hi);
    constexpr std::size_t kInputs = 4096;
    std::vector<double> inputs(3 * kInputs);
    for (std::size_t i = 0; i < kInputs; ++i) {
        inputs[3 * i] = pos(rng);
        inputs[3 * i + 1] = pos(rng);
        inputs[3 * i + 2] = der(rng);
    }

    using clock = std::chrono::steady_clock;
    std::vector<float> latency_ns(ticks);
    double sink = 0.0;
    const auto begin = clock::now();
    for (std::size_t k = 0; k < ticks; ++k) {
        const double* in = &inputs[3 * (k % kInputs)];
        const auto t0 = clock::now();
        sink += net.step(in[0], in[1], in[2]);
        const auto t1 = clock::now();
        latency_ns[k] = static_cast<float>(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    const double seconds = std::chrono::duration<double>(clock::now() - begin).count();
    volatile double keep = sink;
    (void)keep;

    BenchResult r;
    r.ticks = ticks;
    r.seconds = seconds;
    r.ticks_per_second = ticks > 0 ? static_cast<double>(ticks) / seconds : 0.0;
    double total = 0.0;
    for (float v : latency_ns) total += v;
    r.mean_ns = ticks > 0 ? total / static_cast<double>(ticks) : 0.0;
    if (ticks > 0) {
        const std::size_t idx = std::min(ticks - 1, static_cast<std::size_t>(0.99 * static_cast<double>(ticks)));
        std::nth_element(latency_ns.begin(), latency_ns.begin() + static_cast<std::ptrdiff_t>(idx), latency_ns.end());
        r.p99_ns = latency_ns[idx];
    }
    return r;
}

}  // namespace neuropid

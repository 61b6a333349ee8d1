// Command-line front end for the spiking PID experiments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "neuropid/experiment.hpp"

using namespace neuropid;

namespace {

struct CommonFlags {
    std::optional<double> setpoint;
    std::optional<std::size_t> neurons;
    std::optional<std::string> distribution;
    std::optional<double> rate;
    std::optional<double> duration;
    std::optional<double> decay;
    std::optional<std::string> mode;
    std::optional<bool> quantized;
    std::optional<std::string> controller;
    std::string config;
    std::string out;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--setpoint", f.setpoint, "Target altitude [m]");
    app->add_option("--neurons", f.neurons, "Neurons per population");
    app->add_option("--distribution", f.distribution, "Output distribution: uniform|quadratic");
    app->add_option("--rate", f.rate, "Control rate [Hz]");
    app->add_option("--duration", f.duration, "Run length [s]");
    app->add_option("--decay", f.decay, "Integral decay factor in (0, 1]");
    app->add_option("--mode", f.mode, "Rounding mode: nearest|floor");
    app->add_option("--quantized", f.quantized, "Use 8-bit even integer weights (true|false)");
    app->add_option("--controller", f.controller, "npid|baseline");
    app->add_option("--config", f.config, "JSON config file");
    app->add_option("--out", f.out, "Output path (default stdout)");
}

ExperimentConfig load_config(const CommonFlags& f) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::runtime_error("cannot open config '" + f.config + "'");
        j = nlohmann::json::parse(in);
    }
    if (f.neurons || f.distribution) {
        auto& g = j["grids"];
        if (f.neurons) g["neurons"] = *f.neurons;
        if (f.distribution) g["distribution"] = *f.distribution;
    }
    nlohmann::json e = j.value("experiment", nlohmann::json::object());
    if (f.setpoint) e["setpoint"] = *f.setpoint;
    if (f.rate) e["rate"] = *f.rate;
    if (f.duration) e["duration"] = *f.duration;
    if (f.decay) e["decay"] = *f.decay;
    if (f.mode) e["mode"] = *f.mode;
    if (f.quantized) e["quantized"] = *f.quantized;
    if (f.controller) e["controller"] = *f.controller;
    j["experiment"] = e;
    return ExperimentConfig::from_json(j);
}

// Writes through `fn` to the --out file, or stdout when none was given.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    fn(out);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void print_metrics(const RunMetrics& m) {
    std::fprintf(stderr,
                 "rise_time=%.3fs overshoot=%.4fm (%.1f%%) settling_time=%.3fs settled=%d steady_state_error=%.4fm "
                 "saturation=%.3f band=[%.4f, %.4f]\n",
                 m.rise_time, m.overshoot_m, m.overshoot_pct, m.settling_time, m.settled ? 1 : 0,
                 m.steady_state_error, m.saturation_fraction, m.band_lo, m.band_hi);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking PID altitude-control experiments"};
    app.require_subcommand(1);

    CommonFlags run_f, sweep_f, cmp_f, verify_f, bench_f, export_f;

    auto* run = app.add_subcommand("run", "Closed-loop step response; writes the trace CSV");
    add_common(run, run_f);
    std::string run_svg, run_raster, run_spikes;
    run->add_option("--svg", run_svg, "Also write an SVG altitude plot");
    run->add_option("--raster", run_raster, "Also write the full spike raster CSV");
    run->add_option("--spikes", run_spikes, "Also write the per-tick N-PID bin trace CSV");

    auto* sw = app.add_subcommand("sweep", "Set-points x resolutions; writes a summary table");
    add_common(sw, sweep_f);
    std::string sweep_setpoints = "1.0,1.5,2.0,2.5,3.0", sweep_neurons = "151,63,15";
    std::size_t quadratic_below = 32;
    std::string sweep_svg;
    sw->add_option("--setpoints", sweep_setpoints, "Comma-separated set-points [m]");
    sw->add_option("--neuron-set", sweep_neurons, "Comma-separated resolutions");
    sw->add_option("--quadratic-below", quadratic_below, "Resolutions below this use quadratic output grids");
    sw->add_option("--svg", sweep_svg, "Also write an SVG with every run");

    auto* cmp = app.add_subcommand("compare", "Baseline PID vs N-PID at one set-point");
    add_common(cmp, cmp_f);
    std::string cmp_svg;
    cmp->add_option("--svg", cmp_svg, "Also write an SVG with both runs");

    auto* ver = app.add_subcommand("verify-adder", "Exhaustive spiking-adder check against arithmetic");
    add_common(ver, verify_f);
    bool example = false;
    ver->add_flag("--example", example, "Use inputs [-1,0,1] and output [-2..2]");

    auto* be = app.add_subcommand("bench", "N-PID tick throughput");
    add_common(be, bench_f);
    std::size_t bench_ticks = 1'000'000;
    be->add_option("--ticks", bench_ticks, "Ticks to time (>= 1e6 for a report)");

    auto* ex = app.add_subcommand("export-netlist", "Write the N-PID (or the two-input example adder) netlist as JSON");
    add_common(ex, export_f);
    bool export_example = false;
    ex->add_flag("--example", export_example, "Export the two-input example adder instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const ExperimentConfig cfg = load_config(run_f);
            const RunResult r = run_step_response(cfg, !run_raster.empty());
            emit(run_f.out, [&](std::ostream& o) { write_trace_csv(o, r.trace); });
            if (!run_svg.empty())
                emit(run_svg, [&](std::ostream& o) {
                    write_svg(o, {{to_string(cfg.controller).data(), &r.trace, {r.metrics.band_lo, r.metrics.band_hi}}});
                });
            if (!run_raster.empty()) emit(run_raster, [&](std::ostream& o) { write_raster_csv(o, r.spikes); });
            if (!run_spikes.empty()) emit(run_spikes, [&](std::ostream& o) { neuropid::write_trace_csv(o, r.spikes); });
            print_metrics(r.metrics);
            return 0;
        }
        if (*sw) {
            const ExperimentConfig base = load_config(sweep_f);
            std::vector<std::size_t> ns;
            for (double v : parse_list(sweep_neurons)) ns.push_back(static_cast<std::size_t>(v));
            const auto cfgs = sweep_configs(base, parse_list(sweep_setpoints), ns, quadratic_below);
            const auto rows = compare(cfgs);
            emit(sweep_f.out, [&](std::ostream& o) { write_summary_csv(o, rows); });
            if (!sweep_svg.empty()) {
                std::vector<RunResult> runs;
                for (const auto& c : cfgs) runs.push_back(run_step_response(c));
                std::vector<PlotSeries> series;
                for (std::size_t i = 0; i < runs.size(); ++i)
                    series.push_back({"N=" + std::to_string(cfgs[i].npid.output.n) + " sp=" +
                                          std::to_string(cfgs[i].setpoint).substr(0, 4),
                                      &runs[i].trace,
                                      {runs[i].metrics.band_lo, runs[i].metrics.band_hi}});
                emit(sweep_svg, [&](std::ostream& o) { write_svg(o, series); });
            }
            return 0;
        }
        if (*cmp) {
            ExperimentConfig npid_cfg = load_config(cmp_f);
            npid_cfg.controller = ControllerKind::npid;
            ExperimentConfig base_cfg = npid_cfg;
            base_cfg.controller = ControllerKind::baseline;
            const std::vector<ExperimentConfig> cfgs{base_cfg, npid_cfg};
            emit(cmp_f.out, [&](std::ostream& o) { write_summary_csv(o, compare(cfgs)); });
            if (!cmp_svg.empty()) {
                const RunResult a = run_step_response(base_cfg), b = run_step_response(npid_cfg);
                emit(cmp_svg, [&](std::ostream& o) {
                    write_svg(o, {{"baseline", &a.trace, {a.metrics.band_lo, a.metrics.band_hi}},
                                  {"npid", &b.trace, {b.metrics.band_lo, b.metrics.band_hi}}});
                });
            }
            return 0;
        }
        if (*ver) {
            const std::size_t n = verify_f.neurons.value_or(151);
            const Distribution d = parse_distribution(verify_f.distribution.value_or("uniform"));
            const RoundingMode m = parse_rounding_mode(verify_f.mode.value_or("nearest"));
            const bool q = verify_f.quantized.value_or(false);
            const AdderCase c = example ? AdderCase::example(m, q) : AdderCase::square(n, d, m, q);
            const AdderReport r = verify_adder(c);
            const bool ok = r.passed(q);
            std::printf("verify-adder inputs=%zu output=%zu distribution=%s mode=%s quantized=%d: %zu/%zu exact, "
                        "%zu/%zu within one bin, max deviation %zu bins, %.3fs -> %s\n",
                        c.input_neurons, c.output_neurons, to_string(d).data(), to_string(m).data(), q ? 1 : 0,
                        r.exact, r.pairs, r.within_one, r.pairs, r.max_deviation, r.seconds, ok ? "PASS" : "FAIL");
            return ok ? 0 : 1;
        }
        if (*be) {
            ExperimentConfig cfg = load_config(bench_f);
            if (!bench_f.neurons) cfg.set_resolution(15, Distribution::quadratic);
            const BenchResult r = bench(cfg.npid, bench_ticks, cfg.seed);
            std::printf("bench neurons=%zu ticks=%zu seconds=%.3f ticks_per_second=%.0f mean_ns=%.1f p99_ns=%.1f\n",
                        cfg.npid.output.n, r.ticks, r.seconds, r.ticks_per_second, r.mean_ns, r.p99_ns);
            return 0;
        }
        if (*ex) {
            Netlist nl;
            if (export_example) {
                const RoundingMode m = parse_rounding_mode(export_f.mode.value_or("nearest"));
                const bool q = export_f.quantized.value_or(false);
                const ValueGrid in = ValueGrid::make(-1.0, 1.0, 3, Distribution::uniform);
                const ValueGrid out = ValueGrid::make(-2.0, 2.0, 5, Distribution::uniform);
                const std::vector<AdderUnit> units{AdderUnit({{in, +1, 1.0}, {in, +1, 1.0}}, out, m, q)};
                const std::vector<ValueGrid> inputs{in, in};
                nl = export_netlist(std::span<const AdderUnit>(units), std::span<const ValueGrid>(inputs));
            } else {
                ExperimentConfig cfg = load_config(export_f);
                if (!export_f.decay && export_f.config.empty()) cfg.npid.decay = 1.0;
                nl = NpidNetwork(cfg.npid).export_netlist();
            }
            emit(export_f.out, [&](std::ostream& o) { o << nl.to_json().dump(1) << '\n'; });
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

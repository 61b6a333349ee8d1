#include "neuropid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "neuropid/baseline_pid.hpp"

namespace neuropid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

GridSpec grid_spec_from_json(const nlohmann::json& j, GridSpec base) {
    base.lo = j.value("lo", base.lo);
    base.hi = j.value("hi", base.hi);
    base.n = j.value("n", base.n);
    if (j.contains("distribution")) base.distribution = parse_distribution(j.at("distribution").get<std::string>());
    return base;
}

nlohmann::json grid_spec_to_json(const GridSpec& g) {
    return {{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}, {"distribution", std::string(to_string(g.distribution))}};
}

}  // namespace

std::string_view to_string(ControllerKind k) { return k == ControllerKind::npid ? "npid" : "baseline"; }

ControllerKind parse_controller(std::string_view name) {
    if (name == "npid") return ControllerKind::npid;
    if (name == "baseline" || name == "pid") return ControllerKind::baseline;
    throw std::invalid_argument("unknown controller '" + std::string(name) + "'");
}

NpidConfig ExperimentConfig::default_npid() {
    NpidConfig c = NpidConfig::reference(151, Distribution::uniform);
    c.decay = 0.8;
    return c;
}

PlantParams ExperimentConfig::default_plant() {
    PlantParams p;
    p.mass = 0.68;
    p.drag = 0.6;
    p.motor_time_constant = 0.05;
    return p;
}

std::size_t ExperimentConfig::ticks() const noexcept {
    return static_cast<std::size_t>(std::llround(duration * rate));
}

void ExperimentConfig::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration must be positive");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("control rate must be positive");
    if (substeps < 1) throw std::invalid_argument("at least one physics step per control tick");
    if (!(sensor_quantum > 0.0)) throw std::invalid_argument("sensor quantum must be positive");
    if (derivative_window < 1) throw std::invalid_argument("derivative window must be at least one tick");
    if (!(battery_beta >= 0.0)) throw std::invalid_argument("battery sag rate must be non-negative");
    if (!std::isfinite(setpoint) || !std::isfinite(initial_altitude) || initial_altitude < 0.0)
        throw std::invalid_argument("set-point and initial altitude must be finite, altitude non-negative");
    npid.validate();
    plant.validate();
}

void ExperimentConfig::set_resolution(std::size_t n, Distribution output_distribution) {
    npid.position.n = n;
    npid.error.n = n;
    npid.derivative.n = n;
    npid.integral.n = n;
    npid.output.n = n;
    npid.integral.distribution = output_distribution;
    npid.output.distribution = output_distribution;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("gains")) {
        const auto& g = j.at("gains");
        c.npid.kp = g.value("kp", c.npid.kp);
        c.npid.ti = g.value("ti", c.npid.ti);
        c.npid.td = g.value("td", c.npid.td);
    }
    bool integral_given = false;
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        if (g.contains("neurons") || g.contains("distribution")) {
            const auto n = g.value("neurons", c.npid.output.n);
            const auto d = g.contains("distribution") ? parse_distribution(g.at("distribution").get<std::string>())
                                                      : c.npid.output.distribution;
            c.set_resolution(n, d);
        }
        if (g.contains("position")) c.npid.position = grid_spec_from_json(g.at("position"), c.npid.position);
        if (g.contains("error")) c.npid.error = grid_spec_from_json(g.at("error"), c.npid.error);
        if (g.contains("derivative")) c.npid.derivative = grid_spec_from_json(g.at("derivative"), c.npid.derivative);
        if (g.contains("output")) c.npid.output = grid_spec_from_json(g.at("output"), c.npid.output);
        if (g.contains("integral")) {
            c.npid.integral = grid_spec_from_json(g.at("integral"), c.npid.integral);
            integral_given = g.at("integral").contains("lo") || g.at("integral").contains("hi");
        }
    }
    if (!integral_given) {
        const double bound = c.npid.default_integral_bound();
        c.npid.integral.lo = -bound;
        c.npid.integral.hi = bound;
    }
    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        c.plant.mass = p.value("mass", c.plant.mass);
        c.plant.g = p.value("g", c.plant.g);
        c.plant.drag = p.value("drag", c.plant.drag);
        c.plant.motor_time_constant = p.value("motor_time_constant", c.plant.motor_time_constant);
        c.plant.thrust_min = p.value("thrust_min", c.plant.thrust_min);
        c.plant.thrust_max = p.value("thrust_max", c.plant.thrust_max);
        c.plant.hover_adjust = p.value("hover_adjust", c.plant.hover_adjust);
    }
    if (j.contains("sensor")) {
        const auto& s = j.at("sensor");
        c.sensor_quantum = s.value("quantum", c.sensor_quantum);
        c.derivative_window = s.value("derivative_window", c.derivative_window);
    }
    if (j.contains("experiment")) {
        const auto& e = j.at("experiment");
        if (e.contains("controller")) c.controller = parse_controller(e.at("controller").get<std::string>());
        c.setpoint = e.value("setpoint", c.setpoint);
        c.initial_altitude = e.value("initial_altitude", c.initial_altitude);
        c.duration = e.value("duration", c.duration);
        c.rate = e.value("rate", c.rate);
        c.substeps = e.value("substeps", c.substeps);
        c.seed = e.value("seed", c.seed);
        c.battery_beta = e.value("battery_beta", c.battery_beta);
        c.npid.decay = e.value("decay", c.npid.decay);
        if (e.contains("mode")) c.npid.mode = parse_rounding_mode(e.at("mode").get<std::string>());
        c.npid.quantized = e.value("quantized", c.npid.quantized);
    }
    c.npid.dt = c.dt();
    c.validate();
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["gains"] = {{"kp", npid.kp}, {"ti", npid.ti}, {"td", npid.td}};
    j["grids"] = {{"position", grid_spec_to_json(npid.position)},
                  {"error", grid_spec_to_json(npid.error)},
                  {"integral", grid_spec_to_json(npid.integral)},
                  {"derivative", grid_spec_to_json(npid.derivative)},
                  {"output", grid_spec_to_json(npid.output)}};
    j["plant"] = {{"mass", plant.mass},
                  {"g", plant.g},
                  {"drag", plant.drag},
                  {"motor_time_constant", plant.motor_time_constant},
                  {"thrust_min", plant.thrust_min},
                  {"thrust_max", plant.thrust_max},
                  {"hover_adjust", plant.hover_adjust}};
    j["sensor"] = {{"quantum", sensor_quantum}, {"derivative_window", derivative_window}};
    j["experiment"] = {{"controller", std::string(to_string(controller))},
                       {"setpoint", setpoint},
                       {"initial_altitude", initial_altitude},
                       {"duration", duration},
                       {"rate", rate},
                       {"substeps", substeps},
                       {"seed", seed},
                       {"battery_beta", battery_beta},
                       {"decay", npid.decay},
                       {"mode", std::string(to_string(npid.mode))},
                       {"quantized", npid.quantized}};
    return j;
}

SettlingBand setpoint_band(const ValueGrid& position, double setpoint, std::size_t extra_bins) {
    const std::size_t b = position.encode(setpoint);
    const std::size_t lo_bin = b >= extra_bins ? b - extra_bins : 0;
    const std::size_t hi_bin = std::min(position.size() - 1, b + extra_bins);
    const auto v = position.values();
    const double lo = lo_bin == 0 ? v[0] - (v[1] - v[0]) / 2.0 : (v[lo_bin - 1] + v[lo_bin]) / 2.0;
    const double hi = hi_bin + 1 == v.size() ? v[hi_bin] + (v[hi_bin] - v[hi_bin - 1]) / 2.0
                                             : (v[hi_bin] + v[hi_bin + 1]) / 2.0;
    return {lo, hi};
}

namespace {

/// Time after which every sample stays in [lo, hi]; NaN if the last one is outside.
double stay_time(const TraceRecord& trace, double lo, double hi) {
    const auto& rows = trace.rows;
    if (rows.empty()) return kNaN;
    std::size_t k = rows.size();
    while (k > 0 && rows[k - 1].z >= lo && rows[k - 1].z <= hi) --k;
    if (k == rows.size()) return kNaN;
    return rows[k].t;
}

}  // namespace

RunMetrics compute_metrics(const TraceRecord& trace, const ExperimentConfig& cfg) {
    RunMetrics m;
    const ValueGrid position = cfg.npid.position.build();
    const SettlingBand band = setpoint_band(position, cfg.setpoint, 1);
    const SettlingBand cell = setpoint_band(position, cfg.setpoint, 0);
    m.band_lo = band.lo;
    m.band_hi = band.hi;
    m.bin_lo = cell.lo;
    m.bin_hi = cell.hi;
    const auto& rows = trace.rows;
    if (rows.empty()) return m;

    const double start = cfg.initial_altitude;
    const double step = cfg.setpoint - start;
    const double dir = step >= 0.0 ? 1.0 : -1.0;
    const double mag = std::abs(step);

    double t10 = kNaN, t90 = kNaN, peak = 0.0;
    for (const auto& r : rows) {
        const double progress = dir * (r.z - start);
        if (std::isnan(t10) && progress >= 0.1 * mag) t10 = r.t;
        if (std::isnan(t90) && progress >= 0.9 * mag) t90 = r.t;
        peak = std::max(peak, dir * (r.z - cfg.setpoint));
    }
    m.rise_time = mag > 0.0 ? t90 - t10 : 0.0;
    m.overshoot_m = mag > 0.0 ? peak : 0.0;
    m.overshoot_pct = mag > 0.0 ? 100.0 * m.overshoot_m / mag : 0.0;

    m.settling_time = stay_time(trace, band.lo, band.hi);
    m.settled = !std::isnan(m.settling_time);
    m.bin_settling_time = stay_time(trace, cell.lo, cell.hi);

    const std::size_t tail = std::max<std::size_t>(1, rows.size() / 10);
    double sum = 0.0;
    for (std::size_t k = rows.size() - tail; k < rows.size(); ++k) sum += rows[k].z;
    m.steady_state_error = std::abs(sum / static_cast<double>(tail) - cfg.setpoint);

    std::size_t saturated = 0;
    const double out_lo = cfg.npid.output.lo, out_hi = cfg.npid.output.hi;
    for (const auto& r : rows)
        if (r.u_newton <= out_lo || r.u_newton >= out_hi) ++saturated;
    m.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(rows.size());
    return m;
}

RunResult run_step_response(const ExperimentConfig& cfg_in, bool record_raster) {
    ExperimentConfig cfg = cfg_in;
    cfg.npid.dt = cfg.dt();
    cfg.validate();

    const double dt = cfg.dt();
    const double dt_phys = dt / static_cast<double>(cfg.substeps);
    const double hover = hover_thrust(cfg.plant);

    std::optional<NpidNetwork> net;
    if (cfg.controller == ControllerKind::npid) {
        net.emplace(cfg.npid);
        net->record(true, record_raster);
    }
    PidState pid;
    const PidGains gains{cfg.npid.kp, cfg.npid.ti, cfg.npid.td};
    const OutputRange clamp{cfg.npid.output.lo, cfg.npid.output.hi};

    AltitudeSensor sensor(cfg.sensor_quantum, cfg.derivative_window);
    PlantState state;
    state.z = cfg.initial_altitude;
    state.thrust = hover;

    RunResult result;
    const std::size_t ticks = cfg.ticks();
    result.trace.rows.reserve(ticks);
    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        state.t = t;
        const SensorReading reading = sensor.sense(state, dt);

        TraceRow row;
        row.t = t;
        row.z = state.z;
        row.vz = state.vz;
        row.z_meas = reading.z;
        row.target = cfg.setpoint;
        if (net) {
            // Constant target: the error derivative is minus the altitude rate.
            row.u_newton = net->step(cfg.setpoint, reading.z, -reading.derivative);
            const auto& tick = net->last_tick();
            row.error_bin = static_cast<long>(tick.error_bin);
            row.integral_bin = static_cast<long>(tick.integral_bin);
            row.deriv_bin = static_cast<long>(tick.deriv_bin);
            row.u_bin = static_cast<long>(tick.output_bin);
        } else {
            row.u_newton = pid_step(pid, cfg.setpoint, reading.z, dt, gains, clamp, cfg.npid.decay);
        }
        row.thrust_total = hover + row.u_newton + battery_sag(t, cfg.battery_beta);
        result.trace.rows.push_back(row);

        for (std::size_t s = 0; s < cfg.substeps; ++s) state = plant_step(state, row.thrust_total, dt_phys, cfg.plant);
    }
    result.metrics = compute_metrics(result.trace, cfg);
    if (net) result.spikes = net->trace();
    return result;
}

std::vector<SummaryRow> compare(const std::vector<ExperimentConfig>& cfgs, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    auto run_one = [](const ExperimentConfig& c) {
        SummaryRow row;
        row.controller = std::string(to_string(c.controller));
        row.neurons = c.controller == ControllerKind::npid ? c.npid.output.n : 0;
        row.distribution = c.controller == ControllerKind::npid ? std::string(to_string(c.npid.output.distribution)) : "-";
        row.setpoint = c.setpoint;
        row.metrics = run_step_response(c).metrics;
        return row;
    };
    std::vector<SummaryRow> rows(cfgs.size());
    for (std::size_t begin = 0; begin < cfgs.size(); begin += threads) {
        const std::size_t end = std::min(cfgs.size(), begin + threads);
        std::vector<std::future<SummaryRow>> jobs;
        for (std::size_t i = begin; i < end; ++i)
            jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, run_one,
                                      std::cref(cfgs[i])));
        for (std::size_t i = begin; i < end; ++i) rows[i] = jobs[i - begin].get();
    }
    return rows;
}

std::vector<ExperimentConfig> sweep_configs(const ExperimentConfig& base, const std::vector<double>& setpoints,
                                            const std::vector<std::size_t>& neurons, std::size_t quadratic_below) {
    std::vector<ExperimentConfig> cfgs;
    for (std::size_t n : neurons) {
        for (double sp : setpoints) {
            ExperimentConfig c = base;
            c.set_resolution(n, n < quadratic_below ? Distribution::quadratic : Distribution::uniform);
            c.setpoint = sp;
            cfgs.push_back(c);
        }
    }
    return cfgs;
}

std::vector<SummaryRow> sweep(const ExperimentConfig& base, const std::vector<double>& setpoints,
                              const std::vector<std::size_t>& neurons, std::size_t quadratic_below, unsigned threads) {
    return compare(sweep_configs(base, setpoints, neurons, quadratic_below), threads);
}

void write_trace_csv(std::ostream& out, const TraceRecord& trace) {
    out << "t,z,vz,z_meas,target,error_bin,integral_bin,deriv_bin,u_bin,u_newton,thrust_total\n";
    for (const auto& r : trace.rows) {
        out << fmt("%.6f", r.t) << ',' << fmt("%.9f", r.z) << ',' << fmt("%.9f", r.vz) << ',' << fmt("%.4f", r.z_meas)
            << ',' << fmt("%.4f", r.target) << ',' << r.error_bin << ',' << r.integral_bin << ',' << r.deriv_bin << ','
            << r.u_bin << ',' << fmt("%.9f", r.u_newton) << ',' << fmt("%.9f", r.thrust_total) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "controller,neurons,distribution,setpoint,rise_time,overshoot_m,overshoot_pct,settling_time,settled,"
           "bin_settling_time,steady_state_error,saturation_fraction\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out << r.controller << ',' << r.neurons << ',' << r.distribution << ',' << fmt("%.3f", r.setpoint) << ','
            << fmt("%.4f", m.rise_time) << ',' << fmt("%.4f", m.overshoot_m) << ',' << fmt("%.2f", m.overshoot_pct)
            << ',' << fmt("%.4f", m.settling_time) << ',' << (m.settled ? 1 : 0) << ','
            << fmt("%.4f", m.bin_settling_time) << ',' << fmt("%.4f", m.steady_state_error) << ','
            << fmt("%.4f", m.saturation_fraction) << '\n';
    }
}

void write_svg(std::ostream& out, const std::vector<PlotSeries>& series) {
    constexpr double W = 800.0, H = 480.0, margin = 50.0;
    double t_max = 1e-9, z_max = 1e-9;
    for (const auto& s : series) {
        if (s.trace == nullptr) continue;
        for (const auto& r : s.trace->rows) {
            t_max = std::max(t_max, r.t);
            z_max = std::max(z_max, r.z);
        }
        z_max = std::max(z_max, s.band.hi);
    }
    z_max *= 1.1;
    const auto x = [&](double t) { return margin + (W - 2 * margin) * t / t_max; };
    const auto y = [&](double z) { return H - margin - (H - 2 * margin) * z / z_max; };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\"" << W - margin << "\" y2=\"" << H - margin
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << H - margin
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">time [s] (0 to "
        << fmt("%.1f", t_max) << ")</text>\n";
    out << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
        << ")\" text-anchor=\"middle\">altitude [m] (0 to " << fmt("%.2f", z_max) << ")</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.trace == nullptr) continue;
        const char* color = colors[i % 10];
        out << "<rect x=\"" << fmt("%.2f", x(0)) << "\" y=\"" << fmt("%.2f", y(s.band.hi)) << "\" width=\""
            << fmt("%.2f", x(t_max) - x(0)) << "\" height=\"" << fmt("%.2f", y(s.band.lo) - y(s.band.hi))
            << "\" fill=\"" << color << "\" fill-opacity=\"0.15\"/>\n";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : s.trace->rows) out << fmt("%.2f", x(r.t)) << ',' << fmt("%.2f", y(r.z)) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - margin - 5 << "\" y=\"" << margin + 15 * (static_cast<double>(i) + 1)
            << "\" text-anchor=\"end\" fill=\"" << color << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace neuropid

#include "nmcsim/power.hpp"

#include <cmath>
#include <cstdio>

#include "nmcsim/errors.hpp"

namespace nmcsim {

namespace {

struct PacedLedgerRun {
    EnergyLedger ledger;
    double window_s = 0.0;
    double measured_rate_ev_s = 0.0;
    bool saturated = false;
    std::uint64_t tokens = 0;
};

PacedLedgerRun paced_ledger_run(double rate_ev_s, int width_bits, const FabricCosts& costs,
                                const DelayModel& delays, int n_tokens, std::uint64_t seed) {
    PacedLedgerRun out;

    Engine engine;
    Fabric fab(engine, delays, seed, costs, &out.ledger);
    auto& src = fab.add_source("src");
    auto& buf = fab.add_buffer("b0");
    auto& snk = fab.add_sink("snk");
    fab.connect(src, buf, width_bits);
    fab.connect(buf, snk, width_bits);

    std::vector<std::uint32_t> values(static_cast<std::size_t>(n_tokens));
    const std::uint32_t mask = (1u << width_bits) - 1;
    for (int i = 0; i < n_tokens; ++i) values[static_cast<std::size_t>(i)] = i & mask;
    src.set_values(values);
    src.set_period(static_cast<TimePs>(std::llround(kPsPerSecond / rate_ev_s)));

    fab.start();
    engine.run_all();
    if (static_cast<int>(snk.received().size()) < n_tokens) {
        throw DeadlockError("buffer power run stalled; " + fab.stuck_report());
    }

    out.tokens = snk.received().size();
    out.saturated = src.saturated();
    if (out.saturated) {
        // Source could not hold the requested pace; window is what actually
        // elapsed between the first injection and the last delivery.
        out.window_s = time_to_seconds(snk.received().back().second -
                                       src.injections().front().second);
    } else {
        out.window_s = static_cast<double>(n_tokens) / rate_ev_s;
    }
    if (!(out.window_s > 0.0)) throw SimError("power", "degenerate power window");
    out.measured_rate_ev_s = static_cast<double>(out.tokens) / out.window_s;
    return out;
}

}  // namespace

std::vector<PowerPoint> buffer_power_curve(const std::vector<double>& rates_ev_s,
                                           int width_bits, const FabricCosts& costs,
                                           const DelayModel& delays, int n_tokens,
                                           std::uint64_t seed) {
    std::vector<PowerPoint> points;
    points.reserve(rates_ev_s.size());
    for (double rate : rates_ev_s) {
        if (!(rate > 0.0)) throw SimError("power", "rates must be positive");
        const PacedLedgerRun run =
            paced_ledger_run(rate, width_bits, costs, delays, n_tokens, seed);
        PowerPoint p;
        p.rate_ev_s = rate;
        p.measured_rate_ev_s = run.measured_rate_ev_s;
        p.power_w = run.ledger.mean_power_w(run.window_s);
        p.energy_per_event_j = p.power_w / run.measured_rate_ev_s;
        p.saturated = run.saturated;
        points.push_back(p);
    }
    return points;
}

SystemRoutingEstimate system_routing_estimate(int n_buffer_equivalents, double rate_ev_s,
                                              int width_bits, const FabricCosts& costs,
                                              const DelayModel& delays, int n_tokens,
                                              std::uint64_t seed) {
    if (n_buffer_equivalents < 1) throw SimError("power", "need at least one buffer equivalent");
    if (!(rate_ev_s > 0.0)) throw SimError("power", "rate must be positive");

    const PacedLedgerRun run = paced_ledger_run(rate_ev_s, width_bits, costs, delays,
                                                n_tokens, seed);
    const EnergyLedger composed = run.ledger.replicate(n_buffer_equivalents);

    SystemRoutingEstimate est;
    est.n_buffer_equivalents = n_buffer_equivalents;
    est.rate_ev_s = rate_ev_s;
    est.saturated = run.saturated;
    est.static_floor_w = composed.static_watts();
    est.power_w = composed.mean_power_w(run.window_s);
    est.energy_per_event_j = est.power_w / run.measured_rate_ev_s;
    return est;
}

AreaReport compute_area(const AreaParams& ap, const NeuronParams& np, int cam_words,
                        int cam_word_bits, int n_cores, int neurons_per_core) {
    if (!(ap.cap_density_f_per_um2 > 0.0)) throw SimError("power", "capacitive density must be positive");
    AreaReport r;
    r.neuron_logic_um2 = ap.neuron_logic_um2;
    r.capacitor_um2 = (np.c_m_f + np.c_a_f + np.c_r_f) / ap.cap_density_f_per_um2;
    r.cam_per_neuron_um2 = cam_area_um2(cam_words, cam_word_bits, ap.cam_cell_area_um2);
    r.synapse_um2 = r.cam_per_neuron_um2 / static_cast<double>(cam_words);
    r.per_neuron_um2 = r.neuron_logic_um2 + r.capacitor_um2 + r.cam_per_neuron_um2;
    r.per_core_um2 = r.per_neuron_um2 * neurons_per_core;
    r.chip_um2 = r.per_core_um2 * n_cores;
    r.n_cores = n_cores;
    r.neurons_per_core = neurons_per_core;
    return r;
}

ChipReport make_chip_report(const ReportInputs& in, const EnergyLedger* run_ledger,
                            double run_window_s, std::uint64_t run_spikes) {
    ChipReport r;
    r.supply_v = in.supply_v;
    r.energy_per_spike_j = in.neuron_e_spike_j;
    r.e_spike_ref_rate_hz = in.e_spike_ref_rate_hz;

    const auto bw = measure_throughput(1, in.width_bits, in.curve_tokens, in.delays, in.seed);
    r.router_bandwidth_ev_s = bw.events_per_s;

    const auto est = system_routing_estimate(in.n_buffer_equivalents, in.routing_ref_rate_ev_s,
                                             in.width_bits, in.costs, in.delays,
                                             in.curve_tokens, in.seed);
    r.energy_per_routing_j = est.energy_per_event_j;

    r.area = compute_area(in.area, in.neuron, in.cam_words, in.cam_word_bits, in.n_cores,
                          in.neurons_per_core);

    if (run_ledger) {
        r.has_run = true;
        r.run_spikes = run_spikes;
        r.run_window_s = run_window_s;
        r.run_static_w = run_ledger->static_watts();
        r.run_dynamic_j = run_ledger->dynamic_joules();
        r.run_mean_power_w =
            run_window_s > 0.0 ? run_ledger->mean_power_w(run_window_s) : 0.0;
        r.run_neuron_j = run_ledger->dynamic_joules(EnergyClass::NeuronSpike);
        r.run_fabric_j = run_ledger->dynamic_joules(EnergyClass::PchbBuffer) +
                         run_ledger->dynamic_joules(EnergyClass::PchbSplit) +
                         run_ledger->dynamic_joules(EnergyClass::PchbMerge);
        r.run_cam_j = run_ledger->dynamic_joules(EnergyClass::CamSearch);
    }
    return r;
}

std::string format_quantity(double value, const char* unit, bool si) {
    char buf[64];
    if (si) {
        std::snprintf(buf, sizeof buf, "%.6g %s", value, unit);
        return buf;
    }
    static const struct {
        double scale;
        const char* prefix;
    } steps[] = {{1e12, "T"}, {1e9, "G"}, {1e6, "M"}, {1e3, "k"}, {1.0, ""},
                 {1e-3, "m"}, {1e-6, "u"}, {1e-9, "n"}, {1e-12, "p"}, {1e-15, "f"},
                 {1e-18, "a"}};
    if (value == 0.0) {
        std::snprintf(buf, sizeof buf, "0 %s", unit);
        return buf;
    }
    const double mag = std::fabs(value);
    for (const auto& s : steps) {
        if (mag >= s.scale * 0.9995) {
            std::snprintf(buf, sizeof buf, "%.4g %s%s", value / s.scale, s.prefix, unit);
            return buf;
        }
    }
    std::snprintf(buf, sizeof buf, "%.4g a%s", value / 1e-18, unit);
    return buf;
}

std::string render_report_text(const ChipReport& r, bool si_units) {
    const bool si = si_units;
    auto line = [](const std::string& k, const std::string& v) {
        std::string s = "  " + k;
        if (s.size() < 28) s.append(28 - s.size(), ' ');
        return s + v + "\n";
    };
    std::string out;
    out += "chip feature report\n";
    out += line("technology", r.technology);
    out += line("supply voltage", format_quantity(r.supply_v, "V", si));
    out += line("energy per spike",
                format_quantity(r.energy_per_spike_j, "J", si) + " @ " +
                    format_quantity(r.e_spike_ref_rate_hz, "Hz", si));
    out += line("energy per routing", format_quantity(r.energy_per_routing_j, "J", si));
    out += line("router bandwidth", format_quantity(r.router_bandwidth_ev_s, "Events/s", si));
    out += line("neuron area", format_quantity(r.area.neuron_logic_um2, "um^2", true));
    out += line("synapse area", format_quantity(r.area.synapse_um2, "um^2", true));
    out += line("cam per neuron", format_quantity(r.area.cam_per_neuron_um2, "um^2", true));
    out += line("capacitor overlay", format_quantity(r.area.capacitor_um2, "um^2", true));
    out += line("fabric area", "not specified");
    out += line("per-neuron total", format_quantity(r.area.per_neuron_um2, "um^2", true));
    out += line("chip total",
                format_quantity(r.area.chip_um2, "um^2", true) + " (" +
                    std::to_string(r.area.n_cores) + " cores x " +
                    std::to_string(r.area.neurons_per_core) + " neurons)");
    if (r.has_run) {
        out += "run totals\n";
        out += line("spikes", std::to_string(r.run_spikes));
        out += line("window", format_quantity(r.run_window_s, "s", si));
        out += line("static power", format_quantity(r.run_static_w, "W", si));
        out += line("dynamic energy", format_quantity(r.run_dynamic_j, "J", si));
        out += line("mean power", format_quantity(r.run_mean_power_w, "W", si));
        out += line("neuron energy", format_quantity(r.run_neuron_j, "J", si));
        out += line("fabric energy", format_quantity(r.run_fabric_j, "J", si));
        out += line("cam energy", format_quantity(r.run_cam_j, "J", si));
        out += line("energy/spike (run)",
                    r.run_spikes == 0
                        ? "n/a (zero spikes)"
                        : format_quantity(r.run_dynamic_j / static_cast<double>(r.run_spikes),
                                          "J", si));
    }
    return out;
}

std::string render_report_csv(const ChipReport& r) {
    char buf[256];
    std::string out = "field,value,unit\n";
    out += "technology," + r.technology + ",\n";
    auto row = [&](const char* k, double v, const char* unit) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%s\n", k, v, unit);
        out += buf;
    };
    row("supply_voltage", r.supply_v, "V");
    row("energy_per_spike", r.energy_per_spike_j, "J");
    row("e_spike_ref_rate", r.e_spike_ref_rate_hz, "Hz");
    row("energy_per_routing", r.energy_per_routing_j, "J");
    row("router_bandwidth", r.router_bandwidth_ev_s, "Events/s");
    row("neuron_area", r.area.neuron_logic_um2, "um^2");
    row("synapse_area", r.area.synapse_um2, "um^2");
    row("cam_per_neuron_area", r.area.cam_per_neuron_um2, "um^2");
    row("capacitor_area", r.area.capacitor_um2, "um^2");
    out += "fabric_area,not_specified,\n";
    row("per_neuron_area", r.area.per_neuron_um2, "um^2");
    row("per_core_area", r.area.per_core_um2, "um^2");
    row("chip_area", r.area.chip_um2, "um^2");
    if (r.has_run) {
        row("run_spikes", static_cast<double>(r.run_spikes), "count");
        row("run_window", r.run_window_s, "s");
        row("run_static_power", r.run_static_w, "W");
        row("run_dynamic_energy", r.run_dynamic_j, "J");
        row("run_mean_power", r.run_mean_power_w, "W");
        if (r.run_spikes == 0) {
            out += "run_energy_per_spike,n/a,\n";
        } else {
            row("run_energy_per_spike", r.run_dynamic_j / static_cast<double>(r.run_spikes), "J");
        }
    }
    return out;
}

std::string power_curve_csv(const std::vector<PowerPoint>& points) {
    std::string out = "rate_ev_s,measured_rate_ev_s,power_w,energy_per_event_j,saturated\n";
    char buf[200];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", p.rate_ev_s,
                      p.measured_rate_ev_s, p.power_w, p.energy_per_event_j,
                      p.saturated ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace nmcsim

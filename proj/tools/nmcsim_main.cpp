// nmcsim command-line front end.
//
// Subcommands map onto the simulator's experiment flows:
//   device-sweep   subthreshold I_D vs V_GS curves per channel length
//   neuron-demo    the four single-neuron behavior panels
//   monte-carlo    device-mismatch firing-rate statistics
//   buffer-power   pipeline-buffer power vs event rate
//   qdi-check      randomized-delay conformance trials
//   run-network    full multi-core chip simulation from a network file
//   report         chip feature table (optionally folding in a run ledger)
//
// All outputs are CSV files under --out (default $NMCSIM_OUT or .).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nmcsim/behaviors.hpp"
#include "nmcsim/config.hpp"
#include "nmcsim/device.hpp"
#include "nmcsim/errors.hpp"
#include "nmcsim/fabric_ops.hpp"
#include "nmcsim/mismatch.hpp"
#include "nmcsim/netdesc.hpp"
#include "nmcsim/network.hpp"
#include "nmcsim/power.hpp"

namespace fs = std::filesystem;
using namespace nmcsim;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file");
    cmd->add_option("--out", args.out_dir, "output directory (default $NMCSIM_OUT or .)");
    cmd->add_option("--set", args.overrides, "override a config key, key=value")
        ->take_all();
    cmd->add_option("--seed", args.seed, "run seed")->each([&args](const std::string&) {
        args.seed_set = true;
    });
}

AppConfig load_config(const CommonArgs& args) {
    AppConfig cfg = AppConfig::defaults();
    if (!args.config_path.empty()) cfg.apply_file(args.config_path);
    for (const auto& o : args.overrides) cfg.apply_override(o);
    if (args.seed_set) cfg.set("mismatch.seed", std::to_string(args.seed));
    return cfg;
}

fs::path out_dir(const CommonArgs& args) {
    std::string dir = args.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("NMCSIM_OUT")) dir = env;
    }
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("io", "cannot write '" + path.string() + "'");
    out << content;
    std::printf("wrote %s\n", path.string().c_str());
}

std::uint64_t run_seed(const AppConfig& cfg) {
    return static_cast<std::uint64_t>(cfg.integer("mismatch.seed"));
}

// ---- device-sweep -----------------------------------------------------------

int cmd_device_sweep(const CommonArgs& common, double vds, int steps,
                     const std::vector<double>& lengths) {
    const AppConfig cfg = load_config(common);
    std::string csv = "polarity,l_m,v_gs_v,i_d_a\n";
    char buf[128];
    for (MosPolarity pol : {MosPolarity::NMOS, MosPolarity::PMOS}) {
        MosParams p = device_from_config(cfg, pol);
        const double sign = pol == MosPolarity::NMOS ? 1.0 : -1.0;
        for (double l : lengths) {
            p.l_m = l;
            for (int i = 0; i <= steps; ++i) {
                const double v_gs = sign * (i / static_cast<double>(steps));
                const double i_d = drain_current(p, v_gs, sign * vds);
                std::snprintf(buf, sizeof buf, "%s,%.4g,%.6g,%.9g\n",
                              pol == MosPolarity::NMOS ? "nmos" : "pmos", l, v_gs, i_d);
                csv += buf;
            }
        }
    }
    write_file(out_dir(common) / "device_sweep.csv", csv);
    return 0;
}

// ---- neuron-demo ------------------------------------------------------------

int cmd_neuron_demo(const CommonArgs& common) {
    const AppConfig cfg = load_config(common);
    const BehaviorSet set = behavior_panels(neuron_from_config(cfg), cfg.num("device.kappa"),
                                            cfg.num("device.ut_v"));
    const fs::path dir = out_dir(common);
    std::string rates_csv = "panel,setting,label,rate_hz\n";
    char buf[160];

    for (const BehaviorPanel* panel :
         {&set.leak, &set.threshold, &set.refractory, &set.adaptation}) {
        std::string traces = "time_s,setting,v\n";
        for (std::size_t i = 0; i < panel->settings.size(); ++i) {
            RateOptions opt = panel->options;
            opt.record_trace = true;
            opt.trace_stride_s = panel->t_sim_s / 4000.0;
            const RateResult r =
                firing_rate(panel->settings[i], panel->stimulus, panel->t_sim_s, opt);
            for (const auto& [t, v] : r.trace) {
                std::snprintf(buf, sizeof buf, "%.6f,%zu,%.6g\n", t, i, v);
                traces += buf;
            }
            std::snprintf(buf, sizeof buf, "%s,%zu,%s,%.6g\n", panel->name.c_str(), i,
                          panel->labels[i].c_str(), r.rate_hz);
            rates_csv += buf;
            std::printf("%-11s %-18s rate = %.2f Hz\n", panel->name.c_str(),
                        panel->labels[i].c_str(), r.rate_hz);
        }
        write_file(dir / ("demo_" + panel->name + "_traces.csv"), traces);
    }
    write_file(dir / "demo_rates.csv", rates_csv);
    return 0;
}

// ---- monte-carlo ------------------------------------------------------------

int cmd_monte_carlo(const CommonArgs& common, int runs_flag, bool calibrate) {
    AppConfig cfg = load_config(common);
    if (runs_flag > 0) cfg.set("mismatch.n_runs", std::to_string(runs_flag));

    const NeuronParams nominal = neuron_from_config(cfg);
    MismatchSpec spec = mismatch_from_config(cfg);
    const StimulusSpec stim;  // DC-only operating point
    const RateOptions opt = mc_rate_options(cfg);
    const double t_sim = mc_sim_time_s(cfg);

    if (calibrate) {
        const double mult =
            calibrate_sigma_multiplier(nominal, spec, stim, t_sim, opt, 0.0586);
        std::printf("calibrated mismatch.multiplier = %.6g\n", mult);
        spec.multiplier = mult;
    }

    const RateStats st = monte_carlo_rates(nominal, spec, stim, t_sim, opt);
    std::printf("runs=%d mean=%.4g Hz std=%.4g Hz relative_error=%.4g%% zero_runs=%zu\n",
                spec.n_runs, st.mean_hz, st.std_dev_hz, 100.0 * st.relative_error,
                st.zero_runs);

    std::string hist_csv = "bin_low_hz,bin_high_hz,count\n";
    char buf[96];
    for (const auto& b :
         rate_histogram(st.samples_hz, static_cast<int>(cfg.integer("mismatch.hist_bins")))) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%zu\n", b.lo_hz, b.hi_hz, b.count);
        hist_csv += buf;
    }
    const fs::path dir = out_dir(common);
    write_file(dir / "mc_hist.csv", hist_csv);

    std::snprintf(buf, sizeof buf, "mean_hz,std_dev_hz,relative_error,zero_runs\n");
    std::string stats_csv = buf;
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%zu\n", st.mean_hz, st.std_dev_hz,
                  st.relative_error, st.zero_runs);
    stats_csv += buf;
    write_file(dir / "mc_stats.csv", stats_csv);
    return 0;
}

// ---- buffer-power -----------------------------------------------------------

int cmd_buffer_power(const CommonArgs& common, const std::vector<double>& rates) {
    const AppConfig cfg = load_config(common);
    const auto points = buffer_power_curve(
        rates, static_cast<int>(cfg.integer("fabric.width_bits")),
        fabric_costs_from_config(cfg), delay_model_from_config(cfg),
        static_cast<int>(cfg.integer("power.curve_tokens")), run_seed(cfg));
    const bool si = cfg.str("report.units") == "si";
    for (const auto& p : points) {
        std::printf("rate %-12.6g -> %s%s\n", p.rate_ev_s,
                    format_quantity(p.power_w, "W", si).c_str(),
                    p.saturated ? " (saturated)" : "");
    }
    write_file(out_dir(common) / "buffer_power.csv", power_curve_csv(points));
    return 0;
}

// ---- qdi-check ----------------------------------------------------------------

int cmd_qdi_check(const CommonArgs& common, const std::string& topology, int trials,
                  int tokens, bool inject_fault, bool trace) {
    AppConfig cfg = load_config(common);
    DelayModel delays = delay_model_from_config(cfg);
    if (delays.mode == DelayMode::Nominal) delays.mode = DelayMode::Randomized;

    struct Job {
        std::string name;
        bool custom = false;
        TopologyKind kind = TopologyKind::BufferPipeline;
        PipelineDesc desc;
    };
    std::vector<Job> jobs;
    if (topology == "all") {
        for (TopologyKind k :
             {TopologyKind::BufferPipeline, TopologyKind::SplitTree, TopologyKind::MergeTree}) {
            jobs.push_back(Job{topology_name(k), false, k, {}});
        }
    } else if (const auto k = topology_from_name(topology)) {
        jobs.push_back(Job{topology, false, *k, {}});
    } else if (fs::exists(topology)) {
        Job j;
        j.name = topology;
        j.custom = true;
        j.desc = PipelineDesc::parse_file(topology);
        jobs.push_back(std::move(j));
    } else {
        throw SimError("usage", "'" + topology +
                                    "' is neither a built-in topology nor a pipeline file");
    }

    std::string report_txt;
    std::string trace_csv;
    bool all_ok = true;
    bool any_fault_detected = false;
    for (const Job& job : jobs) {
        const auto rep =
            job.custom
                ? qdi_conformance_custom(job.desc, trials, tokens, run_seed(cfg), delays,
                                         trace ? &trace_csv : nullptr)
                : qdi_conformance(job.kind, trials, tokens, run_seed(cfg), delays, inject_fault);
        std::printf("%-15s %d/%d trials passed%s\n", job.name.c_str(), rep.passes, rep.trials,
                    rep.ok() ? "" : "  [VIOLATIONS]");
        report_txt += job.name + ": " + std::to_string(rep.passes) + "/" +
                      std::to_string(rep.trials) + " passed\n";
        if (!rep.ok()) {
            any_fault_detected = true;
            report_txt += "  first failure (trial " + std::to_string(rep.first_failure_trial) +
                          "): " + rep.first_failure + "\n";
            for (const auto& v : rep.first_violations) {
                report_txt += "  violation @ " + std::to_string(v.t) + " ps on " + v.channel +
                              ": " + v.what + "\n";
                for (const auto& tr : v.history) {
                    report_txt += "    " + std::to_string(tr.t) + " ps " + tr.channel + " " +
                                  tr.what + "\n";
                }
            }
        }
        all_ok = all_ok && rep.ok();
    }
    write_file(out_dir(common) / "qdi_report.txt", report_txt);
    if (trace && !trace_csv.empty()) {
        write_file(out_dir(common) / "qdi_token_trace.csv", trace_csv);
    }

    if (inject_fault) {
        // Negative control: success means the planted bug was caught.
        if (any_fault_detected) {
            std::printf("injected fault detected, checker is alive\n");
            return 0;
        }
        std::fprintf(stderr, "error: validation: injected fault went undetected\n");
        return 5;
    }
    if (!all_ok) {
        std::fprintf(stderr, "error: protocol: conformance violations recorded\n");
        return 4;
    }
    return 0;
}

// ---- run-network ---------------------------------------------------------------

int cmd_run_network(const CommonArgs& common, const std::string& network_path, bool trace) {
    AppConfig base = load_config(common);
    if (trace) base.set("network.record_traces", "true");
    const NetworkDescription desc = network_path.empty()
                                        ? NetworkDescription{}
                                        : NetworkDescription::parse_file(network_path);
    BuiltChip built = build_chip(base, desc);
    const double t_sim = built.effective.num("network.t_sim_s");
    const RunResult res = built.chip->run(t_sim);

    std::printf("simulated %.6g s: %llu spikes, %llu events emitted, %llu delivered, "
                "%llu dropped by filter, %llu synaptic inputs\n",
                res.window_s, static_cast<unsigned long long>(res.spikes),
                static_cast<unsigned long long>(res.events_emitted),
                static_cast<unsigned long long>(res.events_delivered),
                static_cast<unsigned long long>(res.dropped_by_filter),
                static_cast<unsigned long long>(res.synaptic_inputs));

    const fs::path dir = out_dir(common);
    write_file(dir / "raster.csv", res.raster_csv());
    write_file(dir / "ledger.csv", res.ledger.to_csv());
    write_file(dir / "cam_dump.csv", cam_dump_csv(*built.chip));

    char buf[96];
    std::string summary = "field,value\n";
    auto row = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%s,%.17g\n", k, v);
        summary += buf;
    };
    row("window_s", res.window_s);
    row("spikes", static_cast<double>(res.spikes));
    row("events_emitted", static_cast<double>(res.events_emitted));
    row("events_delivered", static_cast<double>(res.events_delivered));
    row("dropped_by_filter", static_cast<double>(res.dropped_by_filter));
    row("synaptic_inputs", static_cast<double>(res.synaptic_inputs));
    row("program_writes", static_cast<double>(res.program_writes));
    std::snprintf(buf, sizeof buf, "trace_hash,%016llx\n",
                  static_cast<unsigned long long>(res.trace_hash));
    summary += buf;
    write_file(dir / "run_summary.csv", summary);

    if (built.effective.flag("network.record_traces")) {
        write_file(dir / "route_trace.csv", token_trace_csv(res.route_trace));
    }
    return 0;
}

// ---- report ---------------------------------------------------------------------

int cmd_report(const CommonArgs& common, const std::string& ledger_path, double window_s,
               std::uint64_t spikes) {
    const AppConfig cfg = load_config(common);
    ReportInputs in = report_inputs_from_config(cfg);
    in.seed = run_seed(cfg);

    ChipReport rep;
    if (!ledger_path.empty()) {
        std::ifstream f(ledger_path);
        if (!f) throw SimError("io", "cannot read ledger '" + ledger_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        const EnergyLedger led = EnergyLedger::from_csv(ss.str());
        rep = make_chip_report(in, &led, window_s, spikes);
    } else {
        rep = make_chip_report(in);
    }
    const bool si = cfg.str("report.units") == "si";
    std::fputs(render_report_text(rep, si).c_str(), stdout);
    write_file(out_dir(common) / "report.csv", render_report_csv(rep));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator of a multi-core mixed-signal neuromorphic processor"};
    app.require_subcommand(1);

    CommonArgs common;

    auto* dev = app.add_subcommand("device-sweep", "subthreshold device curves");
    double vds = 0.5;
    int vgs_steps = 50;
    std::vector<double> lengths = {30e-9, 60e-9, 100e-9, 200e-9};
    dev->add_option("--vds", vds, "drain bias magnitude [V]");
    dev->add_option("--vgs-steps", vgs_steps, "sweep resolution");
    dev->add_option("--lengths", lengths, "channel lengths [m]")->delimiter(',');
    add_common(dev, common);

    auto* demo = app.add_subcommand("neuron-demo", "four single-neuron behavior panels");
    add_common(demo, common);

    auto* mc = app.add_subcommand("monte-carlo", "mismatch firing-rate statistics");
    int mc_runs = 0;
    bool mc_calibrate = false;
    mc->add_option("--runs", mc_runs, "number of runs (overrides config)");
    mc->add_flag("--calibrate", mc_calibrate, "refit the sigma multiplier first");
    add_common(mc, common);

    auto* bp = app.add_subcommand("buffer-power", "buffer power vs event rate");
    std::vector<double> rates = {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1.8e9};
    bp->add_option("--rates", rates, "event rates [1/s]")->delimiter(',');
    add_common(bp, common);

    auto* qdi = app.add_subcommand("qdi-check", "randomized-delay conformance");
    std::string topology = "all";
    int trials = 1000;
    int tokens = 32;
    bool inject_fault = false;
    qdi->add_option("--topology", topology,
                    "buffer-pipeline|split-tree|merge-tree|all, or a pipeline file");
    qdi->add_option("--trials", trials, "trials per topology");
    qdi->add_option("--tokens", tokens, "tokens per trial");
    qdi->add_flag("--inject-fault", inject_fault, "negative control: plant a handshake bug");
    bool qdi_trace = false;
    qdi->add_flag("--trace", qdi_trace, "write the first trial's token trace (custom files)");
    add_common(qdi, common);

    auto* run = app.add_subcommand("run-network", "simulate a chip from a network file");
    std::string network_path;
    bool trace = false;
    run->add_option("--network", network_path, "network description file");
    run->add_flag("--trace", trace, "record per-event route traces");
    add_common(run, common);

    auto* rep = app.add_subcommand("report", "chip feature table");
    std::string ledger_path;
    double window_s = 0.0;
    std::uint64_t spikes = 0;
    rep->add_option("--ledger", ledger_path, "fold in a stored run ledger (CSV)");
    rep->add_option("--window", window_s, "run window for the ledger [s]");
    rep->add_option("--spikes", spikes, "spike count of the run");
    add_common(rep, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dev->parsed()) return cmd_device_sweep(common, vds, vgs_steps, lengths);
        if (demo->parsed()) return cmd_neuron_demo(common);
        if (mc->parsed()) return cmd_monte_carlo(common, mc_runs, mc_calibrate);
        if (bp->parsed()) return cmd_buffer_power(common, rates);
        if (qdi->parsed()) return cmd_qdi_check(common, topology, trials, tokens, inject_fault, qdi_trace);
        if (run->parsed()) return cmd_run_network(common, network_path, trace);
        if (rep->parsed()) return cmd_report(common, ledger_path, window_s, spikes);
    } catch (const ConfigError& e) {
        if (e.line > 0) {
            std::fprintf(stderr, "error: config: %s (line %zu, col %zu)\n", e.what(), e.line,
                         e.col);
        } else {
            std::fprintf(stderr, "error: config: %s\n", e.what());
        }
        return 2;
    } catch (const DeadlockError& e) {
        std::fprintf(stderr, "error: deadlock: %s\n", e.what());
        return 3;
    } catch (const ProtocolViolation& e) {
        std::fprintf(stderr, "error: protocol: %s\n", e.what());
        return 4;
    } catch (const SimError& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.category().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: runtime: %s\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmcsim/cam.hpp"
#include "nmcsim/fabric_ops.hpp"
#include "nmcsim/ledger.hpp"
#include "nmcsim/neuron.hpp"

namespace nmcsim {

struct PowerPoint {
    double rate_ev_s = 0.0;           // requested injection rate
    double measured_rate_ev_s = 0.0;  // tokens / window
    double power_w = 0.0;
    double energy_per_event_j = 0.0;  // power / measured rate
    bool saturated = false;
};

// Power of one pipeline buffer versus input event rate. Each point is an
// actual token-stream simulation read back from the ledger, not a formula
// evaluation.
std::vector<PowerPoint> buffer_power_curve(const std::vector<double>& rates_ev_s,
                                           int width_bits, const FabricCosts& costs,
                                           const DelayModel& delays, int n_tokens,
                                           std::uint64_t seed);

struct SystemRoutingEstimate {
    int n_buffer_equivalents = 0;
    double rate_ev_s = 0.0;
    double power_w = 0.0;
    double static_floor_w = 0.0;
    double energy_per_event_j = 0.0;
    bool saturated = false;
};

// Whole-routing-system estimate: one simulated buffer ledger at the given
// event rate, composed n times (every event traverses the full equivalent
// capacity).
SystemRoutingEstimate system_routing_estimate(int n_buffer_equivalents, double rate_ev_s,
                                              int width_bits, const FabricCosts& costs,
                                              const DelayModel& delays, int n_tokens,
                                              std::uint64_t seed);

struct AreaParams {
    double neuron_logic_um2 = 20.0;        // excluding capacitors
    double cap_density_f_per_um2 = 18e-15; // MIM overlay
    double cam_cell_area_um2 = 0.25;
};

struct AreaReport {
    double neuron_logic_um2 = 0.0;
    double capacitor_um2 = 0.0;       // (C_M + C_A + C_R) / density
    double cam_per_neuron_um2 = 0.0;
    double synapse_um2 = 0.0;         // cam_per_neuron / n_words
    double per_neuron_um2 = 0.0;      // logic + capacitor + cam
    double per_core_um2 = 0.0;
    double chip_um2 = 0.0;            // fabric area not included (not modeled)
    int n_cores = 0;
    int neurons_per_core = 0;
};

AreaReport compute_area(const AreaParams& ap, const NeuronParams& np, int cam_words,
                        int cam_word_bits, int n_cores, int neurons_per_core);

// Feature-table report: headline figures of the modeled chip, plus optional
// measured totals from a completed run's ledger.
struct ChipReport {
    std::string technology = "28 nm FD-SOI (modeled)";
    double supply_v = 1.0;
    double energy_per_spike_j = 50e-12;
    double e_spike_ref_rate_hz = 30.0;
    double energy_per_routing_j = 0.0;
    double router_bandwidth_ev_s = 0.0;
    AreaReport area;

    bool has_run = false;
    std::uint64_t run_spikes = 0;
    double run_window_s = 0.0;
    double run_static_w = 0.0;
    double run_dynamic_j = 0.0;
    double run_mean_power_w = 0.0;
    double run_neuron_j = 0.0;
    double run_fabric_j = 0.0;
    double run_cam_j = 0.0;
};

struct ReportInputs {
    double supply_v = 1.0;
    double neuron_e_spike_j = 50e-12;
    double e_spike_ref_rate_hz = 30.0;
    int n_buffer_equivalents = 600;
    double routing_ref_rate_ev_s = 1e5;
    int width_bits = 10;
    FabricCosts costs;
    DelayModel delays;
    AreaParams area;
    NeuronParams neuron;
    int cam_words = 64;
    int cam_word_bits = 12;
    int n_cores = 4;
    int neurons_per_core = 256;
    int curve_tokens = 2000;
    std::uint64_t seed = 1;
};

// Bandwidth and routing energy come from fresh simulations; areas from the
// area model; run stats from `run_ledger` when given.
ChipReport make_chip_report(const ReportInputs& in, const EnergyLedger* run_ledger = nullptr,
                            double run_window_s = 0.0, std::uint64_t run_spikes = 0);

// value with an engineering prefix, e.g. "250 uW"; `si` selects plain %.6g.
std::string format_quantity(double value, const char* unit, bool si);

std::string render_report_text(const ChipReport& r, bool si_units = false);
std::string render_report_csv(const ChipReport& r);

std::string power_curve_csv(const std::vector<PowerPoint>& points);

}  // namespace nmcsim

#include "nmcsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nmcsim/errors.hpp"

namespace nmcsim {

namespace {

// One row per key. Calibrated values (marked) were fitted with the bundled
// calibration flows and frozen here; override freely from config files.
const std::vector<SchemaEntry> kSchema = {
    // device
    {"device.ut_v", ConfigType::Num, "25.85e-3", "thermal voltage"},
    {"device.kappa", ConfigType::Num, "0.7", "subthreshold slope factor"},
    {"device.i0_a", ConfigType::Num, "10e-12", "pre-exponential current at W/L=1"},
    {"device.w_m", ConfigType::Num, "200e-9", "default channel width"},
    {"device.l_m", ConfigType::Num, "100e-9", "default channel length"},
    {"device.l_min_m", ConfigType::Num, "30e-9", "process minimum length"},
    {"device.i_leak0_a", ConfigType::Num, "10e-12", "leakage floor at minimum length"},
    {"device.l_leak_m", ConfigType::Num, "30e-9", "leakage floor decay length"},
    // neuron
    {"neuron.c_m_f", ConfigType::Num, "0.5e-12", "membrane capacitance"},
    {"neuron.c_a_f", ConfigType::Num, "0.2e-12", "adaptation capacitance"},
    {"neuron.c_r_f", ConfigType::Num, "0.2e-12", "refractory capacitance"},
    {"neuron.i_tau_a", ConfigType::Num, "1.85e-12", "leak bias; sets tau_m via C*UT/(kappa*I)"},
    {"neuron.g_l_s", ConfigType::Num, "0", "leak conductance; >0 overrides i_tau_a"},
    {"neuron.e_l_v", ConfigType::Num, "0", "rest potential"},
    {"neuron.v_t_v", ConfigType::Num, "0.3", "threshold"},
    {"neuron.delta_t_v", ConfigType::Num, "0.02", "spike sharpness; 0 = sharp threshold"},
    {"neuron.v_reset_v", ConfigType::Num, "0", "reset potential"},
    {"neuron.v_peak_v", ConfigType::Num, "0.6", "spike detection ceiling"},
    {"neuron.i_rfr_a", ConfigType::Num, "100e-12", "refractory bias; t_rfr = C_R*Vdd/I"},
    {"neuron.t_rfr_s", ConfigType::Num, "0", "refractory period; >0 overrides i_rfr_a"},
    {"neuron.a_s", ConfigType::Num, "0", "subthreshold adaptation coupling"},
    {"neuron.b_a", ConfigType::Num, "0", "spike-triggered adaptation increment"},
    {"neuron.tau_w_s", ConfigType::Num, "50e-3", "adaptation time constant"},
    {"neuron.i_ahp_a", ConfigType::Num, "0", "adaptation bias; >0 sets tau_w via C_A*UT/(kappa*I)"},
    {"neuron.i_dc_a", ConfigType::Num, "30.2974e-12", "constant injection (calibrated: 92.74 Hz Monte Carlo mean)"},
    {"neuron.v_nmda_v", ConfigType::Num, "0.15", "gate midpoint of the slow excitatory branch"},
    {"neuron.v_gate_width_v", ConfigType::Num, "0.010", "gate steepness"},
    // synapse
    {"synapse.tau_fepsc_s", ConfigType::Num, "5e-3", "fast excitatory time constant"},
    {"synapse.w_fepsc_a", ConfigType::Num, "40e-12", "fast excitatory weight"},
    {"synapse.tau_sepsc_s", ConfigType::Num, "50e-3", "slow excitatory time constant"},
    {"synapse.w_sepsc_a", ConfigType::Num, "40e-12", "slow excitatory weight"},
    {"synapse.tau_fipsc_s", ConfigType::Num, "5e-3", "fast inhibitory time constant"},
    {"synapse.w_fipsc_a", ConfigType::Num, "40e-12", "fast inhibitory weight"},
    {"synapse.tau_sipsc_s", ConfigType::Num, "50e-3", "slow inhibitory time constant"},
    {"synapse.w_sipsc_a", ConfigType::Num, "40e-12", "slow inhibitory weight"},
    // mismatch Monte Carlo
    {"mismatch.n_runs", ConfigType::Int, "500", "number of Monte Carlo runs"},
    {"mismatch.seed", ConfigType::Int, "1", "base seed"},
    {"mismatch.multiplier", ConfigType::Num, "0.958876", "global sigma multiplier (calibrated: 5.86% relative error)"},
    {"mismatch.t_sim_s", ConfigType::Num, "1.3", "per-run simulated time"},
    {"mismatch.warmup_s", ConfigType::Num, "0.3", "per-run warm-up window"},
    {"mismatch.dt_s", ConfigType::Num, "1e-5", "integration step"},
    {"mismatch.hist_bins", ConfigType::Int, "24", "histogram bin count"},
    {"mismatch.sigma_g_l", ConfigType::Num, "0.05", "relative sigma of the leak"},
    {"mismatch.sigma_i_dc", ConfigType::Num, "0.05", "relative sigma of the injection"},
    {"mismatch.sigma_v_t", ConfigType::Num, "0.01", "relative sigma of the threshold"},
    {"mismatch.sigma_t_rfr", ConfigType::Num, "0.05", "relative sigma of the refractory period"},
    {"mismatch.sigma_b", ConfigType::Num, "0", "relative sigma of the adaptation increment"},
    {"mismatch.sigma_tau_w", ConfigType::Num, "0", "relative sigma of tau_w"},
    {"mismatch.sigma_delta_t", ConfigType::Num, "0", "relative sigma of Delta_T"},
    {"mismatch.sigma_w_fepsc", ConfigType::Num, "0", "relative sigma of the FEPSC weight"},
    {"mismatch.sigma_w_sepsc", ConfigType::Num, "0", "relative sigma of the SEPSC weight"},
    {"mismatch.sigma_w_fipsc", ConfigType::Num, "0", "relative sigma of the FIPSC weight"},
    {"mismatch.sigma_w_sipsc", ConfigType::Num, "0", "relative sigma of the SIPSC weight"},
    // asynchronous fabric
    {"fabric.width_bits", ConfigType::Int, "10", "dual-rail channel width"},
    {"fabric.transition_ps", ConfigType::Num, "92.593", "nominal per-transition delay (calibrated)"},
    {"fabric.jitter_frac", ConfigType::Num, "0.5", "relative half-width of delay jitter"},
    {"fabric.mode", ConfigType::Str, "nominal", "delay mode", "nominal randomized worst"},
    {"fabric.e_dyn_j", ConfigType::Num, "138.883e-15", "dynamic energy per token per process"},
    {"fabric.p_static_w", ConfigType::Num, "9.84e-9", "static power per process"},
    // cam
    {"cam.n_words", ConfigType::Int, "64", "words per neuron"},
    {"cam.word_bits", ConfigType::Int, "12", "bits per word"},
    {"cam.cell_area_um2", ConfigType::Num, "0.25", "cell area"},
    {"cam.e_precharge_j", ConfigType::Num, "0.5e-15", "match-line precharge energy per word"},
    {"cam.e_discharge_j", ConfigType::Num, "1e-15", "match-line discharge energy per mismatch"},
    // network
    {"network.n_cores", ConfigType::Int, "4", "cores per chip"},
    {"network.neurons_per_core", ConfigType::Int, "256", "neurons per core"},
    {"network.tag_bits", ConfigType::Int, "10", "source tag width"},
    {"network.buffer_stages", ConfigType::Int, "1", "buffers between router stages"},
    {"network.dt_s", ConfigType::Num, "1e-4", "neuron tick step"},
    {"network.t_sim_s", ConfigType::Num, "1.0", "simulated time"},
    {"network.multicast", ConfigType::Str, "auto", "multicast policy", "auto broadcast"},
    {"network.record_traces", ConfigType::Bool, "false", "record per-event route traces"},
    // area model
    {"area.neuron_logic_um2", ConfigType::Num, "20", "neuron logic area, capacitors excluded"},
    {"area.cap_density_f_per_um2", ConfigType::Num, "18e-15", "MIM capacitor density"},
    // power model / report
    {"power.neuron_e_spike_j", ConfigType::Num, "50e-12", "neuron energy per spike"},
    {"power.e_spike_ref_rate_hz", ConfigType::Num, "30", "rate the energy/spike figure refers to"},
    {"power.n_buffer_equivalents", ConfigType::Int, "600", "routing system capacity"},
    {"power.routing_ref_rate_ev_s", ConfigType::Num, "1e5", "rate for the routing energy figure"},
    {"power.curve_tokens", ConfigType::Int, "2000", "tokens per power-curve point"},
    {"report.units", ConfigType::Str, "eng", "unit style", "eng si"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& v, std::size_t line, std::size_t col) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("value '" + v + "' for " + key + " is not a number", line, col);
    }
    return x;
}

long long parse_int(const std::string& key, const std::string& v, std::size_t line, std::size_t col) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 0);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("value '" + v + "' for " + key + " is not an integer", line, col);
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& v, std::size_t line, std::size_t col) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("value '" + v + "' for " + key + " is not a boolean", line, col);
}

}  // namespace

const std::vector<SchemaEntry>& AppConfig::schema() { return kSchema; }

const SchemaEntry& AppConfig::entry(const std::string& key) const {
    for (const auto& e : kSchema) {
        if (key == e.key) return e;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

AppConfig AppConfig::defaults() {
    AppConfig c;
    for (const auto& e : kSchema) c.values_[e.key] = e.default_value;
    return c;
}

AppConfig AppConfig::load_file(const std::string& path) {
    AppConfig c = defaults();
    c.apply_file(path);
    return c;
}

void AppConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_text(ss.str(), path);
}

void AppConfig::apply_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ": unterminated section header", lineno,
                                  raw.find('[') + 1);
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(origin + ": empty section name", lineno, 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value'", lineno, 1);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ": empty key", lineno, 1);
        if (value.empty()) {
            throw ConfigError(origin + ": empty value for '" + key + "'", lineno, eq + 2);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        const std::size_t col = raw.find(key) + 1;
        set(full, value, lineno, col);
    }
}

void AppConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void AppConfig::set(const std::string& key, const std::string& value, std::size_t line,
                    std::size_t col) {
    bool known = false;
    for (const auto& e : kSchema) {
        if (key == e.key) {
            known = true;
            // Validate eagerly so errors carry the file position.
            switch (e.type) {
                case ConfigType::Num: parse_num(key, value, line, col); break;
                case ConfigType::Int: parse_int(key, value, line, col); break;
                case ConfigType::Bool: parse_bool(key, value, line, col); break;
                case ConfigType::Str:
                    if (e.allowed) {
                        const std::string opts = std::string(" ") + e.allowed + " ";
                        if (opts.find(" " + value + " ") == std::string::npos) {
                            throw ConfigError("value '" + value + "' for " + key +
                                                  " must be one of: " + e.allowed,
                                              line, col);
                        }
                    }
                    break;
            }
            break;
        }
    }
    if (!known) throw ConfigError("unknown config key '" + key + "'", line, col);
    values_[key] = value;
}

double AppConfig::num(const std::string& key) const {
    const auto& e = entry(key);
    if (e.type != ConfigType::Num) throw ConfigError("key '" + key + "' is not numeric");
    return parse_num(key, values_.at(key), 0, 0);
}

long long AppConfig::integer(const std::string& key) const {
    const auto& e = entry(key);
    if (e.type != ConfigType::Int) throw ConfigError("key '" + key + "' is not an integer");
    return parse_int(key, values_.at(key), 0, 0);
}

bool AppConfig::flag(const std::string& key) const {
    const auto& e = entry(key);
    if (e.type != ConfigType::Bool) throw ConfigError("key '" + key + "' is not a boolean");
    return parse_bool(key, values_.at(key), 0, 0);
}

const std::string& AppConfig::str(const std::string& key) const {
    entry(key);
    return values_.at(key);
}

std::string AppConfig::dump() const {
    std::string out;
    std::string section;
    for (const auto& e : kSchema) {
        const std::string key = e.key;
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!out.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + values_.at(key) + "  # " + e.help + "\n";
    }
    return out;
}

// ---- typed views -------------------------------------------------------------

MosParams device_from_config(const AppConfig& c, MosPolarity polarity) {
    MosParams p;
    p.polarity = polarity;
    p.ut_v = c.num("device.ut_v");
    p.kappa = c.num("device.kappa");
    p.i0_a = c.num("device.i0_a");
    p.w_m = c.num("device.w_m");
    p.l_m = c.num("device.l_m");
    p.l_min_m = c.num("device.l_min_m");
    p.i_leak0_a = c.num("device.i_leak0_a");
    p.l_leak_m = c.num("device.l_leak_m");
    p.validate();
    return p;
}

NeuronParams neuron_from_config(const AppConfig& c) {
    NeuronParams p;
    const double kappa = c.num("device.kappa");
    const double ut = c.num("device.ut_v");
    p.c_m_f = c.num("neuron.c_m_f");
    p.c_a_f = c.num("neuron.c_a_f");
    p.c_r_f = c.num("neuron.c_r_f");

    const double g_l_direct = c.num("neuron.g_l_s");
    if (g_l_direct > 0.0) {
        p.g_l_s = g_l_direct;
    } else {
        p.g_l_s = p.c_m_f / tau_from_bias(p.c_m_f, c.num("neuron.i_tau_a"), kappa, ut);
    }

    p.e_l_v = c.num("neuron.e_l_v");
    p.v_t_v = c.num("neuron.v_t_v");
    p.delta_t_v = c.num("neuron.delta_t_v");
    p.v_reset_v = c.num("neuron.v_reset_v");
    p.v_peak_v = c.num("neuron.v_peak_v");

    const double t_rfr_direct = c.num("neuron.t_rfr_s");
    if (t_rfr_direct > 0.0) {
        p.t_rfr_s = t_rfr_direct;
    } else {
        const double i_rfr = c.num("neuron.i_rfr_a");
        p.t_rfr_s = i_rfr > 0.0 ? p.c_r_f * kSupplyRailV / i_rfr : 0.0;
    }

    p.a_s = c.num("neuron.a_s");
    p.b_a = c.num("neuron.b_a");
    const double i_ahp = c.num("neuron.i_ahp_a");
    p.tau_w_s = i_ahp > 0.0 ? tau_from_bias(p.c_a_f, i_ahp, kappa, ut) : c.num("neuron.tau_w_s");
    p.i_dc_a = c.num("neuron.i_dc_a");
    p.v_nmda_v = c.num("neuron.v_nmda_v");
    p.v_gate_width_v = c.num("neuron.v_gate_width_v");

    p.syn[SynKernel::Fepsc] = {c.num("synapse.tau_fepsc_s"), c.num("synapse.w_fepsc_a")};
    p.syn[SynKernel::Sepsc] = {c.num("synapse.tau_sepsc_s"), c.num("synapse.w_sepsc_a")};
    p.syn[SynKernel::Fipsc] = {c.num("synapse.tau_fipsc_s"), c.num("synapse.w_fipsc_a")};
    p.syn[SynKernel::Sipsc] = {c.num("synapse.tau_sipsc_s"), c.num("synapse.w_sipsc_a")};
    p.validate();
    return p;
}

MismatchSpec mismatch_from_config(const AppConfig& c) {
    MismatchSpec s;
    s.n_runs = static_cast<int>(c.integer("mismatch.n_runs"));
    s.seed = static_cast<std::uint64_t>(c.integer("mismatch.seed"));
    s.multiplier = c.num("mismatch.multiplier");
    s.sigma_map = {
        {MismatchParam::GLeak, c.num("mismatch.sigma_g_l")},
        {MismatchParam::IDc, c.num("mismatch.sigma_i_dc")},
        {MismatchParam::VThresh, c.num("mismatch.sigma_v_t")},
        {MismatchParam::TRefr, c.num("mismatch.sigma_t_rfr")},
        {MismatchParam::BAdapt, c.num("mismatch.sigma_b")},
        {MismatchParam::TauW, c.num("mismatch.sigma_tau_w")},
        {MismatchParam::DeltaT, c.num("mismatch.sigma_delta_t")},
        {MismatchParam::WFepsc, c.num("mismatch.sigma_w_fepsc")},
        {MismatchParam::WSepsc, c.num("mismatch.sigma_w_sepsc")},
        {MismatchParam::WFipsc, c.num("mismatch.sigma_w_fipsc")},
        {MismatchParam::WSipsc, c.num("mismatch.sigma_w_sipsc")},
    };
    return s;
}

RateOptions mc_rate_options(const AppConfig& c) {
    RateOptions o;
    o.dt_s = c.num("mismatch.dt_s");
    o.warmup_s = c.num("mismatch.warmup_s");
    return o;
}

double mc_sim_time_s(const AppConfig& c) { return c.num("mismatch.t_sim_s"); }

DelayModel delay_model_from_config(const AppConfig& c) {
    DelayModel d;
    d.nominal_ps = c.num("fabric.transition_ps");
    d.jitter_frac = c.num("fabric.jitter_frac");
    const std::string& mode = c.str("fabric.mode");
    if (mode == "nominal") {
        d.mode = DelayMode::Nominal;
    } else if (mode == "randomized") {
        d.mode = DelayMode::Randomized;
    } else if (mode == "worst") {
        d.mode = DelayMode::WorstCaseSampled;
    } else {
        throw ConfigError("fabric.mode must be nominal|randomized|worst, got '" + mode + "'");
    }
    return d;
}

FabricCosts fabric_costs_from_config(const AppConfig& c) {
    FabricCosts f;
    f.e_dyn_j = c.num("fabric.e_dyn_j");
    f.p_static_w = c.num("fabric.p_static_w");
    return f;
}

CamCosts cam_costs_from_config(const AppConfig& c) {
    CamCosts k;
    k.e_precharge_j = c.num("cam.e_precharge_j");
    k.e_discharge_j = c.num("cam.e_discharge_j");
    return k;
}

AreaParams area_params_from_config(const AppConfig& c) {
    AreaParams a;
    a.neuron_logic_um2 = c.num("area.neuron_logic_um2");
    a.cap_density_f_per_um2 = c.num("area.cap_density_f_per_um2");
    a.cam_cell_area_um2 = c.num("cam.cell_area_um2");
    return a;
}

ReportInputs report_inputs_from_config(const AppConfig& c) {
    ReportInputs in;
    in.supply_v = kSupplyRailV;
    in.neuron_e_spike_j = c.num("power.neuron_e_spike_j");
    in.e_spike_ref_rate_hz = c.num("power.e_spike_ref_rate_hz");
    in.n_buffer_equivalents = static_cast<int>(c.integer("power.n_buffer_equivalents"));
    in.routing_ref_rate_ev_s = c.num("power.routing_ref_rate_ev_s");
    in.width_bits = static_cast<int>(c.integer("fabric.width_bits"));
    in.costs = fabric_costs_from_config(c);
    in.delays = delay_model_from_config(c);
    in.area = area_params_from_config(c);
    in.neuron = neuron_from_config(c);
    in.cam_words = static_cast<int>(c.integer("cam.n_words"));
    in.cam_word_bits = static_cast<int>(c.integer("cam.word_bits"));
    in.n_cores = static_cast<int>(c.integer("network.n_cores"));
    in.neurons_per_core = static_cast<int>(c.integer("network.neurons_per_core"));
    in.curve_tokens = static_cast<int>(c.integer("power.curve_tokens"));
    return in;
}

}  // namespace nmcsim

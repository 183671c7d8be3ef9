#pragma once

#include <map>
#include <string>
#include <vector>

#include "nmcsim/device.hpp"
#include "nmcsim/fabric.hpp"
#include "nmcsim/mismatch.hpp"
#include "nmcsim/neuron.hpp"
#include "nmcsim/power.hpp"

namespace nmcsim {

// Plain-text configuration: `[section]` headers and `key = value` lines,
// `#` comments. Every key must exist in the schema; unknown keys are rejected
// with their file position so typos cannot silently fall back to defaults.

enum class ConfigType { Num, Int, Bool, Str };

struct SchemaEntry {
    const char* key;  // dotted: "section.name"
    ConfigType type;
    const char* default_value;
    const char* help;
    const char* allowed = nullptr;  // space-separated values for Str keys
};

class AppConfig {
public:
    static const std::vector<SchemaEntry>& schema();
    static AppConfig defaults();
    static AppConfig load_file(const std::string& path);

    void apply_file(const std::string& path);
    void apply_text(const std::string& text, const std::string& origin = "<inline>");
    // `--set key=value` style override.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value, std::size_t line = 0,
             std::size_t col = 0);

    double num(const std::string& key) const;
    long long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& str(const std::string& key) const;

    // Current values in config-file syntax, one section per module.
    std::string dump() const;

private:
    const SchemaEntry& entry(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

// ---- typed views over the config -------------------------------------------

MosParams device_from_config(const AppConfig& c, MosPolarity polarity = MosPolarity::NMOS);
NeuronParams neuron_from_config(const AppConfig& c);
MismatchSpec mismatch_from_config(const AppConfig& c);
RateOptions mc_rate_options(const AppConfig& c);
double mc_sim_time_s(const AppConfig& c);
DelayModel delay_model_from_config(const AppConfig& c);
FabricCosts fabric_costs_from_config(const AppConfig& c);
CamCosts cam_costs_from_config(const AppConfig& c);
AreaParams area_params_from_config(const AppConfig& c);
ReportInputs report_inputs_from_config(const AppConfig& c);

}  // namespace nmcsim

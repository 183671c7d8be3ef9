#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace nmcsim {

// Per-event dynamic energies accumulate by component class; static power
// accumulates by component id. Mean power over a window is
// static_sum + dynamic_joules / window.

enum class EnergyClass : int {
    PchbBuffer = 0,
    PchbSplit,
    PchbMerge,
    CamSearch,
    NeuronSpike,
};

constexpr int kNumEnergyClasses = 5;

const char* energy_class_name(EnergyClass c);

class EnergyLedger {
public:
    void add_static(std::string component_id, double watts);
    void charge(EnergyClass cls, double joules);

    double static_watts() const;
    double dynamic_joules() const;
    double dynamic_joules(EnergyClass cls) const;
    std::uint64_t events(EnergyClass cls) const;
    std::uint64_t total_events() const;

    double mean_power_w(double window_s) const;

    const std::vector<std::pair<std::string, double>>& static_terms() const {
        return static_terms_;
    }

    // Ledger for n identical copies of this one (static terms and dynamic
    // charges both scale by n).
    EnergyLedger replicate(int n) const;
    void merge(const EnergyLedger& other);

    std::string to_csv() const;
    static EnergyLedger from_csv(const std::string& text);

private:
    struct DynSlot {
        double joules = 0.0;
        std::uint64_t events = 0;
    };
    std::vector<std::pair<std::string, double>> static_terms_;
    std::array<DynSlot, kNumEnergyClasses> dyn_{};
};

}  // namespace nmcsim

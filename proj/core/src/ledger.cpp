#include "nmcsim/ledger.hpp"

#include <cstdio>
#include <sstream>

#include "nmcsim/errors.hpp"

namespace nmcsim {

const char* energy_class_name(EnergyClass c) {
    switch (c) {
        case EnergyClass::PchbBuffer: return "pchb_buffer";
        case EnergyClass::PchbSplit: return "pchb_split";
        case EnergyClass::PchbMerge: return "pchb_merge";
        case EnergyClass::CamSearch: return "cam_search";
        case EnergyClass::NeuronSpike: return "neuron_spike";
    }
    return "?";
}

void EnergyLedger::add_static(std::string component_id, double watts) {
    if (watts < 0.0) throw SimError("ledger", "static power must be >= 0");
    static_terms_.emplace_back(std::move(component_id), watts);
}

void EnergyLedger::charge(EnergyClass cls, double joules) {
    if (joules < 0.0) throw SimError("ledger", "dynamic charge must be >= 0");
    auto& slot = dyn_[static_cast<std::size_t>(cls)];
    slot.joules += joules;
    ++slot.events;
}

double EnergyLedger::static_watts() const {
    double sum = 0.0;
    for (const auto& [id, w] : static_terms_) sum += w;
    return sum;
}

double EnergyLedger::dynamic_joules() const {
    double sum = 0.0;
    for (const auto& slot : dyn_) sum += slot.joules;
    return sum;
}

double EnergyLedger::dynamic_joules(EnergyClass cls) const {
    return dyn_[static_cast<std::size_t>(cls)].joules;
}

std::uint64_t EnergyLedger::events(EnergyClass cls) const {
    return dyn_[static_cast<std::size_t>(cls)].events;
}

std::uint64_t EnergyLedger::total_events() const {
    std::uint64_t n = 0;
    for (const auto& slot : dyn_) n += slot.events;
    return n;
}

double EnergyLedger::mean_power_w(double window_s) const {
    if (!(window_s > 0.0)) throw SimError("ledger", "power window must be positive");
    return static_watts() + dynamic_joules() / window_s;
}

EnergyLedger EnergyLedger::replicate(int n) const {
    if (n < 1) throw SimError("ledger", "replica count must be >= 1");
    EnergyLedger out;
    for (const auto& [id, w] : static_terms_) {
        out.static_terms_.emplace_back(id + " x" + std::to_string(n),
                                       w * static_cast<double>(n));
    }
    for (int c = 0; c < kNumEnergyClasses; ++c) {
        out.dyn_[static_cast<std::size_t>(c)].joules =
            dyn_[static_cast<std::size_t>(c)].joules * n;
        out.dyn_[static_cast<std::size_t>(c)].events =
            dyn_[static_cast<std::size_t>(c)].events * static_cast<std::uint64_t>(n);
    }
    return out;
}

void EnergyLedger::merge(const EnergyLedger& other) {
    for (const auto& term : other.static_terms_) static_terms_.push_back(term);
    for (int c = 0; c < kNumEnergyClasses; ++c) {
        dyn_[static_cast<std::size_t>(c)].joules += other.dyn_[static_cast<std::size_t>(c)].joules;
        dyn_[static_cast<std::size_t>(c)].events += other.dyn_[static_cast<std::size_t>(c)].events;
    }
}

std::string EnergyLedger::to_csv() const {
    std::string out = "kind,name,watts_or_joules,events\n";
    char buf[160];
    for (const auto& [id, w] : static_terms_) {
        std::snprintf(buf, sizeof buf, "static,%s,%.17g,0\n", id.c_str(), w);
        out += buf;
    }
    for (int c = 0; c < kNumEnergyClasses; ++c) {
        const auto& slot = dyn_[static_cast<std::size_t>(c)];
        std::snprintf(buf, sizeof buf, "dynamic,%s,%.17g,%llu\n",
                      energy_class_name(static_cast<EnergyClass>(c)), slot.joules,
                      static_cast<unsigned long long>(slot.events));
        out += buf;
    }
    return out;
}

EnergyLedger EnergyLedger::from_csv(const std::string& text) {
    EnergyLedger led;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;  // header
        std::istringstream ls(line);
        std::string kind, name, value, events;
        if (!std::getline(ls, kind, ',') || !std::getline(ls, name, ',') ||
            !std::getline(ls, value, ',') || !std::getline(ls, events)) {
            throw ConfigError("malformed ledger row", lineno, 1);
        }
        try {
            if (kind == "static") {
                led.add_static(name, std::stod(value));
            } else if (kind == "dynamic") {
                bool known = false;
                for (int c = 0; c < kNumEnergyClasses; ++c) {
                    if (name == energy_class_name(static_cast<EnergyClass>(c))) {
                        auto& slot = led.dyn_[static_cast<std::size_t>(c)];
                        slot.joules = std::stod(value);
                        slot.events = std::stoull(events);
                        known = true;
                        break;
                    }
                }
                if (!known) throw ConfigError("unknown energy class '" + name + "'", lineno, 1);
            } else {
                throw ConfigError("unknown ledger row kind '" + kind + "'", lineno, 1);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("malformed number in ledger row", lineno, 1);
        } catch (const std::out_of_range&) {
            throw ConfigError("out-of-range number in ledger row", lineno, 1);
        }
    }
    return led;
}

}  // namespace nmcsim

#pragma once

#include <string>
#include <vector>

#include "nmcsim/neuron.hpp"

namespace nmcsim {

// The four canned single-neuron experiments: leak sweep, threshold sweep,
// refractory sweep, spike-frequency adaptation. Shared between the CLI demo
// and the acceptance suite so both exercise the same settings.

struct BehaviorPanel {
    std::string name;
    std::vector<NeuronParams> settings;
    std::vector<std::string> labels;
    StimulusSpec stimulus;
    RateOptions options;
    double t_sim_s = 2.5;
};

struct BehaviorSet {
    BehaviorPanel leak;        // three leak biases, rate ordered by tau_m
    BehaviorPanel threshold;   // five thresholds, rate strictly decreasing in V_T
    BehaviorPanel refractory;  // three refractory periods at saturating drive
    BehaviorPanel adaptation;  // one setting, lengthening inter-spike intervals
};

BehaviorSet behavior_panels(const NeuronParams& base, double kappa, double ut_v);

std::vector<double> panel_rates(const BehaviorPanel& panel);

}  // namespace nmcsim

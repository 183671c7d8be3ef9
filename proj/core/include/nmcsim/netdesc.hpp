#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nmcsim/config.hpp"
#include "nmcsim/network.hpp"

namespace nmcsim {

// Network description files wire a chip: size overrides, per-neuron parameter
// blocks, tag-memory contents (high-level `edge` lines or raw `word` lines)
// and stimuli. Same lexical format as the config file, with repeatable keys:
//
//   [chip]
//   n_cores = 2                  # bare keys map to network.*
//   fabric.transition_ps = 100   # dotted keys may target any schema key
//   [neuron.defaults]
//   b_a = 2e-12                  # bare keys map to neuron.*
//   [neuron.5]
//   v_t_v = 0.28                 # overrides for one neuron
//   [connect]
//   edge = 3 -> 9 fepsc
//   [cam]
//   word = 0 5 2 0x2a5           # core neuron word_index value
//   [stimulus]
//   dc = 3 25e-12
//   poisson = 0..15 fepsc 80 0 0.5 seed=7
//   regular = 5 sepsc 50
//   spikes = 7 fipsc 0.01,0.02,0.03

struct ConnectEntry {
    std::uint32_t src_gid;
    std::uint32_t dst_gid;
    SynKernel kernel;
};

struct CamWordEntry {
    int core;
    int neuron;
    int word_index;
    std::uint32_t value;
};

struct NetworkDescription {
    std::vector<std::pair<std::string, std::string>> chip_overrides;
    std::vector<std::pair<std::string, std::string>> neuron_defaults;
    std::map<std::uint32_t, std::vector<std::pair<std::string, std::string>>> neuron_overrides;
    std::vector<ConnectEntry> connects;
    std::vector<CamWordEntry> words;
    std::vector<StimulusEntry> stimuli;

    static NetworkDescription parse_file(const std::string& path);
    static NetworkDescription parse_text(const std::string& text,
                                         const std::string& origin = "<inline>");
};

ChipConfig chip_config_from_config(const AppConfig& c);

struct BuiltChip {
    std::unique_ptr<Chip> chip;
    AppConfig effective;  // base config plus the description's overrides
};

// Apply a description on top of a base config and produce a ready-to-run chip.
BuiltChip build_chip(const AppConfig& base, const NetworkDescription& desc);

std::string cam_dump_csv(const Chip& chip);

}  // namespace nmcsim

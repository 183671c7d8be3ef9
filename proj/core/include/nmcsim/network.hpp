#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmcsim/cam.hpp"
#include "nmcsim/engine.hpp"
#include "nmcsim/fabric.hpp"
#include "nmcsim/ledger.hpp"
#include "nmcsim/neuron.hpp"

namespace nmcsim {

// Multi-core assembly: neurons, tag memories and the routing fabric wired
// into one chip. A spike becomes an address-event carrying the source tag;
// copies are steered to destination cores through a merge tree and a
// two-level split tree, and fan out there via tag-memory matches.
//
// Payload layout on the fabric: (dest_core << tag_bits) | source_tag.
// Tag-memory words: (source_tag << 2) | kernel_select.

struct ChipConfig {
    int n_cores = 4;           // 1, 2 or 4 (two destination bits)
    int neurons_per_core = 256;
    int tag_bits = 10;
    int cam_words = 64;
    int cam_word_bits = 12;    // tag_bits + 2 kernel-select bits
    int buffer_stages = 1;     // buffers after each injector and before the split tree
    bool multicast_auto = true;  // copies only to cores holding a matching word
    double dt_s = 1e-4;
    bool record_traces = false;
    DelayModel delays;
    FabricCosts costs;
    CamCosts cam_costs;
    NeuronParams neuron;
    double e_spike_j = 50e-12;

    void validate() const;
};

struct StimulusEntry {
    enum class Kind { Dc, Poisson, Regular, SpikeList };
    Kind kind = Kind::Dc;
    std::uint32_t first_gid = 0;
    std::uint32_t last_gid = 0;  // inclusive
    SynKernel kernel = SynKernel::Fepsc;
    double amp_a = 0.0;          // Dc only
    double rate_hz = 0.0;        // Poisson / Regular
    double start_s = 0.0;
    double end_s = -1.0;         // < 0: run end
    std::vector<double> times_s; // SpikeList only
    std::uint64_t seed = 0;      // Poisson only
};

struct RunResult {
    std::vector<std::pair<TimePs, std::uint32_t>> raster;  // (time, gid)
    EnergyLedger ledger;
    double window_s = 0.0;
    std::uint64_t spikes = 0;
    std::uint64_t events_emitted = 0;      // address-event copies injected
    std::uint64_t events_delivered = 0;
    std::uint64_t dropped_by_filter = 0;   // multicast table had no destination
    std::uint64_t synaptic_inputs = 0;
    std::uint64_t cam_deliveries = 0;      // one per event arriving at a core
    std::uint64_t program_writes = 0;
    std::uint64_t trace_hash = 0;
    std::vector<std::uint64_t> deliveries_per_core;
    // inputs_by_target[gid][kernel]: delivered synaptic-input multiset.
    std::vector<std::array<std::uint64_t, kNumKernels>> inputs_by_target;
    std::vector<TokenTraceRow> route_trace;  // when record_traces is on

    std::string raster_csv() const;
};

class Chip {
public:
    explicit Chip(ChipConfig cfg);
    // The fabric holds references into this object; it must not move.
    Chip(const Chip&) = delete;
    Chip& operator=(const Chip&) = delete;

    int n_neurons() const { return cfg_.n_cores * cfg_.neurons_per_core; }
    int core_of(std::uint32_t gid) const { return static_cast<int>(gid) / cfg_.neurons_per_core; }
    int local_of(std::uint32_t gid) const { return static_cast<int>(gid) % cfg_.neurons_per_core; }
    const ChipConfig& config() const { return cfg_; }

    void set_neuron_params(std::uint32_t gid, const NeuronParams& p);
    const NeuronParams& neuron_params(std::uint32_t gid) const;

    // Direct tag-memory programming.
    void program_cam(int core, int neuron, int word_index, std::uint32_t word_value);
    // Convenience: program the next free word of dst with (src_tag, kernel).
    void connect(std::uint32_t src_gid, std::uint32_t dst_gid, SynKernel kernel);
    // Same write, but delivered through the routing fabric as an address-event
    // at the start of the run.
    void queue_aer_program(int core, int neuron, int word_index, std::uint32_t word_value);

    const CamArray& cam(int core, int neuron) const;
    int cam_fill(int core, int neuron) const;

    void add_stimulus(const StimulusEntry& e);

    RunResult run(double t_sim_s);

private:
    struct TokenMeta {
        enum class Kind { Spike, Program } kind = Kind::Spike;
        std::uint32_t src_gid = 0;
        int dest_core = 0;
        bool delivered = false;
        // program payload
        int prog_core = 0, prog_neuron = 0, prog_word = 0;
        std::uint32_t prog_value = 0;
    };

    void build_fabric();
    void emit_spike(std::uint32_t gid, TimePs t);
    void deliver(int core, const Token& tok, TimePs t);
    void tick(TimePs t, TimePs t_end, RunResult& res);
    std::vector<int> tag_matches(int core, int neuron, std::uint32_t tag) const;
    void apply_program(int core, int neuron, int word_index, std::uint32_t value);
    int& match_count(std::uint32_t tag, int core);

    ChipConfig cfg_;
    Engine engine_;
    EnergyLedger ledger_;
    std::unique_ptr<Fabric> fabric_;
    std::vector<SourceProcess*> injectors_;
    std::vector<SinkProcess*> delivery_sinks_;

    std::vector<NeuronParams> params_;
    std::vector<NeuronState> states_;
    std::vector<double> i_ext_a_;
    std::vector<CamArray> cams_;
    std::vector<int> cam_fill_;
    std::vector<int> match_counts_;  // [tag * n_cores + core]

    std::vector<StimulusEntry> stimuli_;
    std::vector<std::pair<TokenMeta, std::uint32_t>> queued_programs_;  // (meta, value)
    std::unordered_map<std::uint64_t, TokenMeta> token_meta_;

    RunResult* active_run_ = nullptr;
    bool ran_ = false;
};

std::string stimulus_kind_name(StimulusEntry::Kind k);

}  // namespace nmcsim

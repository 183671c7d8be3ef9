#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmcsim/fabric.hpp"

namespace nmcsim {

// Canned topologies for throughput and conformance runs. The split tree
// steers by the top two payload bits into four sinks; the merge tree funnels
// four sources into one sink.
enum class TopologyKind { BufferPipeline, SplitTree, MergeTree };

const char* topology_name(TopologyKind k);
std::optional<TopologyKind> topology_from_name(const std::string& name);

struct ThroughputResult {
    double events_per_s = 0.0;
    int tokens = 0;
    TimePs t_first_ps = 0;
    TimePs t_last_ps = 0;
    bool saturated = false;
};

// Free-running token stream through an n-stage buffer pipeline; rate measured
// at the sink with the first `warmup_tokens` excluded.
ThroughputResult measure_throughput(int n_stages, int width_bits, int n_tokens,
                                    const DelayModel& delays, std::uint64_t seed,
                                    EnergyLedger* ledger = nullptr, int warmup_tokens = 16);

struct PacedRunResult {
    std::uint64_t tokens = 0;
    bool saturated = false;
    TimePs t_first_inject_ps = 0;
    TimePs t_last_receive_ps = 0;
};

// Single buffer stage fed at a fixed injection rate; used for the power curve.
PacedRunResult run_paced_buffer(double rate_ev_s, int width_bits, int n_tokens,
                                const DelayModel& delays, std::uint64_t seed,
                                EnergyLedger* ledger);

struct ConformanceReport {
    TopologyKind topology = TopologyKind::BufferPipeline;
    int trials = 0;
    int passes = 0;
    int failures = 0;
    int first_failure_trial = -1;
    std::string first_failure;
    std::vector<ConformanceMonitor::Violation> first_violations;

    bool ok() const { return failures == 0; }
};

// Run `n_trials` independent trials with freshly sampled transition delays.
// Each trial checks the token contract of the topology (exact sequence for
// pipelines, per-port filtered sequences for the split tree, multiset plus
// per-source order for the merge tree). `inject_fault` plants an
// ack-before-validity bug in the first buffer as a negative control.
ConformanceReport qdi_conformance(TopologyKind topology, int n_trials, int tokens_per_trial,
                                  std::uint64_t seed, const DelayModel& base,
                                  bool inject_fault = false);

// User-described pipeline: a list of processes and port connections.
//
//   [pipeline]
//   width = 10
//   process = source a
//   process = buffer b0
//   process = split s0 bit=9
//   process = merge m0
//   process = sink out
//   connect = a -> b0
//   connect = b0 -> out
//
// Ports are assigned in connect order (a merge's first connect is input 0,
// a split's first connect is output 0).
struct PipelineDesc {
    struct Proc {
        ProcessKind kind;
        std::string name;
        int select_bit = 0;  // splits only
    };
    std::vector<Proc> procs;
    std::vector<std::pair<std::string, std::string>> links;
    int width_bits = 10;

    static PipelineDesc parse_file(const std::string& path);
    static PipelineDesc parse_text(const std::string& text,
                                   const std::string& origin = "<inline>");
};

// Conformance over a user topology. The generic contract is loss/duplication
// freedom (every injected token id arrives exactly once across the sinks) and
// protocol cleanliness; ordering contracts are topology-specific and only
// checked for the built-in kinds. When `first_trace_csv` is given, the first
// trial records a token trace into it.
ConformanceReport qdi_conformance_custom(const PipelineDesc& desc, int n_trials,
                                         int tokens_per_trial, std::uint64_t seed,
                                         const DelayModel& base,
                                         std::string* first_trace_csv = nullptr);

std::string token_trace_csv(const std::vector<TokenTraceRow>& rows);

}  // namespace nmcsim

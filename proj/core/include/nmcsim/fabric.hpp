#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmcsim/engine.hpp"
#include "nmcsim/ledger.hpp"
#include "nmcsim/rng.hpp"
#include "nmcsim/time.hpp"

namespace nmcsim {

// Token-level simulation of quasi-delay-insensitive pipeline processes:
// dual-rail data channels, 4-phase handshakes, and per-transition sampled
// delays. Channels are simulated rail by rail, so completion detection and
// delay insensitivity are exercised for real, not assumed.

enum class Rail : std::uint8_t { Neutral, Zero, One };

enum class ChannelPhase : std::uint8_t { Idle, DataValid, Acked, Returning };

const char* phase_name(ChannelPhase p);

struct Token {
    std::uint64_t id = 0;
    std::uint32_t value = 0;
};

std::vector<Rail> encode_dual_rail(std::uint32_t value, int width);
// nullopt while any bit is neutral (no completion).
std::optional<std::uint32_t> decode_dual_rail(const std::vector<Rail>& rails);

enum class DelayMode { Nominal, Randomized, WorstCaseSampled };

struct DelayModel {
    double nominal_ps = 92.593;  // per transition
    double jitter_frac = 0.5;    // half-width of the uniform jitter, relative
    DelayMode mode = DelayMode::Nominal;

    // Strictly positive, finite, integer picoseconds.
    TimePs sample(CounterRng& rng) const;
};

class Process;
class Fabric;
class ConformanceMonitor;

struct Channel {
    std::uint32_t id = 0;
    std::string name;
    int width = 0;
    Process* src = nullptr;
    Process* dst = nullptr;

    std::vector<Rail> rails;
    int bits_valid = 0;
    bool ack = false;
    ChannelPhase phase = ChannelPhase::Idle;
    bool sender_driving = false;
    Token token;  // token currently on the rails
    std::uint64_t tokens_carried = 0;
};

enum class ProcessKind { Source, Sink, Buffer, Split, Merge };

const char* process_kind_name(ProcessKind k);

class Process {
public:
    Process(Fabric& fab, ProcessKind kind, std::string name);
    virtual ~Process() = default;

    ProcessKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    NodeId node_id() const { return node_id_; }

    // Port wiring (used by Fabric::connect).
    void attach_in(Channel& c);
    void attach_out(Channel& c);
    int in_port_of(const Channel& c) const;
    int out_port_of(const Channel& c) const;

    virtual void on_start() {}
    virtual void on_in_rail(Channel&, int /*bits_valid*/) {}
    virtual void on_in_valid(Channel&) {}
    virtual void on_in_neutral(Channel&) {}
    virtual void on_out_acked(Channel&) {}
    virtual void on_out_released(Channel&) {}
    virtual void on_out_valid_done(Channel&) {}
    virtual void on_out_neutral_done(Channel&) {}

    virtual bool busy() const { return false; }
    virtual std::string state_summary() const { return {}; }

    virtual int expected_inputs() const = 0;
    virtual int expected_outputs() const = 0;

protected:
    Fabric& fab_;
    std::vector<Channel*> in_;
    std::vector<Channel*> out_;

private:
    ProcessKind kind_;
    std::string name_;
    NodeId node_id_;
};

// One-place pipeline stage: latch on (input valid && output idle), drive the
// output, acknowledge upstream after the output rails complete, precharge
// once downstream has acknowledged and the input has returned to neutral.
class BufferProcess : public Process {
public:
    enum class Fault { None, AckBeforeValid };

    BufferProcess(Fabric& fab, std::string name) : Process(fab, ProcessKind::Buffer, std::move(name)) {}

    void inject_fault(Fault f) { fault_ = f; }

    void on_in_rail(Channel& c, int bits_valid) override;
    void on_in_valid(Channel& c) override;
    void on_in_neutral(Channel& c) override;
    void on_out_acked(Channel& c) override;
    void on_out_released(Channel& c) override;
    void on_out_valid_done(Channel& c) override;
    void on_out_neutral_done(Channel& c) override;

    bool busy() const override { return out_busy_ || in_pending_; }
    std::string state_summary() const override;

    int expected_inputs() const override { return 1; }
    int expected_outputs() const override { return 1; }

private:
    void try_latch();
    void maybe_precharge();

    bool in_pending_ = false;
    bool out_busy_ = false;
    bool got_out_ack_ = false;
    bool got_in_neutral_ = false;
    Fault fault_ = Fault::None;
    bool fault_fired_ = false;
};

// Steers each token to out port (value >> select_bit) & 1.
class SplitProcess : public Process {
public:
    SplitProcess(Fabric& fab, std::string name, int select_bit)
        : Process(fab, ProcessKind::Split, std::move(name)), select_bit_(select_bit) {}

    void on_in_valid(Channel& c) override;
    void on_in_neutral(Channel& c) override;
    void on_out_acked(Channel& c) override;
    void on_out_released(Channel& c) override;
    void on_out_valid_done(Channel& c) override;
    void on_out_neutral_done(Channel& c) override;

    bool busy() const override { return out_busy_ || in_pending_; }
    std::string state_summary() const override;

    int expected_inputs() const override { return 1; }
    int expected_outputs() const override { return 2; }

    int select_bit() const { return select_bit_; }

private:
    void try_latch();
    void maybe_precharge();

    int select_bit_;
    bool in_pending_ = false;
    bool out_busy_ = false;
    int route_ = 0;
    bool got_out_ack_ = false;
    bool got_in_neutral_ = false;
};

// Two-to-one arbiter. Under nominal delays simultaneous contenders resolve
// to input 0; under randomized delays the earlier arrival wins. Per-input
// order is preserved and nothing is lost or duplicated.
class MergeProcess : public Process {
public:
    MergeProcess(Fabric& fab, std::string name) : Process(fab, ProcessKind::Merge, std::move(name)) {}

    void on_in_valid(Channel& c) override;
    void on_in_neutral(Channel& c) override;
    void on_out_acked(Channel& c) override;
    void on_out_released(Channel& c) override;
    void on_out_valid_done(Channel& c) override;
    void on_out_neutral_done(Channel& c) override;

    bool busy() const override { return out_busy_ || pending_[0] || pending_[1]; }
    std::string state_summary() const override;

    int expected_inputs() const override { return 2; }
    int expected_outputs() const override { return 1; }

private:
    void try_serve();
    void maybe_precharge();

    bool pending_[2] = {false, false};
    EventId pending_seq_[2] = {0, 0};
    bool out_busy_ = false;
    int serving_ = -1;
    bool got_out_ack_ = false;
    bool got_in_neutral_ = false;
};

// Token injector. Tokens come from a preset list or are pushed at runtime;
// emission is optionally paced to a fixed period. The source participates in
// the handshake like any other stage.
class SourceProcess : public Process {
public:
    SourceProcess(Fabric& fab, std::string name) : Process(fab, ProcessKind::Source, std::move(name)) {}

    void set_values(const std::vector<std::uint32_t>& values);
    void push(Token t);
    void set_period(TimePs period_ps) { period_ = period_ps; }
    void set_start(TimePs t) { start_ = t; }

    std::uint64_t injected() const { return injected_; }
    bool saturated() const { return saturated_; }
    const std::vector<std::pair<Token, TimePs>>& injections() const { return injections_; }

    void on_start() override;
    void on_out_acked(Channel& c) override;
    void on_out_released(Channel& c) override;

    bool busy() const override { return !ready_ || !queue_.empty(); }
    std::string state_summary() const override;

    int expected_inputs() const override { return 0; }
    int expected_outputs() const override { return 1; }

private:
    void maybe_emit();
    void do_emit();

    std::deque<Token> queue_;
    TimePs period_ = 0;  // 0 = as fast as the handshake allows
    TimePs start_ = 0;
    bool started_ = false;
    bool ready_ = true;
    bool emit_scheduled_ = false;
    bool saturated_ = false;
    std::uint64_t injected_ = 0;
    std::vector<std::pair<Token, TimePs>> injections_;
};

class SinkProcess : public Process {
public:
    using TokenCallback = std::function<void(const Token&, TimePs)>;

    SinkProcess(Fabric& fab, std::string name) : Process(fab, ProcessKind::Sink, std::move(name)) {}

    void set_stuck(bool stuck) { stuck_ = stuck; }  // never acknowledges (test hook)
    void set_callback(TokenCallback cb) { callback_ = std::move(cb); }

    const std::vector<std::pair<Token, TimePs>>& received() const { return received_; }

    void on_in_valid(Channel& c) override;
    void on_in_neutral(Channel& c) override;

    int expected_inputs() const override { return 1; }
    int expected_outputs() const override { return 0; }

private:
    bool stuck_ = false;
    TokenCallback callback_;
    std::vector<std::pair<Token, TimePs>> received_;
};

struct TokenTraceRow {
    TimePs time_ps;
    std::uint32_t process_id;
    std::string process_name;
    int port;
    std::uint32_t value;
    std::uint64_t token_id;
};

struct FabricCosts {
    double e_dyn_j = 138.883e-15;  // per token per process
    double p_static_w = 9.84e-9;   // per process
};

class Fabric {
public:
    Fabric(Engine& engine, DelayModel delays, std::uint64_t delay_seed,
           FabricCosts costs = {}, EnergyLedger* ledger = nullptr);

    SourceProcess& add_source(std::string name);
    SinkProcess& add_sink(std::string name);
    BufferProcess& add_buffer(std::string name);
    SplitProcess& add_split(std::string name, int select_bit);
    MergeProcess& add_merge(std::string name);

    Channel& connect(Process& from, Process& to, int width);
    void start();

    // Handshake actions, called by processes.
    void drive_valid(Channel& c, Token tok);
    void drive_neutral(Channel& c);
    void set_ack(Channel& c, bool level);
    void token_accepted(Process& p, Channel& in, const Token& tok);

    Engine& engine() { return engine_; }
    EnergyLedger* ledger() { return ledger_; }
    const DelayModel& delays() const { return delays_; }

    void attach_monitor(ConformanceMonitor* m) { monitor_ = m; }
    void enable_token_trace(bool on) { trace_tokens_ = on; }
    const std::vector<TokenTraceRow>& token_trace() const { return token_trace_; }

    std::uint64_t new_token_id() { return next_token_id_++; }
    TimePs last_progress() const { return last_progress_; }
    std::vector<const Process*> busy_processes() const;
    std::string stuck_report() const;

    const std::vector<std::unique_ptr<Process>>& processes() const { return processes_; }
    const std::vector<std::unique_ptr<Channel>>& channels() const { return channels_; }

    NodeId alloc_node_id() { return next_node_id_++; }

private:
    friend class Process;

    void rail_arrive(Channel& c, int bit, Rail level);
    void rail_drop(Channel& c, int bit);
    void ack_arrive(Channel& c, bool level);
    void note(const Channel& c, TimePs t, const std::string& what);
    [[noreturn]] void violation(const Channel& c, const std::string& what);
    TimePs sample_delay() { return delays_.sample(delay_rng_); }

    Engine& engine_;
    DelayModel delays_;
    CounterRng delay_rng_;
    FabricCosts costs_;
    EnergyLedger* ledger_;
    ConformanceMonitor* monitor_ = nullptr;

    std::vector<std::unique_ptr<Process>> processes_;
    std::vector<std::unique_ptr<Channel>> channels_;
    NodeId next_node_id_ = 1;
    std::uint64_t next_token_id_ = 1;
    TimePs last_progress_ = 0;
    bool started_ = false;
    bool trace_tokens_ = false;
    std::vector<TokenTraceRow> token_trace_;
};

// Records channel transitions (bounded history) and protocol violations with
// the transition history that led up to them.
class ConformanceMonitor {
public:
    explicit ConformanceMonitor(std::size_t history_cap = 128) : cap_(history_cap) {}

    struct Transition {
        TimePs t;
        std::string channel;
        std::string what;
    };
    struct Violation {
        TimePs t;
        std::string channel;
        std::string what;
        std::vector<Transition> history;
    };

    void note(TimePs t, const std::string& channel, std::string what);
    void record_violation(TimePs t, const std::string& channel, const std::string& what);

    const std::vector<Violation>& violations() const { return violations_; }
    bool ok() const { return violations_.empty(); }

private:
    std::size_t cap_;
    std::deque<Transition> history_;
    std::vector<Violation> violations_;
};

}  // namespace nmcsim

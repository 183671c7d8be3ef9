#include "nmcsim/fabric.hpp"

#include <algorithm>
#include <cmath>

#include "nmcsim/errors.hpp"

namespace nmcsim {

namespace {

constexpr EventKind kRailUp = 1;
constexpr EventKind kRailDown = 2;
constexpr EventKind kAckRise = 3;
constexpr EventKind kAckFall = 4;
constexpr EventKind kSourceEmit = 5;

}  // namespace

const char* phase_name(ChannelPhase p) {
    switch (p) {
        case ChannelPhase::Idle: return "idle";
        case ChannelPhase::DataValid: return "data_valid";
        case ChannelPhase::Acked: return "acked";
        case ChannelPhase::Returning: return "returning";
    }
    return "?";
}

const char* process_kind_name(ProcessKind k) {
    switch (k) {
        case ProcessKind::Source: return "source";
        case ProcessKind::Sink: return "sink";
        case ProcessKind::Buffer: return "buffer";
        case ProcessKind::Split: return "split";
        case ProcessKind::Merge: return "merge";
    }
    return "?";
}

std::vector<Rail> encode_dual_rail(std::uint32_t value, int width) {
    std::vector<Rail> rails(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) {
        rails[static_cast<std::size_t>(i)] = ((value >> i) & 1u) ? Rail::One : Rail::Zero;
    }
    return rails;
}

std::optional<std::uint32_t> decode_dual_rail(const std::vector<Rail>& rails) {
    std::uint32_t value = 0;
    for (std::size_t i = 0; i < rails.size(); ++i) {
        if (rails[i] == Rail::Neutral) return std::nullopt;
        if (rails[i] == Rail::One) value |= 1u << i;
    }
    return value;
}

TimePs DelayModel::sample(CounterRng& rng) const {
    double d = nominal_ps;
    switch (mode) {
        case DelayMode::Nominal:
            break;
        case DelayMode::Randomized:
            d = nominal_ps * rng.next_uniform(1.0 - jitter_frac, 1.0 + jitter_frac);
            break;
        case DelayMode::WorstCaseSampled:
            // Adversarial corner sampling: every transition sits at one of the
            // jitter extremes.
            d = nominal_ps * (rng.next_below(2) ? 1.0 + jitter_frac : 1.0 - jitter_frac);
            break;
    }
    const TimePs t = static_cast<TimePs>(std::llround(d));
    return t < 1 ? 1 : t;
}

// ---- Process ----------------------------------------------------------------

Process::Process(Fabric& fab, ProcessKind kind, std::string name)
    : fab_(fab), kind_(kind), name_(std::move(name)), node_id_(fab.alloc_node_id()) {}

void Process::attach_in(Channel& c) { in_.push_back(&c); }
void Process::attach_out(Channel& c) { out_.push_back(&c); }

int Process::in_port_of(const Channel& c) const {
    for (std::size_t i = 0; i < in_.size(); ++i) {
        if (in_[i] == &c) return static_cast<int>(i);
    }
    return -1;
}

int Process::out_port_of(const Channel& c) const {
    for (std::size_t i = 0; i < out_.size(); ++i) {
        if (out_[i] == &c) return static_cast<int>(i);
    }
    return -1;
}

// ---- BufferProcess ----------------------------------------------------------

void BufferProcess::on_in_rail(Channel& c, int bits_valid) {
    if (fault_ == Fault::AckBeforeValid && bits_valid == 1 && !fault_fired_) {
        fault_fired_ = true;
        fab_.set_ack(c, true);  // acknowledge before completion: protocol breach
    }
}

void BufferProcess::on_in_valid(Channel&) {
    in_pending_ = true;
    try_latch();
}

void BufferProcess::try_latch() {
    if (!in_pending_ || out_busy_) return;
    in_pending_ = false;
    out_busy_ = true;
    got_out_ack_ = false;
    got_in_neutral_ = false;
    const Token tok = in_[0]->token;
    fab_.token_accepted(*this, *in_[0], tok);
    fab_.drive_valid(*out_[0], tok);
}

void BufferProcess::on_out_valid_done(Channel&) {
    if (fault_ == Fault::AckBeforeValid) return;  // ack already raised early
    fab_.set_ack(*in_[0], true);
}

void BufferProcess::on_out_acked(Channel&) {
    got_out_ack_ = true;
    maybe_precharge();
}

void BufferProcess::on_in_neutral(Channel&) {
    got_in_neutral_ = true;
    maybe_precharge();
}

void BufferProcess::maybe_precharge() {
    if (!out_busy_ || !got_out_ack_ || !got_in_neutral_) return;
    fab_.drive_neutral(*out_[0]);
}

void BufferProcess::on_out_neutral_done(Channel&) {
    fab_.set_ack(*in_[0], false);
    fault_fired_ = false;
}

void BufferProcess::on_out_released(Channel&) {
    out_busy_ = false;
    try_latch();
}

std::string BufferProcess::state_summary() const {
    std::string s = "buffer " + name() + ":";
    if (in_pending_) s += " in_pending";
    if (out_busy_) s += " out_busy";
    if (got_out_ack_) s += " out_acked";
    if (got_in_neutral_) s += " in_neutral";
    return s;
}

// ---- SplitProcess -----------------------------------------------------------

void SplitProcess::on_in_valid(Channel&) {
    in_pending_ = true;
    try_latch();
}

void SplitProcess::try_latch() {
    if (!in_pending_ || out_busy_) return;
    in_pending_ = false;
    out_busy_ = true;
    got_out_ack_ = false;
    got_in_neutral_ = false;
    const Token tok = in_[0]->token;
    route_ = static_cast<int>((tok.value >> select_bit_) & 1u);
    fab_.token_accepted(*this, *in_[0], tok);
    fab_.drive_valid(*out_[static_cast<std::size_t>(route_)], tok);
}

void SplitProcess::on_out_valid_done(Channel&) { fab_.set_ack(*in_[0], true); }

void SplitProcess::on_out_acked(Channel&) {
    got_out_ack_ = true;
    maybe_precharge();
}

void SplitProcess::on_in_neutral(Channel&) {
    got_in_neutral_ = true;
    maybe_precharge();
}

void SplitProcess::maybe_precharge() {
    if (!out_busy_ || !got_out_ack_ || !got_in_neutral_) return;
    fab_.drive_neutral(*out_[static_cast<std::size_t>(route_)]);
}

void SplitProcess::on_out_neutral_done(Channel&) { fab_.set_ack(*in_[0], false); }

void SplitProcess::on_out_released(Channel&) {
    out_busy_ = false;
    try_latch();
}

std::string SplitProcess::state_summary() const {
    std::string s = "split " + name() + ":";
    if (in_pending_) s += " in_pending";
    if (out_busy_) s += " out_busy(route " + std::to_string(route_) + ")";
    return s;
}

// ---- MergeProcess -----------------------------------------------------------

void MergeProcess::on_in_valid(Channel& c) {
    const int port = in_port_of(c);
    pending_[port] = true;
    pending_seq_[port] = fab_.engine().current_seq();
    try_serve();
}

void MergeProcess::try_serve() {
    if (out_busy_ || (!pending_[0] && !pending_[1])) return;
    int pick;
    if (pending_[0] && pending_[1]) {
        if (fab_.delays().mode == DelayMode::Nominal) {
            pick = 0;  // deterministic priority
        } else {
            pick = pending_seq_[0] <= pending_seq_[1] ? 0 : 1;  // arrival order
        }
    } else {
        pick = pending_[0] ? 0 : 1;
    }
    pending_[pick] = false;
    serving_ = pick;
    out_busy_ = true;
    got_out_ack_ = false;
    got_in_neutral_ = false;
    const Token tok = in_[static_cast<std::size_t>(pick)]->token;
    fab_.token_accepted(*this, *in_[static_cast<std::size_t>(pick)], tok);
    fab_.drive_valid(*out_[0], tok);
}

void MergeProcess::on_out_valid_done(Channel&) {
    fab_.set_ack(*in_[static_cast<std::size_t>(serving_)], true);
}

void MergeProcess::on_out_acked(Channel&) {
    got_out_ack_ = true;
    maybe_precharge();
}

void MergeProcess::on_in_neutral(Channel& c) {
    if (in_port_of(c) != serving_) return;
    got_in_neutral_ = true;
    maybe_precharge();
}

void MergeProcess::maybe_precharge() {
    if (!out_busy_ || !got_out_ack_ || !got_in_neutral_) return;
    fab_.drive_neutral(*out_[0]);
}

void MergeProcess::on_out_neutral_done(Channel&) {
    fab_.set_ack(*in_[static_cast<std::size_t>(serving_)], false);
}

void MergeProcess::on_out_released(Channel&) {
    out_busy_ = false;
    serving_ = -1;
    try_serve();
}

std::string MergeProcess::state_summary() const {
    std::string s = "merge " + name() + ":";
    if (pending_[0]) s += " in0_pending";
    if (pending_[1]) s += " in1_pending";
    if (out_busy_) s += " out_busy(serving " + std::to_string(serving_) + ")";
    return s;
}

// ---- SourceProcess ----------------------------------------------------------

void SourceProcess::set_values(const std::vector<std::uint32_t>& values) {
    for (std::uint32_t v : values) queue_.push_back(Token{fab_.new_token_id(), v});
}

void SourceProcess::push(Token t) {
    if (t.id == 0) t.id = fab_.new_token_id();
    queue_.push_back(t);
    maybe_emit();
}

void SourceProcess::on_start() {
    started_ = true;
    maybe_emit();
}

void SourceProcess::maybe_emit() {
    if (!started_ || !ready_ || emit_scheduled_ || queue_.empty()) return;
    const TimePs now = fab_.engine().now();
    TimePs t = now;
    if (period_ > 0) {
        const TimePs pace = start_ + static_cast<TimePs>(injected_) * period_;
        if (pace > now) {
            t = pace;
        } else if (pace < now) {
            saturated_ = true;  // the handshake cannot keep up with the request
        }
    } else if (start_ > now) {
        t = start_;
    }
    emit_scheduled_ = true;
    fab_.engine().schedule(t, node_id(), kSourceEmit, [this] { do_emit(); });
}

void SourceProcess::do_emit() {
    emit_scheduled_ = false;
    if (!ready_ || queue_.empty()) return;
    const Token tok = queue_.front();
    queue_.pop_front();
    ready_ = false;
    ++injected_;
    injections_.emplace_back(tok, fab_.engine().now());
    fab_.drive_valid(*out_[0], tok);
}

void SourceProcess::on_out_acked(Channel&) { fab_.drive_neutral(*out_[0]); }

void SourceProcess::on_out_released(Channel&) {
    ready_ = true;
    maybe_emit();
}

std::string SourceProcess::state_summary() const {
    return "source " + name() + ": queued=" + std::to_string(queue_.size()) +
           (ready_ ? "" : " mid-handshake");
}

// ---- SinkProcess ------------------------------------------------------------

void SinkProcess::on_in_valid(Channel& c) {
    received_.emplace_back(c.token, fab_.engine().now());
    fab_.token_accepted(*this, c, c.token);
    if (callback_) callback_(c.token, fab_.engine().now());
    if (!stuck_) fab_.set_ack(c, true);
}

void SinkProcess::on_in_neutral(Channel& c) { fab_.set_ack(c, false); }

// ---- Fabric -----------------------------------------------------------------

Fabric::Fabric(Engine& engine, DelayModel delays, std::uint64_t delay_seed,
               FabricCosts costs, EnergyLedger* ledger)
    : engine_(engine), delays_(delays), delay_rng_(delay_seed, 0xfab), costs_(costs),
      ledger_(ledger) {}

SourceProcess& Fabric::add_source(std::string name) {
    auto p = std::make_unique<SourceProcess>(*this, std::move(name));
    auto& ref = *p;
    processes_.push_back(std::move(p));
    return ref;
}

SinkProcess& Fabric::add_sink(std::string name) {
    auto p = std::make_unique<SinkProcess>(*this, std::move(name));
    auto& ref = *p;
    processes_.push_back(std::move(p));
    return ref;
}

BufferProcess& Fabric::add_buffer(std::string name) {
    auto p = std::make_unique<BufferProcess>(*this, std::move(name));
    auto& ref = *p;
    if (ledger_) ledger_->add_static(ref.name(), costs_.p_static_w);
    processes_.push_back(std::move(p));
    return ref;
}

SplitProcess& Fabric::add_split(std::string name, int select_bit) {
    auto p = std::make_unique<SplitProcess>(*this, std::move(name), select_bit);
    auto& ref = *p;
    if (ledger_) ledger_->add_static(ref.name(), costs_.p_static_w);
    processes_.push_back(std::move(p));
    return ref;
}

MergeProcess& Fabric::add_merge(std::string name) {
    auto p = std::make_unique<MergeProcess>(*this, std::move(name));
    auto& ref = *p;
    if (ledger_) ledger_->add_static(ref.name(), costs_.p_static_w);
    processes_.push_back(std::move(p));
    return ref;
}

Channel& Fabric::connect(Process& from, Process& to, int width) {
    if (width < 1 || width > 31) throw SimError("fabric", "channel width must be in [1, 31]");
    auto c = std::make_unique<Channel>();
    c->id = alloc_node_id();
    c->width = width;
    c->src = &from;
    c->dst = &to;
    c->rails.assign(static_cast<std::size_t>(width), Rail::Neutral);
    c->name = from.name() + "->" + to.name();
    auto& ref = *c;
    channels_.push_back(std::move(c));
    from.attach_out(ref);
    to.attach_in(ref);
    return ref;
}

void Fabric::start() {
    if (started_) throw SimError("fabric", "fabric already started");
    for (const auto& p : processes_) {
        int ins = 0, outs = 0;
        for (const auto& c : channels_) {
            if (c->dst == p.get()) ++ins;
            if (c->src == p.get()) ++outs;
        }
        if (ins != p->expected_inputs() || outs != p->expected_outputs()) {
            throw SimError("fabric", p->name() + " has " + std::to_string(ins) + " inputs / " +
                                         std::to_string(outs) + " outputs, expected " +
                                         std::to_string(p->expected_inputs()) + "/" +
                                         std::to_string(p->expected_outputs()));
        }
    }
    started_ = true;
    for (const auto& p : processes_) p->on_start();
}

void Fabric::drive_valid(Channel& c, Token tok) {
    if (c.width < 31 && tok.value >= (1u << c.width)) {
        throw SimError("fabric", "token value 0x" + std::to_string(tok.value) +
                                     " does not fit channel " + c.name + " (" +
                                     std::to_string(c.width) + " bits)");
    }
    if (c.sender_driving || c.phase != ChannelPhase::Idle) {
        violation(c, "drive_valid on a channel that is not idle");
    }
    c.sender_driving = true;
    c.token = tok;
    for (int bit = 0; bit < c.width; ++bit) {
        const Rail level = ((tok.value >> bit) & 1u) ? Rail::One : Rail::Zero;
        engine_.schedule(engine_.now() + sample_delay(), c.id, kRailUp,
                         [this, &c, bit, level] { rail_arrive(c, bit, level); });
    }
}

void Fabric::drive_neutral(Channel& c) {
    if (c.phase != ChannelPhase::Acked) {
        violation(c, "drive_neutral in phase " + std::string(phase_name(c.phase)));
    }
    for (int bit = 0; bit < c.width; ++bit) {
        engine_.schedule(engine_.now() + sample_delay(), c.id, kRailDown,
                         [this, &c, bit] { rail_drop(c, bit); });
    }
}

void Fabric::set_ack(Channel& c, bool level) {
    engine_.schedule(engine_.now() + sample_delay(), c.id, level ? kAckRise : kAckFall,
                     [this, &c, level] { ack_arrive(c, level); });
}

void Fabric::token_accepted(Process& p, Channel& in, const Token& tok) {
    if (ledger_) {
        switch (p.kind()) {
            case ProcessKind::Buffer: ledger_->charge(EnergyClass::PchbBuffer, costs_.e_dyn_j); break;
            case ProcessKind::Split: ledger_->charge(EnergyClass::PchbSplit, costs_.e_dyn_j); break;
            case ProcessKind::Merge: ledger_->charge(EnergyClass::PchbMerge, costs_.e_dyn_j); break;
            default: break;
        }
    }
    if (trace_tokens_) {
        token_trace_.push_back(TokenTraceRow{engine_.now(), p.node_id(), p.name(),
                                             p.in_port_of(in), tok.value, tok.id});
    }
}

void Fabric::rail_arrive(Channel& c, int bit, Rail level) {
    note(c, engine_.now(), "bit" + std::to_string(bit) + (level == Rail::One ? "=1" : "=0"));
    if (c.rails[static_cast<std::size_t>(bit)] != Rail::Neutral) {
        violation(c, "bit " + std::to_string(bit) + " driven while not neutral (dual-rail exclusivity)");
    }
    if (c.phase != ChannelPhase::Idle) {
        violation(c, "data rail rose in phase " + std::string(phase_name(c.phase)));
    }
    c.rails[static_cast<std::size_t>(bit)] = level;
    ++c.bits_valid;
    last_progress_ = engine_.now();
    if (c.dst) c.dst->on_in_rail(c, c.bits_valid);
    if (c.bits_valid == c.width) {
        const auto decoded = decode_dual_rail(c.rails);
        if (!decoded || *decoded != c.token.value) {
            violation(c, "decoded rail value does not match the driven token");
        }
        c.phase = ChannelPhase::DataValid;
        ++c.tokens_carried;
        note(c, engine_.now(), "valid(0x" + std::to_string(*decoded) + ")");
        if (c.dst) c.dst->on_in_valid(c);
        if (c.src) c.src->on_out_valid_done(c);
    }
}

void Fabric::rail_drop(Channel& c, int bit) {
    note(c, engine_.now(), "bit" + std::to_string(bit) + "->N");
    if (c.rails[static_cast<std::size_t>(bit)] == Rail::Neutral) {
        violation(c, "bit " + std::to_string(bit) + " dropped while already neutral");
    }
    if (c.phase == ChannelPhase::DataValid) {
        violation(c, "data returned to neutral before acknowledge");
    }
    if (c.phase != ChannelPhase::Acked) {
        violation(c, "data rail fell in phase " + std::string(phase_name(c.phase)));
    }
    c.rails[static_cast<std::size_t>(bit)] = Rail::Neutral;
    --c.bits_valid;
    last_progress_ = engine_.now();
    if (c.bits_valid == 0) {
        c.phase = ChannelPhase::Returning;
        c.sender_driving = false;
        note(c, engine_.now(), "neutral");
        if (c.dst) c.dst->on_in_neutral(c);
        if (c.src) c.src->on_out_neutral_done(c);
    }
}

void Fabric::ack_arrive(Channel& c, bool level) {
    note(c, engine_.now(), level ? "ack^" : "ackv");
    last_progress_ = engine_.now();
    if (level) {
        if (c.ack) violation(c, "ack rose while already high");
        if (c.phase != ChannelPhase::DataValid) {
            violation(c, "acknowledge before data validity (phase " +
                             std::string(phase_name(c.phase)) + ", " +
                             std::to_string(c.bits_valid) + "/" + std::to_string(c.width) +
                             " bits valid)");
        }
        c.ack = true;
        c.phase = ChannelPhase::Acked;
        if (c.src) c.src->on_out_acked(c);
    } else {
        if (!c.ack) violation(c, "ack fell while already low");
        if (c.phase != ChannelPhase::Returning) {
            violation(c, "ack released in phase " + std::string(phase_name(c.phase)));
        }
        c.ack = false;
        c.phase = ChannelPhase::Idle;
        if (c.src) c.src->on_out_released(c);
    }
}

void Fabric::note(const Channel& c, TimePs t, const std::string& what) {
    if (monitor_) monitor_->note(t, c.name, what);
}

void Fabric::violation(const Channel& c, const std::string& what) {
    const std::string msg = "channel " + c.name + " @ " + std::to_string(engine_.now()) +
                            " ps: " + what;
    if (monitor_) monitor_->record_violation(engine_.now(), c.name, what);
    throw ProtocolViolation(msg);
}

std::vector<const Process*> Fabric::busy_processes() const {
    std::vector<const Process*> out;
    for (const auto& p : processes_) {
        if (p->busy()) out.push_back(p.get());
    }
    return out;
}

std::string Fabric::stuck_report() const {
    std::string s;
    for (const Process* p : busy_processes()) {
        if (!s.empty()) s += "; ";
        s += p->state_summary();
    }
    return s.empty() ? "no busy processes" : s;
}

// ---- ConformanceMonitor -----------------------------------------------------

void ConformanceMonitor::note(TimePs t, const std::string& channel, std::string what) {
    history_.push_back(Transition{t, channel, std::move(what)});
    if (history_.size() > cap_) history_.pop_front();
}

void ConformanceMonitor::record_violation(TimePs t, const std::string& channel,
                                          const std::string& what) {
    Violation v;
    v.t = t;
    v.channel = channel;
    v.what = what;
    v.history.assign(history_.begin(), history_.end());
    violations_.push_back(std::move(v));
}

}  // namespace nmcsim

#include "nmcsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nmcsim/errors.hpp"
#include "nmcsim/rng.hpp"

namespace nmcsim {

namespace {

constexpr EventKind kNeuronTick = 16;
constexpr EventKind kStimulusSpike = 17;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

std::string stimulus_kind_name(StimulusEntry::Kind k) {
    switch (k) {
        case StimulusEntry::Kind::Dc: return "dc";
        case StimulusEntry::Kind::Poisson: return "poisson";
        case StimulusEntry::Kind::Regular: return "regular";
        case StimulusEntry::Kind::SpikeList: return "spikes";
    }
    return "?";
}

void ChipConfig::validate() const {
    if (n_cores != 1 && n_cores != 2 && n_cores != 4) {
        throw SimError("network", "n_cores must be 1, 2 or 4 (two destination bits)");
    }
    if (neurons_per_core < 1) throw SimError("network", "neurons_per_core must be >= 1");
    if (tag_bits < 1 || tag_bits > 29) throw SimError("network", "tag_bits out of range");
    const long long total = static_cast<long long>(n_cores) * neurons_per_core;
    if (total > (1ll << tag_bits)) {
        throw SimError("network", std::to_string(total) + " neurons do not fit in " +
                                      std::to_string(tag_bits) + " tag bits");
    }
    if (cam_word_bits != tag_bits + 2) {
        throw SimError("network", "cam word_bits (" + std::to_string(cam_word_bits) +
                                      ") must be tag_bits + 2 kernel-select bits (" +
                                      std::to_string(tag_bits + 2) + ")");
    }
    if (cam_words < 1) throw SimError("network", "cam_words must be >= 1");
    if (buffer_stages < 0) throw SimError("network", "buffer_stages must be >= 0");
    if (!(dt_s > 0.0)) throw SimError("network", "dt must be positive");
    neuron.validate();
}

Chip::Chip(ChipConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const int n = n_neurons();
    params_.assign(static_cast<std::size_t>(n), cfg_.neuron);
    states_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) states_.push_back(initial_state(cfg_.neuron));
    i_ext_a_.assign(static_cast<std::size_t>(n), 0.0);
    cams_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        cams_.emplace_back(cfg_.cam_words, cfg_.cam_word_bits, cfg_.cam_costs);
    }
    cam_fill_.assign(static_cast<std::size_t>(n), 0);
    match_counts_.assign((1ull << cfg_.tag_bits) * static_cast<std::size_t>(cfg_.n_cores), 0);
    build_fabric();
}

void Chip::build_fabric() {
    fabric_ = std::make_unique<Fabric>(engine_, cfg_.delays, /*delay_seed=*/0x517e,
                                       cfg_.costs, &ledger_);
    fabric_->enable_token_trace(cfg_.record_traces);
    const int width = cfg_.tag_bits + 2;
    auto chain_buffers = [&](Process& from, int count, const std::string& prefix) -> Process& {
        Process* prev = &from;
        for (int i = 0; i < count; ++i) {
            auto& b = fabric_->add_buffer(prefix + "_b" + std::to_string(i));
            fabric_->connect(*prev, b, width);
            prev = &b;
        }
        return *prev;
    };

    injectors_.clear();
    delivery_sinks_.clear();
    for (int c = 0; c < cfg_.n_cores; ++c) {
        injectors_.push_back(&fabric_->add_source("inj" + std::to_string(c)));
    }
    for (int c = 0; c < cfg_.n_cores; ++c) {
        auto& snk = fabric_->add_sink("dsink" + std::to_string(c));
        const int core = c;
        snk.set_callback([this, core](const Token& tok, TimePs t) { deliver(core, tok, t); });
        delivery_sinks_.push_back(&snk);
    }

    if (cfg_.n_cores == 1) {
        Process& tail = chain_buffers(*injectors_[0], std::max(1, cfg_.buffer_stages), "out0");
        fabric_->connect(tail, *delivery_sinks_[0], width);
        return;
    }

    if (cfg_.n_cores == 2) {
        auto& m = fabric_->add_merge("mroot");
        for (int c = 0; c < 2; ++c) {
            Process& tail = chain_buffers(*injectors_[static_cast<std::size_t>(c)],
                                          cfg_.buffer_stages, "out" + std::to_string(c));
            fabric_->connect(tail, m, width);
        }
        Process& spine = chain_buffers(m, std::max(1, cfg_.buffer_stages), "spine");
        auto& s = fabric_->add_split("sroot", cfg_.tag_bits);
        fabric_->connect(spine, s, width);
        fabric_->connect(s, *delivery_sinks_[0], width);
        fabric_->connect(s, *delivery_sinks_[1], width);
        return;
    }

    // 4 cores: merge tree (4 -> 1), spine buffers, split tree (1 -> 4).
    auto& m01 = fabric_->add_merge("m01");
    auto& m23 = fabric_->add_merge("m23");
    auto& mroot = fabric_->add_merge("mroot");
    for (int c = 0; c < 4; ++c) {
        Process& tail = chain_buffers(*injectors_[static_cast<std::size_t>(c)],
                                      cfg_.buffer_stages, "out" + std::to_string(c));
        fabric_->connect(tail, c < 2 ? m01 : m23, width);
    }
    fabric_->connect(m01, mroot, width);
    fabric_->connect(m23, mroot, width);
    Process& spine = chain_buffers(mroot, std::max(1, cfg_.buffer_stages), "spine");
    auto& sroot = fabric_->add_split("sroot", cfg_.tag_bits + 1);
    auto& s0 = fabric_->add_split("s0", cfg_.tag_bits);
    auto& s1 = fabric_->add_split("s1", cfg_.tag_bits);
    fabric_->connect(spine, sroot, width);
    fabric_->connect(sroot, s0, width);
    fabric_->connect(sroot, s1, width);
    fabric_->connect(s0, *delivery_sinks_[0], width);
    fabric_->connect(s0, *delivery_sinks_[1], width);
    fabric_->connect(s1, *delivery_sinks_[2], width);
    fabric_->connect(s1, *delivery_sinks_[3], width);
}

void Chip::set_neuron_params(std::uint32_t gid, const NeuronParams& p) {
    if (gid >= static_cast<std::uint32_t>(n_neurons())) {
        throw SimError("network", "neuron " + std::to_string(gid) + " does not exist");
    }
    p.validate();
    params_[gid] = p;
    states_[gid] = initial_state(p);
}

const NeuronParams& Chip::neuron_params(std::uint32_t gid) const {
    if (gid >= static_cast<std::uint32_t>(n_neurons())) {
        throw SimError("network", "neuron " + std::to_string(gid) + " does not exist");
    }
    return params_[gid];
}

int& Chip::match_count(std::uint32_t tag, int core) {
    return match_counts_[static_cast<std::size_t>(tag) * cfg_.n_cores +
                         static_cast<std::size_t>(core)];
}

void Chip::apply_program(int core, int neuron, int word_index, std::uint32_t value) {
    CamArray& arr = cams_[static_cast<std::size_t>(core * cfg_.neurons_per_core + neuron)];
    int& fill = cam_fill_[static_cast<std::size_t>(core * cfg_.neurons_per_core + neuron)];
    if (word_index < fill) {
        // Overwrite: retire the old word from the multicast table.
        const std::uint32_t old_tag = arr.word(word_index) >> 2;
        --match_count(old_tag, core);
    }
    arr.program(word_index, value);
    fill = std::max(fill, word_index + 1);
    ++match_count(value >> 2, core);
}

void Chip::program_cam(int core, int neuron, int word_index, std::uint32_t value) {
    if (core < 0 || core >= cfg_.n_cores) throw SimError("network", "core out of range");
    if (neuron < 0 || neuron >= cfg_.neurons_per_core) {
        throw SimError("network", "neuron index out of range");
    }
    apply_program(core, neuron, word_index, value);
}

void Chip::connect(std::uint32_t src_gid, std::uint32_t dst_gid, SynKernel kernel) {
    if (src_gid >= static_cast<std::uint32_t>(n_neurons()) ||
        dst_gid >= static_cast<std::uint32_t>(n_neurons())) {
        throw SimError("network", "connect endpoints must be existing neurons");
    }
    const int core = core_of(dst_gid);
    const int neuron = local_of(dst_gid);
    const int fill = cam_fill_[dst_gid];
    if (fill >= cfg_.cam_words) {
        throw SimError("network", "tag memory of neuron " + std::to_string(dst_gid) +
                                      " is full (" + std::to_string(cfg_.cam_words) +
                                      " words); cannot add another synapse");
    }
    const std::uint32_t word = (src_gid << 2) | static_cast<std::uint32_t>(kernel);
    program_cam(core, neuron, fill, word);
}

void Chip::queue_aer_program(int core, int neuron, int word_index, std::uint32_t value) {
    if (core < 0 || core >= cfg_.n_cores) throw SimError("network", "core out of range");
    if (neuron < 0 || neuron >= cfg_.neurons_per_core) {
        throw SimError("network", "neuron index out of range");
    }
    TokenMeta meta;
    meta.kind = TokenMeta::Kind::Program;
    meta.dest_core = core;
    meta.prog_core = core;
    meta.prog_neuron = neuron;
    meta.prog_word = word_index;
    meta.prog_value = value;
    queued_programs_.emplace_back(meta, value);
}

const CamArray& Chip::cam(int core, int neuron) const {
    return cams_[static_cast<std::size_t>(core * cfg_.neurons_per_core + neuron)];
}

int Chip::cam_fill(int core, int neuron) const {
    return cam_fill_[static_cast<std::size_t>(core * cfg_.neurons_per_core + neuron)];
}

void Chip::add_stimulus(const StimulusEntry& e) {
    if (e.last_gid < e.first_gid || e.last_gid >= static_cast<std::uint32_t>(n_neurons())) {
        throw SimError("network", "stimulus neuron range is invalid");
    }
    stimuli_.push_back(e);
}

std::vector<int> Chip::tag_matches(int core, int neuron, std::uint32_t tag) const {
    // One associative lookup: the tag field drives the match lines; the two
    // kernel-select bits configure the matched synapse and are not compared.
    // Words beyond the programmed fill are held invalid and cannot match.
    const std::size_t idx = static_cast<std::size_t>(core * cfg_.neurons_per_core + neuron);
    const CamArray& arr = cams_[idx];
    const int fill = cam_fill_[idx];
    std::vector<int> out;
    for (int i = 0; i < fill; ++i) {
        if ((arr.word(i) >> 2) == tag) out.push_back(i);
    }
    return out;
}

void Chip::emit_spike(std::uint32_t gid, TimePs t) {
    RunResult& res = *active_run_;
    res.raster.emplace_back(t, gid);
    ++res.spikes;
    ledger_.charge(EnergyClass::NeuronSpike, cfg_.e_spike_j);

    const std::uint32_t tag = gid;
    const int src_core = core_of(gid);
    bool any = false;
    for (int c = 0; c < cfg_.n_cores; ++c) {
        if (cfg_.multicast_auto &&
            match_counts_[static_cast<std::size_t>(tag) * cfg_.n_cores +
                          static_cast<std::size_t>(c)] == 0) {
            continue;
        }
        Token tok;
        tok.id = fabric_->new_token_id();
        tok.value = (static_cast<std::uint32_t>(c) << cfg_.tag_bits) | tag;
        TokenMeta meta;
        meta.kind = TokenMeta::Kind::Spike;
        meta.src_gid = gid;
        meta.dest_core = c;
        token_meta_.emplace(tok.id, meta);
        injectors_[static_cast<std::size_t>(src_core)]->push(tok);
        ++res.events_emitted;
        any = true;
    }
    if (!any) ++res.dropped_by_filter;
}

void Chip::deliver(int core, const Token& tok, TimePs t) {
    RunResult& res = *active_run_;
    auto it = token_meta_.find(tok.id);
    if (it == token_meta_.end()) {
        throw SimError("network", "delivered token has no metadata (internal error)");
    }
    TokenMeta& meta = it->second;
    if (meta.dest_core != core) {
        throw SimError("network", "token for core " + std::to_string(meta.dest_core) +
                                      " arrived at core " + std::to_string(core) +
                                      " (routing error)");
    }
    meta.delivered = true;
    ++res.events_delivered;

    if (meta.kind == TokenMeta::Kind::Program) {
        apply_program(meta.prog_core, meta.prog_neuron, meta.prog_word, meta.prog_value);
        ++res.program_writes;
        return;
    }

    ++res.cam_deliveries;
    ++res.deliveries_per_core[static_cast<std::size_t>(core)];
    const std::uint32_t tag = tok.value & ((1u << cfg_.tag_bits) - 1);
    const double t_s = time_to_seconds(t);
    for (int n = 0; n < cfg_.neurons_per_core; ++n) {
        const std::vector<int> hits = tag_matches(core, n, tag);
        const std::size_t idx = static_cast<std::size_t>(core * cfg_.neurons_per_core + n);
        ledger_.charge(EnergyClass::CamSearch,
                       cams_[idx].search_energy_j(static_cast<int>(hits.size())));
        for (int w : hits) {
            const SynKernel k = static_cast<SynKernel>(cams_[idx].word(w) & 3u);
            const std::uint32_t dst_gid = static_cast<std::uint32_t>(idx);
            synaptic_input(states_[dst_gid], params_[dst_gid], k, t_s);
            ++res.synaptic_inputs;
            ++res.inputs_by_target[dst_gid][static_cast<std::size_t>(k)];
        }
    }
}

void Chip::tick(TimePs t, TimePs t_end, RunResult& res) {
    const double dt_s = cfg_.dt_s;
    const double t_s = time_to_seconds(t);
    const int n = n_neurons();
    for (int i = 0; i < n; ++i) {
        const auto spike = step(states_[static_cast<std::size_t>(i)],
                                params_[static_cast<std::size_t>(i)], t_s - dt_s, dt_s,
                                i_ext_a_[static_cast<std::size_t>(i)]);
        if (spike) emit_spike(static_cast<std::uint32_t>(i), t);
    }
    const TimePs dt_ps = time_from_seconds(cfg_.dt_s);
    const TimePs next = t + dt_ps;
    if (next <= t_end) {
        engine_.schedule(next, 0, kNeuronTick, [this, next, t_end, &res] { tick(next, t_end, res); });
    }
}

RunResult Chip::run(double t_sim_s) {
    if (ran_) throw SimError("network", "chip instance already ran; build a fresh one");
    ran_ = true;
    if (!(t_sim_s > 0.0)) throw SimError("network", "simulation time must be positive");
    const int n = n_neurons();
    for (int i = 0; i < n; ++i) {
        const double tau_m = params_[static_cast<std::size_t>(i)].tau_m_s();
        if (cfg_.dt_s > tau_m / 10.0 + 1e-18) {
            throw SimError("network", "network dt " + std::to_string(cfg_.dt_s) +
                                          " s violates the stability guard for neuron " +
                                          std::to_string(i) + " (tau_m/10 = " +
                                          std::to_string(tau_m / 10.0) + " s)");
        }
    }

    RunResult res;
    active_run_ = &res;
    res.window_s = t_sim_s;
    res.deliveries_per_core.assign(static_cast<std::size_t>(cfg_.n_cores), 0);
    res.inputs_by_target.assign(static_cast<std::size_t>(n), {});
    const TimePs t_end = time_from_seconds(t_sim_s);

    // Queued configuration writes ride the fabric before time starts moving.
    for (const auto& [meta, value] : queued_programs_) {
        Token tok;
        tok.id = fabric_->new_token_id();
        tok.value = (static_cast<std::uint32_t>(meta.dest_core) << cfg_.tag_bits) |
                    (value & ((1u << cfg_.tag_bits) - 1));
        token_meta_.emplace(tok.id, meta);
        injectors_[0]->push(tok);
        ++res.events_emitted;
    }
    queued_programs_.clear();

    // Expand stimuli into engine events.
    for (const auto& st : stimuli_) {
        switch (st.kind) {
            case StimulusEntry::Kind::Dc:
                for (std::uint32_t g = st.first_gid; g <= st.last_gid; ++g) {
                    i_ext_a_[g] += st.amp_a;
                }
                break;
            case StimulusEntry::Kind::Regular:
            case StimulusEntry::Kind::Poisson: {
                if (st.rate_hz <= 0.0) break;
                const double end = st.end_s < 0.0 ? t_sim_s : std::min(st.end_s, t_sim_s);
                for (std::uint32_t g = st.first_gid; g <= st.last_gid; ++g) {
                    if (st.kind == StimulusEntry::Kind::Regular) {
                        const double period = 1.0 / st.rate_hz;
                        for (double ts = st.start_s; ts <= end; ts += period) {
                            const TimePs tp = time_from_seconds(ts);
                            engine_.schedule(tp, g, kStimulusSpike, [this, g, k = st.kernel, tp] {
                                synaptic_input(states_[g], params_[g], k, time_to_seconds(tp));
                            });
                        }
                    } else {
                        CounterRng rng(st.seed, g, static_cast<std::uint64_t>(st.kernel));
                        double ts = st.start_s;
                        while (true) {
                            ts += -std::log(rng.next_unit_pos()) / st.rate_hz;
                            if (ts > end) break;
                            const TimePs tp = time_from_seconds(ts);
                            engine_.schedule(tp, g, kStimulusSpike, [this, g, k = st.kernel, tp] {
                                synaptic_input(states_[g], params_[g], k, time_to_seconds(tp));
                            });
                        }
                    }
                }
                break;
            }
            case StimulusEntry::Kind::SpikeList:
                for (std::uint32_t g = st.first_gid; g <= st.last_gid; ++g) {
                    for (double ts : st.times_s) {
                        if (ts < 0.0 || ts > t_sim_s) continue;
                        const TimePs tp = time_from_seconds(ts);
                        engine_.schedule(tp, g, kStimulusSpike, [this, g, k = st.kernel, tp] {
                            synaptic_input(states_[g], params_[g], k, time_to_seconds(tp));
                        });
                    }
                }
                break;
        }
    }

    fabric_->start();
    const TimePs dt_ps = time_from_seconds(cfg_.dt_s);
    if (dt_ps <= 0) throw SimError("network", "dt is below 1 ps");
    engine_.schedule(dt_ps, 0, kNeuronTick, [this, dt_ps, t_end, &res] { tick(dt_ps, t_end, res); });

    engine_.run_all();
    active_run_ = nullptr;

    // Conservation audit: every emitted copy must have been delivered.
    std::uint64_t undelivered = 0;
    for (const auto& [id, meta] : token_meta_) {
        if (!meta.delivered) ++undelivered;
    }
    if (undelivered > 0) {
        throw DeadlockError("run ended with " + std::to_string(undelivered) +
                            " address-events stuck in the fabric; " + fabric_->stuck_report());
    }

    res.ledger = ledger_;
    res.route_trace = fabric_->token_trace();
    std::uint64_t h = engine_.trace_hash();
    for (const auto& [t, gid] : res.raster) {
        fnv_mix(h, static_cast<std::uint64_t>(t));
        fnv_mix(h, gid);
    }
    res.trace_hash = h;
    return res;
}

std::string RunResult::raster_csv() const {
    std::string out = "time_s,neuron_id\n";
    char buf[64];
    for (const auto& [t, gid] : raster) {
        std::snprintf(buf, sizeof buf, "%.9f,%u\n", time_to_seconds(t), gid);
        out += buf;
    }
    return out;
}

}  // namespace nmcsim

#include "nmcsim/fabric_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "nmcsim/errors.hpp"

namespace nmcsim {

const char* topology_name(TopologyKind k) {
    switch (k) {
        case TopologyKind::BufferPipeline: return "buffer-pipeline";
        case TopologyKind::SplitTree: return "split-tree";
        case TopologyKind::MergeTree: return "merge-tree";
    }
    return "?";
}

std::optional<TopologyKind> topology_from_name(const std::string& name) {
    if (name == "buffer-pipeline") return TopologyKind::BufferPipeline;
    if (name == "split-tree") return TopologyKind::SplitTree;
    if (name == "merge-tree") return TopologyKind::MergeTree;
    return std::nullopt;
}

ThroughputResult measure_throughput(int n_stages, int width_bits, int n_tokens,
                                    const DelayModel& delays, std::uint64_t seed,
                                    EnergyLedger* ledger, int warmup_tokens) {
    if (n_stages < 1) throw SimError("fabric", "pipeline needs at least one stage");
    if (n_tokens < warmup_tokens + 2) throw SimError("fabric", "too few tokens to measure");

    Engine engine;
    Fabric fab(engine, delays, seed, FabricCosts{}, ledger);
    auto& src = fab.add_source("src");
    Process* prev = &src;
    for (int i = 0; i < n_stages; ++i) {
        auto& buf = fab.add_buffer("b" + std::to_string(i));
        fab.connect(*prev, buf, width_bits);
        prev = &buf;
    }
    auto& snk = fab.add_sink("snk");
    fab.connect(*prev, snk, width_bits);

    std::vector<std::uint32_t> values(static_cast<std::size_t>(n_tokens));
    const std::uint32_t mask = (1u << width_bits) - 1;
    for (int i = 0; i < n_tokens; ++i) values[static_cast<std::size_t>(i)] = i & mask;
    src.set_values(values);

    fab.start();
    engine.run_all();

    const auto& got = snk.received();
    if (static_cast<int>(got.size()) < n_tokens) {
        throw DeadlockError("pipeline stalled after " + std::to_string(got.size()) + "/" +
                            std::to_string(n_tokens) + " tokens; " + fab.stuck_report());
    }

    ThroughputResult res;
    res.tokens = n_tokens - warmup_tokens;
    res.t_first_ps = got[static_cast<std::size_t>(warmup_tokens)].second;
    res.t_last_ps = got.back().second;
    const double span_s = time_to_seconds(res.t_last_ps - res.t_first_ps);
    if (span_s <= 0.0) throw SimError("fabric", "degenerate measurement span");
    res.events_per_s = static_cast<double>(res.tokens - 1) / span_s;
    res.saturated = src.saturated();
    return res;
}

PacedRunResult run_paced_buffer(double rate_ev_s, int width_bits, int n_tokens,
                                const DelayModel& delays, std::uint64_t seed,
                                EnergyLedger* ledger) {
    if (!(rate_ev_s > 0.0)) throw SimError("fabric", "rate must be positive");

    Engine engine;
    Fabric fab(engine, delays, seed, FabricCosts{}, ledger);
    auto& src = fab.add_source("src");
    auto& buf = fab.add_buffer("b0");
    auto& snk = fab.add_sink("snk");
    fab.connect(src, buf, width_bits);
    fab.connect(buf, snk, width_bits);

    std::vector<std::uint32_t> values(static_cast<std::size_t>(n_tokens));
    const std::uint32_t mask = (1u << width_bits) - 1;
    for (int i = 0; i < n_tokens; ++i) values[static_cast<std::size_t>(i)] = i & mask;
    src.set_values(values);
    src.set_period(static_cast<TimePs>(std::llround(kPsPerSecond / rate_ev_s)));

    fab.start();
    engine.run_all();

    if (static_cast<int>(snk.received().size()) < n_tokens) {
        throw DeadlockError("paced buffer stalled; " + fab.stuck_report());
    }

    PacedRunResult res;
    res.tokens = snk.received().size();
    res.saturated = src.saturated();
    res.t_first_inject_ps = src.injections().front().second;
    res.t_last_receive_ps = snk.received().back().second;
    return res;
}

namespace {

struct BuiltTopology {
    SourceProcess* sources[4] = {nullptr, nullptr, nullptr, nullptr};
    SinkProcess* sinks[4] = {nullptr, nullptr, nullptr, nullptr};
    BufferProcess* first_buffer = nullptr;
    int n_sources = 0;
    int n_sinks = 0;
};

BuiltTopology build_topology(Fabric& fab, TopologyKind kind, int width_bits) {
    BuiltTopology t;
    switch (kind) {
        case TopologyKind::BufferPipeline: {
            auto& src = fab.add_source("src");
            auto& b0 = fab.add_buffer("b0");
            auto& b1 = fab.add_buffer("b1");
            auto& b2 = fab.add_buffer("b2");
            auto& snk = fab.add_sink("snk");
            fab.connect(src, b0, width_bits);
            fab.connect(b0, b1, width_bits);
            fab.connect(b1, b2, width_bits);
            fab.connect(b2, snk, width_bits);
            t.sources[0] = &src;
            t.sinks[0] = &snk;
            t.first_buffer = &b0;
            t.n_sources = 1;
            t.n_sinks = 1;
            break;
        }
        case TopologyKind::SplitTree: {
            auto& src = fab.add_source("src");
            auto& b0 = fab.add_buffer("b0");
            auto& s_root = fab.add_split("s_root", width_bits - 1);
            auto& s0 = fab.add_split("s0", width_bits - 2);
            auto& s1 = fab.add_split("s1", width_bits - 2);
            fab.connect(src, b0, width_bits);
            fab.connect(b0, s_root, width_bits);
            fab.connect(s_root, s0, width_bits);
            fab.connect(s_root, s1, width_bits);
            for (int i = 0; i < 4; ++i) {
                auto& snk = fab.add_sink("snk" + std::to_string(i));
                // s_root port = bit (w-1), leaf port = bit (w-2)
                fab.connect(i < 2 ? s0 : s1, snk, width_bits);
                t.sinks[i] = &snk;
            }
            t.sources[0] = &src;
            t.first_buffer = &b0;
            t.n_sources = 1;
            t.n_sinks = 4;
            break;
        }
        case TopologyKind::MergeTree: {
            auto& m01 = fab.add_merge("m01");
            auto& m23 = fab.add_merge("m23");
            auto& m_root = fab.add_merge("m_root");
            auto& b0 = fab.add_buffer("b0");
            auto& snk = fab.add_sink("snk");
            for (int i = 0; i < 4; ++i) {
                auto& src = fab.add_source("src" + std::to_string(i));
                fab.connect(src, i < 2 ? m01 : m23, width_bits);
                t.sources[i] = &src;
            }
            fab.connect(m01, m_root, width_bits);
            fab.connect(m23, m_root, width_bits);
            fab.connect(m_root, b0, width_bits);
            fab.connect(b0, snk, width_bits);
            t.first_buffer = &b0;
            t.sinks[0] = &snk;
            t.n_sources = 4;
            t.n_sinks = 1;
            break;
        }
    }
    return t;
}

// Top two payload bits: the split tree's steering field, and the source
// attribution field in the merge tree.
int top2(std::uint32_t value, int width_bits) {
    return static_cast<int>((value >> (width_bits - 2)) & 3u);
}

std::string check_contract(TopologyKind kind, int width_bits, const BuiltTopology& t,
                           const std::vector<std::vector<std::uint32_t>>& injected) {
    auto sink_values = [&](int i) {
        std::vector<std::uint32_t> v;
        for (const auto& [tok, time] : t.sinks[i]->received()) v.push_back(tok.value);
        return v;
    };

    switch (kind) {
        case TopologyKind::BufferPipeline: {
            if (sink_values(0) != injected[0]) return "output sequence differs from input";
            break;
        }
        case TopologyKind::SplitTree: {
            std::size_t total = 0;
            for (int s = 0; s < 4; ++s) {
                std::vector<std::uint32_t> expect;
                for (std::uint32_t v : injected[0]) {
                    if (top2(v, width_bits) == s) expect.push_back(v);
                }
                if (sink_values(s) != expect) {
                    return "sink " + std::to_string(s) + " sequence differs from steering contract";
                }
                total += expect.size();
            }
            if (total != injected[0].size()) return "split tree lost or duplicated tokens";
            break;
        }
        case TopologyKind::MergeTree: {
            const std::vector<std::uint32_t> out = sink_values(0);
            std::vector<std::uint32_t> all;
            for (int s = 0; s < 4; ++s) {
                // Per-source order must survive as a subsequence (values from
                // source s are marked by their top bits).
                std::vector<std::uint32_t> from_s;
                for (std::uint32_t v : out) {
                    if (top2(v, width_bits) == s) from_s.push_back(v);
                }
                if (from_s != injected[static_cast<std::size_t>(s)]) {
                    return "merge broke per-source FIFO order for source " + std::to_string(s);
                }
                all.insert(all.end(), injected[static_cast<std::size_t>(s)].begin(),
                           injected[static_cast<std::size_t>(s)].end());
            }
            std::vector<std::uint32_t> sorted_out = out;
            std::sort(sorted_out.begin(), sorted_out.end());
            std::sort(all.begin(), all.end());
            if (sorted_out != all) return "merge output multiset differs from inputs";
            break;
        }
    }
    return {};
}

}  // namespace

ConformanceReport qdi_conformance(TopologyKind topology, int n_trials, int tokens_per_trial,
                                  std::uint64_t seed, const DelayModel& base,
                                  bool inject_fault) {
    if (n_trials < 1) throw SimError("fabric", "need at least one trial");
    if (tokens_per_trial < 1) throw SimError("fabric", "need at least one token per trial");

    ConformanceReport rep;
    rep.topology = topology;
    rep.trials = n_trials;
    const int width_bits = 10;
    const std::uint32_t mask = (1u << width_bits) - 1;

    for (int trial = 0; trial < n_trials; ++trial) {
        Engine engine;
        Fabric fab(engine, base, mix_key({seed, static_cast<std::uint64_t>(trial)}));
        ConformanceMonitor monitor;
        fab.attach_monitor(&monitor);

        BuiltTopology t = build_topology(fab, topology, width_bits);
        if (inject_fault && t.first_buffer) {
            t.first_buffer->inject_fault(BufferProcess::Fault::AckBeforeValid);
        }

        CounterRng value_rng(seed, static_cast<std::uint64_t>(trial), 0x7a1);
        std::vector<std::vector<std::uint32_t>> injected(
            static_cast<std::size_t>(t.n_sources));
        for (int s = 0; s < t.n_sources; ++s) {
            const int n = tokens_per_trial / t.n_sources + (s < tokens_per_trial % t.n_sources);
            for (int i = 0; i < n; ++i) {
                std::uint32_t v = static_cast<std::uint32_t>(value_rng.next_u64()) & mask;
                if (topology == TopologyKind::MergeTree) {
                    // Stamp the source id into the top bits for attribution.
                    v = (v & (mask >> 2)) | (static_cast<std::uint32_t>(s) << (width_bits - 2));
                }
                injected[static_cast<std::size_t>(s)].push_back(v);
            }
            t.sources[s]->set_values(injected[static_cast<std::size_t>(s)]);
        }

        std::string failure;
        try {
            fab.start();
            engine.run_all();
            std::size_t received = 0;
            for (int i = 0; i < t.n_sinks; ++i) received += t.sinks[i]->received().size();
            if (received != static_cast<std::size_t>(tokens_per_trial)) {
                failure = "stalled with " + std::to_string(received) + "/" +
                          std::to_string(tokens_per_trial) + " tokens delivered (" +
                          fab.stuck_report() + ")";
            } else {
                failure = check_contract(topology, width_bits, t, injected);
            }
        } catch (const SimError& e) {
            failure = e.what();
        }

        if (failure.empty()) {
            ++rep.passes;
        } else {
            ++rep.failures;
            if (rep.first_failure_trial < 0) {
                rep.first_failure_trial = trial;
                rep.first_failure = failure;
                rep.first_violations = monitor.violations();
            }
        }
    }
    return rep;
}

namespace {

std::string pipe_trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> pipe_split(const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            if (!tok.empty()) out.push_back(tok);
            tok.clear();
        } else {
            tok += c;
        }
    }
    if (!tok.empty()) out.push_back(tok);
    return out;
}

}  // namespace

PipelineDesc PipelineDesc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pipeline file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

PipelineDesc PipelineDesc::parse_text(const std::string& text, const std::string& origin) {
    PipelineDesc d;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = pipe_trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ": bad section", lineno, 1);
            section = pipe_trim(line.substr(1, line.size() - 2));
            if (section != "pipeline") {
                throw ConfigError(origin + ": unknown section '" + section + "'", lineno, 1);
            }
            continue;
        }
        if (section != "pipeline") {
            throw ConfigError(origin + ": keys must live in [pipeline]", lineno, 1);
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value'", lineno, 1);
        }
        const std::string key = pipe_trim(line.substr(0, eq));
        const std::string value = pipe_trim(line.substr(eq + 1));
        if (key == "width") {
            d.width_bits = std::atoi(value.c_str());
            if (d.width_bits < 1 || d.width_bits > 31) {
                throw ConfigError(origin + ": width must be in [1, 31]", lineno, 1);
            }
        } else if (key == "process") {
            const auto f = pipe_split(value);
            if (f.size() < 2) {
                throw ConfigError(origin + ": process needs 'kind name [bit=N]'", lineno, 1);
            }
            PipelineDesc::Proc p;
            p.name = f[1];
            if (f[0] == "source") {
                p.kind = ProcessKind::Source;
            } else if (f[0] == "sink") {
                p.kind = ProcessKind::Sink;
            } else if (f[0] == "buffer") {
                p.kind = ProcessKind::Buffer;
            } else if (f[0] == "merge") {
                p.kind = ProcessKind::Merge;
            } else if (f[0] == "split") {
                p.kind = ProcessKind::Split;
            } else {
                throw ConfigError(origin + ": unknown process kind '" + f[0] + "'", lineno, 1);
            }
            if (f.size() > 2) {
                if (f[2].rfind("bit=", 0) != 0 || p.kind != ProcessKind::Split) {
                    throw ConfigError(origin + ": only splits take a bit= option", lineno, 1);
                }
                p.select_bit = std::atoi(f[2].c_str() + 4);
            }
            d.procs.push_back(std::move(p));
        } else if (key == "connect") {
            const auto arrow = value.find("->");
            if (arrow == std::string::npos) {
                throw ConfigError(origin + ": connect needs 'from -> to'", lineno, 1);
            }
            d.links.emplace_back(pipe_trim(value.substr(0, arrow)),
                                 pipe_trim(value.substr(arrow + 2)));
        } else {
            throw ConfigError(origin + ": unknown key '" + key + "'", lineno, 1);
        }
    }
    if (d.procs.empty()) throw ConfigError(origin + ": pipeline has no processes");
    return d;
}

ConformanceReport qdi_conformance_custom(const PipelineDesc& desc, int n_trials,
                                         int tokens_per_trial, std::uint64_t seed,
                                         const DelayModel& base,
                                         std::string* first_trace_csv) {
    if (n_trials < 1) throw SimError("fabric", "need at least one trial");
    ConformanceReport rep;
    rep.trials = n_trials;
    const std::uint32_t mask = (1u << desc.width_bits) - 1;

    for (int trial = 0; trial < n_trials; ++trial) {
        Engine engine;
        Fabric fab(engine, base, mix_key({seed, static_cast<std::uint64_t>(trial)}));
        ConformanceMonitor monitor;
        fab.attach_monitor(&monitor);
        if (first_trace_csv && trial == 0) fab.enable_token_trace(true);

        std::vector<SourceProcess*> sources;
        std::vector<SinkProcess*> sinks;
        std::map<std::string, Process*> by_name;
        for (const auto& pd : desc.procs) {
            Process* p = nullptr;
            switch (pd.kind) {
                case ProcessKind::Source: {
                    auto& s = fab.add_source(pd.name);
                    sources.push_back(&s);
                    p = &s;
                    break;
                }
                case ProcessKind::Sink: {
                    auto& s = fab.add_sink(pd.name);
                    sinks.push_back(&s);
                    p = &s;
                    break;
                }
                case ProcessKind::Buffer: p = &fab.add_buffer(pd.name); break;
                case ProcessKind::Split: p = &fab.add_split(pd.name, pd.select_bit); break;
                case ProcessKind::Merge: p = &fab.add_merge(pd.name); break;
            }
            if (!by_name.emplace(pd.name, p).second) {
                throw ConfigError("duplicate process name '" + pd.name + "'");
            }
        }
        for (const auto& [from, to] : desc.links) {
            if (!by_name.count(from) || !by_name.count(to)) {
                throw ConfigError("connect references unknown process '" +
                                  (by_name.count(from) ? to : from) + "'");
            }
            fab.connect(*by_name[from], *by_name[to], desc.width_bits);
        }
        if (sources.empty() || sinks.empty()) {
            throw ConfigError("pipeline needs at least one source and one sink");
        }

        CounterRng value_rng(seed, static_cast<std::uint64_t>(trial), 0x7a2);
        std::vector<std::uint64_t> injected_ids;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const int n = tokens_per_trial / static_cast<int>(sources.size()) +
                          (static_cast<int>(s) <
                           tokens_per_trial % static_cast<int>(sources.size()));
            for (int i = 0; i < n; ++i) {
                Token tok;
                tok.id = fab.new_token_id();
                tok.value = static_cast<std::uint32_t>(value_rng.next_u64()) & mask;
                injected_ids.push_back(tok.id);
                sources[s]->push(tok);
            }
        }

        std::string failure;
        try {
            fab.start();
            engine.run_all();
            // Loss/duplication: each injected id arrives exactly once.
            std::vector<std::uint64_t> got;
            for (SinkProcess* snk : sinks) {
                for (const auto& [tok, t] : snk->received()) got.push_back(tok.id);
            }
            std::sort(got.begin(), got.end());
            std::vector<std::uint64_t> expect = injected_ids;
            std::sort(expect.begin(), expect.end());
            if (got != expect) {
                failure = "token ids at the sinks do not match the injected set (" +
                          std::to_string(got.size()) + "/" + std::to_string(expect.size()) +
                          " delivered; " + fab.stuck_report() + ")";
            }
        } catch (const SimError& e) {
            failure = e.what();
        }
        if (first_trace_csv && trial == 0) *first_trace_csv = token_trace_csv(fab.token_trace());

        if (failure.empty()) {
            ++rep.passes;
        } else {
            ++rep.failures;
            if (rep.first_failure_trial < 0) {
                rep.first_failure_trial = trial;
                rep.first_failure = failure;
                rep.first_violations = monitor.violations();
            }
        }
    }
    return rep;
}

std::string token_trace_csv(const std::vector<TokenTraceRow>& rows) {
    std::string out = "time_ps,process_id,process,port,value,token_id\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%u,%s,%d,%u,%llu\n",
                      static_cast<long long>(r.time_ps), r.process_id, r.process_name.c_str(),
                      r.port, r.value, static_cast<unsigned long long>(r.token_id));
        out += buf;
    }
    return out;
}

}  // namespace nmcsim

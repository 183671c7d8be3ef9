#include "nmcsim/netdesc.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nmcsim/errors.hpp"

namespace nmcsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_num(const std::string& v, const std::string& what, std::size_t line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError(what + ": '" + v + "' is not a number", line, 1);
    }
    return x;
}

std::uint32_t parse_u32(const std::string& v, const std::string& what, std::size_t line) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError(what + ": '" + v + "' is not an integer", line, 1);
    }
    return static_cast<std::uint32_t>(x);
}

// "5" or "0..63"
std::pair<std::uint32_t, std::uint32_t> parse_range(const std::string& v, std::size_t line) {
    const auto dots = v.find("..");
    if (dots == std::string::npos) {
        const std::uint32_t g = parse_u32(v, "neuron id", line);
        return {g, g};
    }
    return {parse_u32(v.substr(0, dots), "range start", line),
            parse_u32(v.substr(dots + 2), "range end", line)};
}

SynKernel parse_kernel(const std::string& v, std::size_t line) {
    const auto k = kernel_from_name(v);
    if (!k) throw ConfigError("unknown synapse kernel '" + v + "'", line, 1);
    return *k;
}

}  // namespace

NetworkDescription NetworkDescription::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open network file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

NetworkDescription NetworkDescription::parse_text(const std::string& text,
                                                  const std::string& origin) {
    NetworkDescription d;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t lineno = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ": unterminated section header", lineno, 1);
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value'", lineno, 1);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(origin + ": empty key or value", lineno, 1);
        }

        if (section == "chip") {
            const std::string full = key.find('.') != std::string::npos ? key : "network." + key;
            d.chip_overrides.emplace_back(full, value);
        } else if (section == "neuron.defaults") {
            const std::string full = key.find('.') != std::string::npos ? key : "neuron." + key;
            d.neuron_defaults.emplace_back(full, value);
        } else if (section.rfind("neuron.", 0) == 0) {
            const std::uint32_t gid = parse_u32(section.substr(7), "neuron id", lineno);
            const std::string full = key.find('.') != std::string::npos ? key : "neuron." + key;
            d.neuron_overrides[gid].emplace_back(full, value);
        } else if (section == "connect") {
            if (key != "edge") {
                throw ConfigError(origin + ": [connect] only takes 'edge' lines", lineno, 1);
            }
            // SRC -> DST KERNEL
            const auto arrow = value.find("->");
            if (arrow == std::string::npos) {
                throw ConfigError(origin + ": edge needs 'src -> dst kernel'", lineno, 1);
            }
            const auto rest = split_ws(trim(value.substr(arrow + 2)));
            if (rest.size() != 2) {
                throw ConfigError(origin + ": edge needs 'src -> dst kernel'", lineno, 1);
            }
            ConnectEntry e;
            e.src_gid = parse_u32(trim(value.substr(0, arrow)), "edge source", lineno);
            e.dst_gid = parse_u32(rest[0], "edge destination", lineno);
            e.kernel = parse_kernel(rest[1], lineno);
            d.connects.push_back(e);
        } else if (section == "cam") {
            if (key != "word") {
                throw ConfigError(origin + ": [cam] only takes 'word' lines", lineno, 1);
            }
            const auto f = split_ws(value);
            if (f.size() != 4) {
                throw ConfigError(origin + ": word needs 'core neuron index value'", lineno, 1);
            }
            CamWordEntry w;
            w.core = static_cast<int>(parse_u32(f[0], "core", lineno));
            w.neuron = static_cast<int>(parse_u32(f[1], "neuron", lineno));
            w.word_index = static_cast<int>(parse_u32(f[2], "word index", lineno));
            w.value = parse_u32(f[3], "word value", lineno);
            d.words.push_back(w);
        } else if (section == "stimulus") {
            StimulusEntry e;
            const auto f = split_ws(value);
            if (key == "dc") {
                if (f.size() != 2) throw ConfigError(origin + ": dc needs 'range amps'", lineno, 1);
                e.kind = StimulusEntry::Kind::Dc;
                std::tie(e.first_gid, e.last_gid) = parse_range(f[0], lineno);
                e.amp_a = parse_num(f[1], "dc amplitude", lineno);
            } else if (key == "poisson" || key == "regular") {
                if (f.size() < 3) {
                    throw ConfigError(origin + ": " + key +
                                          " needs 'range kernel rate [start end] [seed=N]'",
                                      lineno, 1);
                }
                e.kind = key == "poisson" ? StimulusEntry::Kind::Poisson
                                          : StimulusEntry::Kind::Regular;
                std::tie(e.first_gid, e.last_gid) = parse_range(f[0], lineno);
                e.kernel = parse_kernel(f[1], lineno);
                e.rate_hz = parse_num(f[2], "rate", lineno);
                std::size_t i = 3;
                if (f.size() > i && f[i].rfind("seed=", 0) != 0) {
                    e.start_s = parse_num(f[i++], "start", lineno);
                }
                if (f.size() > i && f[i].rfind("seed=", 0) != 0) {
                    e.end_s = parse_num(f[i++], "end", lineno);
                }
                if (f.size() > i && f[i].rfind("seed=", 0) == 0) {
                    e.seed = parse_u32(f[i++].substr(5), "seed", lineno);
                }
                if (f.size() > i) {
                    throw ConfigError(origin + ": trailing tokens after " + key, lineno, 1);
                }
            } else if (key == "spikes") {
                if (f.size() != 3) {
                    throw ConfigError(origin + ": spikes needs 'range kernel t1,t2,...'", lineno, 1);
                }
                e.kind = StimulusEntry::Kind::SpikeList;
                std::tie(e.first_gid, e.last_gid) = parse_range(f[0], lineno);
                e.kernel = parse_kernel(f[1], lineno);
                std::istringstream ts(f[2]);
                std::string t;
                while (std::getline(ts, t, ',')) {
                    e.times_s.push_back(parse_num(t, "spike time", lineno));
                }
            } else {
                throw ConfigError(origin + ": unknown stimulus kind '" + key + "'", lineno, 1);
            }
            d.stimuli.push_back(e);
        } else if (section.empty()) {
            throw ConfigError(origin + ": keys must live inside a section", lineno, 1);
        } else {
            throw ConfigError(origin + ": unknown section '" + section + "'", lineno, 1);
        }
    }
    return d;
}

ChipConfig chip_config_from_config(const AppConfig& c) {
    ChipConfig cfg;
    cfg.n_cores = static_cast<int>(c.integer("network.n_cores"));
    cfg.neurons_per_core = static_cast<int>(c.integer("network.neurons_per_core"));
    cfg.tag_bits = static_cast<int>(c.integer("network.tag_bits"));
    cfg.cam_words = static_cast<int>(c.integer("cam.n_words"));
    cfg.cam_word_bits = static_cast<int>(c.integer("cam.word_bits"));
    cfg.buffer_stages = static_cast<int>(c.integer("network.buffer_stages"));
    cfg.multicast_auto = c.str("network.multicast") == "auto";
    cfg.dt_s = c.num("network.dt_s");
    cfg.record_traces = c.flag("network.record_traces");
    cfg.delays = delay_model_from_config(c);
    cfg.costs = fabric_costs_from_config(c);
    cfg.cam_costs = cam_costs_from_config(c);
    cfg.neuron = neuron_from_config(c);
    cfg.e_spike_j = c.num("power.neuron_e_spike_j");
    return cfg;
}

BuiltChip build_chip(const AppConfig& base, const NetworkDescription& desc) {
    BuiltChip out{nullptr, base};
    for (const auto& [k, v] : desc.chip_overrides) out.effective.set(k, v);
    for (const auto& [k, v] : desc.neuron_defaults) out.effective.set(k, v);

    out.chip = std::make_unique<Chip>(chip_config_from_config(out.effective));

    for (const auto& [gid, kvs] : desc.neuron_overrides) {
        AppConfig per = out.effective;
        for (const auto& [k, v] : kvs) per.set(k, v);
        out.chip->set_neuron_params(gid, neuron_from_config(per));
    }
    for (const auto& w : desc.words) {
        out.chip->program_cam(w.core, w.neuron, w.word_index, w.value);
    }
    for (const auto& e : desc.connects) {
        out.chip->connect(e.src_gid, e.dst_gid, e.kernel);
    }
    for (const auto& s : desc.stimuli) out.chip->add_stimulus(s);
    return out;
}

std::string cam_dump_csv(const Chip& chip) {
    std::string out = "core,neuron,word_index,tag_hex\n";
    char buf[80];
    const ChipConfig& cfg = chip.config();
    for (int c = 0; c < cfg.n_cores; ++c) {
        for (int n = 0; n < cfg.neurons_per_core; ++n) {
            const int fill = chip.cam_fill(c, n);
            for (int w = 0; w < fill; ++w) {
                std::snprintf(buf, sizeof buf, "%d,%d,%d,0x%03x\n", c, n, w,
                              chip.cam(c, n).word(w));
                out += buf;
            }
        }
    }
    return out;
}

}  // namespace nmcsim

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "nmcsim/errors.hpp"
#include "nmcsim/fabric.hpp"
#include "nmcsim/fabric_ops.hpp"
#include "nmcsim/rng.hpp"

using namespace nmcsim;

namespace {

DelayModel calibrated() { return DelayModel{}; }  // 92.593 ps, nominal

DelayModel randomized(double jitter = 0.5) {
    DelayModel d;
    d.mode = DelayMode::Randomized;
    d.jitter_frac = jitter;
    return d;
}

}  // namespace

TEST_CASE("dual-rail encode/decode round-trips every 10-bit value") {
    for (std::uint32_t v = 0; v < 1024; ++v) {
        const auto rails = encode_dual_rail(v, 10);
        const auto back = decode_dual_rail(rails);
        REQUIRE(back.has_value());
        CHECK(*back == v);
    }
    auto rails = encode_dual_rail(0x155, 10);
    rails[3] = Rail::Neutral;
    CHECK_FALSE(decode_dual_rail(rails).has_value());
}

TEST_CASE("a single token passes through one buffer unchanged") {
    Engine eng;
    Fabric fab(eng, calibrated(), 1);
    auto& src = fab.add_source("src");
    auto& buf = fab.add_buffer("b0");
    auto& snk = fab.add_sink("snk");
    auto& ch_in = fab.connect(src, buf, 10);
    auto& ch_out = fab.connect(buf, snk, 10);
    src.set_values({0x31a});  // 0b1100011010
    fab.start();
    eng.run_all();

    REQUIRE(snk.received().size() == 1);
    CHECK(snk.received()[0].first.value == 0x31a);
    // Exactly one full 4-phase cycle on each side, both channels back at idle.
    CHECK(ch_in.tokens_carried == 1);
    CHECK(ch_out.tokens_carried == 1);
    CHECK(ch_in.phase == ChannelPhase::Idle);
    CHECK(ch_out.phase == ChannelPhase::Idle);
    CHECK(ch_in.bits_valid == 0);
    CHECK_FALSE(ch_in.ack);
}

TEST_CASE("back-to-back tokens keep their order through a 3-stage pipeline") {
    Engine eng;
    Fabric fab(eng, randomized(), 99);
    auto& src = fab.add_source("src");
    auto& b0 = fab.add_buffer("b0");
    auto& b1 = fab.add_buffer("b1");
    auto& b2 = fab.add_buffer("b2");
    auto& snk = fab.add_sink("snk");
    fab.connect(src, b0, 10);
    fab.connect(b0, b1, 10);
    fab.connect(b1, b2, 10);
    fab.connect(b2, snk, 10);

    CounterRng rng(5);
    std::vector<std::uint32_t> values;
    for (int i = 0; i < 10000; ++i) values.push_back(static_cast<std::uint32_t>(rng.next_below(1024)));
    src.set_values(values);
    fab.start();
    eng.run_all();

    REQUIRE(snk.received().size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(snk.received()[i].first.value == values[i]);
    }
}

TEST_CASE("calibrated single buffer sustains 1.8 G events/s within 2%") {
    const auto r = measure_throughput(1, 10, 2000, calibrated(), 1);
    CHECK(r.events_per_s == doctest::Approx(1.8e9).epsilon(0.02));
}

TEST_CASE("doubling every transition delay halves throughput within 1%") {
    DelayModel d = calibrated();
    const auto r1 = measure_throughput(1, 10, 2000, d, 1);
    d.nominal_ps *= 2.0;
    const auto r2 = measure_throughput(1, 10, 2000, d, 1);
    CHECK(r2.events_per_s / r1.events_per_s == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pipeline depth does not change steady-state throughput (within 5%)") {
    const auto r1 = measure_throughput(1, 10, 2000, calibrated(), 1);
    const auto r8 = measure_throughput(8, 10, 2000, calibrated(), 1);
    CHECK(r8.events_per_s == doctest::Approx(r1.events_per_s).epsilon(0.05));
}

TEST_CASE("split steers by the selected payload bit") {
    Engine eng;
    Fabric fab(eng, calibrated(), 3);
    auto& src = fab.add_source("src");
    auto& sp = fab.add_split("s", 9);
    auto& snk0 = fab.add_sink("snk0");
    auto& snk1 = fab.add_sink("snk1");
    fab.connect(src, sp, 10);
    fab.connect(sp, snk0, 10);
    fab.connect(sp, snk1, 10);

    // Control bit 0 on every token: all exit port 0, port 1 stays silent.
    src.set_values({1, 2, 3, 4, 5});
    fab.start();
    eng.run_all();
    CHECK(snk0.received().size() == 5);
    CHECK(snk1.received().empty());
}

TEST_CASE("merge with a single active input forwards in order") {
    Engine eng;
    Fabric fab(eng, calibrated(), 4);
    auto& a = fab.add_source("a");
    auto& b = fab.add_source("b");
    auto& m = fab.add_merge("m");
    auto& snk = fab.add_sink("snk");
    fab.connect(a, m, 10);
    fab.connect(b, m, 10);
    fab.connect(m, snk, 10);
    a.set_values({1, 2, 3});
    fab.start();
    eng.run_all();
    REQUIRE(snk.received().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(snk.received()[i].first.value == i + 1);
}

TEST_CASE("merge preserves the multiset and per-source order under random delays") {
    Engine eng;
    Fabric fab(eng, randomized(), 77);
    auto& a = fab.add_source("a");
    auto& b = fab.add_source("b");
    auto& m = fab.add_merge("m");
    auto& snk = fab.add_sink("snk");
    fab.connect(a, m, 10);
    fab.connect(b, m, 10);
    fab.connect(m, snk, 10);

    // Source a feeds values with bit9 = 0, source b with bit9 = 1.
    CounterRng rng(123);
    std::vector<std::uint32_t> va, vb;
    for (int i = 0; i < 5000; ++i) {
        va.push_back(static_cast<std::uint32_t>(rng.next_below(512)));
        vb.push_back(static_cast<std::uint32_t>(rng.next_below(512)) | 0x200u);
    }
    a.set_values(va);
    b.set_values(vb);
    fab.start();
    eng.run_all();

    std::vector<std::uint32_t> out, from_a, from_b;
    for (const auto& [tok, t] : snk.received()) {
        out.push_back(tok.value);
        ((tok.value & 0x200u) ? from_b : from_a).push_back(tok.value);
    }
    CHECK(from_a == va);
    CHECK(from_b == vb);
    std::vector<std::uint32_t> expect = va;
    expect.insert(expect.end(), vb.begin(), vb.end());
    std::sort(expect.begin(), expect.end());
    std::sort(out.begin(), out.end());
    CHECK(out == expect);
}

TEST_CASE("merge arbitration: priority under nominal, arrival order under randomized") {
    auto run = [](DelayModel d, TimePs a_start, TimePs b_start) {
        Engine eng;
        Fabric fab(eng, d, 9);
        auto& a = fab.add_source("a");
        auto& b = fab.add_source("b");
        auto& m = fab.add_merge("m");
        auto& snk = fab.add_sink("snk");
        fab.connect(a, m, 10);
        fab.connect(b, m, 10);
        fab.connect(m, snk, 10);
        a.set_values({1});
        b.set_values({2});
        a.set_start(a_start);
        b.set_start(b_start);
        fab.start();
        eng.run_all();
        return snk.received().front().first.value;
    };
    // Simultaneous contention resolves to input 0 under nominal delays.
    CHECK(run(calibrated(), 0, 0) == 1);
    // With zero jitter the randomized adversary sees input 1 arrive first.
    CHECK(run(randomized(0.0), 5000, 0) == 2);
}

TEST_CASE("zero-jitter randomized adversary behaves like the nominal run") {
    DelayModel d0 = randomized(0.0);
    const auto r_rand = measure_throughput(3, 10, 500, d0, 11);
    const auto r_nom = measure_throughput(3, 10, 500, calibrated(), 11);
    CHECK(r_rand.events_per_s == doctest::Approx(r_nom.events_per_s).epsilon(1e-12));
}

TEST_CASE("qdi conformance holds over randomized-delay trials") {
    for (TopologyKind k :
         {TopologyKind::BufferPipeline, TopologyKind::SplitTree, TopologyKind::MergeTree}) {
        const auto rep = qdi_conformance(k, 100, 32, 2024, randomized());
        INFO(topology_name(k), ": ", rep.first_failure);
        CHECK(rep.failures == 0);
        CHECK(rep.passes == 100);
    }
}

TEST_CASE("worst-case-sampled delays also preserve the contract") {
    DelayModel d;
    d.mode = DelayMode::WorstCaseSampled;
    d.jitter_frac = 0.9;
    const auto rep = qdi_conformance(TopologyKind::BufferPipeline, 50, 32, 7, d);
    CHECK(rep.failures == 0);
}

TEST_CASE("a buffer that acknowledges before validity is caught with a trace") {
    // The fault is timing-dependent: a lucky delay assignment can mask it in a
    // given trial, which is exactly why conformance sweeps many assignments.
    const auto rep =
        qdi_conformance(TopologyKind::BufferPipeline, 20, 8, 3, randomized(), true);
    CHECK(rep.failures >= 1);
    REQUIRE(rep.first_failure_trial >= 0);
    CHECK(rep.first_failure.find("acknowledge before data validity") != std::string::npos);
    REQUIRE_FALSE(rep.first_violations.empty());
    CHECK_FALSE(rep.first_violations.front().history.empty());
}

TEST_CASE("a stuck stage is reported with the blocked process set") {
    Engine eng;
    Fabric fab(eng, calibrated(), 6);
    auto& src = fab.add_source("src");
    auto& buf = fab.add_buffer("b0");
    auto& snk = fab.add_sink("snk");
    fab.connect(src, buf, 10);
    fab.connect(buf, snk, 10);
    snk.set_stuck(true);
    src.set_values({1, 2, 3});
    fab.start();
    eng.run_all();

    CHECK(snk.received().size() == 1);  // delivered but never acknowledged
    CHECK_FALSE(fab.busy_processes().empty());
    CHECK(fab.stuck_report().find("b0") != std::string::npos);
}

TEST_CASE("every token charges E_dyn once per traversed process") {
    EnergyLedger led;
    const int n = 500;
    measure_throughput(3, 10, n, calibrated(), 1, &led);
    const FabricCosts costs;
    CHECK(led.events(EnergyClass::PchbBuffer) == static_cast<std::uint64_t>(3 * n));
    CHECK(led.dynamic_joules(EnergyClass::PchbBuffer) ==
          doctest::Approx(3.0 * n * costs.e_dyn_j).epsilon(1e-12));
    CHECK(led.static_watts() == doctest::Approx(3 * costs.p_static_w));
}

TEST_CASE("token values wider than the channel are rejected") {
    Engine eng;
    Fabric fab(eng, calibrated(), 1);
    auto& src = fab.add_source("src");
    auto& snk = fab.add_sink("snk");
    fab.connect(src, snk, 4);
    src.set_values({16});
    CHECK_THROWS_AS((fab.start(), eng.run_all()), SimError);
}

TEST_CASE("mis-wired fabrics are rejected at start") {
    Engine eng;
    Fabric fab(eng, calibrated(), 1);
    fab.add_source("src");  // no output connected
    CHECK_THROWS_WITH_AS(fab.start(), doctest::Contains("src"), SimError);
}

TEST_CASE("pipeline files build and pass generic conformance") {
    const char* text =
        "[pipeline]\n"
        "width = 10\n"
        "process = source a\n"
        "process = source b\n"
        "process = merge m0\n"
        "process = buffer b0\n"
        "process = split s0 bit=9\n"
        "process = sink lo\n"
        "process = sink hi\n"
        "connect = a -> m0\n"
        "connect = b -> m0\n"
        "connect = m0 -> b0\n"
        "connect = b0 -> s0\n"
        "connect = s0 -> lo\n"
        "connect = s0 -> hi\n";
    const PipelineDesc desc = PipelineDesc::parse_text(text);
    CHECK(desc.procs.size() == 7);
    CHECK(desc.links.size() == 6);
    std::string trace;
    const auto rep = qdi_conformance_custom(desc, 20, 24, 5, randomized(), &trace);
    CHECK(rep.failures == 0);
    CHECK(trace.find("token_id") != std::string::npos);
}

TEST_CASE("pipeline parse errors are located") {
    CHECK_THROWS_AS(PipelineDesc::parse_text("[pipeline]\nprocess = gizmo g\n"), ConfigError);
    CHECK_THROWS_AS(PipelineDesc::parse_text("[pipeline]\nconnect = a b\n"), ConfigError);
    CHECK_THROWS_AS(PipelineDesc::parse_text("[wrong]\n"), ConfigError);
    CHECK_THROWS_AS(PipelineDesc::parse_text("[pipeline]\nwidth = 40\n"), ConfigError);
}

TEST_CASE("sampled delays are always strictly positive") {
    DelayModel d;
    d.nominal_ps = 0.3;  // rounds to zero without the clamp
    d.jitter_frac = 1.0;
    CounterRng rng(8);
    for (DelayMode mode :
         {DelayMode::Nominal, DelayMode::Randomized, DelayMode::WorstCaseSampled}) {
        d.mode = mode;
        for (int i = 0; i < 2000; ++i) CHECK(d.sample(rng) >= 1);
    }
}

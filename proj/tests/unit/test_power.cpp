#include <doctest.h>

#include <cmath>

#include "nmcsim/errors.hpp"
#include "nmcsim/power.hpp"

using namespace nmcsim;

namespace {

const FabricCosts kCosts;   // 138.883 fJ/event, 9.84 nW
const DelayModel kDelays;   // calibrated nominal

}  // namespace

TEST_CASE("power at full bandwidth and in the static-dominated floor") {
    const auto pts = buffer_power_curve({1.8e9, 100.0}, 10, kCosts, kDelays, 2000, 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].power_w == doctest::Approx(250e-6).epsilon(0.02));
    CHECK(pts[0].saturated);
    CHECK(pts[1].power_w == doctest::Approx(9.84e-9).epsilon(0.05));
    CHECK_FALSE(pts[1].saturated);
}

TEST_CASE("dynamic power is linear: doubling the rate doubles P - P_static") {
    const auto pts = buffer_power_curve({1e6, 2e6}, 10, kCosts, kDelays, 1000, 1);
    const double d1 = pts[0].power_w - kCosts.p_static_w;
    const double d2 = pts[1].power_w - kCosts.p_static_w;
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("measured curve tracks P_static + E_dyn * r within 3% over six decades") {
    std::vector<double> rates;
    for (int d = 3; d <= 9; ++d) rates.push_back(std::pow(10.0, d));
    const auto pts = buffer_power_curve(rates, 10, kCosts, kDelays, 1000, 1);
    for (const auto& p : pts) {
        const double closed_form = kCosts.p_static_w + kCosts.e_dyn_j * p.measured_rate_ev_s;
        CHECK(std::fabs(p.power_w - closed_form) / closed_form < 0.03);
    }
}

TEST_CASE("600 buffer-equivalents at 100k events/s") {
    const auto est = system_routing_estimate(600, 1e5, 10, kCosts, kDelays, 500, 1);
    CHECK(est.power_w == doctest::Approx(14.7e-6).epsilon(0.10));
    CHECK(est.energy_per_event_j == doctest::Approx(147e-12).epsilon(0.10));
    // Static floor is exactly 600 copies of the per-buffer static power.
    CHECK(est.static_floor_w == doctest::Approx(600 * 9.84e-9).epsilon(1e-9));
}

TEST_CASE("one buffer at 100k events/s costs about 23.7 nW") {
    const auto est = system_routing_estimate(1, 1e5, 10, kCosts, kDelays, 500, 1);
    CHECK(est.power_w == doctest::Approx(23.7e-9).epsilon(0.02));
}

TEST_CASE("ledger audit: dynamic joules equal events times the per-event energy") {
    EnergyLedger led;
    run_paced_buffer(1e6, 10, 750, kDelays, 3, &led);
    CHECK(led.events(EnergyClass::PchbBuffer) == 750);
    CHECK(led.dynamic_joules(EnergyClass::PchbBuffer) ==
          doctest::Approx(750 * kCosts.e_dyn_j).epsilon(1e-12));
    CHECK(led.dynamic_joules() == led.dynamic_joules(EnergyClass::PchbBuffer));
}

TEST_CASE("ledger CSV round-trips") {
    EnergyLedger led;
    led.add_static("b0", 9.84e-9);
    led.charge(EnergyClass::PchbBuffer, 1e-13);
    led.charge(EnergyClass::CamSearch, 2e-14);
    const EnergyLedger back = EnergyLedger::from_csv(led.to_csv());
    CHECK(back.static_watts() == led.static_watts());
    CHECK(back.dynamic_joules() == led.dynamic_joules());
    CHECK(back.events(EnergyClass::PchbBuffer) == 1);
    CHECK(back.to_csv() == led.to_csv());
}

TEST_CASE("area roll-up hits the headline figures exactly") {
    const AreaParams ap;
    const NeuronParams np;  // 0.5 + 0.2 + 0.2 pF
    const AreaReport r = compute_area(ap, np, 64, 12, 4, 256);
    CHECK(r.cam_per_neuron_um2 == doctest::Approx(192.0).epsilon(1e-12));
    CHECK(r.synapse_um2 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.capacitor_um2 == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(r.neuron_logic_um2 == doctest::Approx(20.0));
    CHECK(r.per_neuron_um2 == doctest::Approx(262.0).epsilon(1e-12));
    CHECK(r.per_core_um2 == doctest::Approx(262.0 * 256).epsilon(1e-12));
    CHECK(r.chip_um2 == doctest::Approx(262.0 * 1024).epsilon(1e-12));
}

TEST_CASE("report rendering is a pure function of config and ledger") {
    ReportInputs in;
    in.curve_tokens = 500;
    EnergyLedger led;
    led.add_static("fabric", 1e-7);
    led.charge(EnergyClass::NeuronSpike, 50e-12);
    const ChipReport r1 = make_chip_report(in, &led, 1.0, 1);
    const ChipReport r2 = make_chip_report(in, &led, 1.0, 1);
    CHECK(render_report_text(r1) == render_report_text(r2));
    CHECK(render_report_csv(r1) == render_report_csv(r2));
    CHECK(render_report_text(r1, true) == render_report_text(r2, true));
}

TEST_CASE("zero-activity run reports energy per spike as n/a") {
    ReportInputs in;
    in.curve_tokens = 500;
    EnergyLedger led;
    const ChipReport r = make_chip_report(in, &led, 1.0, 0);
    CHECK(render_report_text(r).find("n/a (zero spikes)") != std::string::npos);
    CHECK(render_report_csv(r).find("run_energy_per_spike,n/a") != std::string::npos);
}

TEST_CASE("report carries the feature-table values") {
    ReportInputs in;
    in.curve_tokens = 1000;
    const ChipReport r = make_chip_report(in);
    CHECK(r.supply_v == 1.0);
    CHECK(r.energy_per_spike_j == doctest::Approx(50e-12));
    CHECK(r.e_spike_ref_rate_hz == doctest::Approx(30.0));
    CHECK(r.router_bandwidth_ev_s == doctest::Approx(1.8e9).epsilon(0.02));
    CHECK(r.energy_per_routing_j == doctest::Approx(147e-12).epsilon(0.10));
    CHECK(r.area.neuron_logic_um2 == doctest::Approx(20.0));
    CHECK(r.area.synapse_um2 == doctest::Approx(3.0));
    const std::string text = render_report_text(r);
    CHECK(text.find("fabric area") != std::string::npos);
    CHECK(text.find("not specified") != std::string::npos);
}

TEST_CASE("engineering formatting picks sensible prefixes") {
    CHECK(format_quantity(250e-6, "W", false) == "250 uW");
    CHECK(format_quantity(9.84e-9, "W", false) == "9.84 nW");
    CHECK(format_quantity(1.8e9, "Events/s", false) == "1.8 GEvents/s");
    CHECK(format_quantity(147e-12, "J", false) == "147 pJ");
    CHECK(format_quantity(0.0, "W", false) == "0 W");
    CHECK(format_quantity(1.0, "V", false) == "1 V");
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(buffer_power_curve({-1.0}, 10, kCosts, kDelays, 100, 1), SimError);
    CHECK_THROWS_AS(system_routing_estimate(0, 1e5, 10, kCosts, kDelays, 100, 1), SimError);
    EnergyLedger led;
    CHECK_THROWS_AS(led.mean_power_w(0.0), SimError);
    CHECK_THROWS_AS(led.charge(EnergyClass::CamSearch, -1.0), SimError);
}

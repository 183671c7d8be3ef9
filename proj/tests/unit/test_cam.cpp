#include <doctest.h>

#include <vector>

#include "nmcsim/cam.hpp"
#include "nmcsim/errors.hpp"
#include "nmcsim/rng.hpp"

using namespace nmcsim;

TEST_CASE("universal match costs only the precharge") {
    CamArray cam(64, 12);
    for (int i = 0; i < 64; ++i) cam.program(i, 0x2a5);
    EnergyLedger led;
    const auto hits = cam.search(0x2a5, &led);
    CHECK(hits.size() == 64);
    CHECK(led.dynamic_joules(EnergyClass::CamSearch) ==
          doctest::Approx(64 * CamCosts{}.e_precharge_j));
    CHECK(led.events(EnergyClass::CamSearch) == 1);
}

TEST_CASE("universal mismatch discharges every word") {
    CamArray cam(64, 12);
    for (int i = 0; i < 64; ++i) cam.program(i, 0x111);
    EnergyLedger led;
    const auto hits = cam.search(0x222, &led);
    CHECK(hits.empty());
    CHECK(led.dynamic_joules(EnergyClass::CamSearch) ==
          doctest::Approx(64 * (CamCosts{}.e_precharge_j + CamCosts{}.e_discharge_j)));
}

TEST_CASE("search equals a brute-force linear scan") {
    CounterRng rng(13);
    CamArray cam(64, 12);
    std::vector<std::uint32_t> shadow(64);
    for (int i = 0; i < 64; ++i) {
        shadow[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(rng.next_below(4096));
        cam.program(i, shadow[static_cast<std::size_t>(i)]);
    }
    for (int q = 0; q < 10000; ++q) {
        const std::uint32_t tag = static_cast<std::uint32_t>(rng.next_below(4096));
        std::vector<int> expect;
        for (int i = 0; i < 64; ++i) {
            if (shadow[static_cast<std::size_t>(i)] == tag) expect.push_back(i);
        }
        CHECK(cam.search(tag) == expect);
    }
}

TEST_CASE("search is idempotent and charges once per call") {
    CamArray cam(8, 12);
    cam.program(3, 0x123);
    EnergyLedger led;
    const auto a = cam.search(0x123, &led);
    const auto b = cam.search(0x123, &led);
    CHECK(a == b);
    CHECK(led.events(EnergyClass::CamSearch) == 2);
}

TEST_CASE("search energy is nonincreasing in the number of matches") {
    CamArray cam(64, 12);
    double prev = 1.0;
    for (int matches = 0; matches <= 64; ++matches) {
        const double e = cam.search_energy_j(matches);
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("program then search includes the index; overwrite excludes it") {
    CamArray cam(64, 12);
    cam.program(5, 0xabc);
    auto hits = cam.search(0xabc);
    CHECK(std::find(hits.begin(), hits.end(), 5) != hits.end());
    cam.program(5, 0xdef);
    hits = cam.search(0xabc);
    CHECK(std::find(hits.begin(), hits.end(), 5) == hits.end());
    hits = cam.search(0xdef);
    CHECK(std::find(hits.begin(), hits.end(), 5) != hits.end());
}

TEST_CASE("bounds are enforced") {
    CamArray cam(64, 12);
    CHECK_THROWS_AS(cam.program(64, 0), SimError);
    CHECK_THROWS_AS(cam.program(-1, 0), SimError);
    CHECK_THROWS_AS(cam.program(0, 1u << 12), SimError);
    CHECK_THROWS_AS(cam.search(1u << 12), SimError);
    CHECK_THROWS_AS(cam.word(64), SimError);
}

TEST_CASE("area model") {
    // 64 words x 12 bits x 0.25 um^2 = 192 um^2.
    CHECK(cam_area_um2(64, 12, 0.25) == doctest::Approx(192.0));
    CHECK(cam_area_um2(1, 1, 3.5) == doctest::Approx(3.5));
    // A 330 F^2 cell at F = 0.18 um is 10.69 um^2.
    const double cell_180nm = 330.0 * 0.18 * 0.18;
    CHECK(cell_180nm == doctest::Approx(10.692));
    CHECK(cam_area_um2(1, 1, cell_180nm) == doctest::Approx(10.692));
    CHECK_THROWS_AS(cam_area_um2(0, 12, 0.25), SimError);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nmcsim/errors.hpp"
#include "nmcsim/mismatch.hpp"

using namespace nmcsim;

namespace {

NeuronParams nominal() {
    NeuronParams p;
    p.g_l_s = 5.01e-11;
    p.i_dc_a = 30.2974e-12;
    return p;
}

MismatchSpec small_spec(int runs = 200) {
    MismatchSpec s = MismatchSpec::defaults();
    s.multiplier = 0.958876;
    s.n_runs = runs;
    s.seed = 1;
    return s;
}

const RateOptions kOpt{1e-5, 0.3};
constexpr double kT = 1.3;

}  // namespace

TEST_CASE("zero sigma reproduces the nominal parameters exactly") {
    MismatchSpec s = small_spec();
    for (auto& [p, sigma] : s.sigma_map) sigma = 0.0;
    const NeuronParams out = sample_params(nominal(), s, 17);
    CHECK(out.g_l_s == nominal().g_l_s);
    CHECK(out.i_dc_a == nominal().i_dc_a);
    CHECK(out.v_t_v == nominal().v_t_v);
    CHECK(out.t_rfr_s == nominal().t_rfr_s);
}

TEST_CASE("the same (seed, run) always yields the same parameters") {
    const MismatchSpec s = small_spec();
    const NeuronParams a = sample_params(nominal(), s, 123);
    const NeuronParams b = sample_params(nominal(), s, 123);
    CHECK(a.g_l_s == b.g_l_s);
    CHECK(a.i_dc_a == b.i_dc_a);
    CHECK(a.v_t_v == b.v_t_v);
    const NeuronParams c = sample_params(nominal(), s, 124);
    CHECK(c.g_l_s != a.g_l_s);
}

TEST_CASE("log-ratio spread over many draws matches the requested sigma") {
    MismatchSpec s;
    s.sigma_map = {{MismatchParam::IDc, 0.05}};
    s.multiplier = 1.0;
    const NeuronParams nom = nominal();
    const int n = 100000;
    double sum = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const NeuronParams p = sample_params(nom, s, static_cast<std::uint64_t>(i));
        const double x = std::log(p.i_dc_a / nom.i_dc_a);
        sum += x;
        ss += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((ss - n * mean * mean) / (n - 1));
    CHECK(std::fabs(sd - 0.05) / 0.05 < 0.02);
}

TEST_CASE("statistics use the n-1 denominator and are order-invariant") {
    std::vector<double> xs = {90.0, 92.0, 95.0, 89.5, 93.5};
    const RateStats a = stats_from_samples(xs, 0);
    std::reverse(xs.begin(), xs.end());
    const RateStats b = stats_from_samples(xs, 0);
    CHECK(a.mean_hz == doctest::Approx(92.0));
    // Hand-computed sample std with n-1: sqrt(21.5/4).
    CHECK(a.std_dev_hz == doctest::Approx(std::sqrt(21.5 / 4.0)));
    CHECK(a.relative_error == doctest::Approx(a.std_dev_hz / a.mean_hz));
    CHECK(b.mean_hz == a.mean_hz);
    CHECK(b.std_dev_hz == a.std_dev_hz);
}

TEST_CASE("monte carlo is deterministic across thread counts") {
    const MismatchSpec s = small_spec(64);
    const auto seq = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt, 1);
    const auto par = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt, 8);
    REQUIRE(seq.samples_hz.size() == par.samples_hz.size());
    for (std::size_t i = 0; i < seq.samples_hz.size(); ++i) {
        CHECK(seq.samples_hz[i] == par.samples_hz[i]);
    }
}

TEST_CASE("zero sigma gives zero spread") {
    MismatchSpec s = small_spec(16);
    for (auto& [p, sigma] : s.sigma_map) sigma = 0.0;
    const auto st = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt);
    // All samples are bit-identical; the only spread left is the rounding of
    // the running mean, i.e. numerical zero.
    CHECK(st.std_dev_hz < 1e-12);
}

TEST_CASE("doubling sigma roughly doubles the relative error") {
    MismatchSpec s = small_spec(500);
    const auto st1 = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt);
    s.multiplier *= 2.0;
    const auto st2 = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt);
    CHECK(st2.relative_error / st1.relative_error == doctest::Approx(2.0).epsilon(0.20));
}

TEST_CASE("relative error grows monotonically and near-linearly with the multiplier") {
    MismatchSpec s = small_spec(300);
    const double base_mult = s.multiplier;
    double rel[3];
    const double scale[3] = {0.25, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
        s.multiplier = base_mult * scale[i];
        rel[i] = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt).relative_error;
    }
    CHECK(rel[0] < rel[1]);
    CHECK(rel[1] < rel[2]);
    // Near-linear: slope between segments consistent within 20%.
    const double s1 = rel[1] / rel[0];
    const double s2 = rel[2] / rel[1];
    CHECK(s1 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(s2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("histogram bins cover all samples") {
    const MismatchSpec s = small_spec(200);
    const auto st = monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt);
    const auto hist = rate_histogram(st.samples_hz, 20);
    REQUIRE(hist.size() == 20);
    std::size_t total = 0;
    for (const auto& b : hist) {
        CHECK(b.hi_hz > b.lo_hz);
        total += b.count;
    }
    CHECK(total == st.samples_hz.size());
}

TEST_CASE("invalid specs are rejected") {
    MismatchSpec s = small_spec(0);
    CHECK_THROWS_AS(monte_carlo_rates(nominal(), s, StimulusSpec{}, kT, kOpt), SimError);
    s = small_spec();
    s.sigma_map[0].second = -0.1;
    CHECK_THROWS_AS(sample_params(nominal(), s, 0), SimError);
}

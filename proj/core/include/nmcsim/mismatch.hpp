#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nmcsim/neuron.hpp"

namespace nmcsim {

// Device-mismatch injection: each selected parameter is scaled by a lognormal
// factor exp(sigma * z). Draws come from a counter-based generator keyed by
// (seed, run index, parameter id), so results are independent of execution
// order and thread count.

enum class MismatchParam : int {
    GLeak = 0,
    IDc,
    VThresh,
    TRefr,
    BAdapt,
    TauW,
    DeltaT,
    WFepsc,
    WSepsc,
    WFipsc,
    WSipsc,
};

const char* mismatch_param_name(MismatchParam p);

struct MismatchSpec {
    // (parameter, relative lognormal sigma); effective sigma = sigma * multiplier.
    std::vector<std::pair<MismatchParam, double>> sigma_map;
    double multiplier = 1.0;
    int n_runs = 500;
    std::uint64_t seed = 1;

    // Mismatch on the bias-derived scale parameters the rate depends on.
    static MismatchSpec defaults();
};

NeuronParams sample_params(const NeuronParams& nominal, const MismatchSpec& spec,
                           std::uint64_t run_index);

struct RateStats {
    double mean_hz = 0.0;
    double std_dev_hz = 0.0;       // sample standard deviation, n-1 denominator
    double relative_error = 0.0;   // std_dev / mean
    std::size_t zero_runs = 0;     // runs flagged with zero spikes (included as 0 Hz)
    std::vector<double> samples_hz;
};

RateStats stats_from_samples(std::vector<double> samples, std::size_t zero_runs);

// Run spec.n_runs independent neurons and collect firing-rate statistics.
// Runs fan out over `n_threads` (0 = hardware concurrency); results are
// deterministic for a given spec regardless of scheduling.
RateStats monte_carlo_rates(const NeuronParams& nominal, const MismatchSpec& spec,
                            const StimulusSpec& stim, double t_total_s,
                            const RateOptions& opt = {}, int n_threads = 0);

// Bisection on i_dc until the nominal (mismatch-free) rate hits target_hz.
double calibrate_dc_for_rate(const NeuronParams& nominal, const StimulusSpec& stim,
                             double target_hz, double t_total_s, const RateOptions& opt,
                             double i_lo_a, double i_hi_a, int iters = 40);

// Bisection on the global sigma multiplier until the Monte Carlo relative
// error matches `target`. Returns the fitted multiplier.
double calibrate_sigma_multiplier(const NeuronParams& nominal, MismatchSpec spec,
                                  const StimulusSpec& stim, double t_total_s,
                                  const RateOptions& opt, double target, int iters = 24);

struct HistogramBin {
    double lo_hz;
    double hi_hz;
    std::size_t count;
};

std::vector<HistogramBin> rate_histogram(const std::vector<double>& samples_hz, int n_bins);

}  // namespace nmcsim

#include "nmcsim/mismatch.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "nmcsim/errors.hpp"
#include "nmcsim/rng.hpp"

namespace nmcsim {

const char* mismatch_param_name(MismatchParam p) {
    switch (p) {
        case MismatchParam::GLeak: return "g_l";
        case MismatchParam::IDc: return "i_dc";
        case MismatchParam::VThresh: return "v_t";
        case MismatchParam::TRefr: return "t_rfr";
        case MismatchParam::BAdapt: return "b";
        case MismatchParam::TauW: return "tau_w";
        case MismatchParam::DeltaT: return "delta_t";
        case MismatchParam::WFepsc: return "w_fepsc";
        case MismatchParam::WSepsc: return "w_sepsc";
        case MismatchParam::WFipsc: return "w_fipsc";
        case MismatchParam::WSipsc: return "w_sipsc";
    }
    return "?";
}

MismatchSpec MismatchSpec::defaults() {
    MismatchSpec s;
    s.sigma_map = {
        {MismatchParam::GLeak, 0.05},
        {MismatchParam::IDc, 0.05},
        {MismatchParam::VThresh, 0.01},
        {MismatchParam::TRefr, 0.05},
    };
    return s;
}

namespace {

double* param_slot(NeuronParams& p, MismatchParam which) {
    switch (which) {
        case MismatchParam::GLeak: return &p.g_l_s;
        case MismatchParam::IDc: return &p.i_dc_a;
        case MismatchParam::VThresh: return &p.v_t_v;
        case MismatchParam::TRefr: return &p.t_rfr_s;
        case MismatchParam::BAdapt: return &p.b_a;
        case MismatchParam::TauW: return &p.tau_w_s;
        case MismatchParam::DeltaT: return &p.delta_t_v;
        case MismatchParam::WFepsc: return &p.syn[SynKernel::Fepsc].w_a;
        case MismatchParam::WSepsc: return &p.syn[SynKernel::Sepsc].w_a;
        case MismatchParam::WFipsc: return &p.syn[SynKernel::Fipsc].w_a;
        case MismatchParam::WSipsc: return &p.syn[SynKernel::Sipsc].w_a;
    }
    return nullptr;
}

}  // namespace

NeuronParams sample_params(const NeuronParams& nominal, const MismatchSpec& spec,
                           std::uint64_t run_index) {
    NeuronParams out = nominal;
    for (const auto& [which, sigma] : spec.sigma_map) {
        if (sigma < 0.0) throw SimError("mismatch", "sigma must be >= 0");
        const double eff = sigma * spec.multiplier;
        if (eff == 0.0) continue;
        CounterRng rng(spec.seed, run_index, static_cast<std::uint64_t>(which));
        const double z = rng.next_normal();
        *param_slot(out, which) *= std::exp(eff * z);
    }
    return out;
}

RateStats stats_from_samples(std::vector<double> samples, std::size_t zero_runs) {
    RateStats st;
    st.zero_runs = zero_runs;
    st.samples_hz = std::move(samples);
    const std::size_t n = st.samples_hz.size();
    if (n == 0) return st;
    double sum = 0.0;
    for (double v : st.samples_hz) sum += v;
    st.mean_hz = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : st.samples_hz) {
            const double d = v - st.mean_hz;
            ss += d * d;
        }
        st.std_dev_hz = std::sqrt(ss / static_cast<double>(n - 1));
    }
    st.relative_error = st.mean_hz != 0.0 ? st.std_dev_hz / st.mean_hz : 0.0;
    return st;
}

RateStats monte_carlo_rates(const NeuronParams& nominal, const MismatchSpec& spec,
                            const StimulusSpec& stim, double t_total_s,
                            const RateOptions& opt, int n_threads) {
    if (spec.n_runs < 1) throw SimError("mismatch", "n_runs must be >= 1");
    const int runs = spec.n_runs;
    std::vector<double> rates(static_cast<std::size_t>(runs), 0.0);
    std::vector<char> zero(static_cast<std::size_t>(runs), 0);

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int workers = n_threads > 0 ? n_threads : static_cast<int>(hw);

    RateOptions ropt = opt;
    ropt.record_trace = false;

    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const NeuronParams p = sample_params(nominal, spec, static_cast<std::uint64_t>(i));
            const RateResult r = firing_rate(p, stim, t_total_s, ropt);
            rates[static_cast<std::size_t>(i)] = interval_rate(r);
            zero[static_cast<std::size_t>(i)] = r.zero_rate ? 1 : 0;
        }
    };

    if (workers <= 1 || runs < 2 * workers) {
        run_range(0, runs);
    } else {
        std::vector<std::future<void>> futs;
        const int chunk = (runs + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int b = w * chunk;
            const int e = std::min(runs, b + chunk);
            if (b >= e) break;
            futs.push_back(std::async(std::launch::async, run_range, b, e));
        }
        for (auto& f : futs) f.get();
    }

    std::size_t zeros = 0;
    for (char z : zero) zeros += z;
    return stats_from_samples(std::move(rates), zeros);
}

double calibrate_dc_for_rate(const NeuronParams& nominal, const StimulusSpec& stim,
                             double target_hz, double t_total_s, const RateOptions& opt,
                             double i_lo_a, double i_hi_a, int iters) {
    NeuronParams p = nominal;
    auto rate_at = [&](double i_dc) {
        p.i_dc_a = i_dc;
        return interval_rate(firing_rate(p, stim, t_total_s, opt));
    };
    double lo = i_lo_a, hi = i_hi_a;
    if (rate_at(lo) > target_hz || rate_at(hi) < target_hz) {
        throw SimError("mismatch", "calibration bracket does not contain the target rate");
    }
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (rate_at(mid) < target_hz) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double calibrate_sigma_multiplier(const NeuronParams& nominal, MismatchSpec spec,
                                  const StimulusSpec& stim, double t_total_s,
                                  const RateOptions& opt, double target, int iters) {
    auto rel_err_at = [&](double mult) {
        spec.multiplier = mult;
        return monte_carlo_rates(nominal, spec, stim, t_total_s, opt).relative_error;
    };
    double lo = 0.05, hi = 5.0;
    if (rel_err_at(lo) > target || rel_err_at(hi) < target) {
        throw SimError("mismatch", "sigma multiplier bracket does not contain the target");
    }
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (rel_err_at(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<HistogramBin> rate_histogram(const std::vector<double>& samples_hz, int n_bins) {
    std::vector<HistogramBin> bins;
    if (samples_hz.empty() || n_bins < 1) return bins;
    const auto [mn, mx] = std::minmax_element(samples_hz.begin(), samples_hz.end());
    double lo = std::floor(*mn);
    double hi = std::ceil(*mx);
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / n_bins;
    bins.resize(static_cast<std::size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        bins[static_cast<std::size_t>(i)] = {lo + i * width, lo + (i + 1) * width, 0};
    }
    for (double v : samples_hz) {
        int idx = static_cast<int>((v - lo) / width);
        idx = std::clamp(idx, 0, n_bins - 1);
        ++bins[static_cast<std::size_t>(idx)].count;
    }
    return bins;
}

}  // namespace nmcsim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "soundmask/audio.hpp"
#include "soundmask/error.hpp"

namespace soundmask::randomness {

struct TestOptions {
    // Drops the minimum-sample-count preconditions so that tiny hand-checked
    // oracles can exercise the statistic path. Not for production sequences.
    bool relax_preconditions = false;
};

struct RunsTestResult {
    std::size_t n = 0;   // total observations, including median ties
    std::size_t n1 = 0;  // above median
    std::size_t n2 = 0;  // below median
    std::size_t runs = 0;
    double expected_runs = 0.0;
    double variance_runs = 0.0;
    double z = 0.0;            // (R - E(R)) / sqrt(V(R))
    double z_unscaled = 0.0;   // debug: (R - E(R)) / V(R)
    double p_value = 0.0;      // two-sided normal tail
    double score = 0.0;        // == p_value
};

struct CoxStuartResult {
    std::size_t m = 0;       // compared pairs after tie drop
    std::size_t c = 0;       // pairing offset
    std::size_t s_plus = 0;  // positive signs
    double p_value = 0.0;    // two-sided exact binomial
    double score = 0.0;      // == p_value
};

namespace detail {

inline double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return (lo + hi) / 2.0;
}

// two-sided normal tail for |z|
inline double normal_two_sided(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// log C(m, k)
inline double log_choose(std::size_t m, std::size_t k) {
    return std::lgamma(static_cast<double>(m) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(m - k) + 1.0);
}

// P(S <= s) for S ~ Binomial(m, 1/2), exact, in log-sum-exp form so it
// stays finite far into the tails even for m in the tens of thousands.
inline double binom_half_cdf(std::size_t m, std::size_t s) {
    if (s >= m) return 1.0;
    const double log_half_m =
        -static_cast<double>(m) * std::log(2.0);
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(s + 1);
    for (std::size_t k = 0; k <= s; ++k) {
        logs[k] = log_choose(m, k) + log_half_m;
        max_log = std::max(max_log, logs[k]);
    }
    if (!std::isfinite(max_log)) return 0.0;
    double acc = 0.0;
    for (double lv : logs) acc += std::exp(lv - max_log);
    return std::min(1.0, std::exp(max_log) * acc);
}

}  // namespace detail

// Wald-Wolfowitz runs test. The sequence is dichotomized about its median
// (ties dropped), maximal same-sign blocks are counted, and the run count is
// standardized against its permutation moments:
//   E(R) = 2 n1 n2 / n' + 1
//   V(R) = 2 n1 n2 (2 n1 n2 - n') / (n'^2 (n' - 1)),  n' = n1 + n2.
// z divides by sqrt(V(R)); the raw ratio over V(R) is kept in z_unscaled
// for inspection but is not a calibrated statistic.
inline RunsTestResult wald_wolfowitz(const std::vector<double>& seq,
                                     const TestOptions& opts = {}) {
    RunsTestResult r;
    r.n = seq.size();
    if (seq.size() < 2) {
        throw InsufficientSamplesError("wald_wolfowitz: need >= 2 values");
    }

    const double median = detail::median_of(seq);

    std::size_t runs = 0;
    int prev_sign = 0;
    for (double v : seq) {
        if (v == median) continue;
        const int sign = v > median ? 1 : -1;
        if (sign > 0) {
            ++r.n1;
        } else {
            ++r.n2;
        }
        if (sign != prev_sign) {
            ++runs;
            prev_sign = sign;
        }
    }
    r.runs = runs;

    if (r.n1 == 0 || r.n2 == 0) {
        throw DegenerateSequenceError(
            "wald_wolfowitz: sequence constant on one side of its median");
    }
    const std::size_t usable = r.n1 + r.n2;
    if (!opts.relax_preconditions && usable < 30) {
        throw InsufficientSamplesError(
            "wald_wolfowitz: fewer than 30 usable observations");
    }

    const double n1 = static_cast<double>(r.n1);
    const double n2 = static_cast<double>(r.n2);
    const double np = n1 + n2;
    r.expected_runs = 2.0 * n1 * n2 / np + 1.0;
    r.variance_runs =
        2.0 * n1 * n2 * (2.0 * n1 * n2 - np) / (np * np * (np - 1.0));
    if (!(r.variance_runs > 0.0)) {
        throw DegenerateSequenceError("wald_wolfowitz: zero run variance");
    }
    const double dev = static_cast<double>(r.runs) - r.expected_runs;
    r.z = dev / std::sqrt(r.variance_runs);
    r.z_unscaled = dev / r.variance_runs;
    r.p_value = detail::normal_two_sided(r.z);
    r.score = r.p_value;
    return r;
}

// Cox-Stuart sign test. For odd n the middle element is removed first, so
// the offset is always c = floor(n/2) over the paired part; each pair
// contributes sign(x_{i+c} - x_i), ties dropped, and the positive count is
// referred to an exact Binomial(m, 1/2).
inline CoxStuartResult cox_stuart(const std::vector<double>& seq,
                                  const TestOptions& opts = {}) {
    if (seq.size() < 2) {
        throw InsufficientSamplesError("cox_stuart: need >= 2 values");
    }
    std::vector<double> v = seq;
    if (v.size() % 2 == 1) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2));
    }
    CoxStuartResult r;
    r.c = v.size() / 2;

    for (std::size_t i = 0; i < r.c; ++i) {
        const double d = v[i + r.c] - v[i];
        if (d > 0.0) {
            ++r.s_plus;
            ++r.m;
        } else if (d < 0.0) {
            ++r.m;
        }
    }
    if (r.m == 0) {
        throw DegenerateSequenceError("cox_stuart: all pairs tied");
    }
    if (!opts.relax_preconditions && r.m < 30) {
        throw InsufficientSamplesError("cox_stuart: fewer than 30 pairs");
    }

    const double lower = detail::binom_half_cdf(r.m, r.s_plus);
    // the p = 1/2 distribution is symmetric, so P(S >= s) = P(S <= m - s)
    const double upper = detail::binom_half_cdf(r.m, r.m - r.s_plus);
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    r.score = r.p_value;
    return r;
}

// ---------------------------------------------------------------------------
// Clip and dataset scoring

struct ClipScore {
    RunsTestResult ww;
    CoxStuartResult cs;
};

// PCM integers floated into one sequence, uniformly strided down to at most
// max_values, then both tests applied.
inline ClipScore score_clip(const audio::AudioClip& clip,
                            std::size_t max_values = 100000) {
    if (clip.empty()) throw EmptyAudioError("score_clip: empty clip");
    if (max_values == 0) throw ConfigError("score_clip: max_values == 0");
    const std::size_t n = clip.samples.size();
    const std::size_t stride = (n + max_values - 1) / max_values;
    std::vector<double> seq;
    seq.reserve(n / stride + 1);
    for (std::size_t i = 0; i < n; i += stride) {
        seq.push_back(static_cast<double>(clip.samples[i]));
    }
    ClipScore s;
    s.ww = wald_wolfowitz(seq);
    s.cs = cox_stuart(seq);
    return s;
}

struct RandomnessReport {
    std::string condition;  // original, +white, +gan, ...
    std::vector<ClipScore> clips;
    std::size_t scored_count = 0;
    std::size_t skipped_degenerate = 0;
    double mean_ww_score = 0.0;
    double mean_cs_score = 0.0;
};

// Arithmetic mean of per-clip scores; clips whose tests degenerate are
// excluded from the mean and counted.
inline RandomnessReport score_dataset(
    const std::vector<audio::AudioClip>& clips, const std::string& condition,
    std::size_t max_values = 100000) {
    RandomnessReport report;
    report.condition = condition;
    double ww_acc = 0.0, cs_acc = 0.0;
    for (const auto& clip : clips) {
        try {
            ClipScore s = score_clip(clip, max_values);
            ww_acc += s.ww.score;
            cs_acc += s.cs.score;
            report.clips.push_back(std::move(s));
            ++report.scored_count;
        } catch (const DegenerateSequenceError&) {
            ++report.skipped_degenerate;
        } catch (const InsufficientSamplesError&) {
            ++report.skipped_degenerate;
        }
    }
    if (report.scored_count == 0) {
        throw EmptyDatasetError("score_dataset: no scorable clips");
    }
    report.mean_ww_score = ww_acc / static_cast<double>(report.scored_count);
    report.mean_cs_score = cs_acc / static_cast<double>(report.scored_count);
    return report;
}

}  // namespace soundmask::randomness

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "soundmask/audio.hpp"
#include "soundmask/error.hpp"
#include "soundmask/fft.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::noise {

struct NoiseProfile {
    enum class Kind { white, gan };
    Kind kind = Kind::white;
    double duration_seconds = 2.0;
    int sample_rate = 16000;
    double peak_dbfs = -20.0;
    std::uint64_t seed = 0;
};

inline void validate(const NoiseProfile& p) {
    if (!(p.duration_seconds > 0.0)) {
        throw ConfigError("noise duration must be positive");
    }
    if (!(p.peak_dbfs <= 0.0)) throw ConfigError("peak_dbfs must be <= 0");
    if (p.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
}

// Digital white noise: i.i.d. uniform integers over the symmetric range
// implied by peak_dbfs. Deterministic for a fixed seed.
inline audio::AudioClip white_noise(const NoiseProfile& profile) {
    validate(profile);
    if (profile.kind != NoiseProfile::Kind::white) {
        throw ConfigError("white_noise called with non-white profile");
    }
    const std::int64_t amp = std::min<std::int64_t>(
        32767, std::llround(audio::kFullScale *
                            std::pow(10.0, profile.peak_dbfs / 20.0)));
    const std::size_t n = static_cast<std::size_t>(
        std::llround(profile.duration_seconds * profile.sample_rate));

    Rng rng(profile.seed);
    audio::AudioClip clip;
    clip.sample_rate = profile.sample_rate;
    clip.channels = 1;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        clip.samples[i] =
            static_cast<std::int16_t>(rng.uniform_int(-amp, amp));
    }
    return clip;
}

// Geometric / arithmetic mean ratio of the Welch-averaged power spectrum,
// positive-frequency bins only. 1 for ideal white noise, near 0 for a tone.
//
// Welch averaging matters here: single-periodogram bins are exponentially
// distributed, which caps the ratio near exp(-gamma) ~ 0.56 even for perfect
// white noise. Averaging K segments moves the ideal value to exp(psi(K))/K,
// > 0.95 once K >= 16.
inline double spectral_flatness(const double* x, std::size_t n) {
    if (n < 16) throw InsufficientSamplesError("spectral_flatness: too short");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i];
    mean /= static_cast<double>(n);

    std::size_t seg = 2048;
    while (seg > n) seg >>= 1;
    const std::size_t segments = n / seg;
    const std::size_t bins = seg / 2 - 1;  // k = 1 .. seg/2 - 1

    fft::RealFft fft(seg);
    std::vector<double> centered(seg);
    std::vector<double> acc(bins, 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
        for (std::size_t i = 0; i < seg; ++i) {
            centered[i] = x[s * seg + i] - mean;
        }
        const auto& p = fft.power(centered.data(), seg);
        for (std::size_t k = 0; k < bins; ++k) acc[k] += p[k + 1];
    }

    double arith = 0.0;
    for (double v : acc) arith += v;
    arith /= static_cast<double>(bins);
    if (!(arith > 0.0)) {
        throw SilentNoiseError("spectral_flatness: silent signal");
    }

    double log_sum = 0.0;
    for (double v : acc) {
        if (v <= 0.0) return 0.0;  // geometric mean collapses
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(bins)) / arith;
}

inline double spectral_flatness(const std::vector<double>& x) {
    return spectral_flatness(x.data(), x.size());
}

inline double spectral_flatness(const audio::AudioClip& clip) {
    if (clip.empty()) throw EmptyAudioError("spectral_flatness: empty clip");
    std::vector<double> x(clip.samples.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = clip.samples[i] / audio::kFullScale;
    }
    return spectral_flatness(x);
}

}  // namespace soundmask::noise

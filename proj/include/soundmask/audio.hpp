#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "soundmask/error.hpp"

namespace soundmask::audio {

// Mono PCM clip. Samples stay in the signed 16-bit range; all DSP here
// converts to double internally and quantizes back on the way out.
struct AudioClip {
    std::vector<std::int16_t> samples;
    int sample_rate = 0;
    int channels = 1;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return sample_rate > 0
                   ? static_cast<double>(samples.size()) / sample_rate
                   : 0.0;
    }
};

// How loud to make a noise signal relative to digital full scale or to the
// clip it is mixed into.
struct GainSpec {
    enum class Mode { snr_db, peak_dbfs };
    Mode mode = Mode::snr_db;
    double value = 0.0;

    static GainSpec snr(double db) {
        if (!std::isfinite(db)) throw ConfigError("snr_db must be finite");
        return {Mode::snr_db, db};
    }
    static GainSpec peak(double dbfs) {
        if (!(dbfs <= 0.0)) throw ConfigError("peak_dbfs must be <= 0");
        return {Mode::peak_dbfs, dbfs};
    }
};

constexpr double kFullScale = 32768.0;

inline double rms(const AudioClip& clip) {
    if (clip.empty()) throw EmptyAudioError("rms of empty clip");
    double acc = 0.0;
    for (std::int16_t s : clip.samples) {
        acc += static_cast<double>(s) * static_cast<double>(s);
    }
    return std::sqrt(acc / static_cast<double>(clip.samples.size()));
}

// 20*log10(RMS / full scale); -inf for an all-zero clip.
inline double rms_dbfs(const AudioClip& clip) {
    const double r = rms(clip);
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(r / kFullScale);
}

inline std::int16_t clamp16(double v) {
    const double r = std::llround(v);
    if (r > 32767.0) return 32767;
    if (r < -32768.0) return -32768;
    return static_cast<std::int16_t>(r);
}

// ---------------------------------------------------------------------------
// WAV container (RIFF, PCM only)

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] |
                                      (static_cast<std::uint16_t>(p[1]) << 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a PCM RIFF/WAVE file. Multi-channel input is averaged down to mono,
// bit depths other than 16 are rescaled to 16-bit.
inline AudioClip load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
        std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw FormatError(path + ": not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, num_channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const char* id = bytes.data() + off;
        const std::uint32_t chunk_len = detail::read_u32(p + off + 4);
        const std::size_t body = off + 8;
        if (body + chunk_len > n) {
            throw FormatError(path + ": truncated chunk");
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw FormatError(path + ": short fmt chunk");
            format = detail::read_u16(p + body);
            num_channels = detail::read_u16(p + body + 2);
            rate = detail::read_u32(p + body + 4);
            bits = detail::read_u16(p + body + 14);
            if (format == 0xfffe) {
                // WAVE_FORMAT_EXTENSIBLE: PCM iff the sub-format tag says so
                if (chunk_len >= 26) format = detail::read_u16(p + body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = p + body;
            data_len = chunk_len;
        }
        off = body + chunk_len + (chunk_len & 1);
    }

    if (!have_fmt) throw FormatError(path + ": missing fmt chunk");
    if (format != 1) {
        throw FormatError(path + ": compressed or non-PCM codec tag " +
                          std::to_string(format));
    }
    if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
        throw FormatError(path + ": unsupported bit depth " +
                          std::to_string(bits));
    }
    if (num_channels == 0 || rate == 0) {
        throw FormatError(path + ": bad channel count or sample rate");
    }
    if (data == nullptr) throw FormatError(path + ": missing data chunk");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * num_channels;
    const std::size_t frames = frame_bytes ? data_len / frame_bytes : 0;
    if (frames == 0) throw EmptyAudioError(path + ": zero samples");

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.channels = 1;
    clip.samples.resize(frames);

    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < num_channels; ++c) {
            const unsigned char* s = data + f * frame_bytes + c * bytes_per_sample;
            std::int32_t v = 0;
            switch (bits) {
                case 8:
                    v = (static_cast<std::int32_t>(s[0]) - 128) << 8;
                    break;
                case 16:
                    v = static_cast<std::int16_t>(detail::read_u16(s));
                    break;
                case 24: {
                    std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
                    if (raw & 0x800000) raw |= ~0xffffff;  // sign extend
                    v = raw >> 8;
                    break;
                }
                case 32:
                    v = static_cast<std::int32_t>(detail::read_u32(s)) >> 16;
                    break;
            }
            acc += v;
        }
        clip.samples[f] = clamp16(acc / num_channels);
    }
    return clip;
}

// Writes 16-bit mono PCM, canonical 44-byte header.
inline void save_wav(const AudioClip& clip, const std::string& path) {
    if (clip.empty()) throw EmptyAudioError("save_wav of empty clip");
    if (clip.sample_rate <= 0) throw FormatError("save_wav: bad sample rate");
    std::string out;
    out.reserve(44 + clip.samples.size() * 2);
    const std::uint32_t data_len =
        static_cast<std::uint32_t>(clip.samples.size() * 2);
    out.append("RIFF");
    detail::put_u32(out, 36 + data_len);
    out.append("WAVE");
    out.append("fmt ");
    detail::put_u32(out, 16);
    detail::put_u16(out, 1);  // PCM
    detail::put_u16(out, 1);  // mono
    detail::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(clip.sample_rate * 2));
    detail::put_u16(out, 2);   // block align
    detail::put_u16(out, 16);  // bits
    out.append("data");
    detail::put_u32(out, data_len);
    for (std::int16_t s : clip.samples) {
        detail::put_u16(out, static_cast<std::uint16_t>(s));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to " + path);
}

// ---------------------------------------------------------------------------
// Resampling: Kaiser-windowed sinc interpolation.

namespace detail {

inline double bessel_i0(double x) {
    // power series; converges quickly for the beta values used here
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

}  // namespace detail

// Band-limited rate conversion. Output length = round(len * target / source).
inline AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw ConfigError("target_rate must be positive");
    if (clip.sample_rate <= 0) throw FormatError("resample: bad source rate");
    if (target_rate == clip.sample_rate) return clip;
    if (clip.empty()) throw EmptyAudioError("resample of empty clip");

    const double ratio =
        static_cast<double>(target_rate) / clip.sample_rate;
    const std::size_t out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(clip.samples.size()) * ratio));

    // cutoff slightly below the narrower Nyquist
    const double cutoff = 0.96 * std::min(1.0, ratio);
    const int zero_crossings = 16;
    const double half_width = zero_crossings / cutoff;
    const double beta = 9.0;
    const double i0_beta = detail::bessel_i0(beta);

    AudioClip out;
    out.sample_rate = target_rate;
    out.channels = 1;
    out.samples.resize(out_len);

    const std::int64_t n = static_cast<std::int64_t>(clip.samples.size());
    for (std::size_t j = 0; j < out_len; ++j) {
        const double t = static_cast<double>(j) / ratio;
        const std::int64_t lo =
            std::max<std::int64_t>(0, static_cast<std::int64_t>(
                                          std::ceil(t - half_width)));
        const std::int64_t hi = std::min<std::int64_t>(
            n - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
        double acc = 0.0;
        for (std::int64_t i = lo; i <= hi; ++i) {
            const double x = (static_cast<double>(i) - t);
            const double u = x / half_width;
            const double w =
                detail::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) /
                i0_beta;
            acc += clip.samples[static_cast<std::size_t>(i)] * cutoff *
                   detail::sinc(cutoff * x) * w;
        }
        out.samples[j] = clamp16(acc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mixing

// Superimposes noise onto base. Noise is resampled to the base rate if
// needed, tiled or trimmed to the base length (plain tiling, no crossfade),
// scaled per the gain spec, then summed with saturating clip.
inline AudioClip mix(const AudioClip& base, const AudioClip& noise,
                     const GainSpec& gain) {
    if (base.empty()) throw EmptyAudioError("mix: empty base clip");
    if (noise.empty()) throw EmptyAudioError("mix: empty noise clip");

    const AudioClip* src = &noise;
    AudioClip resampled;
    if (noise.sample_rate != base.sample_rate) {
        resampled = resample(noise, base.sample_rate);
        src = &resampled;
    }

    const std::size_t n = base.samples.size();
    const std::size_t m = src->samples.size();

    double noise_sq = 0.0;
    std::int32_t noise_peak = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t v = src->samples[i % m];
        noise_sq += static_cast<double>(v) * v;
        noise_peak = std::max(noise_peak, std::abs(v));
    }
    const double noise_rms = std::sqrt(noise_sq / n);

    double scale = 0.0;
    if (gain.mode == GainSpec::Mode::snr_db) {
        if (noise_rms == 0.0) {
            throw SilentNoiseError("mix: noise RMS is zero in snr_db mode");
        }
        const double base_rms = rms(base);
        scale = base_rms * std::pow(10.0, -gain.value / 20.0) / noise_rms;
    } else {
        // silent noise has no defined peak; it contributes nothing either way
        const double target = kFullScale * std::pow(10.0, gain.value / 20.0);
        scale = noise_peak > 0 ? target / noise_peak : 0.0;
    }

    AudioClip out;
    out.sample_rate = base.sample_rate;
    out.channels = 1;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mixed =
            static_cast<double>(base.samples[i]) +
            static_cast<double>(std::llround(scale * src->samples[i % m]));
        out.samples[i] = clamp16(mixed);
    }
    return out;
}

}  // namespace soundmask::audio

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "soundmask/audio.hpp"
#include "soundmask/error.hpp"
#include "soundmask/fft.hpp"
#include "soundmask/png.hpp"

namespace soundmask::features {

struct LogMelConfig {
    double frame_ms = 25.0;
    double hop_ms = 10.0;
    int mel_bands = 64;
    double fmin_hz = 0.0;
    double fmax_hz = 0.0;  // 0 -> rate / 2
};

constexpr double kLogFloorDb = -100.0;

// frames x mel_bands matrix in dB, floored at kLogFloorDb.
struct LogMelSpectrogram {
    Eigen::MatrixXd values;
    double frame_hop_seconds = 0.0;
    int mel_bands = 0;
    int source_rate = 0;

    Eigen::Index frames() const { return values.rows(); }
};

namespace detail {

inline double hz_to_mel(double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank over FFT power bins, each filter scaled to unit
// area on the Hz axis.
inline Eigen::MatrixXd mel_filterbank(int mel_bands, std::size_t nfft,
                                      int rate, double fmin, double fmax) {
    const std::size_t bins = nfft / 2 + 1;
    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(mel_bands, bins);

    const double mel_lo = hz_to_mel(fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(mel_bands + 2);
    for (int m = 0; m < mel_bands + 2; ++m) {
        edges[m] =
            mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (mel_bands + 1.0));
    }

    for (int m = 0; m < mel_bands; ++m) {
        const double f0 = edges[m], f1 = edges[m + 1], f2 = edges[m + 2];
        const double norm = 2.0 / (f2 - f0);
        for (std::size_t k = 0; k < bins; ++k) {
            const double fk = static_cast<double>(k) * rate / nfft;
            double w = 0.0;
            if (fk > f0 && fk < f1) {
                w = (fk - f0) / (f1 - f0);
            } else if (fk >= f1 && fk < f2) {
                w = (f2 - fk) / (f2 - f1);
            }
            fb(m, static_cast<Eigen::Index>(k)) = w * norm;
        }
    }
    return fb;
}

}  // namespace detail

// Log-mel spectrogram: Hann-windowed power STFT through a triangular mel
// filterbank, 10*log10 with a -100 dB floor. Deterministic for fixed input
// and config. The dB scale follows signal amplitude: doubling the waveform
// raises every off-floor entry by 20*log10(2).
inline LogMelSpectrogram log_mel(const audio::AudioClip& clip,
                                 const LogMelConfig& config = {}) {
    if (clip.sample_rate <= 0) throw FormatError("log_mel: bad sample rate");
    if (config.mel_bands <= 0) throw ConfigError("mel_bands must be positive");
    const int rate = clip.sample_rate;
    const std::size_t frame_len = static_cast<std::size_t>(
        std::llround(rate * config.frame_ms / 1000.0));
    const std::size_t hop =
        static_cast<std::size_t>(std::llround(rate * config.hop_ms / 1000.0));
    if (frame_len == 0 || hop == 0) {
        throw ConfigError("log_mel: frame/hop too small for sample rate");
    }
    if (clip.samples.size() < frame_len) {
        throw TooShortError("log_mel: clip shorter than one frame");
    }
    const double fmax =
        config.fmax_hz > 0.0 ? config.fmax_hz : rate / 2.0;
    if (!(config.fmin_hz >= 0.0) || !(fmax > config.fmin_hz)) {
        throw ConfigError("log_mel: bad fmin/fmax");
    }

    const std::size_t n_frames =
        1 + (clip.samples.size() - frame_len) / hop;
    const std::size_t nfft = fft::next_pow2(frame_len);

    std::vector<double> window(frame_len);
    for (std::size_t i = 0; i < frame_len; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / frame_len);
    }

    const Eigen::MatrixXd fb = detail::mel_filterbank(
        config.mel_bands, nfft, rate, config.fmin_hz, fmax);

    LogMelSpectrogram spec;
    spec.values.resize(static_cast<Eigen::Index>(n_frames), config.mel_bands);
    spec.frame_hop_seconds = static_cast<double>(hop) / rate;
    spec.mel_bands = config.mel_bands;
    spec.source_rate = rate;

    fft::RealFft fft(nfft);
    std::vector<double> frame(frame_len);
    Eigen::VectorXd power(static_cast<Eigen::Index>(nfft / 2 + 1));
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t i = 0; i < frame_len; ++i) {
            frame[i] = clip.samples[f * hop + i] / audio::kFullScale * window[i];
        }
        const auto& p = fft.power(frame.data(), frame_len);
        for (std::size_t k = 0; k < p.size(); ++k) {
            power[static_cast<Eigen::Index>(k)] = p[k];
        }
        const Eigen::VectorXd mel = fb * power;
        for (int m = 0; m < config.mel_bands; ++m) {
            const double v = mel[m];
            spec.values(static_cast<Eigen::Index>(f), m) =
                v > 0.0 ? std::max(kLogFloorDb, 10.0 * std::log10(v))
                        : kLogFloorDb;
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Cache format: small header + row-major float64 matrix.

inline void save_matrix(const LogMelSpectrogram& spec,
                        const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    const char magic[4] = {'S', 'M', 'L', 'M'};
    f.write(magic, 4);
    const std::uint32_t rows = static_cast<std::uint32_t>(spec.values.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(spec.values.cols());
    const std::uint32_t rate = static_cast<std::uint32_t>(spec.source_rate);
    f.write(reinterpret_cast<const char*>(&rows), 4);
    f.write(reinterpret_cast<const char*>(&cols), 4);
    f.write(reinterpret_cast<const char*>(&spec.frame_hop_seconds), 8);
    f.write(reinterpret_cast<const char*>(&rate), 4);
    for (Eigen::Index r = 0; r < spec.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < spec.values.cols(); ++c) {
            const double v = spec.values(r, c);
            f.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!f) throw IoError("short write to " + path);
}

inline LogMelSpectrogram load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "SMLM", 4) != 0) {
        throw FormatError(path + ": not a spectrogram matrix file");
    }
    std::uint32_t rows = 0, cols = 0, rate = 0;
    double hop = 0.0;
    f.read(reinterpret_cast<char*>(&rows), 4);
    f.read(reinterpret_cast<char*>(&cols), 4);
    f.read(reinterpret_cast<char*>(&hop), 8);
    f.read(reinterpret_cast<char*>(&rate), 4);
    if (!f) throw FormatError(path + ": truncated header");
    LogMelSpectrogram spec;
    spec.values.resize(rows, cols);
    spec.frame_hop_seconds = hop;
    spec.mel_bands = static_cast<int>(cols);
    spec.source_rate = static_cast<int>(rate);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            double v = 0.0;
            f.read(reinterpret_cast<char*>(&v), 8);
            spec.values(r, c) = v;
        }
    }
    if (!f) throw FormatError(path + ": truncated matrix body");
    return spec;
}

// Cosmetic heatmap: time on x, mel band on y (low bands at the bottom).
inline void save_heatmap(const LogMelSpectrogram& spec,
                         const std::string& path) {
    const int frames = static_cast<int>(spec.values.rows());
    const int bands = static_cast<int>(spec.values.cols());
    const double vmax = spec.values.maxCoeff();
    const double vmin = std::max(kLogFloorDb, vmax - 80.0);
    png::Image img(frames, bands);
    for (int f = 0; f < frames; ++f) {
        for (int m = 0; m < bands; ++m) {
            double t = (spec.values(f, m) - vmin) / std::max(1e-9, vmax - vmin);
            t = std::clamp(t, 0.0, 1.0);
            const auto v = static_cast<unsigned char>(std::lround(255.0 * t));
            img.set(f, bands - 1 - m,
                    {v, static_cast<unsigned char>(v * 3 / 4),
                     static_cast<unsigned char>(255 - v)});
        }
    }
    png::write(img, path);
}

}  // namespace soundmask::features

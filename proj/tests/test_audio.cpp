#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "soundmask/audio.hpp"
#include "soundmask/fft.hpp"
#include "soundmask/noise.hpp"

using namespace soundmask;

namespace {

std::string tmp_path(const std::string& name) {
    return ::testing::TempDir() + name;
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

// hand-built RIFF container so load paths can be driven bit by bit
std::string wav_bytes(std::uint16_t format, std::uint16_t channels,
                      std::uint32_t rate, std::uint16_t bits,
                      const std::string& data) {
    std::string s;
    s.append("RIFF");
    put_u32(s, 36 + static_cast<std::uint32_t>(data.size()));
    s.append("WAVE");
    s.append("fmt ");
    put_u32(s, 16);
    put_u16(s, format);
    put_u16(s, channels);
    put_u32(s, rate);
    put_u32(s, rate * channels * bits / 8);
    put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
    put_u16(s, bits);
    s.append("data");
    put_u32(s, static_cast<std::uint32_t>(data.size()));
    s.append(data);
    return s;
}

audio::AudioClip sine(double freq, double amp, int rate, double seconds) {
    audio::AudioClip clip;
    clip.sample_rate = rate;
    const std::size_t n =
        static_cast<std::size_t>(std::llround(seconds * rate));
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        clip.samples[i] = audio::clamp16(
            amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
    }
    return clip;
}

}  // namespace

TEST(Clamp16, RoundsAndSaturates) {
    EXPECT_EQ(audio::clamp16(0.49), 0);
    EXPECT_EQ(audio::clamp16(0.5), 1);
    EXPECT_EQ(audio::clamp16(-0.5), -1);
    EXPECT_EQ(audio::clamp16(32767.4), 32767);
    EXPECT_EQ(audio::clamp16(40000.0), 32767);
    EXPECT_EQ(audio::clamp16(-40000.0), -32768);
    EXPECT_EQ(audio::clamp16(-32768.2), -32768);
}

TEST(GainSpec, FactoriesValidate) {
    EXPECT_NO_THROW(audio::GainSpec::snr(-10.0));
    EXPECT_NO_THROW(audio::GainSpec::peak(-20.0));
    EXPECT_NO_THROW(audio::GainSpec::peak(0.0));
    EXPECT_THROW(audio::GainSpec::peak(0.1), ConfigError);
    EXPECT_THROW(
        audio::GainSpec::snr(std::numeric_limits<double>::infinity()),
        ConfigError);
}

TEST(RmsDbfs, KnownLevels) {
    audio::AudioClip square;
    square.sample_rate = 16000;
    for (int i = 0; i < 1000; ++i) {
        square.samples.push_back(i % 2 == 0 ? 32767 : -32767);
    }
    EXPECT_NEAR(audio::rms_dbfs(square), 0.0, 0.01);

    audio::AudioClip tenth;
    tenth.sample_rate = 16000;
    tenth.samples.assign(1000, 3277);
    EXPECT_NEAR(audio::rms_dbfs(tenth), -20.0, 0.1);

    audio::AudioClip zero;
    zero.sample_rate = 16000;
    zero.samples.assign(1000, 0);
    const double db = audio::rms_dbfs(zero);
    EXPECT_TRUE(std::isinf(db) && db < 0.0);
}

TEST(Wav, RoundTripIsBitExact) {
    noise::NoiseProfile p;
    p.seed = 77;
    const auto clip = noise::white_noise(p);
    const std::string path = tmp_path("roundtrip.wav");
    audio::save_wav(clip, path);
    const auto back = audio::load_wav(path);
    EXPECT_EQ(back.sample_rate, clip.sample_rate);
    EXPECT_EQ(back.samples, clip.samples);
}

TEST(Wav, OneSecondAt48kLoadsAllSamples) {
    const auto clip = sine(440.0, 8000.0, 48000, 1.0);
    const std::string path = tmp_path("sine48.wav");
    audio::save_wav(clip, path);
    const auto back = audio::load_wav(path);
    EXPECT_EQ(back.samples.size(), 48000u);
    EXPECT_EQ(back.sample_rate, 48000);
}

TEST(Wav, StereoAveragesToMono) {
    std::string data;
    for (int i = 0; i < 4; ++i) {
        put_u16(data, 1000);  // L
        put_u16(data, 3000);  // R
    }
    const std::string path = tmp_path("stereo.wav");
    write_bytes(path, wav_bytes(1, 2, 16000, 16, data));
    const auto clip = audio::load_wav(path);
    ASSERT_EQ(clip.samples.size(), 4u);
    for (std::int16_t s : clip.samples) EXPECT_EQ(s, 2000);
    EXPECT_EQ(clip.channels, 1);
}

TEST(Wav, EightBitIsRescaled) {
    std::string data;
    data.push_back(static_cast<char>(255));
    data.push_back(static_cast<char>(128));
    data.push_back(static_cast<char>(0));
    const std::string path = tmp_path("pcm8.wav");
    write_bytes(path, wav_bytes(1, 1, 8000, 8, data));
    const auto clip = audio::load_wav(path);
    ASSERT_EQ(clip.samples.size(), 3u);
    EXPECT_EQ(clip.samples[0], 32512);
    EXPECT_EQ(clip.samples[1], 0);
    EXPECT_EQ(clip.samples[2], -32768);
}

TEST(Wav, TwentyFourBitIsRescaled) {
    std::string data;
    // 0x7fffff (max positive) then 0x800000 (min negative)
    data.push_back(static_cast<char>(0xff));
    data.push_back(static_cast<char>(0xff));
    data.push_back(static_cast<char>(0x7f));
    data.push_back(static_cast<char>(0x00));
    data.push_back(static_cast<char>(0x00));
    data.push_back(static_cast<char>(0x80));
    const std::string path = tmp_path("pcm24.wav");
    write_bytes(path, wav_bytes(1, 1, 16000, 24, data));
    const auto clip = audio::load_wav(path);
    ASSERT_EQ(clip.samples.size(), 2u);
    EXPECT_EQ(clip.samples[0], 32767);
    EXPECT_EQ(clip.samples[1], -32768);
}

TEST(Wav, RejectsNonPcmCodec) {
    std::string data;
    put_u16(data, 0);
    put_u16(data, 0);
    const std::string path = tmp_path("float.wav");
    write_bytes(path, wav_bytes(3, 1, 16000, 16, data));  // IEEE float tag
    EXPECT_THROW(audio::load_wav(path), FormatError);
}

TEST(Wav, RejectsGarbageAndTruncation) {
    const std::string garbage = tmp_path("garbage.wav");
    write_bytes(garbage, "this is not audio");
    EXPECT_THROW(audio::load_wav(garbage), FormatError);

    std::string data(3200, '\x11');
    std::string whole = wav_bytes(1, 1, 16000, 16, data);
    const std::string cut = tmp_path("cut.wav");
    write_bytes(cut, whole.substr(0, whole.size() / 2));
    EXPECT_THROW(audio::load_wav(cut), FormatError);

    EXPECT_THROW(audio::load_wav(tmp_path("missing-file.wav")), IoError);
}

TEST(Wav, RejectsEmptyData) {
    const std::string path = tmp_path("empty.wav");
    write_bytes(path, wav_bytes(1, 1, 16000, 16, ""));
    EXPECT_THROW(audio::load_wav(path), EmptyAudioError);
}

TEST(Resample, SameRateIsIdentity) {
    const auto clip = sine(440.0, 8000.0, 16000, 0.25);
    const auto out = audio::resample(clip, 16000);
    EXPECT_EQ(out.samples, clip.samples);
}

TEST(Resample, LengthFollowsRateRatio) {
    const auto clip = sine(440.0, 8000.0, 48000, 1.0);
    const auto out = audio::resample(clip, 16000);
    EXPECT_EQ(out.samples.size(), 16000u);
    EXPECT_EQ(out.sample_rate, 16000);
}

TEST(Resample, TonePeakSurvives) {
    const auto clip = sine(440.0, 8000.0, 48000, 1.0);
    const auto out = audio::resample(clip, 16000);
    const std::size_t nfft = 16384;
    std::vector<double> x(out.samples.begin(), out.samples.end());
    fft::RealFft fft(nfft);
    const auto& p = fft.power(x.data(), x.size());
    std::size_t best = 1;
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
        if (p[k] > p[best]) best = k;
    }
    const double bin_hz = 16000.0 / nfft;
    EXPECT_NEAR(static_cast<double>(best) * bin_hz, 440.0, 2.0 * bin_hz);
}

TEST(Resample, DownUpRoundTripKeepsRms) {
    const auto clip = sine(1000.0, 8000.0, 48000, 1.0);
    const auto down = audio::resample(clip, 16000);
    const auto up = audio::resample(down, 48000);
    ASSERT_EQ(up.samples.size(), clip.samples.size());
    EXPECT_NEAR(audio::rms(up) / audio::rms(clip), 1.0, 0.01);
}

TEST(Mix, ZeroGainNoiseLeavesBaseUntouched) {
    const auto base = sine(500.0, 6000.0, 16000, 0.5);
    audio::AudioClip silent;
    silent.sample_rate = 16000;
    silent.samples.assign(8000, 0);
    const auto out = audio::mix(base, silent, audio::GainSpec::peak(-20.0));
    EXPECT_EQ(out.samples, base.samples);
}

TEST(Mix, SilentNoiseInSnrModeIsAnError) {
    const auto base = sine(500.0, 6000.0, 16000, 0.5);
    audio::AudioClip silent;
    silent.sample_rate = 16000;
    silent.samples.assign(8000, 0);
    EXPECT_THROW(audio::mix(base, silent, audio::GainSpec::snr(5.0)),
                 SilentNoiseError);
}

TEST(Mix, SnrZeroMatchesBaseRms) {
    const auto base = sine(500.0, 1414.2, 16000, 1.0);
    noise::NoiseProfile p;
    p.duration_seconds = 1.0;
    p.seed = 5;
    const auto noise_clip = noise::white_noise(p);
    const auto out = audio::mix(base, noise_clip, audio::GainSpec::snr(0.0));
    audio::AudioClip delta;
    delta.sample_rate = 16000;
    delta.samples.resize(base.samples.size());
    for (std::size_t i = 0; i < delta.samples.size(); ++i) {
        delta.samples[i] = static_cast<std::int16_t>(out.samples[i] -
                                                     base.samples[i]);
    }
    EXPECT_NEAR(audio::rms(delta) / audio::rms(base), 1.0, 0.005);
}

TEST(Mix, ShortNoiseTilesWithoutCrossfade) {
    const auto base = sine(300.0, 4000.0, 16000, 2.0);
    noise::NoiseProfile p;
    p.duration_seconds = 1.0;
    p.seed = 6;
    const auto noise_clip = noise::white_noise(p);
    ASSERT_EQ(noise_clip.samples.size(), 16000u);
    const auto out = audio::mix(base, noise_clip, audio::GainSpec::snr(5.0));
    ASSERT_EQ(out.samples.size(), 32000u);
    for (std::size_t i = 0; i < 16000; ++i) {
        const int d0 = out.samples[i] - base.samples[i];
        const int d1 = out.samples[i + 16000] - base.samples[i + 16000];
        ASSERT_EQ(d0, d1) << "tiling broke at " << i;
    }
}

TEST(Mix, PeakModeHitsRequestedCeiling) {
    const auto base = sine(300.0, 2000.0, 16000, 1.0);
    noise::NoiseProfile p;
    p.duration_seconds = 1.0;
    p.seed = 8;
    const auto noise_clip = noise::white_noise(p);
    const auto out = audio::mix(base, noise_clip, audio::GainSpec::peak(-20.0));
    int peak_delta = 0;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        peak_delta = std::max(
            peak_delta, std::abs(out.samples[i] - base.samples[i]));
    }
    // -20 dBFS is 3276.8 in sample units
    EXPECT_LE(peak_delta, 3277);
    EXPECT_GE(peak_delta, 3270);
}

TEST(Mix, ResamplesNoiseInternally) {
    const auto base = sine(300.0, 4000.0, 16000, 1.0);
    noise::NoiseProfile p;
    p.duration_seconds = 1.0;
    p.sample_rate = 48000;
    p.seed = 9;
    const auto noise_clip = noise::white_noise(p);
    const auto out = audio::mix(base, noise_clip, audio::GainSpec::snr(0.0));
    EXPECT_EQ(out.samples.size(), base.samples.size());
    EXPECT_EQ(out.sample_rate, 16000);
    EXPECT_NE(out.samples, base.samples);
}

TEST(Mix, OverflowSaturatesInsteadOfWrapping) {
    audio::AudioClip base;
    base.sample_rate = 16000;
    base.samples.assign(16000, 30000);
    noise::NoiseProfile p;
    p.duration_seconds = 1.0;
    p.peak_dbfs = -6.0;
    p.seed = 10;
    const auto noise_clip = noise::white_noise(p);
    const auto out = audio::mix(base, noise_clip, audio::GainSpec::peak(-6.0));
    int clipped = 0;
    for (std::int16_t s : out.samples) {
        EXPECT_GT(s, 0);  // wraparound would go negative
        if (s == 32767) ++clipped;
    }
    EXPECT_GT(clipped, 0);
}

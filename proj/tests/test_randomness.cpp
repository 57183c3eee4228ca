#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "soundmask/noise.hpp"
#include "soundmask/randomness.hpp"
#include "soundmask/rng.hpp"

using namespace soundmask;

namespace {

randomness::TestOptions relaxed() {
    randomness::TestOptions o;
    o.relax_preconditions = true;
    return o;
}

std::vector<double> ramp(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
    return v;
}

std::vector<double> uniform_seq(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform();
    return v;
}

}  // namespace

TEST(WaldWolfowitz, HandEnumeratedExample) {
    const std::vector<double> seq{5, 1, 6, 2, 7, 3};
    const auto r = randomness::wald_wolfowitz(seq, relaxed());
    EXPECT_EQ(r.n, 6u);
    EXPECT_EQ(r.runs, 6u);
    EXPECT_EQ(r.n1, 3u);
    EXPECT_EQ(r.n2, 3u);
    EXPECT_NEAR(r.expected_runs, 4.0, 1e-12);
    EXPECT_NEAR(r.variance_runs, 1.2, 1e-12);
    EXPECT_NEAR(r.z, 2.0 / std::sqrt(1.2), 1e-9);
    EXPECT_NEAR(r.z_unscaled, 2.0 / 1.2, 1e-12);
    const double expect_p = std::erfc(r.z / std::sqrt(2.0));
    EXPECT_NEAR(r.p_value, expect_p, 1e-12);
    EXPECT_DOUBLE_EQ(r.score, r.p_value);
}

TEST(WaldWolfowitz, MedianTiesAreDropped) {
    const std::vector<double> seq{3, 1, 3, 5, 3, 2, 6};
    const auto r = randomness::wald_wolfowitz(seq, relaxed());
    EXPECT_EQ(r.n, 7u);
    EXPECT_EQ(r.n1, 2u);
    EXPECT_EQ(r.n2, 2u);
    EXPECT_EQ(r.runs, 4u);
}

TEST(WaldWolfowitz, MonotoneRampRejected) {
    const auto r = randomness::wald_wolfowitz(ramp(100));
    EXPECT_EQ(r.runs, 2u);
    EXPECT_LT(r.z, 0.0);
    EXPECT_LT(r.p_value, 1e-3);
    EXPECT_LT(r.score, 1e-3);
}

TEST(WaldWolfowitz, AlternatingSequenceMaximizesRuns) {
    std::vector<double> seq;
    for (int i = 0; i < 50; ++i) {
        seq.push_back(i % 2 == 0 ? 1.0 : -1.0);
    }
    const auto r = randomness::wald_wolfowitz(seq);
    EXPECT_EQ(r.runs, r.n1 + r.n2);
    EXPECT_GT(r.z, 0.0);
}

TEST(WaldWolfowitz, MomentsDependOnlyOnCounts) {
    auto seq = uniform_seq(7, 200);
    const auto a = randomness::wald_wolfowitz(seq);
    Rng rng(8);
    rng.shuffle(seq);
    const auto b = randomness::wald_wolfowitz(seq);
    EXPECT_EQ(a.n1, b.n1);
    EXPECT_EQ(a.n2, b.n2);
    EXPECT_DOUBLE_EQ(a.expected_runs, b.expected_runs);
    EXPECT_DOUBLE_EQ(a.variance_runs, b.variance_runs);
}

TEST(WaldWolfowitz, AffineInvariance) {
    const auto seq = uniform_seq(11, 300);
    std::vector<double> mapped(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        mapped[i] = 3.5 * seq[i] - 2.25;
    }
    const auto a = randomness::wald_wolfowitz(seq);
    const auto b = randomness::wald_wolfowitz(mapped);
    EXPECT_EQ(a.runs, b.runs);
    EXPECT_EQ(a.n1, b.n1);
    EXPECT_EQ(a.n2, b.n2);
    EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
}

TEST(WaldWolfowitz, ConstantSequenceDegenerates) {
    const std::vector<double> seq(50, 1.0);
    EXPECT_THROW(randomness::wald_wolfowitz(seq), DegenerateSequenceError);
}

TEST(WaldWolfowitz, OneSidedSequenceDegenerates) {
    // median ties drop everything except values above it
    const std::vector<double> seq{1, 1, 1, 1, 1, 9};
    EXPECT_THROW(randomness::wald_wolfowitz(seq, relaxed()),
                 DegenerateSequenceError);
}

TEST(WaldWolfowitz, PreconditionRequires30Usable) {
    const auto seq = uniform_seq(3, 29);
    EXPECT_THROW(randomness::wald_wolfowitz(seq), InsufficientSamplesError);
    EXPECT_NO_THROW(randomness::wald_wolfowitz(uniform_seq(3, 30)));
}

TEST(CoxStuart, ExactBinomialExample) {
    const std::vector<double> seq{1, 2, 3, 4, 5, 6};
    const auto r = randomness::cox_stuart(seq, relaxed());
    EXPECT_EQ(r.c, 3u);
    EXPECT_EQ(r.m, 3u);
    EXPECT_EQ(r.s_plus, 3u);
    EXPECT_NEAR(r.p_value, 0.25, 1e-12);
    EXPECT_DOUBLE_EQ(r.score, r.p_value);
}

TEST(CoxStuart, OddLengthDropsMiddleElement) {
    const std::vector<double> seq{1, 2, 9, 4, 5};
    const auto r = randomness::cox_stuart(seq, relaxed());
    // pairs after dropping the 9: (1,4), (2,5)
    EXPECT_EQ(r.c, 2u);
    EXPECT_EQ(r.m, 2u);
    EXPECT_EQ(r.s_plus, 2u);
    EXPECT_NEAR(r.p_value, 0.5, 1e-12);
}

TEST(CoxStuart, TiedPairsAreDropped) {
    const std::vector<double> seq{1, 2, 3, 1, 5, 6};
    // pairs (1,1) tie, (2,5) +, (3,6) +
    const auto r = randomness::cox_stuart(seq, relaxed());
    EXPECT_EQ(r.m, 2u);
    EXPECT_EQ(r.s_plus, 2u);
}

TEST(CoxStuart, BinomialSymmetry) {
    const auto up = randomness::cox_stuart(ramp(60));
    std::vector<double> down = ramp(60);
    std::reverse(down.begin(), down.end());
    const auto dn = randomness::cox_stuart(down);
    EXPECT_EQ(up.s_plus, up.m);
    EXPECT_EQ(dn.s_plus, 0u);
    EXPECT_DOUBLE_EQ(up.p_value, dn.p_value);
}

TEST(CoxStuart, TrendPValueShrinksWithPairCount) {
    double prev = 1.0;
    for (std::size_t m : {5u, 10u, 20u, 40u}) {
        const auto r = randomness::cox_stuart(ramp(2 * m), relaxed());
        EXPECT_EQ(r.m, m);
        EXPECT_LT(r.p_value, prev);
        prev = r.p_value;
    }
}

TEST(CoxStuart, LongRampScoresNearZero) {
    const auto r = randomness::cox_stuart(ramp(100));
    EXPECT_LT(r.p_value, 1e-12);
}

TEST(CoxStuart, ConstantSequenceDegenerates) {
    const std::vector<double> seq(80, 2.0);
    EXPECT_THROW(randomness::cox_stuart(seq), DegenerateSequenceError);
}

TEST(CoxStuart, PreconditionRequires30Pairs) {
    EXPECT_THROW(randomness::cox_stuart(uniform_seq(5, 59)),
                 InsufficientSamplesError);
    EXPECT_NO_THROW(randomness::cox_stuart(ramp(60)));
}

TEST(CoxStuart, AffineInvariance) {
    const auto seq = uniform_seq(13, 200);
    std::vector<double> mapped(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        mapped[i] = 0.25 * seq[i] + 10.0;
    }
    const auto a = randomness::cox_stuart(seq);
    const auto b = randomness::cox_stuart(mapped);
    EXPECT_EQ(a.s_plus, b.s_plus);
    EXPECT_EQ(a.m, b.m);
    EXPECT_DOUBLE_EQ(a.p_value, b.p_value);
}

TEST(ScoreClip, ShortClipIsNotSubsampled) {
    noise::NoiseProfile p;
    p.seed = 42;
    const auto clip = noise::white_noise(p);
    ASSERT_EQ(clip.samples.size(), 32000u);
    const auto s = randomness::score_clip(clip);
    EXPECT_EQ(s.ww.n, 32000u);
    EXPECT_GE(s.ww.score, 0.0);
    EXPECT_LE(s.ww.score, 1.0);
    EXPECT_GE(s.cs.score, 0.0);
    EXPECT_LE(s.cs.score, 1.0);
}

TEST(ScoreClip, LongClipStrides) {
    noise::NoiseProfile p;
    p.duration_seconds = 10.0;
    p.sample_rate = 48000;
    p.seed = 43;
    const auto clip = noise::white_noise(p);
    ASSERT_EQ(clip.samples.size(), 480000u);
    const auto s = randomness::score_clip(clip);
    EXPECT_EQ(s.ww.n, 96000u);  // stride 5
}

TEST(ScoreClip, EmptyClipRejected) {
    audio::AudioClip clip;
    clip.sample_rate = 16000;
    EXPECT_THROW(randomness::score_clip(clip), EmptyAudioError);
}

TEST(ScoreDataset, MeansAndSkipCounts) {
    noise::NoiseProfile p;
    p.duration_seconds = 0.5;
    std::vector<audio::AudioClip> clips;
    p.seed = 1;
    clips.push_back(noise::white_noise(p));
    p.seed = 2;
    clips.push_back(noise::white_noise(p));
    audio::AudioClip flat;
    flat.sample_rate = 16000;
    flat.samples.assign(8000, 100);
    clips.push_back(flat);

    const auto report = randomness::score_dataset(clips, "original");
    EXPECT_EQ(report.condition, "original");
    EXPECT_EQ(report.scored_count, 2u);
    EXPECT_EQ(report.skipped_degenerate, 1u);
    const double expect_ww =
        (report.clips[0].ww.score + report.clips[1].ww.score) / 2.0;
    EXPECT_DOUBLE_EQ(report.mean_ww_score, expect_ww);
    EXPECT_GE(report.mean_cs_score, 0.0);
    EXPECT_LE(report.mean_cs_score, 1.0);
}

TEST(ScoreDataset, SingleClipMeanIsItsScore) {
    noise::NoiseProfile p;
    p.duration_seconds = 0.5;
    p.seed = 9;
    const std::vector<audio::AudioClip> clips{noise::white_noise(p)};
    const auto report = randomness::score_dataset(clips, "original");
    EXPECT_EQ(report.scored_count, 1u);
    EXPECT_DOUBLE_EQ(report.mean_ww_score, report.clips[0].ww.score);
    EXPECT_DOUBLE_EQ(report.mean_cs_score, report.clips[0].cs.score);
}

TEST(ScoreDataset, AllDegenerateIsAnError) {
    audio::AudioClip flat;
    flat.sample_rate = 16000;
    flat.samples.assign(4000, -7);
    const std::vector<audio::AudioClip> clips{flat, flat};
    EXPECT_THROW(randomness::score_dataset(clips, "original"),
                 EmptyDatasetError);
}

TEST(ScoreDataset, MonotoneRampsScoreNearZero) {
    std::vector<audio::AudioClip> clips;
    for (int k = 0; k < 3; ++k) {
        audio::AudioClip c;
        c.sample_rate = 16000;
        for (int i = 0; i < 2000; ++i) {
            c.samples.push_back(static_cast<std::int16_t>(i - 1000 + k));
        }
        clips.push_back(c);
    }
    const auto report = randomness::score_dataset(clips, "original");
    EXPECT_LT(report.mean_ww_score, 1e-3);
    EXPECT_LT(report.mean_cs_score, 1e-3);
}

// Quick null-distribution sanity at a fixed seed; the full 1000-sequence
// calibration lives in the acceptance suite.
TEST(NullCalibration, UniformSequencesScoreUniformly) {
    const int reps = 300;
    double mean_ww = 0.0;
    int below_05 = 0;
    for (int i = 0; i < reps; ++i) {
        const auto seq = uniform_seq(1000 + i, 2000);
        const auto r = randomness::wald_wolfowitz(seq);
        mean_ww += r.score;
        if (r.p_value < 0.05) ++below_05;
    }
    mean_ww /= reps;
    EXPECT_GT(mean_ww, 0.35);
    EXPECT_LT(mean_ww, 0.65);
    const double frac = static_cast<double>(below_05) / reps;
    EXPECT_GT(frac, 0.005);
    EXPECT_LT(frac, 0.12);
}

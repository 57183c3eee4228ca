#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "soundmask/attacks.hpp"
#include "soundmask/audio.hpp"
#include "soundmask/datasets.hpp"
#include "soundmask/evaluation.hpp"
#include "soundmask/gan.hpp"
#include "soundmask/noise.hpp"
#include "soundmask/randomness.hpp"

namespace soundmask::pipeline {

// End-to-end run on the hermetic synthetic corpora: three scenarios (a
// 4-class multiclass, a multilabel, and a command-classification stand-in
// used for semantic preservation), three attack families each, one GAN
// trained against a white-noise target, and masking at a heavy and a light
// SNR. Everything derives from the one master seed.
struct DemoConfig {
    std::uint64_t seed = 7;
    int per_class = 12;          // clips per class, 4-class scenario
    double clip_seconds = 1.0;
    double snr_heavy_db = -10.0;  // privacy-strength masking
    double snr_light_db = 10.0;   // light masking
    int gan_steps = 200;
    int gan_base_channels = 32;
    int attack_epochs = 15;
    int attack_batch = 8;
    int attack_patience = 5;
    std::string out_dir;  // report and artifacts land here
};

inline void validate(const DemoConfig& cfg) {
    if (cfg.per_class < 4) throw ConfigError("demo: per_class too small");
    if (!(cfg.clip_seconds > 0.0)) throw ConfigError("demo: bad clip length");
    if (cfg.snr_heavy_db >= cfg.snr_light_db) {
        throw ConfigError("demo: heavy SNR must be below light SNR");
    }
    if (cfg.gan_steps < 1 || cfg.attack_epochs < 1 || cfg.attack_batch < 1 ||
        cfg.attack_patience < 0) {
        throw ConfigError("demo: bad training budget");
    }
    if (cfg.out_dir.empty()) throw ConfigError("demo: out_dir required");
}

struct DemoOutcome {
    evaluation::EvaluationReport report;
    double gan_best_flatness = 0.0;
    std::string gan_checkpoint_path;
    std::vector<std::string> files;  // everything written, report first
};

namespace detail {

inline std::uint64_t chain(std::uint64_t root, std::uint64_t a,
                           std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(derive_seed(root, a), b), c);
}

inline std::string snr_label(double snr_db) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%+g", snr_db);
    return buf;
}

inline std::string num_label(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct ScenarioRun {
    datasets::ScenarioSpec spec;
    datasets::SplitResult splits;
    std::vector<datasets::LabeledClip> eval_set;  // val + test
    std::map<std::string, attacks::TrainedAttack> trained;  // per family
};

}  // namespace detail

// The hermetic scenarios share one recipe so the demo and any standalone
// attack run build identical corpora from the same seed.
struct ScenarioBundle {
    datasets::ScenarioSpec spec;
    datasets::SplitResult splits;
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"SYNTH-4", "SYNTH-ML",
                                                "SYNTH-SPF"};
    return names;
}

inline ScenarioBundle make_synth_scenario(const std::string& name,
                                          int per_class, double clip_seconds,
                                          std::uint64_t seed) {
    ScenarioBundle b;
    if (name == "SYNTH-4" || name == "SYNTH-SPF") {
        datasets::SynthSpec ss;
        ss.classes = name == "SYNTH-4" ? 4 : 6;
        ss.per_class =
            name == "SYNTH-4" ? per_class : std::max(8, per_class - 2);
        ss.duration_seconds = clip_seconds;
        ss.seed = seed;
        auto corpus = datasets::synth_corpus(ss);
        b.spec = datasets::synth_spec(ss.classes, seed);
        b.spec.name = name;
        b.spec.duration_seconds = clip_seconds;
        b.splits = datasets::split(corpus, b.spec);
    } else if (name == "SYNTH-ML") {
        auto corpus = datasets::synth_multilabel_corpus(
            std::max(7, per_class / 2), clip_seconds, 16000, seed);
        b.spec = datasets::synth_multilabel_spec(seed);
        b.spec.name = "SYNTH-ML";
        b.spec.duration_seconds = clip_seconds;
        b.splits = datasets::split(corpus, b.spec);
    } else {
        throw ConfigError("unknown scenario " + name);
    }
    return b;
}

inline DemoOutcome run_demo(const DemoConfig& cfg) {
    validate(cfg);
    const std::uint64_t seed_data = derive_seed(cfg.seed, 1);
    const std::uint64_t seed_gan = derive_seed(cfg.seed, 2);
    const std::uint64_t seed_attack = derive_seed(cfg.seed, 3);
    const std::uint64_t seed_noise = derive_seed(cfg.seed, 4);
    const std::uint64_t seed_latent = derive_seed(cfg.seed, 5);
    const int frames = static_cast<int>(cfg.clip_seconds * 100.0) - 2;

    std::filesystem::create_directories(cfg.out_dir);
    DemoOutcome out;

    // --- corpora ------------------------------------------------------
    std::vector<detail::ScenarioRun> runs(scenario_names().size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto bundle =
            make_synth_scenario(scenario_names()[i], cfg.per_class,
                                cfg.clip_seconds, derive_seed(seed_data, i));
        runs[i].spec = std::move(bundle.spec);
        runs[i].splits = std::move(bundle.splits);
    }
    for (auto& run : runs) {
        run.eval_set = run.splits.val;
        run.eval_set.insert(run.eval_set.end(), run.splits.test.begin(),
                            run.splits.test.end());
    }

    // --- masking noise ------------------------------------------------
    gan::GanConfig gc;
    gc.base_channels = cfg.gan_base_channels;
    gc.steps = cfg.gan_steps;
    gc.lr_g = 4e-4;
    gc.lr_d = 2e-4;
    gc.flatness_every = 10;
    gc.seed = seed_gan;
    const gan::GanTrainResult gr =
        gan::train(gan::white_target_provider(gc.sample_length,
                                              derive_seed(seed_gan, 100)),
                   gc);
    out.gan_best_flatness = gr.best_flatness;
    out.gan_checkpoint_path =
        (std::filesystem::path(cfg.out_dir) / "gan_checkpoint.bin").string();
    gan::save_checkpoint(gr.checkpoint, out.gan_checkpoint_path);
    gan::Sampler sampler(gr.checkpoint);

    std::string checkpoint_hash;
    {
        std::ifstream f(out.gan_checkpoint_path, std::ios::binary);
        const std::string bytes((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
        checkpoint_hash = evaluation::hex64(evaluation::fnv1a64(bytes));
    }

    // per-clip noise, deterministic in (scenario, kind, snr, clip)
    auto masked_clips = [&](std::size_t scenario_idx, const std::string& kind,
                            double snr_db,
                            const std::vector<datasets::LabeledClip>& clips) {
        auto mixed = clips;
        const std::uint64_t snr_key =
            static_cast<std::uint64_t>(snr_db * 10.0 + 1000000.0);
        for (std::size_t i = 0; i < mixed.size(); ++i) {
            audio::AudioClip noise_clip;
            if (kind == "white") {
                noise::NoiseProfile p;
                p.duration_seconds = cfg.clip_seconds;
                p.seed = detail::chain(seed_noise, scenario_idx, snr_key, i);
                noise_clip = noise::white_noise(p);
            } else {
                const gan::LatentVector z = gan::make_latent(
                    gr.checkpoint.config.latent_dim,
                    detail::chain(seed_latent, scenario_idx, snr_key, i));
                noise_clip = sampler.sample(z, -20.0);
            }
            mixed[i].clip = audio::mix(mixed[i].clip, noise_clip,
                                       audio::GainSpec::snr(snr_db));
        }
        return mixed;
    };

    // --- attacks --------------------------------------------------------
    const std::vector<attacks::Family> families{
        attacks::Family::cnn, attacks::Family::rnn, attacks::Family::crnn};
    std::vector<evaluation::LabeledResult> clean_results;
    std::vector<evaluation::LabeledResult> masked_results;  // heavy SNR
    const std::vector<double> snr_grid{cfg.snr_heavy_db, cfg.snr_light_db};
    const std::vector<std::string> kinds{"white", "gan"};

    // masked eval sets are reused across families; build once per scenario
    std::map<std::string,
             std::map<std::string,
                      std::map<std::string,
                               std::vector<datasets::LabeledClip>>>>
        mixed_sets;  // scenario -> kind -> snr label -> clips
    for (std::size_t si = 0; si < runs.size(); ++si) {
        for (const auto& kind : kinds) {
            for (double snr : snr_grid) {
                mixed_sets[runs[si].spec.name][kind][detail::snr_label(snr)] =
                    masked_clips(si, kind, snr, runs[si].eval_set);
            }
        }
    }

    for (std::size_t si = 0; si < runs.size(); ++si) {
        auto& run = runs[si];
        const bool multilabel =
            run.spec.task_type == datasets::TaskType::multilabel;
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
            attacks::AttackModelSpec spec;
            spec.family = families[fi];
            spec.task_type = run.spec.task_type;
            spec.class_count =
                multilabel
                    ? static_cast<int>(run.spec.tasks.size())
                    : static_cast<int>(
                          run.spec.classes.at(run.spec.tasks[0]).size());
            spec.frames = frames;
            spec.seed = detail::chain(seed_attack, si, fi, 0);
            attacks::AttackModel model(spec);
            attacks::TrainConfig tc;
            tc.epochs = cfg.attack_epochs;
            tc.batch = cfg.attack_batch;
            tc.patience = cfg.attack_patience;
            auto trained = attacks::train_attack(model, run.spec,
                                                 run.splits.train,
                                                 run.splits.val, tc);
            const std::string family = attacks::to_string(families[fi]);
            clean_results.push_back(
                {run.spec.name, family,
                 attacks::evaluate(trained, run.eval_set, "clean")});
            for (const auto& kind : kinds) {
                for (double snr : snr_grid) {
                    const auto& clips =
                        mixed_sets[run.spec.name][kind][detail::snr_label(
                            snr)];
                    auto res =
                        attacks::evaluate(trained, clips, "+" + kind);
                    out.report
                        .mia_by_snr[kind][detail::snr_label(snr)]
                        .cells[run.spec.name][family] = res.accuracy;
                    if (snr == cfg.snr_heavy_db) {
                        masked_results.push_back(
                            {run.spec.name, family, std::move(res)});
                    }
                }
            }
            run.trained.emplace(family, std::move(trained));
        }
    }

    out.report.bia = evaluation::compute_bia(clean_results);
    out.report.mitigation =
        evaluation::compute_mia(clean_results, masked_results);

    // --- semantic preservation on the command stand-in ------------------
    // measured at the light SNR, where semantics can survive at all
    {
        const auto& run = runs[2];
        const auto& trained = run.trained.at("cnn");
        const double clean_acc =
            attacks::evaluate(trained, run.eval_set, "clean").accuracy;
        std::map<std::string, double> masked_acc;
        for (const auto& kind : kinds) {
            const auto& clips =
                mixed_sets.at(run.spec.name)
                    .at(kind)
                    .at(detail::snr_label(cfg.snr_light_db));
            masked_acc[kind] =
                attacks::evaluate(trained, clips, "+" + kind).accuracy;
        }
        out.report.spf = evaluation::compute_spf(clean_acc, masked_acc);
    }

    // --- randomness ------------------------------------------------------
    auto plain_clips = [](const std::vector<datasets::LabeledClip>& clips) {
        std::vector<audio::AudioClip> out_clips;
        for (const auto& c : clips) out_clips.push_back(c.clip);
        return out_clips;
    };
    std::map<std::string, std::vector<audio::AudioClip>> pooled;
    std::map<std::string, std::map<std::string, double>> scenario_ww;
    for (std::size_t si = 0; si < runs.size(); ++si) {
        const auto& name = runs[si].spec.name;
        const auto originals = plain_clips(runs[si].eval_set);
        pooled["original"].insert(pooled["original"].end(),
                                  originals.begin(), originals.end());
        for (const auto& kind : kinds) {
            const auto mixed = plain_clips(
                mixed_sets.at(name).at(kind).at(
                    detail::snr_label(cfg.snr_heavy_db)));
            scenario_ww[name][kind] =
                randomness::score_dataset(mixed, "+" + kind)
                    .mean_ww_score;
            auto& pool = pooled["+" + kind];
            pool.insert(pool.end(), mixed.begin(), mixed.end());
        }
    }
    // the raw noise streams themselves, 16 draws each
    {
        std::vector<audio::AudioClip> white_only, gan_only;
        for (int i = 0; i < 16; ++i) {
            noise::NoiseProfile p;
            p.duration_seconds = cfg.clip_seconds;
            p.seed = detail::chain(seed_noise, 99, 0,
                                   static_cast<std::size_t>(i));
            white_only.push_back(noise::white_noise(p));
            gan_only.push_back(sampler.sample(
                gan::make_latent(gr.checkpoint.config.latent_dim,
                                 detail::chain(seed_latent, 99, 0,
                                               static_cast<std::size_t>(i))),
                -20.0));
        }
        pooled["noise-white"] = std::move(white_only);
        pooled["noise-gan"] = std::move(gan_only);
    }
    for (const auto& [condition, clips] : pooled) {
        out.report.randomness[condition] = evaluation::summarize(
            randomness::score_dataset(clips, condition));
    }

    // --- rank correlation -------------------------------------------------
    {
        std::vector<evaluation::RtmrPair> pairs;
        for (const auto& run : runs) {
            for (const auto& kind : kinds) {
                const auto& row =
                    out.report.mitigation.delta.at(kind).cells.at(
                        run.spec.name);
                double mean_delta = 0.0;
                for (const auto& [family, d] : row) mean_delta += d;
                mean_delta /= static_cast<double>(row.size());
                pairs.push_back({run.spec.name + "/" + kind,
                                 scenario_ww.at(run.spec.name).at(kind),
                                 mean_delta});
            }
        }
        out.report.rtmr = evaluation::compute_rtmr(pairs);
    }

    // --- directional claims ------------------------------------------------
    out.report.claims.push_back(evaluation::make_claim(
        "randomness_gan_vs_white",
        "mean ww score of gan-masked mixes > white-masked mixes",
        out.report.randomness.at("+gan").mean_ww_score,
        out.report.randomness.at("+white").mean_ww_score));
    out.report.claims.push_back(evaluation::make_claim(
        "delta_gan_vs_white", "max mitigation delta gan > white",
        out.report.mitigation.max_delta.at("gan"),
        out.report.mitigation.max_delta.at("white")));
    out.report.claims.push_back(evaluation::make_claim(
        "spf_gan_vs_white", "semantic preservation gan > white",
        out.report.spf.values.at("gan"), out.report.spf.values.at("white")));
    out.report.claims.push_back(evaluation::make_claim(
        "rtmr_positive", "randomness-mitigation rank correlation > 0",
        out.report.rtmr.coefficient, 0.0));

    // --- provenance and emission -------------------------------------------
    auto& prov = out.report.provenance;
    prov.seeds = {{"master", cfg.seed},     {"data", seed_data},
                  {"gan", seed_gan},        {"attack", seed_attack},
                  {"noise", seed_noise},    {"latent", seed_latent}};
    prov.snr_db = snr_grid;
    prov.gan_steps = cfg.gan_steps;
    prov.gan_checkpoint_hash = checkpoint_hash;
    prov.extra = {
        {"scenarios", "SYNTH-4,SYNTH-ML,SYNTH-SPF"},
        {"families", "cnn,rnn,crnn"},
        {"per_class", std::to_string(cfg.per_class)},
        {"clip_seconds", detail::num_label(cfg.clip_seconds)},
        {"gan_base_channels", std::to_string(cfg.gan_base_channels)},
        {"attack_epochs", std::to_string(cfg.attack_epochs)},
        {"attack_batch", std::to_string(cfg.attack_batch)},
        {"attack_patience", std::to_string(cfg.attack_patience)},
        {"spf_snr_db", detail::snr_label(cfg.snr_light_db)},
    };

    out.files = evaluation::emit_report(out.report, cfg.out_dir);
    out.files.push_back(out.gan_checkpoint_path);
    return out;
}

}  // namespace soundmask::pipeline

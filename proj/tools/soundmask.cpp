// Pipeline front end. Each masking stage is a subcommand; `demo` runs the
// whole chain hermetically on the synthetic corpora. Every subcommand
// leaves a provenance block beside its artifacts, nothing consults the
// clock or the environment, and identical invocations write identical
// bytes. Exit codes: 0 success, 1 execution failure, 2 usage.
#include "soundmask/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace sm = soundmask;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw sm::IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f),
            std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw sm::IoError("cannot write " + path.string());
    f << text;
}

void write_json_file(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string file_hash(const std::string& path) {
    return sm::evaluation::hex64(sm::evaluation::fnv1a64(slurp(path)));
}

fs::path ensure_out_dir(const std::string& out) {
    const fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_provenance(const fs::path& out_dir, const std::string& command,
                      const json& config, const json& seeds) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["seeds"] = seeds;
    write_json_file(out_dir / "provenance.json", j);
}

std::vector<fs::path> wav_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw sm::IoError(dir + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".wav") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string indexed_name(const std::string& stem, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03zu.wav", stem.c_str(), i);
    return buf;
}

// ---------------------------------------------------------------------------

void add_ingest(CLI::App& app) {
    struct Opts {
        std::string in, scenario, out;
        std::size_t cap = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "ingest", "read a labeled corpus into canonical clips");
    sub->add_option("--in", o->in, "corpus root directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("--scenario", o->scenario, "corpus layout adapter")
        ->required()
        ->check(CLI::IsMember({"MGI", "UDI", "SEI", "SPF"}));
    sub->add_option("--cap-per-class", o->cap,
                    "keep at most this many clips per joint label (0 = all)")
        ->capture_default_str();
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        sm::datasets::ScenarioSpec spec;
        if (o->scenario == "MGI") spec = sm::datasets::mgi_spec();
        if (o->scenario == "UDI") spec = sm::datasets::udi_spec();
        if (o->scenario == "SEI") spec = sm::datasets::sei_spec();
        if (o->scenario == "SPF") spec = sm::datasets::spf_spec();
        const auto result = sm::datasets::ingest(o->in, spec, o->cap);

        const fs::path out = ensure_out_dir(o->out);
        fs::create_directories(out / "clips");
        json rows = json::array();
        for (std::size_t i = 0; i < result.clips.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "%05zu.wav", i);
            const std::string rel = std::string("clips/") + name;
            sm::audio::save_wav(result.clips[i].clip, (out / rel).string());
            rows.push_back({{"file", rel},
                            {"labels", result.clips[i].labels},
                            {"source_id", result.clips[i].source_id}});
        }
        json manifest;
        manifest["scenario"] = spec.name;
        manifest["files_read"] = result.files_read;
        manifest["skipped_labels"] = result.skipped_labels;
        manifest["skipped_missing"] = result.skipped_missing;
        manifest["clips"] = rows;
        write_json_file(out / "manifest.json", manifest);
        write_provenance(out, "ingest",
                         {{"in", o->in},
                          {"scenario", o->scenario},
                          {"cap_per_class", o->cap}},
                         json::object());
        std::printf(
            "ingested %zu clips from %zu files (skipped %zu labels, %zu "
            "missing)\n",
            result.clips.size(), result.files_read, result.skipped_labels,
            result.skipped_missing);
    });
}

void add_gen_noise(CLI::App& app) {
    struct Opts {
        std::string kind = "white", checkpoint, out;
        std::size_t count = 1;
        double duration = 2.0, peak_dbfs = -20.0;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub =
        app.add_subcommand("gen-noise", "write masking-noise wav files");
    sub->add_option("--kind", o->kind, "noise source")
        ->check(CLI::IsMember({"white", "gan"}))
        ->capture_default_str();
    sub->add_option("--count", o->count, "number of files")
        ->capture_default_str();
    sub->add_option("--duration", o->duration, "seconds per file (white)")
        ->capture_default_str();
    sub->add_option("--peak-dbfs", o->peak_dbfs, "peak level")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "root seed; file i uses derive(seed, i)")
        ->capture_default_str();
    sub->add_option("--checkpoint", o->checkpoint,
                    "generator checkpoint (gan)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        if (o->kind == "gan" && o->checkpoint.empty()) {
            throw CLI::RequiredError("--checkpoint (with --kind gan)");
        }
        const fs::path out = ensure_out_dir(o->out);
        json config{{"kind", o->kind},
                    {"count", o->count},
                    {"peak_dbfs", o->peak_dbfs}};
        if (o->kind == "white") {
            config["duration"] = o->duration;
            for (std::size_t i = 0; i < o->count; ++i) {
                sm::noise::NoiseProfile p;
                p.duration_seconds = o->duration;
                p.peak_dbfs = o->peak_dbfs;
                p.seed = sm::derive_seed(o->seed, i);
                sm::audio::save_wav(sm::noise::white_noise(p),
                                    (out / indexed_name("white", i)).string());
            }
        } else {
            const auto ck = sm::gan::load_checkpoint(o->checkpoint);
            sm::gan::Sampler sampler(ck);
            config["checkpoint"] = o->checkpoint;
            config["checkpoint_hash"] = file_hash(o->checkpoint);
            for (std::size_t i = 0; i < o->count; ++i) {
                const auto z = sm::gan::make_latent(
                    ck.config.latent_dim, sm::derive_seed(o->seed, i));
                sm::audio::save_wav(sampler.sample(z, o->peak_dbfs),
                                    (out / indexed_name("gan", i)).string());
            }
        }
        write_provenance(out, "gen-noise", config, {{"root", o->seed}});
        std::printf("wrote %zu %s-noise files to %s\n", o->count,
                    o->kind.c_str(), o->out.c_str());
    });
}

void add_train_gan(CLI::App& app) {
    struct Opts {
        sm::gan::GanConfig cfg;
        std::string out;
        std::uint64_t seed = 1;
    };
    auto o = std::make_shared<Opts>();
    // desk-scale defaults; the module's own defaults target a wider model
    o->cfg.base_channels = 32;
    o->cfg.lr_g = 4e-4;
    o->cfg.flatness_every = 10;
    auto* sub = app.add_subcommand(
        "train-gan", "train the noise generator against a white target");
    sub->add_option("--steps", o->cfg.steps, "training steps")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "training seed")->capture_default_str();
    sub->add_option("--base-channels", o->cfg.base_channels,
                    "generator width (multiple of 32)")
        ->capture_default_str();
    sub->add_option("--batch", o->cfg.batch_size, "batch size")
        ->capture_default_str();
    sub->add_option("--lr-g", o->cfg.lr_g, "generator learning rate")
        ->capture_default_str();
    sub->add_option("--lr-d", o->cfg.lr_d, "discriminator learning rate")
        ->capture_default_str();
    sub->add_option("--flatness-every", o->cfg.flatness_every,
                    "steps between spectral-flatness probes")
        ->capture_default_str();
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        o->cfg.seed = o->seed;
        const std::uint64_t target_seed = sm::derive_seed(o->seed, 100);
        const auto result = sm::gan::train(
            sm::gan::white_target_provider(o->cfg.sample_length, target_seed),
            o->cfg);
        const fs::path out = ensure_out_dir(o->out);
        const std::string ck_path = (out / "gan_checkpoint.bin").string();
        sm::gan::save_checkpoint(result.checkpoint, ck_path);
        json trace;
        trace["g_loss"] = result.trace.g_loss;
        trace["d_loss"] = result.trace.d_loss;
        trace["d_real_mean"] = result.trace.d_real_mean;
        trace["d_fake_mean"] = result.trace.d_fake_mean;
        trace["best_flatness"] = result.best_flatness;
        trace["best_step"] = result.best_step;
        write_json_file(out / "trace.json", trace);
        write_provenance(out, "train-gan",
                         {{"steps", o->cfg.steps},
                          {"base_channels", o->cfg.base_channels},
                          {"batch", o->cfg.batch_size},
                          {"lr_g", o->cfg.lr_g},
                          {"lr_d", o->cfg.lr_d},
                          {"flatness_every", o->cfg.flatness_every},
                          {"checkpoint_hash", file_hash(ck_path)}},
                         {{"gan", o->seed}, {"target", target_seed}});
        std::printf("best flatness %.4f at step %lld; wrote %s\n",
                    result.best_flatness,
                    static_cast<long long>(result.best_step), ck_path.c_str());
    });
}

void add_measure_randomness(CLI::App& app) {
    struct Opts {
        std::string in, condition = "unlabeled", out;
        std::size_t max_values = 100000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "measure-randomness", "run the runs and trend tests over wav files");
    sub->add_option("--in", o->in, "directory of wav files")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("--condition", o->condition, "label for the report")
        ->capture_default_str();
    sub->add_option("--max-values", o->max_values,
                    "stride long clips down to at most this many samples")
        ->capture_default_str();
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        const auto files = wav_files(o->in);
        if (files.empty()) throw sm::IoError(o->in + ": no wav files");
        json scored = json::array();
        json skipped = json::array();
        double ww_acc = 0.0, cs_acc = 0.0;
        for (const auto& path : files) {
            const auto clip = sm::audio::load_wav(path.string());
            try {
                const auto s =
                    sm::randomness::score_clip(clip, o->max_values);
                scored.push_back({{"file", path.filename().string()},
                                  {"ww_score", s.ww.score},
                                  {"ww_z", s.ww.z},
                                  {"ww_runs", s.ww.runs},
                                  {"cs_score", s.cs.score},
                                  {"cs_s_plus", s.cs.s_plus}});
                ww_acc += s.ww.score;
                cs_acc += s.cs.score;
            } catch (const sm::DegenerateSequenceError&) {
                skipped.push_back(path.filename().string());
            } catch (const sm::InsufficientSamplesError&) {
                skipped.push_back(path.filename().string());
            }
        }
        json report;
        report["condition"] = o->condition;
        report["scored"] = scored;
        report["scored_count"] = scored.size();
        report["skipped_degenerate"] = skipped;
        report["skipped_count"] = skipped.size();
        if (!scored.empty()) {
            report["mean_ww_score"] = ww_acc / scored.size();
            report["mean_cs_score"] = cs_acc / scored.size();
        }
        const fs::path out = ensure_out_dir(o->out);
        write_json_file(out / "randomness.json", report);
        write_provenance(out, "measure-randomness",
                         {{"in", o->in},
                          {"condition", o->condition},
                          {"max_values", o->max_values}},
                         json::object());
        std::printf("scored %zu clips, skipped %zu degenerate\n",
                    scored.size(), skipped.size());
    });
}

void add_attack(CLI::App& app) {
    struct Opts {
        std::string scenario = "SYNTH-4", family, condition = "clean";
        std::string checkpoint, out;
        double snr_db = -10.0, clip_seconds = 1.0;
        std::uint64_t seed = 7;
        int per_class = 12, epochs = 15, batch = 8, patience = 5;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "attack", "train an inference model and evaluate it in a condition");
    sub->add_option("--scenario", o->scenario, "synthetic scenario")
        ->check(CLI::IsMember(sm::pipeline::scenario_names()))
        ->capture_default_str();
    sub->add_option("--family", o->family, "model family")
        ->required()
        ->check(CLI::IsMember({"cnn", "rnn", "crnn"}));
    sub->add_option("--condition", o->condition, "evaluation condition")
        ->check(CLI::IsMember({"clean", "white", "gan"}))
        ->capture_default_str();
    sub->add_option("--snr-db", o->snr_db, "masking SNR for white/gan")
        ->capture_default_str();
    sub->add_option("--checkpoint", o->checkpoint,
                    "generator checkpoint (condition gan)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o->seed, "root seed")->capture_default_str();
    sub->add_option("--per-class", o->per_class, "clips per class")
        ->capture_default_str();
    sub->add_option("--clip-seconds", o->clip_seconds, "clip length")
        ->capture_default_str();
    sub->add_option("--epochs", o->epochs, "training epochs")
        ->capture_default_str();
    sub->add_option("--batch", o->batch, "batch size")->capture_default_str();
    sub->add_option("--patience", o->patience, "early-stop patience")
        ->capture_default_str();
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        if (o->condition == "gan" && o->checkpoint.empty()) {
            throw CLI::RequiredError("--checkpoint (with --condition gan)");
        }
        const std::uint64_t seed_data = sm::derive_seed(o->seed, 0);
        const std::uint64_t seed_model = sm::derive_seed(o->seed, 1);
        const std::uint64_t seed_noise = sm::derive_seed(o->seed, 2);
        const auto bundle = sm::pipeline::make_synth_scenario(
            o->scenario, o->per_class, o->clip_seconds, seed_data);

        sm::attacks::AttackModelSpec spec;
        spec.family = sm::attacks::family_from(o->family);
        spec.task_type = bundle.spec.task_type;
        const bool multilabel =
            bundle.spec.task_type == sm::datasets::TaskType::multilabel;
        spec.class_count =
            multilabel ? static_cast<int>(bundle.spec.tasks.size())
                       : static_cast<int>(
                             bundle.spec.classes.at(bundle.spec.tasks[0])
                                 .size());
        spec.frames = static_cast<int>(o->clip_seconds * 100.0) - 2;
        spec.seed = seed_model;
        sm::attacks::AttackModel model(spec);
        sm::attacks::TrainConfig tc;
        tc.epochs = o->epochs;
        tc.batch = o->batch;
        tc.patience = o->patience;
        const auto trained = sm::attacks::train_attack(
            model, bundle.spec, bundle.splits.train, bundle.splits.val, tc);

        auto eval_set = bundle.splits.val;
        eval_set.insert(eval_set.end(), bundle.splits.test.begin(),
                        bundle.splits.test.end());
        std::string label = "clean";
        if (o->condition != "clean") {
            label = "+" + o->condition;
            std::unique_ptr<sm::gan::Sampler> sampler;
            sm::gan::GanCheckpoint ck;
            if (o->condition == "gan") {
                ck = sm::gan::load_checkpoint(o->checkpoint);
                sampler = std::make_unique<sm::gan::Sampler>(ck);
            }
            for (std::size_t i = 0; i < eval_set.size(); ++i) {
                sm::audio::AudioClip noise_clip;
                if (o->condition == "white") {
                    sm::noise::NoiseProfile p;
                    p.duration_seconds = o->clip_seconds;
                    p.seed = sm::derive_seed(seed_noise, i);
                    noise_clip = sm::noise::white_noise(p);
                } else {
                    const auto z = sm::gan::make_latent(
                        ck.config.latent_dim, sm::derive_seed(seed_noise, i));
                    noise_clip = sampler->sample(z, -20.0);
                }
                eval_set[i].clip =
                    sm::audio::mix(eval_set[i].clip, noise_clip,
                                   sm::audio::GainSpec::snr(o->snr_db));
            }
        }
        const auto result = sm::attacks::evaluate(trained, eval_set, label);

        const fs::path out = ensure_out_dir(o->out);
        sm::attacks::save_attack(trained,
                                 (out / "attack_checkpoint.bin").string());
        json rj;
        rj["scenario"] = o->scenario;
        rj["family"] = o->family;
        rj["condition"] = result.condition;
        rj["accuracy"] = result.accuracy;
        rj["support"] = result.support;
        rj["best_val_accuracy"] = trained.best_val_accuracy;
        rj["epochs_run"] = trained.history.size();
        if (multilabel) {
            rj["per_label"] = result.per_label;
        } else {
            rj["per_class"] = result.per_class;
        }
        write_json_file(out / "result.json", rj);
        json config{{"scenario", o->scenario},
                    {"family", o->family},
                    {"condition", o->condition},
                    {"per_class", o->per_class},
                    {"clip_seconds", o->clip_seconds},
                    {"epochs", o->epochs},
                    {"batch", o->batch},
                    {"patience", o->patience}};
        if (o->condition != "clean") config["snr_db"] = o->snr_db;
        if (!o->checkpoint.empty()) {
            config["checkpoint"] = o->checkpoint;
            config["checkpoint_hash"] = file_hash(o->checkpoint);
        }
        write_provenance(out, "attack", config,
                         {{"root", o->seed},
                          {"data", seed_data},
                          {"model", seed_model},
                          {"noise", seed_noise}});
        std::printf("%s/%s %s accuracy %.4f over %d clips\n",
                    o->scenario.c_str(), o->family.c_str(), label.c_str(),
                    result.accuracy, result.support);
    });
}

void add_mitigate(CLI::App& app) {
    struct Opts {
        std::string in, kind = "white", checkpoint, out;
        double snr_db = -10.0;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "mitigate", "mix masking noise into wav files at a target SNR");
    sub->add_option("--in", o->in, "directory of wav files")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("--kind", o->kind, "noise source")
        ->check(CLI::IsMember({"white", "gan"}))
        ->capture_default_str();
    sub->add_option("--snr-db", o->snr_db, "signal-to-noise ratio")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "root seed; file i uses derive(seed, i)")
        ->capture_default_str();
    sub->add_option("--checkpoint", o->checkpoint,
                    "generator checkpoint (gan)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        if (o->kind == "gan" && o->checkpoint.empty()) {
            throw CLI::RequiredError("--checkpoint (with --kind gan)");
        }
        const auto files = wav_files(o->in);
        if (files.empty()) throw sm::IoError(o->in + ": no wav files");
        std::unique_ptr<sm::gan::Sampler> sampler;
        sm::gan::GanCheckpoint ck;
        if (o->kind == "gan") {
            ck = sm::gan::load_checkpoint(o->checkpoint);
            sampler = std::make_unique<sm::gan::Sampler>(ck);
        }
        const fs::path out = ensure_out_dir(o->out);
        json names = json::array();
        for (std::size_t i = 0; i < files.size(); ++i) {
            const auto clip = sm::audio::load_wav(files[i].string());
            sm::audio::AudioClip noise_clip;
            if (o->kind == "white") {
                sm::noise::NoiseProfile p;
                p.duration_seconds = clip.duration_seconds();
                p.sample_rate = clip.sample_rate;
                p.seed = sm::derive_seed(o->seed, i);
                noise_clip = sm::noise::white_noise(p);
            } else {
                const auto z = sm::gan::make_latent(
                    ck.config.latent_dim, sm::derive_seed(o->seed, i));
                noise_clip = sampler->sample(z, -20.0);
            }
            const auto masked = sm::audio::mix(
                clip, noise_clip, sm::audio::GainSpec::snr(o->snr_db));
            sm::audio::save_wav(masked,
                                (out / files[i].filename()).string());
            names.push_back(files[i].filename().string());
        }
        json config{{"in", o->in},
                    {"kind", o->kind},
                    {"snr_db", o->snr_db},
                    {"files", names}};
        if (!o->checkpoint.empty()) {
            config["checkpoint"] = o->checkpoint;
            config["checkpoint_hash"] = file_hash(o->checkpoint);
        }
        write_provenance(out, "mitigate", config, {{"root", o->seed}});
        std::printf("masked %zu clips at %+.1f dB SNR with %s noise\n",
                    files.size(), o->snr_db, o->kind.c_str());
    });
}

void add_evaluate(CLI::App& app) {
    struct Opts {
        std::string in, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "evaluate", "fold attack results into accuracy and mitigation tables");
    sub->add_option("--in", o->in,
                    "directory searched recursively for result.json files")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        std::vector<fs::path> inputs;
        for (const auto& e : fs::recursive_directory_iterator(o->in)) {
            if (e.is_regular_file() && e.path().filename() == "result.json") {
                inputs.push_back(e.path());
            }
        }
        std::sort(inputs.begin(), inputs.end());
        if (inputs.empty()) {
            throw sm::IoError(o->in + ": no result.json files");
        }
        std::vector<sm::evaluation::LabeledResult> clean, masked;
        json sources = json::array();
        for (const auto& path : inputs) {
            json r;
            try {
                r = json::parse(slurp(path.string()));
            } catch (const json::exception& e) {
                throw sm::FormatError(path.string() + ": " + e.what());
            }
            if (!r.contains("scenario") || !r.contains("family") ||
                !r.contains("condition") || !r.contains("accuracy")) {
                throw sm::FormatError(path.string() +
                                      ": not an attack result");
            }
            sm::evaluation::LabeledResult lr;
            lr.scenario = r.at("scenario").get<std::string>();
            lr.family = r.at("family").get<std::string>();
            lr.result.condition = r.at("condition").get<std::string>();
            lr.result.accuracy = r.at("accuracy").get<double>();
            if (lr.result.condition == "clean") {
                clean.push_back(std::move(lr));
            } else {
                masked.push_back(std::move(lr));
            }
            sources.push_back({{"file", path.string()},
                               {"hash", file_hash(path.string())}});
        }
        json metrics;
        const auto bia = sm::evaluation::compute_bia(clean);
        metrics["bia"] = sm::evaluation::detail::table_json(bia.accuracy);
        metrics["bia_best_family"] = bia.best_family;
        if (!masked.empty()) {
            const auto mit = sm::evaluation::compute_mia(clean, masked);
            json mia = json::object();
            json delta = json::object();
            for (const auto& [kind, t] : mit.mia) {
                mia[kind] = sm::evaluation::detail::table_json(t);
            }
            for (const auto& [kind, t] : mit.delta) {
                delta[kind] = sm::evaluation::detail::table_json(t);
            }
            metrics["mia"] = mia;
            metrics["delta"] = delta;
            metrics["max_delta"] = mit.max_delta;
            if (mit.max_delta.count("gan") && mit.max_delta.count("white")) {
                const auto claim = sm::evaluation::make_claim(
                    "delta_gan_vs_white", "max mitigation delta gan > white",
                    mit.max_delta.at("gan"), mit.max_delta.at("white"));
                metrics["claims"] = json::array({{{"name", claim.name},
                                                  {"statement",
                                                   claim.statement},
                                                  {"lhs", claim.lhs},
                                                  {"rhs", claim.rhs},
                                                  {"holds", claim.holds}}});
            }
        }
        const fs::path out = ensure_out_dir(o->out);
        write_json_file(out / "metrics.json", metrics);
        write_provenance(out, "evaluate", {{"in", o->in}, {"sources", sources}},
                         json::object());
        std::printf("evaluated %zu clean and %zu masked results\n",
                    clean.size(), masked.size());
    });
}

void add_report(CLI::App& app) {
    struct Opts {
        std::string in, out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand(
        "report", "validate a report data file and render its charts");
    sub->add_option("--in", o->in, "path to a report data file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o] {
        const json j = sm::evaluation::load_report_json(o->in);
        sm::evaluation::check_traceability(j);
        const auto rep = sm::evaluation::report_from_json(j);
        ensure_out_dir(o->out);
        const auto files = sm::evaluation::emit_report(rep, o->out);
        write_provenance(o->out, "report",
                         {{"in", o->in}, {"input_hash", file_hash(o->in)}},
                         json::object());
        std::printf("report verified; wrote %zu files to %s\n", files.size(),
                    o->out.c_str());
    });
}

void add_demo(CLI::App& app) {
    auto o = std::make_shared<sm::pipeline::DemoConfig>();
    auto* sub = app.add_subcommand(
        "demo", "run the whole pipeline hermetically on synthetic corpora");
    sub->add_option("--seed", o->seed, "master seed")->capture_default_str();
    sub->add_option("--steps", o->gan_steps, "generator training steps")
        ->capture_default_str();
    sub->add_option("--epochs", o->attack_epochs, "attack training epochs")
        ->capture_default_str();
    sub->add_option("--per-class", o->per_class, "clips per class")
        ->capture_default_str();
    sub->add_option("--snr-db", o->snr_heavy_db, "heavy masking SNR")
        ->capture_default_str();
    sub->add_option("--out", o->out_dir, "output directory")->required();
    sub->callback([o] {
        const auto outcome = sm::pipeline::run_demo(*o);
        json config{{"seed", o->seed},
                    {"steps", o->gan_steps},
                    {"epochs", o->attack_epochs},
                    {"per_class", o->per_class},
                    {"snr_heavy_db", o->snr_heavy_db}};
        write_provenance(o->out_dir, "demo", config,
                         outcome.report.provenance.seeds);
        const auto& rep = outcome.report;
        std::printf("wrote %zu files to %s\n", outcome.files.size(),
                    o->out_dir.c_str());
        for (const auto& [scenario, family] : rep.bia.best_family) {
            std::printf("  %-10s best attack %-4s accuracy %.3f\n",
                        scenario.c_str(), family.c_str(),
                        rep.bia.accuracy.at(scenario, family));
        }
        for (const auto& [kind, d] : rep.mitigation.max_delta) {
            std::printf("  max mitigation delta (%s) %.3f\n", kind.c_str(), d);
        }
        for (const auto& c : rep.claims) {
            std::printf("  claim %-24s %s\n", c.name.c_str(),
                        c.holds ? "holds" : "reversed");
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sound-masking privacy pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "read option defaults from a file; flags win");
    add_ingest(app);
    add_gen_noise(app);
    add_train_gan(app);
    add_measure_randomness(app);
    add_attack(app);
    add_mitigate(app);
    add_evaluate(app);
    add_report(app);
    add_demo(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // help or version
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "soundmask/datasets.hpp"
#include "soundmask/features.hpp"

namespace fs = std::filesystem;
using namespace soundmask;
using namespace soundmask::datasets;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::path(::testing::TempDir()) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_tone(const fs::path& path, double freq_hz, double seconds,
                int rate = 16000) {
    audio::AudioClip clip;
    clip.sample_rate = rate;
    clip.channels = 1;
    const auto n = static_cast<std::size_t>(seconds * rate);
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        clip.samples[i] = audio::clamp16(
            8000.0 * std::sin(2.0 * M_PI * freq_hz * i / rate));
    }
    fs::create_directories(path.parent_path());
    audio::save_wav(clip, path.string());
}

std::map<std::string, int> class_counts(const std::vector<LabeledClip>& v,
                                        const std::string& task) {
    std::map<std::string, int> counts;
    for (const auto& lc : v) ++counts[lc.labels.at(task)];
    return counts;
}

}  // namespace

TEST(ScenarioSpec, PresetsValidate) {
    for (const auto& spec : {mgi_spec(), udi_spec(), sei_spec(), spf_spec(),
                             synth_spec(4), synth_multilabel_spec()}) {
        EXPECT_NO_THROW(validate(spec)) << spec.name;
    }
    EXPECT_EQ(mgi_spec().classes.at("genre").size(), 8u);
    EXPECT_EQ(spf_spec().classes.at("word").size(), 10u);
    const auto sei = sei_spec();
    const std::vector<std::string> emotions{"calm",    "happy",   "sad",
                                            "angry",   "fearful", "disgust",
                                            "surprise"};
    EXPECT_EQ(sei.classes.at("emotion"), emotions);
    const auto udi = udi_spec();
    EXPECT_EQ(udi.task_type, TaskType::multilabel);
    EXPECT_EQ(udi.tasks.size(), 3u);
    for (const auto& t : udi.tasks) {
        EXPECT_EQ(udi.classes.at(t).size(), 2u);
    }
}

TEST(ScenarioSpec, ValidateRejectsBadShapes) {
    auto two_tasks = mgi_spec();
    two_tasks.tasks.push_back("extra");
    two_tasks.classes["extra"] = {"a", "b"};
    EXPECT_THROW(validate(two_tasks), ConfigError);

    auto wide_binary = udi_spec();
    wide_binary.classes["age"].push_back("third");
    EXPECT_THROW(validate(wide_binary), ConfigError);

    auto bad_ratio = mgi_spec();
    bad_ratio.val_ratio = 0.2;
    EXPECT_THROW(validate(bad_ratio), ConfigError);

    auto one_class = synth_spec(4);
    one_class.classes["class"] = {"only"};
    EXPECT_THROW(validate(one_class), ConfigError);
}

TEST(ScenarioSpec, ClassIndexMapsInventoryOrder) {
    const auto spec = mgi_spec();
    EXPECT_EQ(class_index(spec, "genre", "Electronic"), 0);
    EXPECT_EQ(class_index(spec, "genre", "Rock"), 7);
    EXPECT_THROW(class_index(spec, "genre", "Polka"), LabelParseError);
    EXPECT_THROW(class_index(spec, "tempo", "Rock"), LabelParseError);
}

TEST(ScenarioSpec, LabelKeyJoinsTasksInOrder) {
    const auto spec = udi_spec();
    LabeledClip lc;
    lc.labels = {{"age", "thirty-plus"}, {"gender", "female"}, {"accent", "us"}};
    EXPECT_EQ(label_key(spec, lc), "age=thirty-plus;gender=female;accent=us;");
    lc.labels.erase("gender");
    EXPECT_THROW(label_key(spec, lc), LabelParseError);
}

TEST(SynthCorpus, CountsGeometryAndLabels) {
    const auto corpus = synth_corpus({});
    ASSERT_EQ(corpus.size(), 200u);
    const auto counts = class_counts(corpus, "class");
    ASSERT_EQ(counts.size(), 4u);
    for (const auto& [cls, n] : counts) EXPECT_EQ(n, 50) << cls;
    std::set<std::string> sources;
    for (const auto& lc : corpus) {
        EXPECT_EQ(lc.clip.samples.size(), 32000u);
        EXPECT_EQ(lc.clip.sample_rate, 16000);
        EXPECT_EQ(lc.clip.channels, 1);
        EXPECT_TRUE(lc.source_path.empty());
        sources.insert(lc.source_id);
    }
    EXPECT_EQ(sources.size(), corpus.size());
}

TEST(SynthCorpus, DeterministicPerSeed) {
    SynthSpec spec;
    spec.per_class = 3;
    const auto a = synth_corpus(spec);
    const auto b = synth_corpus(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].clip.samples, b[i].clip.samples);
    }
    spec.seed = 1;
    const auto c = synth_corpus(spec);
    EXPECT_NE(a[0].clip.samples, c[0].clip.samples);
}

TEST(SynthCorpus, ClassesSeparateByTenDbInDesignatedBands) {
    SynthSpec spec;
    spec.per_class = 8;
    const auto corpus = synth_corpus(spec);
    features::LogMelConfig fc;
    std::vector<Eigen::VectorXd> mean(4, Eigen::VectorXd::Zero(fc.mel_bands));
    for (const auto& lc : corpus) {
        const int k = lc.labels.at("class")[1] - '0';
        mean[k] += features::log_mel(lc.clip, fc)
                       .values.colwise()
                       .mean()
                       .transpose();
    }
    for (auto& m : mean) m /= spec.per_class;
    for (int k = 0; k < 4; ++k) {
        Eigen::Index band;
        mean[k].maxCoeff(&band);
        double others = -1e9;
        for (int j = 0; j < 4; ++j) {
            if (j != k) others = std::max(others, mean[j](band));
        }
        EXPECT_GT(mean[k](band) - others, 10.0) << "class " << k;
    }
}

TEST(SynthCorpus, RejectsDegenerateShapes) {
    SynthSpec one_class;
    one_class.classes = 1;
    EXPECT_THROW(synth_corpus(one_class), ConfigError);
    SynthSpec too_many;
    too_many.classes = 13;
    EXPECT_THROW(synth_corpus(too_many), ConfigError);
    SynthSpec low_rate;
    low_rate.sample_rate = 8000;  // band plan tops out at 7 kHz
    EXPECT_THROW(synth_corpus(low_rate), ConfigError);
}

TEST(SynthCorpus, MultilabelCoversAllCombosWithBandContrast) {
    const auto corpus = synth_multilabel_corpus(3);
    ASSERT_EQ(corpus.size(), 24u);
    std::set<std::string> combos;
    const auto spec = synth_multilabel_spec();
    for (const auto& lc : corpus) combos.insert(label_key(spec, lc));
    EXPECT_EQ(combos.size(), 8u);

    features::LogMelConfig fc;
    for (const auto& task : spec.tasks) {
        Eigen::VectorXd on = Eigen::VectorXd::Zero(fc.mel_bands);
        Eigen::VectorXd off = on;
        int n_on = 0, n_off = 0;
        for (const auto& lc : corpus) {
            const Eigen::VectorXd prof = features::log_mel(lc.clip, fc)
                                             .values.colwise()
                                             .mean()
                                             .transpose();
            if (lc.labels.at(task) == "on") {
                on += prof;
                ++n_on;
            } else {
                off += prof;
                ++n_off;
            }
        }
        on /= n_on;
        off /= n_off;
        EXPECT_GT((on - off).maxCoeff(), 10.0) << task;
    }
}

TEST(Split, LargestRemainderArithmeticOnBalancedCorpus) {
    const auto corpus = synth_corpus({});
    const auto spec = synth_spec(4);
    const auto sr = split(corpus, spec);
    EXPECT_EQ(sr.train.size(), 140u);
    EXPECT_EQ(sr.val.size(), 30u);
    EXPECT_EQ(sr.test.size(), 30u);
    for (int k = 0; k < 4; ++k) {
        const std::string cls = "c" + std::to_string(k);
        const int tr = class_counts(sr.train, "class")[cls];
        const int va = class_counts(sr.val, "class")[cls];
        const int te = class_counts(sr.test, "class")[cls];
        EXPECT_EQ(tr, 35) << cls;
        EXPECT_TRUE(va == 7 || va == 8) << cls;
        EXPECT_EQ(va + te, 15) << cls;
    }
}

TEST(Split, PartitionIsDisjointAndExhaustive) {
    SynthSpec sspec;
    sspec.per_class = 13;
    const auto corpus = synth_corpus(sspec);
    const auto sr = split(corpus, synth_spec(4));
    EXPECT_EQ(sr.train.size() + sr.val.size() + sr.test.size(), corpus.size());
    std::set<std::string> train_ids, val_ids, test_ids, all_ids;
    for (const auto& lc : sr.train) train_ids.insert(lc.source_id);
    for (const auto& lc : sr.val) val_ids.insert(lc.source_id);
    for (const auto& lc : sr.test) test_ids.insert(lc.source_id);
    for (const auto& lc : corpus) all_ids.insert(lc.source_id);
    for (const auto& id : val_ids) {
        EXPECT_FALSE(train_ids.count(id)) << id;
        EXPECT_FALSE(test_ids.count(id)) << id;
    }
    for (const auto& id : test_ids) EXPECT_FALSE(train_ids.count(id)) << id;
    std::set<std::string> unioned = train_ids;
    unioned.insert(val_ids.begin(), val_ids.end());
    unioned.insert(test_ids.begin(), test_ids.end());
    EXPECT_EQ(unioned, all_ids);
}

TEST(Split, GroupsNeverStraddleSplits) {
    // 30 sources per class, 4 windows each, sharing the source clip data
    std::vector<LabeledClip> clips;
    for (int k = 0; k < 2; ++k) {
        for (int s = 0; s < 30; ++s) {
            for (int w = 0; w < 4; ++w) {
                LabeledClip lc;
                lc.labels["class"] = "c" + std::to_string(k);
                lc.source_id = "src" + std::to_string(k) + "-" +
                               std::to_string(s);
                lc.clip.sample_rate = 16000;
                lc.clip.samples.assign(64, static_cast<std::int16_t>(w));
                clips.push_back(std::move(lc));
            }
        }
    }
    const auto sr = split(clips, synth_spec(2));
    std::map<std::string, std::set<int>> where;
    int part = 0;
    for (const auto* v : {&sr.train, &sr.val, &sr.test}) {
        for (const auto& lc : *v) where[lc.source_id].insert(part);
        ++part;
    }
    EXPECT_EQ(where.size(), 60u);
    for (const auto& [id, parts] : where) {
        EXPECT_EQ(parts.size(), 1u) << id << " straddles splits";
    }
}

TEST(Split, DeterministicPerSeed) {
    const auto corpus = synth_corpus({});
    const auto spec = synth_spec(4);
    const auto a = split(corpus, spec);
    const auto b = split(corpus, spec);
    ASSERT_EQ(a.train.size(), b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        EXPECT_EQ(a.train[i].source_id, b.train[i].source_id);
    }
    auto other = spec;
    other.seed = 99;
    const auto c = split(corpus, other);
    bool same_order = a.train.size() == c.train.size();
    for (std::size_t i = 0; same_order && i < a.train.size(); ++i) {
        same_order = a.train[i].source_id == c.train[i].source_id;
    }
    EXPECT_FALSE(same_order);
}

TEST(Split, TooFewClipsThrows) {
    SynthSpec tiny;
    tiny.per_class = 2;
    tiny.classes = 2;
    EXPECT_THROW(split(synth_corpus(tiny), synth_spec(2)), TooFewClipsError);
    EXPECT_THROW(split({}, synth_spec(2)), TooFewClipsError);
}

TEST(Ingest, MusicAdapterWindowsCapsAndSkips) {
    const auto root = fresh_dir("mgi");
    std::ofstream(root / "tracks.csv")
        << "track_id,genre_top,title\n"
        << "3,Rock,\"one, two\"\n"
        << "1234,Electronic,x\n"
        << "7,Polka,x\n"
        << "oops,Rock,x\n"
        << "9,Rock,missing-audio\n";
    write_tone(root / "audio" / "000" / "000003.wav", 440.0, 4.0);
    write_tone(root / "audio" / "001" / "001234.wav", 880.0, 1.0);

    auto spec = mgi_spec();
    const auto result = ingest(root.string(), spec);
    EXPECT_EQ(result.skipped_labels, 2u);
    EXPECT_EQ(result.skipped_missing, 1u);
    EXPECT_EQ(result.files_read, 2u);
    ASSERT_EQ(result.clips.size(), 3u);  // two 2s windows + one padded
    int rock = 0, electronic = 0;
    for (const auto& lc : result.clips) {
        EXPECT_EQ(lc.clip.samples.size(), 32000u);
        EXPECT_EQ(lc.clip.sample_rate, 16000);
        EXPECT_FALSE(lc.source_path.empty());
        if (lc.labels.at("genre") == "Rock") {
            EXPECT_EQ(lc.source_id, "track3");
            ++rock;
        } else {
            EXPECT_EQ(lc.labels.at("genre"), "Electronic");
            EXPECT_EQ(lc.source_id, "track1234");
            ++electronic;
        }
    }
    EXPECT_EQ(rock, 2);
    EXPECT_EQ(electronic, 1);

    const auto capped = ingest(root.string(), spec, 1);
    EXPECT_LE(class_counts(capped.clips, "genre")["Rock"], 1);
    EXPECT_LE(capped.clips.size(), 2u);
}

TEST(Ingest, MusicAdapterLayoutErrors) {
    const auto root = fresh_dir("mgi-broken");
    EXPECT_THROW(ingest(root.string(), mgi_spec()), LayoutError);
    std::ofstream(root / "tracks.csv") << "track_id,title\n3,x\n";
    EXPECT_THROW(ingest(root.string(), mgi_spec()), LayoutError);
    EXPECT_THROW(ingest((root / "nope").string(), mgi_spec()), LayoutError);
}

TEST(Ingest, VoiceAdapterBinarizesDemographics) {
    const auto root = fresh_dir("udi");
    std::ofstream(root / "validated.tsv")
        << "client_id\tpath\tsentence\tage\tgender\taccent\n"
        << "alice\ta.mp3\thi\tteens\tfemale\tus\n"
        << "bob\tb.wav\thi\tfourties\tmale\tengland\n"
        << "carol\tc.wav\thi\t\tfemale\tus\n"
        << "dave\td.wav\thi\ttwenties\tother\tus\n";
    write_tone(root / "clips" / "a.wav", 300.0, 2.0);
    write_tone(root / "clips" / "b.wav", 300.0, 2.0);

    const auto result = ingest(root.string(), udi_spec());
    EXPECT_EQ(result.skipped_labels, 2u);
    ASSERT_EQ(result.clips.size(), 2u);
    std::map<std::string, std::map<std::string, std::string>> by_source;
    for (const auto& lc : result.clips) by_source[lc.source_id] = lc.labels;
    ASSERT_TRUE(by_source.count("alice"));
    EXPECT_EQ(by_source["alice"].at("age"), "under-thirty");
    EXPECT_EQ(by_source["alice"].at("gender"), "female");
    EXPECT_EQ(by_source["alice"].at("accent"), "us");
    ASSERT_TRUE(by_source.count("bob"));
    EXPECT_EQ(by_source["bob"].at("age"), "thirty-plus");
    EXPECT_EQ(by_source["bob"].at("accent"), "other");
}

TEST(Ingest, EmotionAdapterParsesFilenameFields) {
    const auto root = fresh_dir("sei");
    write_tone(root / "Actor_01" / "03-01-03-01-01-01-01.wav", 300.0, 2.0);
    write_tone(root / "Actor_01" / "03-01-01-01-01-01-01.wav", 300.0, 2.0);
    write_tone(root / "Actor_02" / "03-01-08-02-02-01-02.wav", 300.0, 2.0);
    write_tone(root / "Actor_02" / "01-01-03-01-01-01-02.wav", 300.0, 2.0);
    write_tone(root / "Actor_02" / "notes.wav", 300.0, 2.0);

    const auto result = ingest(root.string(), sei_spec());
    EXPECT_EQ(result.skipped_labels, 3u);  // neutral, video, junk name
    ASSERT_EQ(result.clips.size(), 2u);
    std::map<std::string, std::string> emotion_by_actor;
    for (const auto& lc : result.clips) {
        emotion_by_actor[lc.source_id] = lc.labels.at("emotion");
    }
    EXPECT_EQ(emotion_by_actor.at("actor01"), "happy");
    EXPECT_EQ(emotion_by_actor.at("actor02"), "surprise");

    EXPECT_THROW(ingest(fresh_dir("sei-empty").string(), sei_spec()),
                 LayoutError);
}

TEST(Ingest, CommandAdapterGroupsBySpeaker) {
    const auto root = fresh_dir("spf");
    write_tone(root / "yes" / "abc123_nohash_0.wav", 500.0, 1.0);
    write_tone(root / "yes" / "abc123_nohash_1.wav", 500.0, 1.0);
    write_tone(root / "no" / "def99_nohash_0.wav", 700.0, 1.0);
    write_tone(root / "_background_noise_" / "hum.wav", 60.0, 1.0);

    const auto result = ingest(root.string(), spf_spec());
    EXPECT_EQ(result.skipped_labels, 1u);
    ASSERT_EQ(result.clips.size(), 3u);
    std::map<std::string, int> by_source;
    for (const auto& lc : result.clips) {
        EXPECT_EQ(lc.clip.samples.size(), 32000u);  // padded to the window
        ++by_source[lc.source_id];
    }
    EXPECT_EQ(by_source.at("abc123"), 2);
    EXPECT_EQ(by_source.at("def99"), 1);

    const auto capped = ingest(root.string(), spf_spec(), 1);
    EXPECT_EQ(class_counts(capped.clips, "word")["yes"], 1);

    EXPECT_THROW(ingest(fresh_dir("spf-empty").string(), spf_spec()),
                 LayoutError);
}

TEST(Ingest, DeterministicPerRootAndSeed) {
    const auto root = fresh_dir("spf-det");
    write_tone(root / "yes" / "a_nohash_0.wav", 500.0, 1.0);
    write_tone(root / "yes" / "b_nohash_0.wav", 520.0, 1.0);
    write_tone(root / "no" / "c_nohash_0.wav", 700.0, 1.0);
    write_tone(root / "go" / "d_nohash_0.wav", 650.0, 1.0);

    const auto a = ingest(root.string(), spf_spec());
    const auto b = ingest(root.string(), spf_spec());
    ASSERT_EQ(a.clips.size(), b.clips.size());
    for (std::size_t i = 0; i < a.clips.size(); ++i) {
        EXPECT_EQ(a.clips[i].source_path, b.clips[i].source_path);
        EXPECT_EQ(a.clips[i].clip.samples, b.clips[i].clip.samples);
    }
}

TEST(Ingest, UnknownScenarioHasNoAdapter) {
    const auto root = fresh_dir("none");
    EXPECT_THROW(ingest(root.string(), synth_spec(4)), ConfigError);
}

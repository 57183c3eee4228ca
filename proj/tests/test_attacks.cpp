#include "soundmask/attacks.hpp"
#include "soundmask/noise.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

using namespace soundmask;
using namespace soundmask::attacks;

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

// central finite differences over every parameter against analytic grads
void check_param_grads(const std::vector<nn::ParamRef>& params,
                       const std::function<double()>& forward_loss,
                       const Eigen::VectorXd& analytic, double h = 1e-5,
                       double tol = 1e-4) {
    Eigen::VectorXd flat = nn::get_flat(params);
    ASSERT_EQ(flat.size(), analytic.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        const double keep = flat[i];
        flat[i] = keep + h;
        nn::set_flat(params, flat);
        const double up = forward_loss();
        flat[i] = keep - h;
        nn::set_flat(params, flat);
        const double dn = forward_loss();
        flat[i] = keep;
        nn::set_flat(params, flat);
        const double fd = (up - dn) / (2.0 * h);
        ASSERT_LT(rel_err(analytic[i], fd), tol)
            << "param " << i << " analytic " << analytic[i] << " fd " << fd;
    }
}

nn::Batch random_mel(Rng& rng, int bands, int frames, std::size_t batch) {
    nn::Batch out(batch);
    for (auto& m : out) {
        m.resize(bands, frames);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.reshaped()[i] = rng.uniform(-1.0, 1.0);
        }
    }
    return out;
}

AttackModelSpec micro_spec(Family family) {
    AttackModelSpec spec;
    spec.family = family;
    spec.class_count = 2;
    spec.frames = 8;
    spec.mel_bands = 8;
    spec.conv_channels = {1, 1, 1};
    spec.gru_hidden = 2;
    spec.dense_width = 2;
    spec.seed = 31;
    return spec;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec validation and parameter budget.

TEST(AttackSpec, ValidateRejectsDegenerateShapes) {
    const auto base = micro_spec(Family::cnn);

    auto bad = base;
    bad.class_count = 1;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = base;
    bad.frames = 4;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = base;
    bad.mel_bands = 4;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = base;
    bad.gru_hidden = 0;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = base;
    bad.conv_channels = {1, 1};  // cnn needs three blocks
    EXPECT_THROW(validate(bad), ConfigError);

    bad = micro_spec(Family::crnn);
    bad.conv_channels = {1};
    EXPECT_THROW(validate(bad), ConfigError);

    // rnn has no conv stack, so conv_channels may be empty
    auto ok = micro_spec(Family::rnn);
    ok.conv_channels.clear();
    EXPECT_NO_THROW(validate(ok));

    // three pools halve 198x64 to 24x8; 8x64 would hit zero width
    bad = base;
    bad.frames = 8;
    bad.mel_bands = 8;
    bad.conv_channels = {1, 1, 1, 1};
    EXPECT_NO_THROW(validate(bad));  // extra channels beyond blocks ignored
}

TEST(AttackSpec, ParameterCountsMatchClosedForm) {
    // hand-computed from the layer shapes at the default widths, C = 4
    AttackModelSpec spec;
    spec.class_count = 4;

    spec.family = Family::cnn;
    EXPECT_EQ(AttackModel(spec).parameter_count(), 399428u);

    spec.family = Family::rnn;
    EXPECT_EQ(AttackModel(spec).parameter_count(), 30436u);

    spec.family = Family::crnn;
    EXPECT_EQ(AttackModel(spec).parameter_count(), 45364u);

    for (auto f : {Family::cnn, Family::rnn, Family::crnn}) {
        spec.family = f;
        EXPECT_LT(AttackModel(spec).parameter_count(), 1000000u);
    }
}

TEST(AttackSpec, FamilyNamesRoundTrip) {
    for (auto f : {Family::cnn, Family::rnn, Family::crnn}) {
        EXPECT_EQ(family_from(to_string(f)), f);
    }
    EXPECT_THROW(family_from("transformer"), ConfigError);
}

// ---------------------------------------------------------------------------
// Heads and init.

TEST(AttackModel, SoftmaxHeadSumsToOne) {
    Rng rng(77);
    for (auto f : {Family::cnn, Family::rnn, Family::crnn}) {
        auto spec = micro_spec(f);
        spec.class_count = 4;
        AttackModel model(spec);
        const auto probs =
            nn::softmax(model.forward(random_mel(rng, 8, 8, 3)));
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            EXPECT_NEAR(probs.col(c).sum(), 1.0, 1e-6);
            EXPECT_GT(probs.col(c).minCoeff(), 0.0);
        }
    }
}

TEST(AttackModel, SigmoidHeadStaysInUnitInterval) {
    Rng rng(78);
    auto spec = micro_spec(Family::crnn);
    spec.task_type = datasets::TaskType::multilabel;
    spec.class_count = 3;
    AttackModel model(spec);
    const auto probs = nn::sigmoid(model.forward(random_mel(rng, 8, 8, 5)));
    EXPECT_EQ(probs.rows(), 3);
    EXPECT_EQ(probs.cols(), 5);
    EXPECT_GT(probs.minCoeff(), 0.0);
    EXPECT_LT(probs.maxCoeff(), 1.0);
}

TEST(AttackModel, InitIsSeedDeterministic) {
    for (auto f : {Family::cnn, Family::rnn, Family::crnn}) {
        auto spec = micro_spec(f);
        AttackModel a(spec), b(spec);
        std::vector<nn::ParamRef> ra, rb;
        a.params(ra);
        b.params(rb);
        EXPECT_EQ(nn::get_flat(ra), nn::get_flat(rb));

        spec.seed += 1;
        AttackModel c(spec);
        std::vector<nn::ParamRef> rc;
        c.params(rc);
        EXPECT_NE(nn::get_flat(ra), nn::get_flat(rc));
    }
}

TEST(AttackModel, ForwardRejectsBadBatches) {
    AttackModel model(micro_spec(Family::cnn));
    Rng rng(79);
    EXPECT_THROW(model.forward({}), ConfigError);
    EXPECT_THROW(model.forward(random_mel(rng, 8, 9, 1)), ConfigError);
    EXPECT_THROW(model.forward(random_mel(rng, 9, 8, 1)), ConfigError);
}

// ---------------------------------------------------------------------------
// End-to-end gradient checks on miniature models.

TEST(AttackGradCheck, CnnWithSoftmaxLoss) {
    AttackModel model(micro_spec(Family::cnn));
    Rng rng(101);
    const nn::Batch x = random_mel(rng, 8, 8, 3);
    const std::vector<int> labels{0, 1, 0};

    std::vector<nn::ParamRef> params;
    model.params(params);
    auto loss = [&]() {
        return nn::softmax_cross_entropy(model.forward(x), labels).loss;
    };
    nn::zero_grads(params);
    const auto lg = nn::softmax_cross_entropy(model.forward(x), labels);
    const nn::Batch gx = model.backward(lg.grad);
    check_param_grads(params, loss, nn::get_flat_grads(params));

    // input gradients through the reshape round trip
    nn::Batch xp = x;
    const double h = 1e-5;
    for (Eigen::Index i : {0, 7, 33, 63}) {
        const double keep = xp[1].reshaped()[i];
        xp[1].reshaped()[i] = keep + h;
        const double up =
            nn::softmax_cross_entropy(model.forward(xp), labels).loss;
        xp[1].reshaped()[i] = keep - h;
        const double dn =
            nn::softmax_cross_entropy(model.forward(xp), labels).loss;
        xp[1].reshaped()[i] = keep;
        EXPECT_LT(rel_err(gx[1].reshaped()[i], (up - dn) / (2 * h)), 1e-4);
    }
}

TEST(AttackGradCheck, RnnWithSoftmaxLoss) {
    AttackModel model(micro_spec(Family::rnn));
    Rng rng(102);
    const nn::Batch x = random_mel(rng, 8, 8, 3);
    const std::vector<int> labels{1, 0, 1};

    std::vector<nn::ParamRef> params;
    model.params(params);
    auto loss = [&]() {
        return nn::softmax_cross_entropy(model.forward(x), labels).loss;
    };
    nn::zero_grads(params);
    const auto lg = nn::softmax_cross_entropy(model.forward(x), labels);
    model.backward(lg.grad);
    check_param_grads(params, loss, nn::get_flat_grads(params));
}

TEST(AttackGradCheck, CrnnWithSigmoidLoss) {
    auto spec = micro_spec(Family::crnn);
    spec.task_type = datasets::TaskType::multilabel;
    AttackModel model(spec);
    Rng rng(103);
    const nn::Batch x = random_mel(rng, 8, 8, 3);
    Eigen::MatrixXd targets(2, 3);
    targets << 1, 0, 1, 0, 0, 1;

    std::vector<nn::ParamRef> params;
    model.params(params);
    auto loss = [&]() {
        return nn::binary_cross_entropy(model.forward(x), targets).loss;
    };
    nn::zero_grads(params);
    const auto lg = nn::binary_cross_entropy(model.forward(x), targets);
    model.backward(lg.grad);
    check_param_grads(params, loss, nn::get_flat_grads(params));
}

// ---------------------------------------------------------------------------
// Feature normalization.

TEST(AttackNorm, ZScoresTrainDataAndClampsShiftedData) {
    Rng rng(55);
    nn::Batch feats(6);
    for (auto& f : feats) {
        f.resize(8, 20);
        nn::fill_normal(f, rng, 3.0);
        f.array() += 4.0;
    }
    const NormStats stats = compute_norm(feats);
    EXPECT_EQ(stats.mean.size(), 8);
    EXPECT_NEAR(stats.mean.mean(), 4.0, 0.5);

    nn::Batch z = feats;
    apply_norm(z, stats);
    double mean = 0.0, var = 0.0, n = 0.0;
    for (const auto& f : z) {
        mean += f.sum();
        var += f.array().square().sum();
        n += static_cast<double>(f.size());
    }
    EXPECT_NEAR(mean / n, 0.0, 0.05);
    EXPECT_NEAR(var / n, 1.0, 0.05);

    // a large dc shift saturates at the +-5 sigma clamp instead of exploding
    nn::Batch shifted = feats;
    for (auto& f : shifted) f.array() += 1000.0;
    apply_norm(shifted, stats);
    for (const auto& f : shifted) {
        EXPECT_EQ(f.minCoeff(), 5.0);
        EXPECT_EQ(f.maxCoeff(), 5.0);
    }
}

TEST(AttackLabels, MultilabelEncodingRequiresEveryTask) {
    const auto scen = datasets::synth_multilabel_spec();
    datasets::LabeledClip clip;
    clip.labels = {{"low", "on"}, {"mid", "off"}};  // "high" missing
    EXPECT_THROW(encode_labels(scen, {clip}), LabelParseError);

    clip.labels["high"] = "on";
    const auto enc = encode_labels(scen, {clip});
    ASSERT_EQ(enc.targets.rows(), 3);
    // rows follow the scenario task order low, mid, high
    EXPECT_EQ(enc.targets(0, 0), 1.0);
    EXPECT_EQ(enc.targets(1, 0), 0.0);
    EXPECT_EQ(enc.targets(2, 0), 1.0);
}

// ---------------------------------------------------------------------------
// Training and evaluation on the synthetic corpus. The corpus is separable
// by construction, so a small CNN must fit the training split almost
// perfectly, and broadband masking must degrade held-out accuracy
// monotonically with masking strength.

class AttackTrainingTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        datasets::SynthSpec ss;
        ss.per_class = 12;
        ss.duration_seconds = 1.0;
        corpus_ = new std::vector<datasets::LabeledClip>(
            datasets::synth_corpus(ss));
        scenario_ = new datasets::ScenarioSpec(datasets::synth_spec(4));
        splits_ = new datasets::SplitResult(
            datasets::split(*corpus_, *scenario_));

        AttackModelSpec spec;
        spec.class_count = 4;
        spec.frames = 98;
        spec.seed = 7;
        AttackModel model(spec);
        TrainConfig cfg;
        cfg.epochs = 15;
        cfg.batch = 8;
        cfg.patience = 5;
        trained_ = new TrainedAttack(
            train_attack(model, *scenario_, splits_->train, splits_->val, cfg));

        heldout_ = new std::vector<datasets::LabeledClip>(splits_->val);
        heldout_->insert(heldout_->end(), splits_->test.begin(),
                         splits_->test.end());
    }

    static void TearDownTestSuite() {
        delete corpus_;
        delete scenario_;
        delete splits_;
        delete trained_;
        delete heldout_;
        corpus_ = nullptr;
        scenario_ = nullptr;
        splits_ = nullptr;
        trained_ = nullptr;
        heldout_ = nullptr;
    }

    static std::vector<datasets::LabeledClip> masked(
        const std::vector<datasets::LabeledClip>& clips, double snr_db) {
        auto out = clips;
        for (std::size_t i = 0; i < out.size(); ++i) {
            noise::NoiseProfile p;
            p.duration_seconds = 1.0;
            p.seed = derive_seed(500, i);
            out[i].clip = audio::mix(out[i].clip, noise::white_noise(p),
                                     audio::GainSpec::snr(snr_db));
        }
        return out;
    }

    static std::vector<datasets::LabeledClip>* corpus_;
    static datasets::ScenarioSpec* scenario_;
    static datasets::SplitResult* splits_;
    static TrainedAttack* trained_;
    static std::vector<datasets::LabeledClip>* heldout_;
};

std::vector<datasets::LabeledClip>* AttackTrainingTest::corpus_ = nullptr;
datasets::ScenarioSpec* AttackTrainingTest::scenario_ = nullptr;
datasets::SplitResult* AttackTrainingTest::splits_ = nullptr;
TrainedAttack* AttackTrainingTest::trained_ = nullptr;
std::vector<datasets::LabeledClip>* AttackTrainingTest::heldout_ = nullptr;

TEST_F(AttackTrainingTest, FitsSeparableCorpus) {
    const auto on_train = evaluate(*trained_, splits_->train, "clean");
    EXPECT_GE(on_train.accuracy, 0.95);

    ASSERT_FALSE(trained_->history.empty());
    EXPECT_LE(trained_->history.size(), 15u);
    double best = 0.0;
    for (const auto& e : trained_->history) {
        best = std::max(best, e.val_accuracy);
        EXPECT_TRUE(std::isfinite(e.train_loss));
    }
    EXPECT_DOUBLE_EQ(trained_->best_val_accuracy, best);
}

TEST_F(AttackTrainingTest, MaskingDegradesAccuracyMonotonically) {
    const double clean = evaluate(*trained_, *heldout_, "clean").accuracy;
    const double light =
        evaluate(*trained_, masked(*heldout_, 10.0), "+white").accuracy;
    const double heavy =
        evaluate(*trained_, masked(*heldout_, -10.0), "+white").accuracy;

    EXPECT_GE(clean, 0.9);
    EXPECT_LE(heavy, light);
    EXPECT_LE(light, clean);
    // heavy masking pushes a clean-trained model toward chance
    EXPECT_LE(heavy, clean - 0.2);
}

TEST_F(AttackTrainingTest, EvaluationInvariantsHold) {
    const auto res = evaluate(*trained_, *heldout_, "clean");
    EXPECT_EQ(res.condition, "clean");
    EXPECT_EQ(res.support, static_cast<int>(heldout_->size()));
    ASSERT_EQ(res.confusion.rows(), 4);
    ASSERT_EQ(res.confusion.cols(), 4);
    EXPECT_EQ(res.confusion.sum(), res.support);

    // per-class recall is the diagonal over the row sum
    std::map<std::string, int> support;
    for (const auto& c : *heldout_) support[c.labels.at("class")] += 1;
    for (int k = 0; k < 4; ++k) {
        const int row = res.confusion.row(k).sum();
        EXPECT_EQ(row, support["c" + std::to_string(k)]);
        EXPECT_DOUBLE_EQ(res.per_class[static_cast<std::size_t>(k)],
                         static_cast<double>(res.confusion(k, k)) / row);
    }
    EXPECT_DOUBLE_EQ(res.accuracy,
                     static_cast<double>(res.confusion.trace()) /
                         res.support);

    // permuting the test order changes nothing
    auto reversed = *heldout_;
    std::reverse(reversed.begin(), reversed.end());
    const auto res_rev = evaluate(*trained_, reversed, "clean");
    EXPECT_EQ(res_rev.confusion, res.confusion);
    EXPECT_DOUBLE_EQ(res_rev.accuracy, res.accuracy);

    // and evaluating twice is bit-for-bit repeatable
    const auto res2 = evaluate(*trained_, *heldout_, "clean");
    EXPECT_EQ(res2.confusion, res.confusion);
    EXPECT_DOUBLE_EQ(res2.accuracy, res.accuracy);
}

TEST_F(AttackTrainingTest, EvaluateValidatesInputs) {
    EXPECT_THROW(evaluate(*trained_, {}, "clean"), ConfigError);
    EXPECT_THROW(evaluate(*trained_, *heldout_, "masked"), ConfigError);
}

TEST_F(AttackTrainingTest, CheckpointRoundTripsExactly) {
    const std::string path = temp_path("attack_ckpt_test.bin");
    save_attack(*trained_, path);
    const TrainedAttack loaded = load_attack(path);

    EXPECT_EQ(loaded.spec.family, trained_->spec.family);
    EXPECT_EQ(loaded.spec.class_count, trained_->spec.class_count);
    EXPECT_EQ(loaded.spec.frames, trained_->spec.frames);
    EXPECT_EQ(loaded.spec.seed, trained_->spec.seed);
    EXPECT_EQ(loaded.scenario_name, trained_->scenario_name);
    EXPECT_EQ(loaded.tasks, trained_->tasks);
    EXPECT_EQ(loaded.classes, trained_->classes);
    EXPECT_DOUBLE_EQ(loaded.best_val_accuracy, trained_->best_val_accuracy);
    ASSERT_EQ(loaded.history.size(), trained_->history.size());
    for (std::size_t i = 0; i < loaded.history.size(); ++i) {
        EXPECT_DOUBLE_EQ(loaded.history[i].train_loss,
                         trained_->history[i].train_loss);
        EXPECT_DOUBLE_EQ(loaded.history[i].val_accuracy,
                         trained_->history[i].val_accuracy);
    }
    EXPECT_EQ(loaded.norm.mean, trained_->norm.mean);
    EXPECT_EQ(loaded.norm.var, trained_->norm.var);
    ASSERT_EQ(loaded.parameters.size(), trained_->parameters.size());
    for (std::size_t i = 0; i < loaded.parameters.size(); ++i) {
        EXPECT_EQ(loaded.parameters[i].first, trained_->parameters[i].first);
        EXPECT_EQ(loaded.parameters[i].second,
                  trained_->parameters[i].second);
    }

    const auto before = evaluate(*trained_, *heldout_, "clean");
    const auto after = evaluate(loaded, *heldout_, "clean");
    EXPECT_EQ(after.confusion, before.confusion);
    EXPECT_DOUBLE_EQ(after.accuracy, before.accuracy);

    // saving the loaded attack again reproduces the same bytes
    const std::string path2 = temp_path("attack_ckpt_test2.bin");
    save_attack(loaded, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    EXPECT_EQ(b1, b2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_F(AttackTrainingTest, CheckpointRejectsGarbageAndMissingFiles) {
    EXPECT_THROW(load_attack(temp_path("no_such_checkpoint.bin")), IoError);

    const std::string junk = temp_path("attack_junk.bin");
    {
        std::ofstream f(junk, std::ios::binary);
        f << "this is not a checkpoint";
    }
    EXPECT_THROW(load_attack(junk), FormatError);

    // a truncated checkpoint fails cleanly rather than reading garbage
    const std::string whole = temp_path("attack_whole.bin");
    save_attack(*trained_, whole);
    std::ifstream in(whole, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    in.close();
    const std::string cut = temp_path("attack_cut.bin");
    {
        std::ofstream f(cut, std::ios::binary);
        f.write(bytes.data(),
                static_cast<std::streamsize>(bytes.size() / 2));
    }
    EXPECT_THROW(load_attack(cut), FormatError);
    std::remove(junk.c_str());
    std::remove(whole.c_str());
    std::remove(cut.c_str());
}

TEST_F(AttackTrainingTest, TrainRejectsMismatchedSetups) {
    TrainConfig cfg;
    cfg.epochs = 1;

    // head width disagrees with the class inventory
    AttackModelSpec spec;
    spec.class_count = 3;
    spec.frames = 98;
    AttackModel narrow(spec);
    EXPECT_THROW(train_attack(narrow, *scenario_, splits_->train,
                              splits_->val, cfg),
                 ConfigError);

    // multilabel model against a multiclass scenario
    spec.class_count = 4;
    spec.task_type = datasets::TaskType::multilabel;
    AttackModel wrong_task(spec);
    EXPECT_THROW(train_attack(wrong_task, *scenario_, splits_->train,
                              splits_->val, cfg),
                 ConfigError);

    // empty splits
    spec.task_type = datasets::TaskType::multiclass;
    AttackModel ok(spec);
    EXPECT_THROW(train_attack(ok, *scenario_, {}, splits_->val, cfg),
                 ConfigError);
    EXPECT_THROW(train_attack(ok, *scenario_, splits_->train, {}, cfg),
                 ConfigError);

    // train split missing a class
    std::vector<datasets::LabeledClip> partial;
    for (const auto& c : splits_->train) {
        if (c.labels.at("class") != "c0") partial.push_back(c);
    }
    AttackModel ok2(spec);
    EXPECT_THROW(train_attack(ok2, *scenario_, partial, splits_->val, cfg),
                 ConfigError);

    // clip duration that disagrees with the model's frame count
    spec.frames = 198;  // expects two-second clips
    AttackModel long_frames(spec);
    EXPECT_THROW(train_attack(long_frames, *scenario_, splits_->train,
                              splits_->val, cfg),
                 ConfigError);
}

TEST_F(AttackTrainingTest, FrozenLearningRateStopsAfterPatienceWindow) {
    AttackModelSpec spec;
    spec.family = Family::rnn;
    spec.class_count = 4;
    spec.frames = 98;
    spec.gru_hidden = 8;
    spec.seed = 7;
    AttackModel model(spec);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch = 8;
    cfg.lr = 0.0;
    cfg.patience = 3;
    const auto frozen =
        train_attack(model, *scenario_, splits_->train, splits_->val, cfg);
    // first eval counts as the improvement; patience exhausts three later
    ASSERT_EQ(frozen.history.size(), 4u);
    EXPECT_DOUBLE_EQ(frozen.best_val_accuracy,
                     frozen.history[0].val_accuracy);
    for (const auto& e : frozen.history) {
        EXPECT_DOUBLE_EQ(e.val_accuracy, frozen.history[0].val_accuracy);
    }
}

TEST(AttackTraining, ShuffledLabelsScoreNearChance) {
    datasets::SynthSpec ss;
    ss.per_class = 32;
    ss.duration_seconds = 1.0;
    auto corpus = datasets::synth_corpus(ss);

    // destroy the label-feature association; class proportions survive
    std::vector<std::string> labels;
    for (const auto& lc : corpus) labels.push_back(lc.labels.at("class"));
    Rng rng(derive_seed(11, 0));
    rng.shuffle(labels);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        corpus[i].labels["class"] = labels[i];
    }

    const auto scen = datasets::synth_spec(4);
    const auto sr = datasets::split(corpus, scen);
    AttackModelSpec spec;
    spec.class_count = 4;
    spec.frames = 98;
    spec.seed = 7;
    AttackModel model(spec);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 8;
    cfg.patience = 2;
    const auto trained = train_attack(model, scen, sr.train, sr.val, cfg);
    EXPECT_NEAR(trained.best_val_accuracy, 0.25, 0.15);
}

TEST(AttackTraining, DeterministicAcrossRuns) {
    datasets::SynthSpec ss;
    ss.per_class = 6;
    ss.duration_seconds = 1.0;
    const auto corpus = datasets::synth_corpus(ss);
    const auto scen = datasets::synth_spec(4);
    const auto sr = datasets::split(corpus, scen);

    AttackModelSpec spec;
    spec.family = Family::rnn;
    spec.class_count = 4;
    spec.frames = 98;
    spec.gru_hidden = 8;
    spec.seed = 7;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch = 8;

    AttackModel m1(spec), m2(spec);
    const auto t1 = train_attack(m1, scen, sr.train, sr.val, cfg);
    const auto t2 = train_attack(m2, scen, sr.train, sr.val, cfg);
    ASSERT_EQ(t1.parameters.size(), t2.parameters.size());
    for (std::size_t i = 0; i < t1.parameters.size(); ++i) {
        EXPECT_EQ(t1.parameters[i].second, t2.parameters[i].second);
    }
    ASSERT_EQ(t1.history.size(), t2.history.size());
    for (std::size_t i = 0; i < t1.history.size(); ++i) {
        EXPECT_DOUBLE_EQ(t1.history[i].train_loss, t2.history[i].train_loss);
        EXPECT_DOUBLE_EQ(t1.history[i].val_accuracy,
                         t2.history[i].val_accuracy);
    }
}

// ---------------------------------------------------------------------------
// Multilabel path.

TEST(AttackMultilabel, PerTaskAccuraciesAverageIntoTheAggregate) {
    const auto corpus = datasets::synth_multilabel_corpus(7, 1.0);
    const auto scen = datasets::synth_multilabel_spec();
    const auto sr = datasets::split(corpus, scen);

    AttackModelSpec spec;
    spec.family = Family::crnn;
    spec.task_type = datasets::TaskType::multilabel;
    spec.class_count = 3;
    spec.frames = 98;
    spec.seed = 7;
    AttackModel model(spec);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch = 8;
    cfg.patience = 10;
    const auto trained = train_attack(model, scen, sr.train, sr.val, cfg);

    const auto res = evaluate(trained, sr.test, "clean");
    ASSERT_EQ(res.per_label.size(), 3u);
    double sum = 0.0;
    for (const auto& task : scen.tasks) {
        ASSERT_TRUE(res.per_label.count(task));
        const double acc = res.per_label.at(task);
        EXPECT_GE(acc, 0.0);
        EXPECT_LE(acc, 1.0);
        sum += acc;
    }
    EXPECT_NEAR(res.accuracy, sum / 3.0, 1e-12);
    EXPECT_TRUE(res.per_class.empty());
    EXPECT_EQ(res.confusion.size(), 0);

    // band on/off signatures are separable, so the attack must learn them
    EXPECT_GE(res.accuracy, 0.9);
}

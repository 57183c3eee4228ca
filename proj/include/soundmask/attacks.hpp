#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nlohmann/json.hpp"
#include "soundmask/datasets.hpp"
#include "soundmask/error.hpp"
#include "soundmask/features.hpp"
#include "soundmask/nn/arrays_io.hpp"
#include "soundmask/nn/core.hpp"
#include "soundmask/nn/layers.hpp"
#include "soundmask/nn/losses.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::attacks {

enum class Family { cnn, rnn, crnn };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::cnn: return "cnn";
        case Family::rnn: return "rnn";
        case Family::crnn: return "crnn";
    }
    return "cnn";
}

inline Family family_from(const std::string& s) {
    if (s == "cnn") return Family::cnn;
    if (s == "rnn") return Family::rnn;
    if (s == "crnn") return Family::crnn;
    throw ConfigError("unknown attack family " + s);
}

// class_count: classes for a multiclass head, binary tasks for a multilabel
// head (one sigmoid logit per task)
struct AttackModelSpec {
    Family family = Family::cnn;
    datasets::TaskType task_type = datasets::TaskType::multiclass;
    int class_count = 2;
    int frames = 198;
    int mel_bands = 64;
    std::vector<int> conv_channels = {8, 16, 32};
    int gru_hidden = 48;
    int dense_width = 64;
    std::uint64_t seed = 0;
};

inline void validate(const AttackModelSpec& spec) {
    if (spec.class_count < 2) throw ConfigError("attack: class_count >= 2");
    if (spec.frames < 8 || spec.mel_bands < 8) {
        throw ConfigError("attack: spectrogram too small");
    }
    if (spec.gru_hidden < 1 || spec.dense_width < 1) {
        throw ConfigError("attack: bad layer widths");
    }
    const std::size_t blocks =
        spec.family == Family::cnn ? 3 : (spec.family == Family::crnn ? 2 : 0);
    if (spec.conv_channels.size() < blocks) {
        throw ConfigError("attack: conv_channels too short for family");
    }
    for (std::size_t i = 0; i < blocks; ++i) {
        if (spec.conv_channels[i] < 1) {
            throw ConfigError("attack: conv channels must be positive");
        }
    }
    int h = spec.frames, w = spec.mel_bands;
    for (std::size_t i = 0; i < blocks; ++i) {
        h /= 2;
        w /= 2;
    }
    if (blocks > 0 && (h < 1 || w < 1)) {
        throw ConfigError("attack: input too small for the pooling stack");
    }
}

// CNN: three 3x3 conv + 2x2 pool blocks, then a dense layer and the head.
// RNN: two stacked recurrent layers over the frame sequence, last hidden
// state into the head. CRNN: two conv blocks feeding one recurrent layer.
// Input per clip: a (mel_bands, frames) matrix; logits: (class_count, B).
class AttackModel {
public:
    explicit AttackModel(const AttackModelSpec& spec) : spec_(spec) {
        validate(spec);
        const int blocks =
            spec.family == Family::cnn ? 3 : (spec.family == Family::crnn ? 2 : 0);
        int c = 1, h = spec.frames, w = spec.mel_bands;
        for (int i = 0; i < blocks; ++i) {
            convs_.emplace_back(c, spec.conv_channels[static_cast<std::size_t>(i)],
                                "conv" + std::to_string(i));
            conv_acts_.emplace_back(nn::Activation::Kind::relu);
            pools_.emplace_back();
            c = spec.conv_channels[static_cast<std::size_t>(i)];
            h /= 2;
            w /= 2;
        }
        conv_out_c_ = c;
        conv_out_h_ = h;
        conv_out_w_ = w;

        int head_in = 0;
        if (spec.family == Family::cnn) {
            dense_mid_.emplace(c * h * w, spec.dense_width, "dense0");
            dense_act_.emplace(nn::Activation::Kind::relu);
            head_in = spec.dense_width;
        } else if (spec.family == Family::rnn) {
            grus_.emplace_back(spec.mel_bands, spec.gru_hidden, "gru0");
            grus_.emplace_back(spec.gru_hidden, spec.gru_hidden, "gru1");
            head_in = spec.gru_hidden;
        } else {
            grus_.emplace_back(c * w, spec.gru_hidden, "gru0");
            head_in = spec.gru_hidden;
        }
        head_.emplace(head_in, spec.class_count, "head");

        Rng rng(derive_seed(spec.seed, 0xA7));
        for (auto& conv : convs_) conv.init_glorot(rng);
        for (auto& gru : grus_) gru.init_glorot(rng);
        if (dense_mid_) {
            dense_mid_->init_normal(
                rng, std::sqrt(2.0 / (conv_out_c_ * conv_out_h_ * conv_out_w_ +
                                      spec.dense_width)));
        }
        head_->init_normal(rng,
                           std::sqrt(2.0 / (head_in + spec.class_count)));
    }

    const AttackModelSpec& spec() const { return spec_; }

    void params(std::vector<nn::ParamRef>& out) {
        for (auto& conv : convs_) conv.params(out);
        for (auto& gru : grus_) gru.params(out);
        if (dense_mid_) dense_mid_->params(out);
        head_->params(out);
    }

    std::size_t parameter_count() {
        std::vector<nn::ParamRef> refs;
        params(refs);
        return nn::param_count(refs);
    }

    Eigen::MatrixXd forward(const nn::Batch& mel) {
        if (mel.empty()) throw ConfigError("attack forward: empty batch");
        for (const auto& x : mel) {
            if (x.rows() != spec_.mel_bands || x.cols() != spec_.frames) {
                throw ConfigError("attack forward: input shape mismatch");
            }
        }
        batch_ = mel.size();
        if (spec_.family == Family::rnn) {
            const nn::Batch h1 = grus_[0].forward(mel);
            return head_->forward(last_hidden(grus_[1].forward(h1)));
        }

        // image layout: height = frames (time), width = mel bands
        nn::Batch x(mel.size());
        for (std::size_t i = 0; i < mel.size(); ++i) {
            x[i] = mel[i].reshaped(1, mel[i].size());
        }
        int h = spec_.frames, w = spec_.mel_bands;
        for (std::size_t k = 0; k < convs_.size(); ++k) {
            x = convs_[k].forward(x, h, w);
            x = conv_acts_[k].forward(x);
            x = pools_[k].forward(x, h, w);
            h /= 2;
            w /= 2;
        }
        if (spec_.family == Family::cnn) {
            const Eigen::MatrixXd mid = dense_mid_->forward(nn::flatten(x));
            return head_->forward(dense_act_->forward(mid));
        }
        nn::Batch seq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            seq[i] = nn::image_to_sequence(x[i], h, w);
        }
        return head_->forward(last_hidden(grus_[0].forward(seq)));
    }

    // returns per-clip input gradients shaped like the inputs
    nn::Batch backward(const Eigen::MatrixXd& glogits) {
        Eigen::MatrixXd g = head_->backward(glogits);
        if (spec_.family == Family::rnn) {
            const nn::Batch g1 = grus_[1].backward(spread_last(g));
            return grus_[0].backward(g1);
        }
        nn::Batch gx;
        if (spec_.family == Family::cnn) {
            g = dense_mid_->backward(dense_act_->backward(g));
            gx = nn::unflatten(g, conv_out_c_, conv_out_h_ * conv_out_w_);
        } else {
            const nn::Batch gseq = grus_[0].backward(spread_last(g));
            gx.resize(gseq.size());
            for (std::size_t i = 0; i < gseq.size(); ++i) {
                gx[i] = nn::sequence_to_image_grad(gseq[i], conv_out_c_,
                                                   conv_out_h_, conv_out_w_);
            }
        }
        for (std::size_t k = convs_.size(); k-- > 0;) {
            gx = pools_[k].backward(gx);
            gx = conv_acts_[k].backward(gx);
            gx = convs_[k].backward(gx);
        }
        nn::Batch out(gx.size());
        for (std::size_t i = 0; i < gx.size(); ++i) {
            out[i] = gx[i].reshaped(spec_.mel_bands, spec_.frames);
        }
        return out;
    }

private:
    Eigen::MatrixXd last_hidden(const nn::Batch& hs) {
        seq_len_ = hs[0].cols();
        Eigen::MatrixXd last(hs[0].rows(), static_cast<Eigen::Index>(hs.size()));
        for (std::size_t i = 0; i < hs.size(); ++i) {
            last.col(static_cast<Eigen::Index>(i)) = hs[i].rightCols(1);
        }
        return last;
    }

    nn::Batch spread_last(const Eigen::MatrixXd& g) const {
        nn::Batch out(batch_);
        for (std::size_t i = 0; i < batch_; ++i) {
            out[i] = Eigen::MatrixXd::Zero(g.rows(), seq_len_);
            out[i].col(seq_len_ - 1) = g.col(static_cast<Eigen::Index>(i));
        }
        return out;
    }

    AttackModelSpec spec_;
    std::vector<nn::Conv2d> convs_;
    std::vector<nn::Activation> conv_acts_;
    std::vector<nn::MaxPool2d> pools_;
    std::vector<nn::Gru> grus_;
    std::optional<nn::Dense> dense_mid_;
    std::optional<nn::Activation> dense_act_;
    std::optional<nn::Dense> head_;
    int conv_out_c_ = 0, conv_out_h_ = 0, conv_out_w_ = 0;
    std::size_t batch_ = 0;
    Eigen::Index seq_len_ = 0;
};

inline AttackModel build(const AttackModelSpec& spec) {
    return AttackModel(spec);
}

// ---------------------------------------------------------------------------
// Feature preparation.

// (mel_bands, frames) per clip; shape must match the model spec
inline nn::Batch extract_features(
    const std::vector<datasets::LabeledClip>& clips,
    const features::LogMelConfig& fc, int frames, int mel_bands) {
    nn::Batch out(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto lm = features::log_mel(clips[i].clip, fc);
        if (lm.frames() != frames || lm.mel_bands != mel_bands) {
            throw ConfigError("attack: features disagree with model shape");
        }
        out[i] = lm.values.transpose();
    }
    return out;
}

struct NormStats {
    Eigen::VectorXd mean;  // per mel band
    Eigen::VectorXd var;
};

inline NormStats compute_norm(const nn::Batch& feats) {
    if (feats.empty()) throw ConfigError("norm: empty feature set");
    const Eigen::Index bands = feats[0].rows();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(bands);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(bands);
    double n = 0.0;
    for (const auto& f : feats) {
        sum += f.rowwise().sum();
        sq += f.array().square().matrix().rowwise().sum();
        n += static_cast<double>(f.cols());
    }
    NormStats stats;
    stats.mean = sum / n;
    stats.var = (sq / n - stats.mean.array().square().matrix())
                    .cwiseMax(0.0);
    return stats;
}

// Normalized features are clamped to +-5 sigma so bands that sit near the
// log floor in training cannot blow up activations on shifted inputs.
inline void apply_norm(nn::Batch& feats, const NormStats& stats) {
    const Eigen::ArrayXd inv_std = 1.0 / (stats.var.array() + 1e-8).sqrt();
    for (auto& f : feats) {
        f = ((f.array().colwise() - stats.mean.array()).colwise() * inv_std)
                .cwiseMax(-5.0)
                .cwiseMin(5.0)
                .matrix();
    }
}

// ---------------------------------------------------------------------------
// Label encoding against a scenario's inventories.

struct EncodedLabels {
    std::vector<int> classes;        // multiclass
    Eigen::MatrixXd targets;         // multilabel: (tasks, clips) of 0/1
};

// For a binary task the inventory's second entry is the positive class.
inline EncodedLabels encode_labels(
    const datasets::ScenarioSpec& scenario,
    const std::vector<datasets::LabeledClip>& clips) {
    EncodedLabels enc;
    if (scenario.task_type == datasets::TaskType::multiclass) {
        const std::string& task = scenario.tasks[0];
        enc.classes.reserve(clips.size());
        for (const auto& c : clips) {
            enc.classes.push_back(
                datasets::class_index(scenario, task, c.labels.at(task)));
        }
    } else {
        enc.targets.resize(static_cast<Eigen::Index>(scenario.tasks.size()),
                           static_cast<Eigen::Index>(clips.size()));
        for (std::size_t i = 0; i < clips.size(); ++i) {
            for (std::size_t t = 0; t < scenario.tasks.size(); ++t) {
                const auto& task = scenario.tasks[t];
                const auto it = clips[i].labels.find(task);
                if (it == clips[i].labels.end()) {
                    throw LabelParseError("clip missing label for task " + task);
                }
                enc.targets(static_cast<Eigen::Index>(t),
                            static_cast<Eigen::Index>(i)) =
                    datasets::class_index(scenario, task, it->second) == 1
                        ? 1.0
                        : 0.0;
            }
        }
    }
    return enc;
}

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
    int epochs = 20;
    int batch = 16;
    double lr = 1e-3;
    int patience = 3;
    features::LogMelConfig features;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainedAttack {
    AttackModelSpec spec;
    std::string scenario_name;
    std::vector<std::string> tasks;
    std::map<std::string, std::vector<std::string>> classes;
    features::LogMelConfig features;
    NormStats norm;
    nn::NamedArrays parameters;
    std::vector<EpochStats> history;
    double best_val_accuracy = 0.0;
};

namespace detail {

inline double accuracy_of(const Eigen::MatrixXd& logits,
                          const EncodedLabels& enc, bool multiclass) {
    const Eigen::Index B = logits.cols();
    double hits = 0.0;
    if (multiclass) {
        for (Eigen::Index c = 0; c < B; ++c) {
            Eigen::Index arg;
            logits.col(c).maxCoeff(&arg);
            if (arg == enc.classes[static_cast<std::size_t>(c)]) hits += 1.0;
        }
        return hits / static_cast<double>(B);
    }
    for (Eigen::Index c = 0; c < B; ++c) {
        for (Eigen::Index t = 0; t < logits.rows(); ++t) {
            const bool on = logits(t, c) > 0.0;  // sigmoid(z) > 0.5
            if (on == (enc.targets(t, c) > 0.5)) hits += 1.0;
        }
    }
    return hits / static_cast<double>(B * logits.rows());
}

inline EncodedLabels slice(const EncodedLabels& enc,
                           const std::vector<std::size_t>& idx,
                           bool multiclass) {
    EncodedLabels out;
    if (multiclass) {
        out.classes.reserve(idx.size());
        for (std::size_t i : idx) out.classes.push_back(enc.classes[i]);
    } else {
        out.targets.resize(enc.targets.rows(),
                           static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out.targets.col(static_cast<Eigen::Index>(k)) =
                enc.targets.col(static_cast<Eigen::Index>(idx[k]));
        }
    }
    return out;
}

inline nn::NamedArrays snapshot_params(std::vector<nn::ParamRef>& refs) {
    nn::NamedArrays arrays;
    arrays.reserve(refs.size());
    for (const auto& r : refs) arrays.emplace_back(r.name, *r.value);
    return arrays;
}

inline void restore_params(const nn::NamedArrays& arrays,
                           std::vector<nn::ParamRef>& refs) {
    for (auto& r : refs) {
        const auto it = std::find_if(
            arrays.begin(), arrays.end(),
            [&](const auto& a) { return a.first == r.name; });
        if (it == arrays.end()) {
            throw FormatError("attack checkpoint missing array " + r.name);
        }
        if (it->second.rows() != r.value->rows() ||
            it->second.cols() != r.value->cols()) {
            throw FormatError("attack checkpoint shape mismatch for " + r.name);
        }
        *r.value = it->second;
    }
}

inline Eigen::MatrixXd forward_in_chunks(AttackModel& model,
                                         const nn::Batch& feats,
                                         std::size_t chunk = 32) {
    Eigen::MatrixXd logits(model.spec().class_count,
                           static_cast<Eigen::Index>(feats.size()));
    for (std::size_t start = 0; start < feats.size(); start += chunk) {
        const std::size_t count = std::min(chunk, feats.size() - start);
        const nn::Batch part(feats.begin() + static_cast<std::ptrdiff_t>(start),
                             feats.begin() +
                                 static_cast<std::ptrdiff_t>(start + count));
        logits.middleCols(static_cast<Eigen::Index>(start),
                          static_cast<Eigen::Index>(count)) =
            model.forward(part);
    }
    return logits;
}

}  // namespace detail

// Clean-audio training; masking enters only at evaluation time. Early stop
// tracks validation accuracy with the given patience; the best-validation
// parameters are what the returned attack carries.
inline TrainedAttack train_attack(AttackModel& model,
                                  const datasets::ScenarioSpec& scenario,
                                  const std::vector<datasets::LabeledClip>& train,
                                  const std::vector<datasets::LabeledClip>& val,
                                  const TrainConfig& cfg) {
    datasets::validate(scenario);
    if (train.empty() || val.empty()) {
        throw ConfigError("train_attack: empty split");
    }
    if (cfg.epochs < 1 || cfg.batch < 1 || cfg.patience < 0 ||
        !(cfg.lr >= 0.0)) {
        throw ConfigError("train_attack: bad training config");
    }
    const bool multiclass =
        scenario.task_type == datasets::TaskType::multiclass;
    const auto& spec = model.spec();
    if ((multiclass) != (spec.task_type == datasets::TaskType::multiclass)) {
        throw ConfigError("train_attack: scenario/model task type mismatch");
    }
    const std::size_t expected =
        multiclass ? scenario.classes.at(scenario.tasks[0]).size()
                   : scenario.tasks.size();
    if (expected != static_cast<std::size_t>(spec.class_count)) {
        throw ConfigError("train_attack: head width disagrees with scenario");
    }

    nn::Batch train_feats = extract_features(train, cfg.features, spec.frames,
                                             spec.mel_bands);
    nn::Batch val_feats =
        extract_features(val, cfg.features, spec.frames, spec.mel_bands);
    const NormStats norm = compute_norm(train_feats);
    apply_norm(train_feats, norm);
    apply_norm(val_feats, norm);
    const EncodedLabels train_enc = encode_labels(scenario, train);
    const EncodedLabels val_enc = encode_labels(scenario, val);
    if (multiclass) {
        std::vector<bool> seen(static_cast<std::size_t>(spec.class_count));
        for (int c : train_enc.classes) seen[static_cast<std::size_t>(c)] = true;
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            throw ConfigError("train_attack: train split misses a class");
        }
    }

    std::vector<nn::ParamRef> refs;
    model.params(refs);
    nn::Adam opt(refs, cfg.lr);
    Rng shuffle_rng(derive_seed(spec.seed, 0xEB));

    TrainedAttack out;
    out.spec = spec;
    out.scenario_name = scenario.name;
    out.tasks = scenario.tasks;
    out.classes = scenario.classes;
    out.features = cfg.features;
    out.norm = norm;

    double best = -1.0;
    int since_best = 0;
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t count =
                std::min(static_cast<std::size_t>(cfg.batch),
                         order.size() - start);
            std::vector<std::size_t> idx(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() + static_cast<std::ptrdiff_t>(start + count));
            nn::Batch xb(count);
            for (std::size_t k = 0; k < count; ++k) {
                xb[k] = train_feats[idx[k]];
            }
            const EncodedLabels yb =
                detail::slice(train_enc, idx, multiclass);
            opt.zero_grad();
            const Eigen::MatrixXd logits = model.forward(xb);
            const nn::LossGrad lg =
                multiclass
                    ? nn::softmax_cross_entropy(logits, yb.classes)
                    : nn::binary_cross_entropy(logits, yb.targets);
            if (!std::isfinite(lg.loss)) {
                throw DivergenceError("attack training diverged at epoch " +
                                      std::to_string(epoch));
            }
            model.backward(lg.grad);
            opt.step();
            loss_sum += lg.loss;
            ++batches;
        }

        const Eigen::MatrixXd val_logits =
            detail::forward_in_chunks(model, val_feats);
        const double val_acc =
            detail::accuracy_of(val_logits, val_enc, multiclass);
        out.history.push_back(
            {loss_sum / static_cast<double>(batches), val_acc});
        if (val_acc > best) {
            best = val_acc;
            since_best = 0;
            out.parameters = detail::snapshot_params(refs);
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    out.best_val_accuracy = best;
    detail::restore_params(out.parameters, refs);
    return out;
}

inline AttackModel model_from(const TrainedAttack& trained) {
    AttackModel model(trained.spec);
    std::vector<nn::ParamRef> refs;
    model.params(refs);
    detail::restore_params(trained.parameters, refs);
    return model;
}

// ---------------------------------------------------------------------------
// Evaluation.

inline const std::vector<std::string>& condition_labels() {
    static const std::vector<std::string> labels{"clean", "+white", "+gan"};
    return labels;
}

struct AttackResult {
    std::string condition;
    double accuracy = 0.0;
    int support = 0;
    std::vector<double> per_class;            // multiclass: recall by class
    Eigen::MatrixXi confusion;                // multiclass: true x predicted
    std::map<std::string, double> per_label;  // multilabel: task -> accuracy
};

// Test clips arrive already in the condition's state; mixing happens
// upstream.
inline AttackResult evaluate(const TrainedAttack& trained,
                             const std::vector<datasets::LabeledClip>& test,
                             const std::string& condition) {
    if (test.empty()) throw ConfigError("evaluate: empty test set");
    const auto& conds = condition_labels();
    if (std::find(conds.begin(), conds.end(), condition) == conds.end()) {
        throw ConfigError("evaluate: unknown condition " + condition);
    }
    datasets::ScenarioSpec scenario;
    scenario.name = trained.scenario_name;
    scenario.task_type = trained.spec.task_type;
    scenario.tasks = trained.tasks;
    scenario.classes = trained.classes;
    scenario.seed = trained.spec.seed;

    AttackModel model = model_from(trained);
    nn::Batch feats = extract_features(test, trained.features,
                                       trained.spec.frames,
                                       trained.spec.mel_bands);
    apply_norm(feats, trained.norm);
    const EncodedLabels enc = encode_labels(scenario, test);
    const Eigen::MatrixXd logits = detail::forward_in_chunks(model, feats);

    AttackResult result;
    result.condition = condition;
    result.support = static_cast<int>(test.size());
    if (trained.spec.task_type == datasets::TaskType::multiclass) {
        const int C = trained.spec.class_count;
        result.confusion = Eigen::MatrixXi::Zero(C, C);
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            Eigen::Index arg;
            logits.col(c).maxCoeff(&arg);
            result.confusion(enc.classes[static_cast<std::size_t>(c)],
                             arg) += 1;
        }
        result.accuracy =
            static_cast<double>(result.confusion.trace()) / test.size();
        result.per_class.resize(static_cast<std::size_t>(C), 0.0);
        for (int k = 0; k < C; ++k) {
            const int row_sum = result.confusion.row(k).sum();
            result.per_class[static_cast<std::size_t>(k)] =
                row_sum > 0 ? static_cast<double>(result.confusion(k, k)) /
                                  row_sum
                            : 0.0;
        }
    } else {
        double total = 0.0;
        for (std::size_t t = 0; t < trained.tasks.size(); ++t) {
            double hits = 0.0;
            for (Eigen::Index c = 0; c < logits.cols(); ++c) {
                const bool on = logits(static_cast<Eigen::Index>(t), c) > 0.0;
                if (on ==
                    (enc.targets(static_cast<Eigen::Index>(t), c) > 0.5)) {
                    hits += 1.0;
                }
            }
            const double acc = hits / static_cast<double>(logits.cols());
            result.per_label[trained.tasks[t]] = acc;
            total += acc;
        }
        result.accuracy = total / static_cast<double>(trained.tasks.size());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint container: config header plus named parameter arrays.

inline void save_attack(const TrainedAttack& trained, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");

    nlohmann::json j;
    j["family"] = to_string(trained.spec.family);
    j["task_type"] =
        trained.spec.task_type == datasets::TaskType::multiclass
            ? "multiclass"
            : "multilabel";
    j["class_count"] = trained.spec.class_count;
    j["frames"] = trained.spec.frames;
    j["mel_bands"] = trained.spec.mel_bands;
    j["conv_channels"] = trained.spec.conv_channels;
    j["gru_hidden"] = trained.spec.gru_hidden;
    j["dense_width"] = trained.spec.dense_width;
    j["seed"] = trained.spec.seed;
    j["scenario"] = trained.scenario_name;
    j["tasks"] = trained.tasks;
    j["classes"] = trained.classes;
    j["features"] = {{"frame_ms", trained.features.frame_ms},
                     {"hop_ms", trained.features.hop_ms},
                     {"mel_bands", trained.features.mel_bands},
                     {"fmin_hz", trained.features.fmin_hz},
                     {"fmax_hz", trained.features.fmax_hz}};
    j["best_val_accuracy"] = trained.best_val_accuracy;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& e : trained.history) {
        hist.push_back({{"train_loss", e.train_loss},
                        {"val_accuracy", e.val_accuracy}});
    }
    j["history"] = hist;
    const std::string blob = j.dump();

    const char magic[4] = {'S', 'M', 'A', 'K'};
    f.write(magic, 4);
    const std::uint32_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint32_t blob_len = static_cast<std::uint32_t>(blob.size());
    f.write(reinterpret_cast<const char*>(&blob_len), 4);
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));

    nn::NamedArrays arrays = trained.parameters;
    arrays.emplace_back("norm.mean", trained.norm.mean);
    arrays.emplace_back("norm.var", trained.norm.var);
    nn::write_arrays(f, arrays);
    if (!f) throw IoError("short write to " + path);
}

inline TrainedAttack load_attack(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "SMAK") {
        throw FormatError(path + ": not an attack checkpoint");
    }
    std::uint32_t version = 0, blob_len = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&blob_len), 4);
    if (!f || version != 1) throw FormatError(path + ": unsupported version");
    if (blob_len > (1u << 20)) throw FormatError(path + ": oversized header");
    std::string blob(blob_len, '\0');
    f.read(blob.data(), blob_len);
    if (!f) throw FormatError(path + ": truncated header");

    TrainedAttack out;
    try {
        const nlohmann::json j = nlohmann::json::parse(blob);
        out.spec.family = family_from(j.at("family").get<std::string>());
        out.spec.task_type =
            j.at("task_type").get<std::string>() == "multiclass"
                ? datasets::TaskType::multiclass
                : datasets::TaskType::multilabel;
        out.spec.class_count = j.at("class_count").get<int>();
        out.spec.frames = j.at("frames").get<int>();
        out.spec.mel_bands = j.at("mel_bands").get<int>();
        out.spec.conv_channels =
            j.at("conv_channels").get<std::vector<int>>();
        out.spec.gru_hidden = j.at("gru_hidden").get<int>();
        out.spec.dense_width = j.at("dense_width").get<int>();
        out.spec.seed = j.at("seed").get<std::uint64_t>();
        out.scenario_name = j.at("scenario").get<std::string>();
        out.tasks = j.at("tasks").get<std::vector<std::string>>();
        out.classes =
            j.at("classes")
                .get<std::map<std::string, std::vector<std::string>>>();
        const auto& jf = j.at("features");
        out.features.frame_ms = jf.at("frame_ms").get<double>();
        out.features.hop_ms = jf.at("hop_ms").get<double>();
        out.features.mel_bands = jf.at("mel_bands").get<int>();
        out.features.fmin_hz = jf.at("fmin_hz").get<double>();
        out.features.fmax_hz = jf.at("fmax_hz").get<double>();
        out.best_val_accuracy = j.at("best_val_accuracy").get<double>();
        for (const auto& e : j.at("history")) {
            out.history.push_back({e.at("train_loss").get<double>(),
                                   e.at("val_accuracy").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad checkpoint header: " + e.what());
    }
    validate(out.spec);

    nn::NamedArrays arrays = nn::read_arrays(f, path);
    for (auto& [name, m] : arrays) {
        if (name == "norm.mean") {
            out.norm.mean = m;
        } else if (name == "norm.var") {
            out.norm.var = m;
        } else {
            out.parameters.emplace_back(std::move(name), std::move(m));
        }
    }
    if (out.norm.mean.size() == 0 || out.norm.var.size() == 0) {
        throw FormatError(path + ": missing normalization arrays");
    }
    return out;
}

}  // namespace soundmask::attacks

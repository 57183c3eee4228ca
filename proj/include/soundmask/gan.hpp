#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "soundmask/audio.hpp"
#include "soundmask/error.hpp"
#include "soundmask/nn/arrays_io.hpp"
#include "soundmask/nn/core.hpp"
#include "soundmask/nn/layers.hpp"
#include "soundmask/nn/losses.hpp"
#include "soundmask/noise.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::gan {

// Generator: latent -> dense -> (base_channels x 16) -> six transposed
// convolutions, channel width halving each layer, upsampling 16 -> 32768,
// trimmed to 32000 and squashed to [-1,1]. Discriminator mirrors it.
constexpr int kSeedFrames = 16;
constexpr std::array<int, 6> kGenStrides{4, 4, 4, 4, 4, 2};
constexpr std::array<int, 6> kDisStrides{2, 4, 4, 4, 4, 4};

struct GanConfig {
    int latent_dim = 100;
    int base_channels = 512;
    int kernel_size = 25;
    int sample_length = 32000;
    int batch_size = 32;
    int steps = 200;
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int flatness_every = 25;  // cadence of best-checkpoint evaluation
    int flatness_draws = 4;
    std::uint64_t seed = 1;
};

inline int upsampled_length() {
    int len = kSeedFrames;
    for (int s : kGenStrides) len *= s;
    return len;  // 32768
}

inline void validate(const GanConfig& c) {
    if (c.latent_dim < 1) throw ConfigError("gan: latent_dim must be >= 1");
    if (c.base_channels < 32 || c.base_channels % 32 != 0) {
        throw ConfigError("gan: base_channels must be a positive multiple of 32");
    }
    int max_stride = 0;
    for (int s : kGenStrides) max_stride = std::max(max_stride, s);
    if (c.kernel_size < max_stride) {
        throw ConfigError("gan: kernel_size must be >= the largest stride");
    }
    if (c.sample_length < 1 || c.sample_length > upsampled_length()) {
        throw ConfigError("gan: sample_length inconsistent with the layer spec");
    }
    if (c.batch_size < 1) throw ConfigError("gan: batch_size must be >= 1");
    if (c.steps < 0) throw ConfigError("gan: steps must be >= 0");
    if (!(c.lr_g > 0.0) || !(c.lr_d > 0.0)) {
        throw ConfigError("gan: learning rates must be positive");
    }
    if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) ||
        !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
        throw ConfigError("gan: momentum parameters must lie in [0,1)");
    }
    if (c.flatness_every < 1 || c.flatness_draws < 1) {
        throw ConfigError("gan: flatness evaluation settings must be >= 1");
    }
}

struct LatentVector {
    Eigen::VectorXd values;
    std::uint64_t seed = 0;
};

inline LatentVector make_latent(int latent_dim, std::uint64_t seed) {
    if (latent_dim < 1) throw ConfigError("gan: latent_dim must be >= 1");
    LatentVector z;
    z.seed = seed;
    z.values.resize(latent_dim);
    Rng rng(seed);
    for (int i = 0; i < latent_dim; ++i) z.values[i] = rng.normal();
    return z;
}

class Generator {
public:
    explicit Generator(const GanConfig& cfg)
        : cfg_(cfg),
          dense_(cfg.latent_dim, kSeedFrames * cfg.base_channels, "g.dense"),
          seed_act_(nn::Activation::Kind::relu),
          out_act_(nn::Activation::Kind::tanh) {
        validate(cfg);
        int c = cfg.base_channels;
        for (std::size_t l = 0; l < kGenStrides.size(); ++l) {
            const bool last = l + 1 == kGenStrides.size();
            const int c_out = last ? 1 : c / 2;
            tconvs_.emplace_back(c, c_out, cfg.kernel_size, kGenStrides[l],
                                 "g.tconv" + std::to_string(l));
            if (!last) acts_.emplace_back(nn::Activation::Kind::relu);
            c = c_out;
        }
    }

    // variance-preserving init: with no normalization layers in the stack,
    // a fixed small stddev shrinks activations to nothing by layer six.
    // A transposed conv at stride s spreads k taps over s output frames, so
    // its effective fan-in is c_in*k/s.
    void init(Rng& rng) {
        dense_.init_normal(rng, std::sqrt(2.0 / cfg_.latent_dim));
        int c = cfg_.base_channels;
        for (std::size_t l = 0; l < tconvs_.size(); ++l) {
            const double fan =
                static_cast<double>(c) * cfg_.kernel_size / kGenStrides[l];
            tconvs_[l].init_normal(rng, std::sqrt(2.0 / fan));
            c = (l + 1 == tconvs_.size()) ? 1 : c / 2;
        }
    }

    void params(std::vector<nn::ParamRef>& out) {
        dense_.params(out);
        for (auto& t : tconvs_) t.params(out);
    }

    std::size_t parameter_count() {
        std::vector<nn::ParamRef> p;
        params(p);
        return nn::param_count(p);
    }

    // z columns -> batch of (1, sample_length) waveforms in [-1,1]
    nn::Batch forward(const Eigen::MatrixXd& z) {
        if (z.rows() != cfg_.latent_dim) {
            throw ConfigError("gan: latent size mismatch");
        }
        nn::Batch x = nn::unflatten(seed_act_.forward(dense_.forward(z)),
                                    cfg_.base_channels, kSeedFrames);
        for (std::size_t l = 0; l < tconvs_.size(); ++l) {
            x = tconvs_[l].forward(x);
            if (l < acts_.size()) x = acts_[l].forward(x);
        }
        for (auto& sample : x) {
            sample = Eigen::MatrixXd(sample.leftCols(cfg_.sample_length));
        }
        return out_act_.forward(x);
    }

    // gradient wrt latent columns
    Eigen::MatrixXd backward(const nn::Batch& gy) {
        nn::Batch g = out_act_.backward(gy);
        const int full = upsampled_length();
        for (auto& sample : g) {
            Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(1, full);
            padded.leftCols(cfg_.sample_length) = sample;
            sample = std::move(padded);
        }
        for (std::size_t l = tconvs_.size(); l-- > 0;) {
            if (l < acts_.size()) g = acts_[l].backward(g);
            g = tconvs_[l].backward(g);
        }
        return dense_.backward(seed_act_.backward(nn::flatten(g)));
    }

    const GanConfig& config() const { return cfg_; }

private:
    GanConfig cfg_;
    nn::Dense dense_;
    nn::Activation seed_act_;
    std::vector<nn::TConv1d> tconvs_;
    std::vector<nn::Activation> acts_;
    nn::Activation out_act_;
};

class Discriminator {
public:
    explicit Discriminator(const GanConfig& cfg)
        : cfg_(cfg),
          dense_(final_width(cfg), 1, "d.dense") {
        validate(cfg);
        int c = 1;
        int len = cfg.sample_length;
        for (std::size_t l = 0; l < kDisStrides.size(); ++l) {
            const int c_out = cfg.base_channels >> (kDisStrides.size() - 1 - l);
            convs_.emplace_back(c, c_out, cfg.kernel_size, kDisStrides[l],
                                "d.conv" + std::to_string(l));
            acts_.emplace_back(nn::Activation::Kind::leaky_relu);
            len = static_cast<int>(nn::Conv1d::out_len(len, kDisStrides[l]));
            c = c_out;
        }
        final_len_ = len;
    }

    void init(Rng& rng) {
        int c = 1;
        for (std::size_t l = 0; l < convs_.size(); ++l) {
            const double fan = static_cast<double>(c) * cfg_.kernel_size;
            convs_[l].init_normal(rng, std::sqrt(2.0 / fan));
            c = cfg_.base_channels >> (convs_.size() - 1 - l);
        }
        dense_.init_normal(
            rng, std::sqrt(2.0 / (cfg_.base_channels * final_len_)));
    }

    void params(std::vector<nn::ParamRef>& out) {
        for (auto& conv : convs_) conv.params(out);
        dense_.params(out);
    }

    std::size_t parameter_count() {
        std::vector<nn::ParamRef> p;
        params(p);
        return nn::param_count(p);
    }

    // batch of (1, sample_length) waveforms -> logits (1, B)
    Eigen::MatrixXd forward_logits(const nn::Batch& xs) {
        nn::Batch h = xs;
        for (std::size_t l = 0; l < convs_.size(); ++l) {
            h = acts_[l].forward(convs_[l].forward(h));
        }
        return dense_.forward(nn::flatten(h));
    }

    // scalar probabilities in (0,1)
    Eigen::MatrixXd probabilities(const nn::Batch& xs) {
        return nn::sigmoid(forward_logits(xs));
    }

    nn::Batch backward(const Eigen::MatrixXd& glogits) {
        nn::Batch g = nn::unflatten(dense_.backward(glogits),
                                    cfg_.base_channels, final_len_);
        for (std::size_t l = convs_.size(); l-- > 0;) {
            g = convs_[l].backward(acts_[l].backward(g));
        }
        return g;
    }

    int final_length() const { return final_len_; }

private:
    static int final_width(const GanConfig& cfg) {
        validate(cfg);
        int len = cfg.sample_length;
        for (int s : kDisStrides) {
            len = static_cast<int>(nn::Conv1d::out_len(len, s));
        }
        return cfg.base_channels * len;
    }

    GanConfig cfg_;
    std::vector<nn::Conv1d> convs_;
    std::vector<nn::Activation> acts_;
    nn::Dense dense_;
    int final_len_ = 0;
};

struct GanLossTrace {
    std::vector<double> g_loss;
    std::vector<double> d_loss;
    std::vector<double> d_real_mean;
    std::vector<double> d_fake_mean;

    std::size_t size() const { return g_loss.size(); }
};

struct GanCheckpoint {
    GanConfig config;
    std::int64_t step = 0;
    std::int64_t opt_g_steps = 0;
    std::int64_t opt_d_steps = 0;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> arrays;

    const Eigen::MatrixXd* find(const std::string& name) const {
        for (const auto& [n, m] : arrays) {
            if (n == name) return &m;
        }
        return nullptr;
    }
};

inline bool same_arrays(const GanCheckpoint& a, const GanCheckpoint& b) {
    if (a.arrays.size() != b.arrays.size()) return false;
    for (std::size_t i = 0; i < a.arrays.size(); ++i) {
        if (a.arrays[i].first != b.arrays[i].first) return false;
        const auto& x = a.arrays[i].second;
        const auto& y = b.arrays[i].second;
        if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
        if (x.size() > 0 && std::memcmp(x.data(), y.data(),
                                        sizeof(double) * x.size()) != 0) {
            return false;
        }
    }
    return true;
}

namespace detail {

inline void append_params(std::vector<nn::ParamRef>& refs,
                          GanCheckpoint& ck) {
    for (const auto& r : refs) {
        ck.arrays.emplace_back(r.name, *r.value);
    }
}

inline void append_moments(const std::string& prefix, const nn::Adam& opt,
                           GanCheckpoint& ck) {
    const auto& m = opt.first_moments();
    const auto& v = opt.second_moments();
    for (std::size_t i = 0; i < m.size(); ++i) {
        ck.arrays.emplace_back(prefix + ".m" + std::to_string(i), m[i]);
        ck.arrays.emplace_back(prefix + ".v" + std::to_string(i), v[i]);
    }
}

inline void restore_params(const GanCheckpoint& ck,
                           std::vector<nn::ParamRef>& refs) {
    for (auto& r : refs) {
        const Eigen::MatrixXd* m = ck.find(r.name);
        if (m == nullptr) {
            throw FormatError("checkpoint missing array " + r.name);
        }
        if (m->rows() != r.value->rows() || m->cols() != r.value->cols()) {
            throw FormatError("checkpoint array " + r.name + " has wrong shape");
        }
        *r.value = *m;
    }
}

inline void restore_moments(const GanCheckpoint& ck, const std::string& prefix,
                            std::size_t count, std::int64_t t, nn::Adam& opt) {
    std::vector<Eigen::MatrixXd> m(count), v(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Eigen::MatrixXd* mi = ck.find(prefix + ".m" + std::to_string(i));
        const Eigen::MatrixXd* vi = ck.find(prefix + ".v" + std::to_string(i));
        if (mi == nullptr || vi == nullptr) {
            throw FormatError("checkpoint missing optimizer state " + prefix);
        }
        m[i] = *mi;
        v[i] = *vi;
    }
    opt.restore_state(std::move(m), std::move(v), t);
}

}  // namespace detail

inline GanCheckpoint snapshot(Generator& g, Discriminator& d,
                              const nn::Adam& og, const nn::Adam& od,
                              std::int64_t step) {
    GanCheckpoint ck;
    ck.config = g.config();
    ck.step = step;
    ck.opt_g_steps = og.steps_taken();
    ck.opt_d_steps = od.steps_taken();
    std::vector<nn::ParamRef> gp, dp;
    g.params(gp);
    d.params(dp);
    detail::append_params(gp, ck);
    detail::append_params(dp, ck);
    detail::append_moments("opt_g", og, ck);
    detail::append_moments("opt_d", od, ck);
    return ck;
}

inline void restore(const GanCheckpoint& ck, Generator& g, Discriminator& d,
                    nn::Adam& og, nn::Adam& od) {
    std::vector<nn::ParamRef> gp, dp;
    g.params(gp);
    d.params(dp);
    detail::restore_params(ck, gp);
    detail::restore_params(ck, dp);
    detail::restore_moments(ck, "opt_g", gp.size(), ck.opt_g_steps, og);
    detail::restore_moments(ck, "opt_d", dp.size(), ck.opt_d_steps, od);
}

inline void restore_generator(const GanCheckpoint& ck, Generator& g) {
    std::vector<nn::ParamRef> gp;
    g.params(gp);
    detail::restore_params(ck, gp);
}

inline void restore_discriminator(const GanCheckpoint& ck, Discriminator& d) {
    std::vector<nn::ParamRef> dp;
    d.params(dp);
    detail::restore_params(ck, dp);
}

// Parameter state right after seeded initialization, before any update.
// train() starts from exactly this state for the same config.
inline GanCheckpoint initial_checkpoint(const GanConfig& cfg) {
    validate(cfg);
    Generator g(cfg);
    Discriminator d(cfg);
    Rng ginit(derive_seed(cfg.seed, 1));
    Rng dinit(derive_seed(cfg.seed, 2));
    g.init(ginit);
    d.init(dinit);
    std::vector<nn::ParamRef> gp, dp;
    g.params(gp);
    d.params(dp);
    nn::Adam og(gp, cfg.lr_g, cfg.beta1, cfg.beta2);
    nn::Adam od(dp, cfg.lr_d, cfg.beta1, cfg.beta2);
    return snapshot(g, d, og, od, 0);
}

// ---------------------------------------------------------------------------
// Checkpoint container: magic, version, config JSON, named float64 arrays.

inline void save_checkpoint(const GanCheckpoint& ck, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");

    nlohmann::json j;
    j["latent_dim"] = ck.config.latent_dim;
    j["base_channels"] = ck.config.base_channels;
    j["kernel_size"] = ck.config.kernel_size;
    j["sample_length"] = ck.config.sample_length;
    j["batch_size"] = ck.config.batch_size;
    j["steps"] = ck.config.steps;
    j["lr_g"] = ck.config.lr_g;
    j["lr_d"] = ck.config.lr_d;
    j["beta1"] = ck.config.beta1;
    j["beta2"] = ck.config.beta2;
    j["flatness_every"] = ck.config.flatness_every;
    j["flatness_draws"] = ck.config.flatness_draws;
    j["seed"] = ck.config.seed;
    j["step"] = ck.step;
    j["opt_g_steps"] = ck.opt_g_steps;
    j["opt_d_steps"] = ck.opt_d_steps;
    const std::string blob = j.dump();

    const char magic[4] = {'S', 'M', 'C', 'K'};
    f.write(magic, 4);
    const std::uint32_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint32_t blob_len = static_cast<std::uint32_t>(blob.size());
    f.write(reinterpret_cast<const char*>(&blob_len), 4);
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    nn::write_arrays(f, ck.arrays);
    if (!f) throw IoError("short write to " + path);
}

inline GanCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "SMCK", 4) != 0) {
        throw FormatError(path + ": not a checkpoint file");
    }
    std::uint32_t version = 0, blob_len = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&blob_len), 4);
    if (!f || version != 1) throw FormatError(path + ": unsupported version");
    if (blob_len > (1u << 20)) throw FormatError(path + ": oversized header");
    std::string blob(blob_len, '\0');
    f.read(blob.data(), blob_len);
    if (!f) throw FormatError(path + ": truncated header");

    GanCheckpoint ck;
    try {
        const nlohmann::json j = nlohmann::json::parse(blob);
        ck.config.latent_dim = j.at("latent_dim").get<int>();
        ck.config.base_channels = j.at("base_channels").get<int>();
        ck.config.kernel_size = j.at("kernel_size").get<int>();
        ck.config.sample_length = j.at("sample_length").get<int>();
        ck.config.batch_size = j.at("batch_size").get<int>();
        ck.config.steps = j.at("steps").get<int>();
        ck.config.lr_g = j.at("lr_g").get<double>();
        ck.config.lr_d = j.at("lr_d").get<double>();
        ck.config.beta1 = j.at("beta1").get<double>();
        ck.config.beta2 = j.at("beta2").get<double>();
        ck.config.flatness_every = j.at("flatness_every").get<int>();
        ck.config.flatness_draws = j.at("flatness_draws").get<int>();
        ck.config.seed = j.at("seed").get<std::uint64_t>();
        ck.step = j.at("step").get<std::int64_t>();
        ck.opt_g_steps = j.at("opt_g_steps").get<std::int64_t>();
        ck.opt_d_steps = j.at("opt_d_steps").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad checkpoint header: " + e.what());
    }
    validate(ck.config);

    ck.arrays = nn::read_arrays(f, path);
    return ck;
}

// ---------------------------------------------------------------------------
// Training.

// count -> batch of (1, sample_length) waveforms scaled to [-1,1]
using BatchProvider = std::function<nn::Batch(int)>;

inline BatchProvider white_target_provider(int sample_length,
                                           std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng, sample_length](int count) {
        nn::Batch out(static_cast<std::size_t>(count));
        for (auto& sample : out) {
            sample.resize(1, sample_length);
            for (int i = 0; i < sample_length; ++i) {
                sample(0, i) = rng->uniform(-1.0, 1.0);
            }
        }
        return out;
    };
}

class DivergenceError : public soundmask::DivergenceError {
public:
    DivergenceError(const std::string& msg, GanCheckpoint last_good,
                    GanLossTrace trace)
        : soundmask::DivergenceError(msg),
          last_good_checkpoint(std::move(last_good)),
          partial_trace(std::move(trace)) {}

    GanCheckpoint last_good_checkpoint;
    GanLossTrace partial_trace;
};

struct GanTrainResult {
    GanCheckpoint checkpoint;  // best-flatness state over the step budget
    GanLossTrace trace;
    double best_flatness = 0.0;
    std::int64_t best_step = 0;
};

inline GanTrainResult train(const BatchProvider& real_source,
                            const GanConfig& cfg) {
    validate(cfg);
    Generator g(cfg);
    Discriminator d(cfg);
    Rng ginit(derive_seed(cfg.seed, 1));
    Rng dinit(derive_seed(cfg.seed, 2));
    g.init(ginit);
    d.init(dinit);
    std::vector<nn::ParamRef> gp, dp;
    g.params(gp);
    d.params(dp);
    nn::Adam og(gp, cfg.lr_g, cfg.beta1, cfg.beta2);
    nn::Adam od(dp, cfg.lr_d, cfg.beta1, cfg.beta2);
    Rng latents(derive_seed(cfg.seed, 3));

    auto draw_latents = [&](int count) {
        Eigen::MatrixXd z(cfg.latent_dim, count);
        for (int c = 0; c < count; ++c) {
            for (int r = 0; r < cfg.latent_dim; ++r) z(r, c) = latents.normal();
        }
        return z;
    };

    // fixed evaluation latents so checkpoint selection compares like to like
    Eigen::MatrixXd eval_z(cfg.latent_dim, cfg.flatness_draws);
    {
        Rng er(derive_seed(cfg.seed, 4));
        for (int c = 0; c < cfg.flatness_draws; ++c) {
            for (int r = 0; r < cfg.latent_dim; ++r) eval_z(r, c) = er.normal();
        }
    }
    auto mean_flatness = [&]() {
        const nn::Batch draws = g.forward(eval_z);
        double acc = 0.0;
        for (const auto& w : draws) {
            std::vector<double> v(w.data(), w.data() + w.size());
            try {
                acc += noise::spectral_flatness(v);
            } catch (const SilentNoiseError&) {
                // collapsed output: count as zero flatness
            }
        }
        return acc / static_cast<double>(draws.size());
    };

    GanTrainResult result;
    result.checkpoint = snapshot(g, d, og, od, 0);
    result.best_flatness = mean_flatness();
    result.best_step = 0;
    GanCheckpoint last_good = result.checkpoint;

    for (int step = 1; step <= cfg.steps; ++step) {
        // discriminator update on a joint real+fake batch
        od.zero_grad();
        nn::Batch joint = real_source(cfg.batch_size);
        if (static_cast<int>(joint.size()) != cfg.batch_size) {
            throw ConfigError("gan: provider returned wrong batch size");
        }
        for (const auto& sample : joint) {
            if (sample.rows() != 1 || sample.cols() != cfg.sample_length) {
                throw ConfigError("gan: provider returned wrong sample shape");
            }
        }
        const nn::Batch fake = g.forward(draw_latents(cfg.batch_size));
        joint.insert(joint.end(), fake.begin(), fake.end());
        const Eigen::MatrixXd logits = d.forward_logits(joint);
        const Eigen::MatrixXd real_logits = logits.leftCols(cfg.batch_size);
        const Eigen::MatrixXd fake_logits = logits.rightCols(cfg.batch_size);
        const nn::GanDiscriminatorLoss dl = nn::gan_d_loss(real_logits,
                                                           fake_logits);
        Eigen::MatrixXd glogits(1, 2 * cfg.batch_size);
        glogits << dl.grad_real, dl.grad_fake;
        d.backward(glogits);
        od.step();

        // generator update through the refreshed discriminator
        og.zero_grad();
        const nn::Batch fresh = g.forward(draw_latents(cfg.batch_size));
        const nn::LossGrad gl = nn::gan_g_loss(d.forward_logits(fresh));
        nn::zero_grads(dp);  // chain-only pass, discard discriminator grads
        g.backward(d.backward(gl.grad));
        og.step();

        if (!std::isfinite(dl.loss) || !std::isfinite(gl.loss) ||
            !nn::all_finite(gp) || !nn::all_finite(dp)) {
            throw DivergenceError(
                "gan training diverged at step " + std::to_string(step),
                std::move(last_good), std::move(result.trace));
        }

        result.trace.d_loss.push_back(dl.loss);
        result.trace.g_loss.push_back(gl.loss);
        result.trace.d_real_mean.push_back(nn::sigmoid(real_logits).mean());
        result.trace.d_fake_mean.push_back(nn::sigmoid(fake_logits).mean());
        last_good = snapshot(g, d, og, od, step);

        if (step % cfg.flatness_every == 0 || step == cfg.steps) {
            const double flat = mean_flatness();
            if (flat > result.best_flatness) {
                result.best_flatness = flat;
                result.best_step = step;
                result.checkpoint = last_good;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sampling.

class Sampler {
public:
    explicit Sampler(const GanCheckpoint& ck) : gen_(ck.config) {
        restore_generator(ck, gen_);
    }

    audio::AudioClip sample(const LatentVector& z, double peak_dbfs) {
        if (z.values.size() != gen_.config().latent_dim) {
            throw ConfigError("gan: latent size mismatch");
        }
        const nn::Batch out = gen_.forward(z.values);
        const double amp =
            audio::kFullScale * std::pow(10.0, peak_dbfs / 20.0);
        audio::AudioClip clip;
        clip.sample_rate = 16000;
        clip.channels = 1;
        clip.samples.resize(static_cast<std::size_t>(out[0].cols()));
        for (Eigen::Index i = 0; i < out[0].cols(); ++i) {
            clip.samples[static_cast<std::size_t>(i)] =
                audio::clamp16(out[0](0, i) * amp);
        }
        return clip;
    }

    Generator& generator() { return gen_; }

private:
    Generator gen_;
};

inline audio::AudioClip sample(const GanCheckpoint& ck, const LatentVector& z,
                               double peak_dbfs) {
    Sampler s(ck);
    return s.sample(z, peak_dbfs);
}

}  // namespace soundmask::gan

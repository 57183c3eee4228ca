#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "soundmask/error.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::nn {

// Batch of per-sample feature maps; each entry is (channels, positions)
// for 1-D data or (channels, height*width) for 2-D data.
using Batch = std::vector<Eigen::MatrixXd>;

// Named view of one parameter matrix and its gradient accumulator. Layers
// hand these out; the optimizer, serializer, and gradient checks all work
// off the same list.
struct ParamRef {
    std::string name;
    Eigen::MatrixXd* value = nullptr;
    Eigen::MatrixXd* grad = nullptr;
};

inline std::size_t param_count(const std::vector<ParamRef>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

inline void zero_grads(const std::vector<ParamRef>& params) {
    for (const auto& p : params) p.grad->setZero();
}

inline bool all_finite(const std::vector<ParamRef>& params) {
    for (const auto& p : params) {
        if (!p.value->allFinite()) return false;
    }
    return true;
}

inline Eigen::VectorXd get_flat(const std::vector<ParamRef>& params) {
    std::size_t n = param_count(params);
    Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
    Eigen::Index at = 0;
    for (const auto& p : params) {
        const auto m = p.value->reshaped();
        flat.segment(at, m.size()) = m;
        at += m.size();
    }
    return flat;
}

inline void set_flat(const std::vector<ParamRef>& params,
                     const Eigen::VectorXd& flat) {
    Eigen::Index at = 0;
    for (const auto& p : params) {
        p.value->reshaped() = flat.segment(at, p.value->size());
        at += p.value->size();
    }
}

inline Eigen::VectorXd get_flat_grads(const std::vector<ParamRef>& params) {
    std::size_t n = param_count(params);
    Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
    Eigen::Index at = 0;
    for (const auto& p : params) {
        const auto m = p.grad->reshaped();
        flat.segment(at, m.size()) = m;
        at += m.size();
    }
    return flat;
}

// --- initialization -------------------------------------------------------

inline void fill_normal(Eigen::MatrixXd& m, Rng& rng, double stddev) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            m(r, c) = stddev * rng.normal();
        }
    }
}

inline void fill_glorot(Eigen::MatrixXd& m, Rng& rng, double fan_in,
                        double fan_out) {
    fill_normal(m, rng, std::sqrt(2.0 / (fan_in + fan_out)));
}

// --- optimizer -------------------------------------------------------------

// Adam over a fixed parameter list. Moment buffers are indexed by list
// position, so the list must stay stable for the optimizer's lifetime.
class Adam {
public:
    Adam(std::vector<ParamRef> params, double lr, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)),
          lr_(lr),
          beta1_(beta1),
          beta2_(beta2),
          eps_(eps) {
        for (const auto& p : params_) {
            m_.emplace_back(Eigen::MatrixXd::Zero(p.value->rows(),
                                                  p.value->cols()));
            v_.emplace_back(Eigen::MatrixXd::Zero(p.value->rows(),
                                                  p.value->cols()));
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const Eigen::MatrixXd& g = *params_[i].grad;
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
            params_[i].value->array() -=
                lr_ * (m_[i].array() / bc1) /
                ((v_[i].array() / bc2).sqrt() + eps_);
        }
    }

    void zero_grad() { zero_grads(params_); }

    std::int64_t steps_taken() const { return t_; }

    // serialization hooks: moments plus step counter
    const std::vector<Eigen::MatrixXd>& first_moments() const { return m_; }
    const std::vector<Eigen::MatrixXd>& second_moments() const { return v_; }
    void restore_state(std::vector<Eigen::MatrixXd> m,
                       std::vector<Eigen::MatrixXd> v, std::int64_t t) {
        if (m.size() != params_.size() || v.size() != params_.size()) {
            throw ConfigError("optimizer state does not match parameter list");
        }
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

private:
    std::vector<ParamRef> params_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace soundmask::nn

#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "soundmask/error.hpp"

namespace soundmask::nn {

inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// column-wise softmax with max subtraction
inline Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const Eigen::ArrayXd shifted =
            logits.col(c).array() - logits.col(c).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        p.col(c) = (e / e.sum()).matrix();
    }
    return p;
}

struct LossGrad {
    double loss = 0.0;
    Eigen::MatrixXd grad;  // same shape as the logits
};

// Mean cross-entropy of softmax(logits) against integer labels.
// logits: (classes, batch).
inline LossGrad softmax_cross_entropy(const Eigen::MatrixXd& logits,
                                      const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != logits.cols()) {
        throw ConfigError("softmax_cross_entropy: label/batch mismatch");
    }
    const Eigen::Index B = logits.cols();
    LossGrad out;
    out.grad = softmax(logits);
    for (Eigen::Index c = 0; c < B; ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        if (y < 0 || y >= logits.rows()) {
            throw ConfigError("softmax_cross_entropy: label out of range");
        }
        out.loss -= std::log(std::max(out.grad(y, c), 1e-300));
        out.grad(y, c) -= 1.0;
    }
    out.loss /= static_cast<double>(B);
    out.grad /= static_cast<double>(B);
    return out;
}

// Binary cross-entropy on logits, summed over tasks (rows), averaged over
// the batch (columns). targets hold 0/1.
inline LossGrad binary_cross_entropy(const Eigen::MatrixXd& logits,
                                     const Eigen::MatrixXd& targets) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
        throw ConfigError("binary_cross_entropy: shape mismatch");
    }
    const double B = static_cast<double>(logits.cols());
    LossGrad out;
    out.grad.resize(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            const double z = logits(r, c);
            const double t = targets(r, c);
            // -t*log(sigma(z)) - (1-t)*log(1-sigma(z))
            out.loss += softplus(z) - t * z;
            out.grad(r, c) = (sigmoid(z) - t) / B;
        }
    }
    out.loss /= B;
    return out;
}

// Discriminator objective: ascend log D(x) + log(1 - D(G(z))). Implemented
// as the descent form on logits; gradients match the loss actually stepped.
struct GanDiscriminatorLoss {
    double loss = 0.0;
    Eigen::MatrixXd grad_real;  // (1, B)
    Eigen::MatrixXd grad_fake;  // (1, B)
};

inline GanDiscriminatorLoss gan_d_loss(const Eigen::MatrixXd& real_logits,
                                       const Eigen::MatrixXd& fake_logits) {
    GanDiscriminatorLoss out;
    const double Br = static_cast<double>(real_logits.cols());
    const double Bf = static_cast<double>(fake_logits.cols());
    out.grad_real.resize(1, real_logits.cols());
    out.grad_fake.resize(1, fake_logits.cols());
    for (Eigen::Index c = 0; c < real_logits.cols(); ++c) {
        const double z = real_logits(0, c);
        out.loss += softplus(-z) / Br;            // -log sigma(z)
        out.grad_real(0, c) = (sigmoid(z) - 1.0) / Br;
    }
    for (Eigen::Index c = 0; c < fake_logits.cols(); ++c) {
        const double z = fake_logits(0, c);
        out.loss += softplus(z) / Bf;             // -log(1 - sigma(z))
        out.grad_fake(0, c) = sigmoid(z) / Bf;
    }
    return out;
}

// Non-saturating generator objective: ascend log D(G(z)).
inline LossGrad gan_g_loss(const Eigen::MatrixXd& fake_logits) {
    LossGrad out;
    const double B = static_cast<double>(fake_logits.cols());
    out.grad.resize(1, fake_logits.cols());
    for (Eigen::Index c = 0; c < fake_logits.cols(); ++c) {
        const double z = fake_logits(0, c);
        out.loss += softplus(-z) / B;             // -log sigma(z)
        out.grad(0, c) = (sigmoid(z) - 1.0) / B;
    }
    return out;
}

}  // namespace soundmask::nn

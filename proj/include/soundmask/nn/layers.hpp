#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "soundmask/error.hpp"
#include "soundmask/nn/core.hpp"
#include "soundmask/rng.hpp"

namespace soundmask::nn {

// All layers follow the same shape: forward() caches what backward() needs,
// backward() consumes the output gradient, accumulates parameter gradients,
// and returns the input gradient. One forward per backward.

class Dense {
public:
    Dense(int in_dim, int out_dim, std::string name)
        : W_(Eigen::MatrixXd::Zero(out_dim, in_dim)),
          b_(Eigen::MatrixXd::Zero(out_dim, 1)),
          gW_(Eigen::MatrixXd::Zero(out_dim, in_dim)),
          gb_(Eigen::MatrixXd::Zero(out_dim, 1)),
          name_(std::move(name)) {}

    void init_glorot(Rng& rng) {
        fill_glorot(W_, rng, static_cast<double>(W_.cols()),
                    static_cast<double>(W_.rows()));
    }
    void init_normal(Rng& rng, double stddev) { fill_normal(W_, rng, stddev); }

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) {
        x_ = x;
        return (W_ * x).colwise() + b_.col(0);
    }

    Eigen::MatrixXd backward(const Eigen::MatrixXd& gy) {
        gW_ += gy * x_.transpose();
        gb_.col(0) += gy.rowwise().sum();
        return W_.transpose() * gy;
    }

    void params(std::vector<ParamRef>& out) {
        out.push_back({name_ + ".W", &W_, &gW_});
        out.push_back({name_ + ".b", &b_, &gb_});
    }

private:
    Eigen::MatrixXd W_, b_, gW_, gb_, x_;
    std::string name_;
};

// Pointwise nonlinearity over matrices or batches.
class Activation {
public:
    enum class Kind { relu, leaky_relu, tanh };

    explicit Activation(Kind kind, double slope = 0.2)
        : kind_(kind), slope_(slope) {}

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) {
        mat_in_ = x;
        return apply(x);
    }
    Eigen::MatrixXd backward(const Eigen::MatrixXd& gy) {
        return gy.cwiseProduct(derivative(mat_in_));
    }

    Batch forward(const Batch& xs) {
        batch_in_ = xs;
        Batch out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = apply(xs[i]);
        return out;
    }
    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            out[i] = gys[i].cwiseProduct(derivative(batch_in_[i]));
        }
        return out;
    }

private:
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        switch (kind_) {
            case Kind::relu:
                return x.cwiseMax(0.0);
            case Kind::leaky_relu:
                return x.cwiseMax(slope_ * x);
            case Kind::tanh:
                return x.array().tanh().matrix();
        }
        return x;
    }
    Eigen::MatrixXd derivative(const Eigen::MatrixXd& x) const {
        switch (kind_) {
            case Kind::relu:
                return (x.array() > 0.0).cast<double>().matrix();
            case Kind::leaky_relu:
                return (x.array() > 0.0)
                    .select(Eigen::ArrayXXd::Constant(x.rows(), x.cols(), 1.0),
                            Eigen::ArrayXXd::Constant(x.rows(), x.cols(),
                                                      slope_))
                    .matrix();
            case Kind::tanh: {
                const Eigen::ArrayXXd t = x.array().tanh();
                return (1.0 - t * t).matrix();
            }
        }
        return Eigen::MatrixXd::Ones(x.rows(), x.cols());
    }

    Kind kind_;
    double slope_;
    Eigen::MatrixXd mat_in_;
    Batch batch_in_;
};

// Strided 1-D convolution with ceil-mode "same" padding:
// out_len = ceil(in_len / stride).
class Conv1d {
public:
    Conv1d(int c_in, int c_out, int kernel, int stride, std::string name)
        : c_in_(c_in),
          c_out_(c_out),
          k_(kernel),
          s_(stride),
          W_(Eigen::MatrixXd::Zero(c_out, c_in * kernel)),
          b_(Eigen::MatrixXd::Zero(c_out, 1)),
          gW_(Eigen::MatrixXd::Zero(c_out, c_in * kernel)),
          gb_(Eigen::MatrixXd::Zero(c_out, 1)),
          name_(std::move(name)) {
        if (kernel <= 0 || stride <= 0 || c_in <= 0 || c_out <= 0) {
            throw ConfigError(name_ + ": bad conv1d geometry");
        }
    }

    void init_glorot(Rng& rng) {
        fill_glorot(W_, rng, static_cast<double>(c_in_ * k_),
                    static_cast<double>(c_out_ * k_));
    }
    void init_normal(Rng& rng, double stddev) { fill_normal(W_, rng, stddev); }

    static Eigen::Index out_len(Eigen::Index in_len, int stride) {
        return (in_len + stride - 1) / stride;
    }

    Batch forward(const Batch& xs) {
        cols_.resize(xs.size());
        in_lens_.resize(xs.size());
        Batch out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Eigen::MatrixXd& x = xs[i];
            const Eigen::Index L = x.cols();
            const Eigen::Index O = out_len(L, s_);
            const Eigen::Index pad_total =
                std::max<Eigen::Index>(0, (O - 1) * s_ + k_ - L);
            const Eigen::Index pad_left = pad_total / 2;
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(c_in_ * k_, O);
            for (Eigen::Index o = 0; o < O; ++o) {
                for (int t = 0; t < k_; ++t) {
                    const Eigen::Index src = o * s_ + t - pad_left;
                    if (src < 0 || src >= L) continue;
                    for (int ci = 0; ci < c_in_; ++ci) {
                        K(ci * k_ + t, o) = x(ci, src);
                    }
                }
            }
            out[i] = (W_ * K).colwise() + b_.col(0);
            cols_[i] = std::move(K);
            in_lens_[i] = L;
        }
        return out;
    }

    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            const Eigen::MatrixXd& gy = gys[i];
            gW_ += gy * cols_[i].transpose();
            gb_.col(0) += gy.rowwise().sum();
            const Eigen::MatrixXd gK = W_.transpose() * gy;
            const Eigen::Index L = in_lens_[i];
            const Eigen::Index O = gy.cols();
            const Eigen::Index pad_total =
                std::max<Eigen::Index>(0, (O - 1) * s_ + k_ - L);
            const Eigen::Index pad_left = pad_total / 2;
            Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(c_in_, L);
            for (Eigen::Index o = 0; o < O; ++o) {
                for (int t = 0; t < k_; ++t) {
                    const Eigen::Index src = o * s_ + t - pad_left;
                    if (src < 0 || src >= L) continue;
                    for (int ci = 0; ci < c_in_; ++ci) {
                        gx(ci, src) += gK(ci * k_ + t, o);
                    }
                }
            }
            out[i] = std::move(gx);
        }
        return out;
    }

    void params(std::vector<ParamRef>& out) {
        out.push_back({name_ + ".W", &W_, &gW_});
        out.push_back({name_ + ".b", &b_, &gb_});
    }

    std::size_t weight_count() const {
        return static_cast<std::size_t>(W_.size() + b_.size());
    }

private:
    int c_in_, c_out_, k_, s_;
    Eigen::MatrixXd W_, b_, gW_, gb_;
    std::vector<Eigen::MatrixXd> cols_;
    std::vector<Eigen::Index> in_lens_;
    std::string name_;
};

// Transposed 1-D convolution producing out_len = in_len * stride, kernel
// overhang (k - stride) cropped symmetrically (left gets the smaller half).
class TConv1d {
public:
    TConv1d(int c_in, int c_out, int kernel, int stride, std::string name)
        : c_in_(c_in),
          c_out_(c_out),
          k_(kernel),
          s_(stride),
          W_(Eigen::MatrixXd::Zero(c_out * kernel, c_in)),
          b_(Eigen::MatrixXd::Zero(c_out, 1)),
          gW_(Eigen::MatrixXd::Zero(c_out * kernel, c_in)),
          gb_(Eigen::MatrixXd::Zero(c_out, 1)),
          name_(std::move(name)) {
        if (kernel < stride || stride <= 0 || c_in <= 0 || c_out <= 0) {
            throw ConfigError(name_ + ": bad tconv1d geometry");
        }
    }

    void init_glorot(Rng& rng) {
        fill_glorot(W_, rng, static_cast<double>(c_in_ * k_),
                    static_cast<double>(c_out_ * k_));
    }
    void init_normal(Rng& rng, double stddev) { fill_normal(W_, rng, stddev); }

    Batch forward(const Batch& xs) {
        xs_ = xs;
        Batch out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Eigen::MatrixXd& x = xs[i];
            const Eigen::Index L = x.cols();
            const Eigen::Index full = (L - 1) * s_ + k_;
            const Eigen::Index crop = (k_ - s_) / 2;
            const Eigen::MatrixXd P = W_ * x;  // (c_out * k, L)
            Eigen::MatrixXd y_full = Eigen::MatrixXd::Zero(c_out_, full);
            for (Eigen::Index pos = 0; pos < L; ++pos) {
                for (int co = 0; co < c_out_; ++co) {
                    for (int t = 0; t < k_; ++t) {
                        y_full(co, pos * s_ + t) += P(co * k_ + t, pos);
                    }
                }
            }
            out[i] = y_full.middleCols(crop, L * s_);
            out[i].colwise() += b_.col(0);
        }
        return out;
    }

    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            const Eigen::MatrixXd& gy = gys[i];
            const Eigen::Index L = xs_[i].cols();
            const Eigen::Index full = (L - 1) * s_ + k_;
            const Eigen::Index crop = (k_ - s_) / 2;
            Eigen::MatrixXd gy_full = Eigen::MatrixXd::Zero(c_out_, full);
            gy_full.middleCols(crop, L * s_) = gy;
            Eigen::MatrixXd gP(c_out_ * k_, L);
            for (Eigen::Index pos = 0; pos < L; ++pos) {
                for (int co = 0; co < c_out_; ++co) {
                    for (int t = 0; t < k_; ++t) {
                        gP(co * k_ + t, pos) = gy_full(co, pos * s_ + t);
                    }
                }
            }
            gW_ += gP * xs_[i].transpose();
            gb_.col(0) += gy.rowwise().sum();
            out[i] = W_.transpose() * gP;
        }
        return out;
    }

    void params(std::vector<ParamRef>& out) {
        out.push_back({name_ + ".W", &W_, &gW_});
        out.push_back({name_ + ".b", &b_, &gb_});
    }

private:
    int c_in_, c_out_, k_, s_;
    Eigen::MatrixXd W_, b_, gW_, gb_;
    Batch xs_;
    std::string name_;
};

// 3x3 stride-1 "same" 2-D convolution over (channels, height*width) maps
// with positions indexed p = h*width + w.
class Conv2d {
public:
    Conv2d(int c_in, int c_out, std::string name)
        : c_in_(c_in),
          c_out_(c_out),
          W_(Eigen::MatrixXd::Zero(c_out, c_in * 9)),
          b_(Eigen::MatrixXd::Zero(c_out, 1)),
          gW_(Eigen::MatrixXd::Zero(c_out, c_in * 9)),
          gb_(Eigen::MatrixXd::Zero(c_out, 1)),
          name_(std::move(name)) {}

    void init_glorot(Rng& rng) {
        fill_glorot(W_, rng, static_cast<double>(c_in_ * 9),
                    static_cast<double>(c_out_ * 9));
    }

    Batch forward(const Batch& xs, int height, int width) {
        h_ = height;
        w_ = width;
        cols_.resize(xs.size());
        Batch out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cols_[i] = im2col(xs[i]);
            out[i] = (W_ * cols_[i]).colwise() + b_.col(0);
        }
        return out;
    }

    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            gW_ += gys[i] * cols_[i].transpose();
            gb_.col(0) += gys[i].rowwise().sum();
            out[i] = col2im(W_.transpose() * gys[i]);
        }
        return out;
    }

    void params(std::vector<ParamRef>& out) {
        out.push_back({name_ + ".W", &W_, &gW_});
        out.push_back({name_ + ".b", &b_, &gb_});
    }

private:
    Eigen::MatrixXd im2col(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(c_in_ * 9, h_ * w_);
        for (int h = 0; h < h_; ++h) {
            for (int w = 0; w < w_; ++w) {
                const Eigen::Index p = static_cast<Eigen::Index>(h) * w_ + w;
                for (int dy = -1; dy <= 1; ++dy) {
                    const int sh = h + dy;
                    if (sh < 0 || sh >= h_) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sw = w + dx;
                        if (sw < 0 || sw >= w_) continue;
                        const Eigen::Index sp =
                            static_cast<Eigen::Index>(sh) * w_ + sw;
                        const int tap = (dy + 1) * 3 + (dx + 1);
                        for (int ci = 0; ci < c_in_; ++ci) {
                            K(ci * 9 + tap, p) = x(ci, sp);
                        }
                    }
                }
            }
        }
        return K;
    }

    Eigen::MatrixXd col2im(const Eigen::MatrixXd& gK) const {
        Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(c_in_, h_ * w_);
        for (int h = 0; h < h_; ++h) {
            for (int w = 0; w < w_; ++w) {
                const Eigen::Index p = static_cast<Eigen::Index>(h) * w_ + w;
                for (int dy = -1; dy <= 1; ++dy) {
                    const int sh = h + dy;
                    if (sh < 0 || sh >= h_) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sw = w + dx;
                        if (sw < 0 || sw >= w_) continue;
                        const Eigen::Index sp =
                            static_cast<Eigen::Index>(sh) * w_ + sw;
                        const int tap = (dy + 1) * 3 + (dx + 1);
                        for (int ci = 0; ci < c_in_; ++ci) {
                            gx(ci, sp) += gK(ci * 9 + tap, p);
                        }
                    }
                }
            }
        }
        return gx;
    }

    int c_in_, c_out_, h_ = 0, w_ = 0;
    Eigen::MatrixXd W_, b_, gW_, gb_;
    std::vector<Eigen::MatrixXd> cols_;
    std::string name_;
};

// 2x2 stride-2 max pooling, floor semantics (odd trailing row/column drops).
class MaxPool2d {
public:
    Batch forward(const Batch& xs, int height, int width) {
        h_ = height;
        w_ = width;
        argmax_.resize(xs.size());
        Batch out(xs.size());
        const int oh = height / 2, ow = width / 2;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const Eigen::MatrixXd& x = xs[i];
            const Eigen::Index c = x.rows();
            Eigen::MatrixXd y(c, static_cast<Eigen::Index>(oh) * ow);
            argmax_[i].resize(c, static_cast<Eigen::Index>(oh) * ow);
            for (Eigen::Index ch = 0; ch < c; ++ch) {
                for (int h = 0; h < oh; ++h) {
                    for (int w = 0; w < ow; ++w) {
                        double best = -std::numeric_limits<double>::infinity();
                        Eigen::Index best_p = 0;
                        for (int dy = 0; dy < 2; ++dy) {
                            for (int dx = 0; dx < 2; ++dx) {
                                const Eigen::Index p =
                                    static_cast<Eigen::Index>(2 * h + dy) *
                                        width +
                                    (2 * w + dx);
                                if (x(ch, p) > best) {
                                    best = x(ch, p);
                                    best_p = p;
                                }
                            }
                        }
                        const Eigen::Index op =
                            static_cast<Eigen::Index>(h) * ow + w;
                        y(ch, op) = best;
                        argmax_[i](ch, op) = best_p;
                    }
                }
            }
            out[i] = std::move(y);
        }
        return out;
    }

    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            const Eigen::MatrixXd& gy = gys[i];
            Eigen::MatrixXd gx =
                Eigen::MatrixXd::Zero(gy.rows(),
                                      static_cast<Eigen::Index>(h_) * w_);
            for (Eigen::Index ch = 0; ch < gy.rows(); ++ch) {
                for (Eigen::Index op = 0; op < gy.cols(); ++op) {
                    gx(ch, argmax_[i](ch, op)) += gy(ch, op);
                }
            }
            out[i] = std::move(gx);
        }
        return out;
    }

    static int out_height(int height) { return height / 2; }
    static int out_width(int width) { return width / 2; }

private:
    int h_ = 0, w_ = 0;
    std::vector<Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic>>
        argmax_;
};

// Gated recurrent layer over (input_dim, timesteps) sequences. Gate rows in
// Wx/Uh/b are stacked [reset; update; candidate]; the reset gate multiplies
// the recurrent term of the candidate.
class Gru {
public:
    Gru(int input_dim, int hidden, std::string name)
        : d_(input_dim),
          h_(hidden),
          Wx_(Eigen::MatrixXd::Zero(3 * hidden, input_dim)),
          Uh_(Eigen::MatrixXd::Zero(3 * hidden, hidden)),
          b_(Eigen::MatrixXd::Zero(3 * hidden, 1)),
          gWx_(Eigen::MatrixXd::Zero(3 * hidden, input_dim)),
          gUh_(Eigen::MatrixXd::Zero(3 * hidden, hidden)),
          gb_(Eigen::MatrixXd::Zero(3 * hidden, 1)),
          name_(std::move(name)) {}

    void init_glorot(Rng& rng) {
        fill_glorot(Wx_, rng, d_, h_);
        fill_glorot(Uh_, rng, h_, h_);
    }

    int hidden_size() const { return h_; }

    // Returns the full hidden sequence (hidden, T) per sample.
    Batch forward(const Batch& xs) {
        xs_ = xs;
        const std::size_t B = xs.size();
        hs_.assign(B, {});
        rs_.assign(B, {});
        zs_.assign(B, {});
        ns_.assign(B, {});
        un_hs_.assign(B, {});
        Batch out(B);
        for (std::size_t i = 0; i < B; ++i) {
            const Eigen::MatrixXd& x = xs[i];
            const Eigen::Index T = x.cols();
            const Eigen::MatrixXd pre_x =
                (Wx_ * x).colwise() + b_.col(0);  // (3H, T)
            hs_[i] = Eigen::MatrixXd::Zero(h_, T + 1);
            rs_[i].resize(h_, T);
            zs_[i].resize(h_, T);
            ns_[i].resize(h_, T);
            un_hs_[i].resize(h_, T);
            for (Eigen::Index t = 0; t < T; ++t) {
                const Eigen::VectorXd h_prev = hs_[i].col(t);
                const Eigen::VectorXd rec = Uh_ * h_prev;  // (3H)
                const Eigen::ArrayXd r =
                    sigmoid(pre_x.col(t).head(h_).array() +
                            rec.head(h_).array());
                const Eigen::ArrayXd z =
                    sigmoid(pre_x.col(t).segment(h_, h_).array() +
                            rec.segment(h_, h_).array());
                const Eigen::ArrayXd un_h = rec.tail(h_).array();
                const Eigen::ArrayXd n =
                    (pre_x.col(t).tail(h_).array() + r * un_h).tanh();
                hs_[i].col(t + 1) =
                    ((1.0 - z) * n + z * h_prev.array()).matrix();
                rs_[i].col(t) = r.matrix();
                zs_[i].col(t) = z.matrix();
                ns_[i].col(t) = n.matrix();
                un_hs_[i].col(t) = un_h.matrix();
            }
            out[i] = hs_[i].rightCols(T);
        }
        return out;
    }

    // gys: gradient w.r.t. the full hidden sequence, (hidden, T) per sample.
    Batch backward(const Batch& gys) {
        Batch out(gys.size());
        for (std::size_t i = 0; i < gys.size(); ++i) {
            const Eigen::MatrixXd& x = xs_[i];
            const Eigen::Index T = x.cols();
            Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(d_, T);
            Eigen::ArrayXd dh_next = Eigen::ArrayXd::Zero(h_);
            for (Eigen::Index t = T - 1; t >= 0; --t) {
                const Eigen::ArrayXd dh = gys[i].col(t).array() + dh_next;
                const Eigen::ArrayXd h_prev = hs_[i].col(t).array();
                const Eigen::ArrayXd r = rs_[i].col(t).array();
                const Eigen::ArrayXd z = zs_[i].col(t).array();
                const Eigen::ArrayXd n = ns_[i].col(t).array();
                const Eigen::ArrayXd un_h = un_hs_[i].col(t).array();

                const Eigen::ArrayXd da_n = dh * (1.0 - z) * (1.0 - n * n);
                const Eigen::ArrayXd dz = dh * (h_prev - n);
                const Eigen::ArrayXd da_z = dz * z * (1.0 - z);
                const Eigen::ArrayXd d_un_h = da_n * r;
                const Eigen::ArrayXd da_r = da_n * un_h * r * (1.0 - r);

                Eigen::VectorXd da(3 * h_);
                da.head(h_) = da_r.matrix();
                da.segment(h_, h_) = da_z.matrix();
                da.tail(h_) = da_n.matrix();

                gWx_ += da * x.col(t).transpose();
                gb_.col(0) += da;
                Eigen::VectorXd du(3 * h_);
                du.head(h_) = da_r.matrix();
                du.segment(h_, h_) = da_z.matrix();
                du.tail(h_) = d_un_h.matrix();
                gUh_ += du * hs_[i].col(t).transpose();

                gx.col(t) = Wx_.transpose() * da;
                dh_next = dh * z + (Uh_.transpose() * du).array();
            }
            out[i] = std::move(gx);
        }
        return out;
    }

    void params(std::vector<ParamRef>& out) {
        out.push_back({name_ + ".Wx", &Wx_, &gWx_});
        out.push_back({name_ + ".Uh", &Uh_, &gUh_});
        out.push_back({name_ + ".b", &b_, &gb_});
    }

private:
    static Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& a) {
        return 1.0 / (1.0 + (-a).exp());
    }

    int d_, h_;
    Eigen::MatrixXd Wx_, Uh_, b_, gWx_, gUh_, gb_;
    Batch xs_;
    std::vector<Eigen::MatrixXd> hs_, rs_, zs_, ns_, un_hs_;
    std::string name_;
};

// --- shape plumbing --------------------------------------------------------

// (C, L) per-sample maps -> (C*L, B) matrix, column-major within a sample.
inline Eigen::MatrixXd flatten(const Batch& xs) {
    const Eigen::Index n = xs[0].size();
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out.col(static_cast<Eigen::Index>(i)) = xs[i].reshaped();
    }
    return out;
}

inline Batch unflatten(const Eigen::MatrixXd& x, Eigen::Index rows,
                       Eigen::Index cols) {
    Batch out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        out[static_cast<std::size_t>(i)] = x.col(i).reshaped(rows, cols);
    }
    return out;
}

// (C, H*W) image -> (C*W, H) sequence: one column per image row so a
// recurrent layer can walk the time (height) axis.
inline Eigen::MatrixXd image_to_sequence(const Eigen::MatrixXd& x, int height,
                                         int width) {
    Eigen::MatrixXd out(x.rows() * width, height);
    for (int h = 0; h < height; ++h) {
        out.col(h) = x.middleCols(static_cast<Eigen::Index>(h) * width, width)
                         .reshaped();
    }
    return out;
}

inline Eigen::MatrixXd sequence_to_image_grad(const Eigen::MatrixXd& g,
                                              Eigen::Index channels,
                                              int height, int width) {
    Eigen::MatrixXd out(channels, static_cast<Eigen::Index>(height) * width);
    for (int h = 0; h < height; ++h) {
        out.middleCols(static_cast<Eigen::Index>(h) * width, width) =
            g.col(h).reshaped(channels, width);
    }
    return out;
}

}  // namespace soundmask::nn

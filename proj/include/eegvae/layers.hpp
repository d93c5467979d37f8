#ifndef EEGVAE_LAYERS_HPP
#define EEGVAE_LAYERS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "eegvae/ops.hpp"

// Layer wrappers that own parameters, gradients, and the forward caches their
// backward passes need. backward() accumulates into .grad and returns the
// input gradient.

namespace eegvae {

template <typename Real>
struct Param {
    std::string name;
    TensorT<Real> value;
    TensorT<Real> grad;

    void init_shape(std::string n, std::vector<std::size_t> dims) {
        name = std::move(n);
        value = TensorT<Real>(dims);
        grad = TensorT<Real>(std::move(dims));
    }
};

// fan-in scaled uniform: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
template <typename Real>
void init_uniform(TensorT<Real>& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = Real(u(rng));
}

template <typename Real>
struct Conv2d {
    Param<Real> kernels; // fout x fin x kh x kw
    Param<Real> bias;    // fout
    Pad pad;
    TensorT<Real> cached_x;

    void init(const std::string& prefix, std::size_t fout, std::size_t fin,
              std::size_t kh, std::size_t kw, Pad p, Rng& rng) {
        kernels.init_shape(prefix + ".kernels", {fout, fin, kh, kw});
        bias.init_shape(prefix + ".bias", {fout});
        pad = p;
        init_uniform(kernels.value, fin * kh * kw, rng);
    }

    TensorT<Real> forward(const TensorT<Real>& x, bool keep_cache = true) {
        if (keep_cache) cached_x = x;
        TensorT<Real> y = conv2d(x, kernels.value, pad);
        const std::size_t per = y.dim(2) * y.dim(3);
        for (std::size_t b = 0; b < y.dim(0); ++b)
            for (std::size_t f = 0; f < y.dim(1); ++f) {
                Real* row = y.data() + (b * y.dim(1) + f) * per;
                const Real bv = bias.value.v[f];
                for (std::size_t i = 0; i < per; ++i) row[i] += bv;
            }
        return y;
    }

    TensorT<Real> backward(const TensorT<Real>& dy) {
        conv2d_vjp_kernels(cached_x, dy, pad, kernels.grad);
        const std::size_t per = dy.dim(2) * dy.dim(3);
        for (std::size_t b = 0; b < dy.dim(0); ++b)
            for (std::size_t f = 0; f < dy.dim(1); ++f) {
                const Real* row = dy.data() + (b * dy.dim(1) + f) * per;
                double acc = 0;
                for (std::size_t i = 0; i < per; ++i) acc += row[i];
                bias.grad.v[f] += Real(acc);
            }
        return conv2d_vjp_input(dy, kernels.value, pad);
    }
};

// Transposed convolution: forward is the adjoint of conv2d with the same
// kernels/padding, so <conv(a), b> == <a, forward(b)> holds exactly.
template <typename Real>
struct ConvTranspose2d {
    Param<Real> kernels; // fout x fin x kh x kw of the underlying conv
    Param<Real> bias;    // fin (the deconv output channels)
    Pad pad;
    TensorT<Real> cached_x;

    void init(const std::string& prefix, std::size_t fout, std::size_t fin,
              std::size_t kh, std::size_t kw, Pad p, Rng& rng) {
        kernels.init_shape(prefix + ".kernels", {fout, fin, kh, kw});
        bias.init_shape(prefix + ".bias", {fin});
        pad = p;
        init_uniform(kernels.value, fout * kh * kw, rng);
    }

    TensorT<Real> forward(const TensorT<Real>& x, bool keep_cache = true) {
        if (keep_cache) cached_x = x;
        TensorT<Real> y = conv2d_transpose(x, kernels.value, pad);
        const std::size_t per = y.dim(2) * y.dim(3);
        for (std::size_t b = 0; b < y.dim(0); ++b)
            for (std::size_t f = 0; f < y.dim(1); ++f) {
                Real* row = y.data() + (b * y.dim(1) + f) * per;
                const Real bv = bias.value.v[f];
                for (std::size_t i = 0; i < per; ++i) row[i] += bv;
            }
        return y;
    }

    TensorT<Real> backward(const TensorT<Real>& dy) {
        // d/dkernels: same contraction as the conv kernel grad with the roles
        // of input and output swapped.
        conv2d_vjp_kernels(dy, cached_x, pad, kernels.grad);
        const std::size_t per = dy.dim(2) * dy.dim(3);
        for (std::size_t b = 0; b < dy.dim(0); ++b)
            for (std::size_t f = 0; f < dy.dim(1); ++f) {
                const Real* row = dy.data() + (b * dy.dim(1) + f) * per;
                double acc = 0;
                for (std::size_t i = 0; i < per; ++i) acc += row[i];
                bias.grad.v[f] += Real(acc);
            }
        return conv2d(dy, kernels.value, pad);
    }
};

template <typename Real>
struct Dense {
    Param<Real> weight; // m x n
    Param<Real> bias;   // m
    TensorT<Real> cached_x;

    void init(const std::string& prefix, std::size_t out, std::size_t in, Rng& rng) {
        weight.init_shape(prefix + ".weight", {out, in});
        bias.init_shape(prefix + ".bias", {out});
        init_uniform(weight.value, in, rng);
    }

    TensorT<Real> forward(const TensorT<Real>& x, bool keep_cache = true) {
        if (keep_cache) cached_x = x;
        return dense(x, weight.value, bias.value);
    }

    TensorT<Real> backward(const TensorT<Real>& dy) {
        const std::size_t B = dy.dim(0), m = weight.value.dim(0), n = weight.value.dim(1);
        par::dense_param_grad<Real>(B, n, m, cached_x.data(), dy.data(),
                                    weight.grad.data(), bias.grad.data());
        TensorT<Real> dx({B, n});
        par::dense_input_grad<Real>(B, n, m, dy.data(), weight.value.data(), dx.data());
        return dx;
    }
};

// Batch normalization over (batch, H, W) per feature map. Running statistics
// update: r <- momentum * r + (1 - momentum) * batch_stat (biased variance).
template <typename Real>
struct BatchNorm2d {
    Param<Real> gamma, beta;
    TensorT<Real> running_mean, running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    // backward caches
    TensorT<Real> cached_xhat;
    std::vector<Real> cached_invstd;

    void init(const std::string& prefix, std::size_t features, double mom, double e) {
        gamma.init_shape(prefix + ".gamma", {features});
        beta.init_shape(prefix + ".beta", {features});
        std::fill(gamma.value.v.begin(), gamma.value.v.end(), Real(1));
        running_mean = TensorT<Real>({features});
        running_var = TensorT<Real>({features});
        std::fill(running_var.v.begin(), running_var.v.end(), Real(1));
        momentum = mom;
        eps = e;
    }

    TensorT<Real> forward(const TensorT<Real>& x, RunMode mode, bool keep_cache = true) {
        require_rank(x, 4, "batchnorm input");
        const std::size_t F = gamma.value.size();
        if (x.dim(1) != F) throw ShapeError("batchnorm: feature count mismatch");
        const std::size_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
        const std::size_t per = H * W;
        const double n = double(B * per);
        TensorT<Real> y(x.dims);
        if (keep_cache && mode != RunMode::eval) {
            cached_xhat = TensorT<Real>(x.dims);
            cached_invstd.assign(F, Real(0));
        }
        const bool use_batch = mode != RunMode::eval;
#pragma omp parallel for schedule(static)
        for (std::int64_t f = 0; f < std::int64_t(F); ++f) {
            double mean, var;
            if (use_batch) {
                double s = 0;
                for (std::size_t b = 0; b < B; ++b) {
                    const Real* row = x.data() + (b * F + f) * per;
                    for (std::size_t i = 0; i < per; ++i) s += row[i];
                }
                mean = s / n;
                double sq = 0;
                for (std::size_t b = 0; b < B; ++b) {
                    const Real* row = x.data() + (b * F + f) * per;
                    for (std::size_t i = 0; i < per; ++i) {
                        const double d = row[i] - mean;
                        sq += d * d;
                    }
                }
                var = sq / n;
                if (mode == RunMode::train) {
                    running_mean.v[f] =
                        Real(momentum * running_mean.v[f] + (1.0 - momentum) * mean);
                    running_var.v[f] =
                        Real(momentum * running_var.v[f] + (1.0 - momentum) * var);
                }
            } else {
                mean = running_mean.v[f];
                var = running_var.v[f];
            }
            const double invstd = 1.0 / std::sqrt(var + eps);
            const double g = gamma.value.v[f], be = beta.value.v[f];
            for (std::size_t b = 0; b < B; ++b) {
                const Real* row = x.data() + (b * F + f) * per;
                Real* yrow = y.data() + (b * F + f) * per;
                Real* hrow = (keep_cache && use_batch)
                                 ? cached_xhat.data() + (b * F + f) * per
                                 : nullptr;
                for (std::size_t i = 0; i < per; ++i) {
                    const double xh = (row[i] - mean) * invstd;
                    if (hrow) hrow[i] = Real(xh);
                    yrow[i] = Real(g * xh + be);
                }
            }
            if (keep_cache && use_batch) cached_invstd[f] = Real(invstd);
        }
        return y;
    }

    // Valid after a batch-statistics forward (train/frozen).
    TensorT<Real> backward(const TensorT<Real>& dy) {
        if (cached_xhat.size() != dy.size())
            throw StateError("batchnorm backward without batch-mode cache");
        const std::size_t F = gamma.value.size();
        const std::size_t B = dy.dim(0), per = dy.dim(2) * dy.dim(3);
        const double n = double(B * per);
        TensorT<Real> dx(dy.dims);
#pragma omp parallel for schedule(static)
        for (std::int64_t f = 0; f < std::int64_t(F); ++f) {
            double sum_dy = 0, sum_dy_xhat = 0;
            for (std::size_t b = 0; b < B; ++b) {
                const Real* drow = dy.data() + (b * F + f) * per;
                const Real* hrow = cached_xhat.data() + (b * F + f) * per;
                for (std::size_t i = 0; i < per; ++i) {
                    sum_dy += drow[i];
                    sum_dy_xhat += double(drow[i]) * hrow[i];
                }
            }
            gamma.grad.v[f] += Real(sum_dy_xhat);
            beta.grad.v[f] += Real(sum_dy);
            const double g = gamma.value.v[f];
            const double invstd = cached_invstd[f];
            for (std::size_t b = 0; b < B; ++b) {
                const Real* drow = dy.data() + (b * F + f) * per;
                const Real* hrow = cached_xhat.data() + (b * F + f) * per;
                Real* xrow = dx.data() + (b * F + f) * per;
                for (std::size_t i = 0; i < per; ++i)
                    xrow[i] = Real(g * invstd *
                                   (drow[i] - sum_dy / n - hrow[i] * sum_dy_xhat / n));
            }
        }
        return dx;
    }
};

template <typename Real>
struct ReLU {
    std::vector<std::uint8_t> mask;
    TensorT<Real> forward(const TensorT<Real>& x, bool keep_cache = true) {
        return relu(x, keep_cache ? &mask : nullptr);
    }
    TensorT<Real> backward(const TensorT<Real>& dy) { return relu_backward(dy, mask); }
};

template <typename Real>
struct Dropout {
    double rate = 0.25;
    std::vector<std::uint8_t> mask;
    bool active = false; // whether the last forward actually dropped units
    TensorT<Real> forward(const TensorT<Real>& x, RunMode mode, Rng& rng,
                          bool keep_cache = true) {
        active = mode != RunMode::eval && rate > 0.0;
        std::vector<std::uint8_t> local;
        return dropout(x, rate, mode, rng, keep_cache ? &mask : &local);
    }
    TensorT<Real> backward(const TensorT<Real>& dy) {
        if (!active) return dy;
        return dropout_backward(dy, rate, mask);
    }
};

} // namespace eegvae

#endif // EEGVAE_LAYERS_HPP

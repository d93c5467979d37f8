#ifndef EEGVAE_OPS_HPP
#define EEGVAE_OPS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "eegvae/kernels.hpp"
#include "eegvae/rng.hpp"
#include "eegvae/tensor.hpp"

// Tensor-level operations with shape validation. Forward passes route through
// the OpenMP kernels; every op has a matching vjp/backward used by the layer
// wrappers and the gradient checker.

namespace eegvae {

struct Pad {
    std::int64_t top = 0, bottom = 0, left = 0, right = 0;
};

enum class RunMode { train, frozen, eval };
// train:  batch statistics, running stats updated, dropout active
// frozen: batch statistics, running stats untouched, dropout active
// eval:   running statistics, dropout off

template <typename Real>
ConvGeom conv_geom(const TensorT<Real>& x, const TensorT<Real>& k, Pad pad) {
    require_rank(x, 4, "conv2d input");
    require_rank(k, 4, "conv2d kernels");
    ConvGeom g;
    g.batch = static_cast<std::int64_t>(x.dim(0));
    g.fin = static_cast<std::int64_t>(x.dim(1));
    g.in_h = static_cast<std::int64_t>(x.dim(2));
    g.in_w = static_cast<std::int64_t>(x.dim(3));
    g.fout = static_cast<std::int64_t>(k.dim(0));
    g.kh = static_cast<std::int64_t>(k.dim(2));
    g.kw = static_cast<std::int64_t>(k.dim(3));
    g.pad_top = pad.top;
    g.pad_bottom = pad.bottom;
    g.pad_left = pad.left;
    g.pad_right = pad.right;
    if (k.dim(1) != x.dim(1))
        throw ShapeError("conv2d: kernel fin " + std::to_string(k.dim(1)) +
                         " != input fin " + std::to_string(x.dim(1)));
    if (!g.valid())
        throw ShapeError("conv2d: kernel does not fit padded input, x=" +
                         x.shape_str() + " k=" + k.shape_str());
    return g;
}

template <typename Real>
TensorT<Real> conv2d(const TensorT<Real>& x, const TensorT<Real>& k, Pad pad) {
    ConvGeom g = conv_geom(x, k, pad);
    TensorT<Real> y({x.dim(0), k.dim(0), static_cast<std::size_t>(g.out_h()),
                     static_cast<std::size_t>(g.out_w())});
    par::conv2d_forward(g, x.data(), k.data(), y.data());
    return y;
}

// Gradient of conv2d w.r.t. its input; also the forward pass of the
// transposed convolution (exact adjoint by construction).
template <typename Real>
TensorT<Real> conv2d_vjp_input(const TensorT<Real>& dy, const TensorT<Real>& k,
                               Pad pad) {
    require_rank(dy, 4, "conv2d_vjp_input grad");
    require_rank(k, 4, "conv2d_vjp_input kernels");
    ConvGeom g;
    g.batch = static_cast<std::int64_t>(dy.dim(0));
    g.fout = static_cast<std::int64_t>(k.dim(0));
    g.fin = static_cast<std::int64_t>(k.dim(1));
    g.kh = static_cast<std::int64_t>(k.dim(2));
    g.kw = static_cast<std::int64_t>(k.dim(3));
    g.pad_top = pad.top;
    g.pad_bottom = pad.bottom;
    g.pad_left = pad.left;
    g.pad_right = pad.right;
    g.in_h = static_cast<std::int64_t>(dy.dim(2)) - 1 + g.kh - g.pad_top - g.pad_bottom;
    g.in_w = static_cast<std::int64_t>(dy.dim(3)) - 1 + g.kw - g.pad_left - g.pad_right;
    if (dy.dim(1) != k.dim(0))
        throw ShapeError("conv2d_vjp_input: grad fmaps != kernel fout");
    if (!g.valid()) throw ShapeError("conv2d_vjp_input: inconsistent geometry");
    TensorT<Real> dx({dy.dim(0), k.dim(1), static_cast<std::size_t>(g.in_h),
                      static_cast<std::size_t>(g.in_w)});
    par::conv2d_input_grad(g, dy.data(), k.data(), dx.data());
    return dx;
}

template <typename Real>
TensorT<Real> conv2d_transpose(const TensorT<Real>& x, const TensorT<Real>& k,
                               Pad pad) {
    return conv2d_vjp_input(x, k, pad);
}

// Accumulates the kernel gradient of conv2d(x, k, pad) given dy.
template <typename Real>
void conv2d_vjp_kernels(const TensorT<Real>& x, const TensorT<Real>& dy, Pad pad,
                        TensorT<Real>& dk) {
    ConvGeom g = conv_geom(x, dk, pad);
    if (dy.dims != std::vector<std::size_t>{x.dim(0), dk.dim(0),
                                            static_cast<std::size_t>(g.out_h()),
                                            static_cast<std::size_t>(g.out_w())})
        throw ShapeError("conv2d_vjp_kernels: grad shape " + dy.shape_str());
    par::conv2d_kernel_grad(g, x.data(), dy.data(), dk.data());
}

template <typename Real>
TensorT<Real> dense(const TensorT<Real>& x, const TensorT<Real>& w,
                    const TensorT<Real>& b) {
    require_rank(x, 2, "dense input");
    require_rank(w, 2, "dense weight");
    if (w.dim(1) != x.dim(1) || b.size() != w.dim(0))
        throw ShapeError("dense: x=" + x.shape_str() + " w=" + w.shape_str());
    TensorT<Real> y({x.dim(0), w.dim(0)});
    par::dense_forward(x.dim(0), w.dim(1), w.dim(0), x.data(), w.data(), b.data(),
                       y.data());
    return y;
}

template <typename Real>
TensorT<Real> relu(const TensorT<Real>& x, std::vector<std::uint8_t>* mask = nullptr) {
    TensorT<Real> y(x.dims);
    if (mask) mask->assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool on = x.v[i] > Real(0);
        y.v[i] = on ? x.v[i] : Real(0);
        if (mask) (*mask)[i] = on;
    }
    return y;
}

template <typename Real>
TensorT<Real> relu_backward(const TensorT<Real>& dy,
                            const std::vector<std::uint8_t>& mask) {
    TensorT<Real> dx(dy.dims);
    for (std::size_t i = 0; i < dy.size(); ++i)
        dx.v[i] = mask[i] ? dy.v[i] : Real(0);
    return dx;
}

// Inverted dropout: survivors scaled by 1/(1-rate) so the expectation is
// preserved. mask stores the survivor flag.
template <typename Real>
TensorT<Real> dropout(const TensorT<Real>& x, double rate, RunMode mode, Rng& rng,
                      std::vector<std::uint8_t>* mask = nullptr) {
    if (rate < 0.0 || rate >= 1.0) throw DomainError("dropout: rate must be in [0,1)");
    if (mode == RunMode::eval || rate == 0.0) {
        if (mask) mask->assign(x.size(), 1);
        return x;
    }
    const Real scale = Real(1.0 / (1.0 - rate));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TensorT<Real> y(x.dims);
    if (mask) mask->assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool keep = u(rng) >= rate;
        y.v[i] = keep ? x.v[i] * scale : Real(0);
        if (mask) (*mask)[i] = keep;
    }
    return y;
}

template <typename Real>
TensorT<Real> dropout_backward(const TensorT<Real>& dy, double rate,
                               const std::vector<std::uint8_t>& mask) {
    if (rate == 0.0) return dy;
    const Real scale = Real(1.0 / (1.0 - rate));
    TensorT<Real> dx(dy.dims);
    for (std::size_t i = 0; i < dy.size(); ++i)
        dx.v[i] = mask[i] ? dy.v[i] * scale : Real(0);
    return dx;
}

// z = mu + sigma .* eps
template <typename Real>
TensorT<Real> reparameterize(const TensorT<Real>& mu, const TensorT<Real>& sigma,
                             const TensorT<Real>& eps) {
    if (!mu.same_shape(sigma) || !mu.same_shape(eps))
        throw ShapeError("reparameterize: mismatched shapes");
    TensorT<Real> z(mu.dims);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(sigma.v[i] > Real(0)))
            throw DomainError("reparameterize: sigma must be positive");
        z.v[i] = mu.v[i] + sigma.v[i] * eps.v[i];
    }
    return z;
}

// Per batch element: 0.5 * sum_j (sigma_j^2 + mu_j^2 - 1 - log sigma_j^2)
template <typename Real>
std::vector<double> kl_standard_normal(const TensorT<Real>& mu,
                                       const TensorT<Real>& sigma) {
    require_rank(mu, 2, "kl mu");
    if (!mu.same_shape(sigma)) throw ShapeError("kl: mu/sigma shapes differ");
    std::vector<double> out(mu.dim(0), 0.0);
    for (std::size_t b = 0; b < mu.dim(0); ++b) {
        double acc = 0.0;
        for (std::size_t j = 0; j < mu.dim(1); ++j) {
            const double s = sigma.at2(b, j);
            const double m = mu.at2(b, j);
            if (!(s > 0.0)) throw DomainError("kl: sigma must be positive");
            acc += s * s + m * m - 1.0 - std::log(s * s);
        }
        out[b] = 0.5 * acc;
    }
    return out;
}

// Numerically stable row softmax + mean cross-entropy against integer labels.
template <typename Real>
double softmax_xent(const TensorT<Real>& logits, const std::vector<int>& labels) {
    require_rank(logits, 2, "softmax_xent logits");
    if (labels.size() != logits.dim(0))
        throw ShapeError("softmax_xent: label count != batch");
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        double mx = logits.at2(b, 0);
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, double(logits.at2(b, k)));
        double lse = 0.0;
        for (std::size_t k = 0; k < K; ++k) lse += std::exp(double(logits.at2(b, k)) - mx);
        lse = std::log(lse) + mx;
        const int y = labels[b];
        if (y < 0 || static_cast<std::size_t>(y) >= K)
            throw ShapeError("softmax_xent: label out of range");
        total += lse - double(logits.at2(b, y));
    }
    return total / double(B);
}

template <typename Real>
double softmax_xent(const TensorT<Real>& logits, const TensorT<Real>& onehot) {
    require_rank(onehot, 2, "softmax_xent onehot");
    if (!logits.same_shape(onehot)) throw ShapeError("softmax_xent: shape mismatch");
    std::vector<int> labels(onehot.dim(0), -1);
    for (std::size_t b = 0; b < onehot.dim(0); ++b)
        for (std::size_t k = 0; k < onehot.dim(1); ++k)
            if (onehot.at2(b, k) == Real(1)) labels[b] = static_cast<int>(k);
    return softmax_xent(logits, labels);
}

// d(mean CE)/dlogits = (softmax - onehot) / B
template <typename Real>
TensorT<Real> softmax_xent_backward(const TensorT<Real>& logits,
                                    const std::vector<int>& labels) {
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    TensorT<Real> d(logits.dims);
    for (std::size_t b = 0; b < B; ++b) {
        double mx = logits.at2(b, 0);
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, double(logits.at2(b, k)));
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) z += std::exp(double(logits.at2(b, k)) - mx);
        for (std::size_t k = 0; k < K; ++k) {
            double p = std::exp(double(logits.at2(b, k)) - mx) / z;
            d.at2(b, k) = Real((p - (static_cast<int>(k) == labels[b] ? 1.0 : 0.0)) /
                               double(B));
        }
    }
    return d;
}

template <typename Real>
std::vector<int> argmax_rows(const TensorT<Real>& t) {
    require_rank(t, 2, "argmax_rows");
    std::vector<int> out(t.dim(0), 0);
    for (std::size_t b = 0; b < t.dim(0); ++b) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < t.dim(1); ++k)
            if (t.at2(b, k) > t.at2(b, best)) best = k; // ties -> lowest index
        out[b] = static_cast<int>(best);
    }
    return out;
}

template <typename Real>
TensorT<Real> gaussian_noise(const std::vector<std::size_t>& dims, Rng& rng) {
    TensorT<Real> t(dims);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = Real(n(rng));
    return t;
}

} // namespace eegvae

#endif // EEGVAE_OPS_HPP

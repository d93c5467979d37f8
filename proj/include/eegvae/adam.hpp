#ifndef EEGVAE_ADAM_HPP
#define EEGVAE_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "eegvae/layers.hpp"

namespace eegvae {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameters. Moment slots are
// allocated lazily on the first step and stay aligned with the param list.
template <typename Real>
struct Adam {
    AdamConfig cfg;
    std::uint64_t t = 0;
    std::vector<TensorT<Real>> m, v;

    explicit Adam(AdamConfig c = {}) : cfg(c) {}

    void step(const std::vector<Param<Real>*>& params) {
        if (m.empty()) {
            for (auto* p : params) {
                m.emplace_back(p->value.dims);
                v.emplace_back(p->value.dims);
            }
        }
        if (m.size() != params.size()) throw ShapeError("adam: param list changed");
        ++t;
        const double c1 = 1.0 - std::pow(cfg.beta1, double(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, double(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param<Real>& p = *params[i];
            if (!p.value.same_shape(p.grad) || !p.value.same_shape(m[i]))
                throw ShapeError("adam: grad/slot shape mismatch for " + p.name);
            Real* w = p.value.data();
            const Real* g = p.grad.data();
            Real* mi = m[i].data();
            Real* vi = v[i].data();
            const std::size_t n = p.value.size();
            for (std::size_t j = 0; j < n; ++j) {
                const double gj = g[j];
                const double mj = cfg.beta1 * mi[j] + (1.0 - cfg.beta1) * gj;
                const double vj = cfg.beta2 * vi[j] + (1.0 - cfg.beta2) * gj * gj;
                mi[j] = Real(mj);
                vi[j] = Real(vj);
                w[j] -= Real(cfg.lr * (mj / c1) / (std::sqrt(vj / c2) + cfg.eps));
            }
        }
    }
};

template <typename Real>
void zero_grads(const std::vector<Param<Real>*>& params) {
    for (auto* p : params) p->grad.zero();
}

} // namespace eegvae

#endif // EEGVAE_ADAM_HPP

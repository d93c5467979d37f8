#ifndef EEGVAE_GRADCHECK_HPP
#define EEGVAE_GRADCHECK_HPP

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "eegvae/rng.hpp"
#include "eegvae/tensor.hpp"

// Central finite-difference verification in 64-bit. The scalar functional re-
// runs the forward pass from the (perturbed) tensors, so it must be
// deterministic: fixed epsilon draws, dropout disabled.

namespace eegvae {

struct GradCheckCoord {
    std::string tensor;
    std::size_t index = 0;
    double analytic = 0, numeric = 0, rel_err = 0;
};

struct GradCheckReport {
    double max_rel_err = 0;
    std::size_t coords_checked = 0;
    std::vector<GradCheckCoord> worst; // sorted, largest first

    bool pass(double tol) const { return max_rel_err <= tol; }
    std::string str() const {
        std::ostringstream os;
        os << "max_rel_err=" << max_rel_err << " over " << coords_checked << " coords";
        for (std::size_t i = 0; i < std::min<std::size_t>(worst.size(), 5); ++i)
            os << "\n  " << worst[i].tensor << "[" << worst[i].index
               << "] analytic=" << worst[i].analytic << " numeric=" << worst[i].numeric
               << " rel=" << worst[i].rel_err;
        return os.str();
    }
};

struct GradCheckTarget {
    std::string name;
    DTensor* value = nullptr;        // perturbed in place
    const DTensor* analytic = nullptr;
};

inline GradCheckReport check_gradients(const std::function<double()>& f,
                                       const std::vector<GradCheckTarget>& targets,
                                       std::uint64_t seed = 0,
                                       std::size_t sample_per_tensor = 200) {
    GradCheckReport rep;
    Rng rng = make_rng(seed, "gradcheck");
    for (const auto& tgt : targets) {
        DTensor& x = *tgt.value;
        if (!x.same_shape(*tgt.analytic))
            throw ShapeError("gradcheck: analytic shape mismatch for " + tgt.name);
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        if (x.size() > sample_per_tensor) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(sample_per_tensor);
        }
        for (std::size_t i : idx) {
            const double x0 = x.v[i];
            const double h = 1e-5 * std::max(1.0, std::abs(x0));
            x.v[i] = x0 + h;
            const double fp = f();
            x.v[i] = x0 - h;
            const double fm = f();
            x.v[i] = x0;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = tgt.analytic->v[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            ++rep.coords_checked;
            if (rel > rep.max_rel_err) rep.max_rel_err = rel;
            if (rep.worst.size() < 8 || rel > rep.worst.back().rel_err) {
                rep.worst.push_back({tgt.name, i, analytic, numeric, rel});
                std::sort(rep.worst.begin(), rep.worst.end(),
                          [](const auto& a, const auto& b) { return a.rel_err > b.rel_err; });
                if (rep.worst.size() > 8) rep.worst.resize(8);
            }
        }
    }
    return rep;
}

} // namespace eegvae

#endif // EEGVAE_GRADCHECK_HPP

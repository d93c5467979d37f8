#ifndef EEGVAE_TENSOR_HPP
#define EEGVAE_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "eegvae/errors.hpp"

namespace eegvae {

// Dense row-major tensor. Real is float for training, double for the
// verification harness.
template <typename Real>
struct TensorT {
    std::vector<std::size_t> dims;
    std::vector<Real> v;

    TensorT() = default;
    explicit TensorT(std::vector<std::size_t> shape)
        : dims(std::move(shape)), v(count(dims), Real(0)) {}
    TensorT(std::initializer_list<std::size_t> shape)
        : dims(shape), v(count(dims), Real(0)) {}

    static std::size_t count(const std::vector<std::size_t>& d) {
        std::size_t n = 1;
        for (std::size_t x : d) n *= x;
        return n;
    }

    std::size_t size() const { return v.size(); }
    std::size_t dim(std::size_t i) const { return dims[i]; }
    std::size_t rank() const { return dims.size(); }
    Real* data() { return v.data(); }
    const Real* data() const { return v.data(); }
    void zero() { std::fill(v.begin(), v.end(), Real(0)); }

    Real& at2(std::size_t i, std::size_t j) { return v[i * dims[1] + j]; }
    Real at2(std::size_t i, std::size_t j) const { return v[i * dims[1] + j]; }
    Real& at3(std::size_t i, std::size_t j, std::size_t k) {
        return v[(i * dims[1] + j) * dims[2] + k];
    }
    Real at3(std::size_t i, std::size_t j, std::size_t k) const {
        return v[(i * dims[1] + j) * dims[2] + k];
    }
    Real& at4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return v[((i * dims[1] + j) * dims[2] + k) * dims[3] + l];
    }
    Real at4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return v[((i * dims[1] + j) * dims[2] + k) * dims[3] + l];
    }

    bool same_shape(const TensorT& o) const { return dims == o.dims; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < dims.size(); ++i)
            os << dims[i] << (i + 1 < dims.size() ? "x" : "");
        os << ")";
        return os.str();
    }

    template <typename Other>
    TensorT<Other> cast() const {
        TensorT<Other> out(dims);
        for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<Other>(v[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

template <typename Real>
void require_shape(const TensorT<Real>& t, const std::vector<std::size_t>& want,
                   const char* who) {
    if (t.dims != want) {
        TensorT<Real> w(want);
        throw ShapeError(std::string(who) + ": expected " + w.shape_str() + ", got " +
                         t.shape_str());
    }
}

template <typename Real>
void require_rank(const TensorT<Real>& t, std::size_t r, const char* who) {
    if (t.rank() != r)
        throw ShapeError(std::string(who) + ": expected rank " + std::to_string(r) +
                         ", got " + t.shape_str());
}

} // namespace eegvae

#endif // EEGVAE_TENSOR_HPP

#ifndef EEGVAE_KERNELS_HPP
#define EEGVAE_KERNELS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>

// Low-level convolution / dense kernels. Two implementations with identical
// signatures: eegvae::serial holds the naive reference loops used as the test
// oracle, eegvae::par holds the OpenMP versions used everywhere else. Each
// output coordinate is produced by exactly one thread and the per-coordinate
// accumulation order matches the reference, so results are deterministic
// under any thread count.

namespace eegvae {

struct ConvGeom {
    std::int64_t batch = 0;
    std::int64_t fin = 0, in_h = 0, in_w = 0;
    std::int64_t fout = 0, kh = 0, kw = 0;
    std::int64_t pad_top = 0, pad_bottom = 0, pad_left = 0, pad_right = 0;

    std::int64_t out_h() const { return in_h + pad_top + pad_bottom - kh + 1; }
    std::int64_t out_w() const { return in_w + pad_left + pad_right - kw + 1; }
    std::int64_t in_count() const { return batch * fin * in_h * in_w; }
    std::int64_t out_count() const { return batch * fout * out_h() * out_w(); }
    std::int64_t kernel_count() const { return fout * fin * kh * kw; }
    bool valid() const {
        return batch > 0 && fin > 0 && in_h > 0 && in_w > 0 && fout > 0 && kh > 0 &&
               kw > 0 && pad_top >= 0 && pad_bottom >= 0 && pad_left >= 0 &&
               pad_right >= 0 && out_h() > 0 && out_w() > 0;
    }
};

namespace serial {

// y[b,fo,oy,ox] = sum_{fi,ky,kx} x[b,fi,oy+ky-pt,ox+kx-pl] * k[fo,fi,ky,kx]
template <typename Real>
void conv2d_forward(const ConvGeom& g, const Real* x, const Real* k, Real* y) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
    for (std::int64_t b = 0; b < g.batch; ++b)
        for (std::int64_t fo = 0; fo < g.fout; ++fo)
            for (std::int64_t oy = 0; oy < oh; ++oy)
                for (std::int64_t ox = 0; ox < ow; ++ox) {
                    Real acc = 0;
                    for (std::int64_t fi = 0; fi < g.fin; ++fi)
                        for (std::int64_t ky = 0; ky < g.kh; ++ky)
                            for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                                const std::int64_t iy = oy + ky - g.pad_top;
                                const std::int64_t ix = ox + kx - g.pad_left;
                                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w)
                                    continue;
                                acc += x[((b * g.fin + fi) * g.in_h + iy) * g.in_w + ix] *
                                       k[((fo * g.fin + fi) * g.kh + ky) * g.kw + kx];
                            }
                    y[((b * g.fout + fo) * oh + oy) * ow + ox] = acc;
                }
}

// dx[b,fi,iy,ix] = sum_{fo,ky,kx} dy[b,fo,iy-ky+pt,ix-kx+pl] * k[fo,fi,ky,kx]
// This is the exact adjoint of conv2d_forward and doubles as the transposed
// convolution forward pass.
template <typename Real>
void conv2d_input_grad(const ConvGeom& g, const Real* dy, const Real* k, Real* dx) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
    for (std::int64_t b = 0; b < g.batch; ++b)
        for (std::int64_t fi = 0; fi < g.fin; ++fi)
            for (std::int64_t iy = 0; iy < g.in_h; ++iy)
                for (std::int64_t ix = 0; ix < g.in_w; ++ix) {
                    Real acc = 0;
                    for (std::int64_t fo = 0; fo < g.fout; ++fo)
                        for (std::int64_t ky = 0; ky < g.kh; ++ky)
                            for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                                const std::int64_t oy = iy - ky + g.pad_top;
                                const std::int64_t ox = ix - kx + g.pad_left;
                                if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
                                acc += dy[((b * g.fout + fo) * oh + oy) * ow + ox] *
                                       k[((fo * g.fin + fi) * g.kh + ky) * g.kw + kx];
                            }
                    dx[((b * g.fin + fi) * g.in_h + iy) * g.in_w + ix] = acc;
                }
}

// dk[fo,fi,ky,kx] += sum_{b,oy,ox} dy[b,fo,oy,ox] * x[b,fi,oy+ky-pt,ox+kx-pl]
template <typename Real>
void conv2d_kernel_grad(const ConvGeom& g, const Real* x, const Real* dy, Real* dk) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
    for (std::int64_t fo = 0; fo < g.fout; ++fo)
        for (std::int64_t fi = 0; fi < g.fin; ++fi)
            for (std::int64_t ky = 0; ky < g.kh; ++ky)
                for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                    Real acc = 0;
                    for (std::int64_t b = 0; b < g.batch; ++b)
                        for (std::int64_t oy = 0; oy < oh; ++oy)
                            for (std::int64_t ox = 0; ox < ow; ++ox) {
                                const std::int64_t iy = oy + ky - g.pad_top;
                                const std::int64_t ix = ox + kx - g.pad_left;
                                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w)
                                    continue;
                                acc += dy[((b * g.fout + fo) * oh + oy) * ow + ox] *
                                       x[((b * g.fin + fi) * g.in_h + iy) * g.in_w + ix];
                            }
                    dk[((fo * g.fin + fi) * g.kh + ky) * g.kw + kx] += acc;
                }
}

// y[b,m] = bias[m] + sum_n w[m,n] * x[b,n]
template <typename Real>
void dense_forward(std::int64_t batch, std::int64_t n, std::int64_t m, const Real* x,
                   const Real* w, const Real* bias, Real* y) {
    for (std::int64_t b = 0; b < batch; ++b)
        for (std::int64_t i = 0; i < m; ++i) {
            Real acc = bias ? bias[i] : Real(0);
            for (std::int64_t j = 0; j < n; ++j) acc += w[i * n + j] * x[b * n + j];
            y[b * m + i] = acc;
        }
}

// dx[b,n] = sum_m dy[b,m] * w[m,n]
template <typename Real>
void dense_input_grad(std::int64_t batch, std::int64_t n, std::int64_t m,
                      const Real* dy, const Real* w, Real* dx) {
    for (std::int64_t b = 0; b < batch; ++b)
        for (std::int64_t j = 0; j < n; ++j) {
            Real acc = 0;
            for (std::int64_t i = 0; i < m; ++i) acc += dy[b * m + i] * w[i * n + j];
            dx[b * n + j] = acc;
        }
}

// dw[m,n] += sum_b dy[b,m] * x[b,n];  db[m] += sum_b dy[b,m]
template <typename Real>
void dense_param_grad(std::int64_t batch, std::int64_t n, std::int64_t m,
                      const Real* x, const Real* dy, Real* dw, Real* db) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            Real acc = 0;
            for (std::int64_t b = 0; b < batch; ++b) acc += dy[b * m + i] * x[b * n + j];
            dw[i * n + j] += acc;
        }
        if (db) {
            Real acc = 0;
            for (std::int64_t b = 0; b < batch; ++b) acc += dy[b * m + i];
            db[i] += acc;
        }
    }
}

} // namespace serial

namespace par {

template <typename Real>
void conv2d_forward(const ConvGeom& g, const Real* __restrict x,
                    const Real* __restrict k, Real* __restrict y) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t b = 0; b < g.batch; ++b)
        for (std::int64_t fo = 0; fo < g.fout; ++fo) {
            Real* yrow0 = y + ((b * g.fout + fo) * oh) * ow;
            for (std::int64_t i = 0; i < oh * ow; ++i) yrow0[i] = 0;
            for (std::int64_t fi = 0; fi < g.fin; ++fi)
                for (std::int64_t ky = 0; ky < g.kh; ++ky)
                    for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                        const Real kv = k[((fo * g.fin + fi) * g.kh + ky) * g.kw + kx];
                        for (std::int64_t oy = 0; oy < oh; ++oy) {
                            const std::int64_t iy = oy + ky - g.pad_top;
                            if (iy < 0 || iy >= g.in_h) continue;
                            const Real* xrow =
                                x + ((b * g.fin + fi) * g.in_h + iy) * g.in_w;
                            Real* yrow = yrow0 + oy * ow;
                            // valid ox range for this tap
                            const std::int64_t lo = std::max<std::int64_t>(0, g.pad_left - kx);
                            const std::int64_t hi = std::min<std::int64_t>(
                                ow, g.in_w + g.pad_left - kx);
                            const std::int64_t shift = kx - g.pad_left;
                            for (std::int64_t ox = lo; ox < hi; ++ox)
                                yrow[ox] += kv * xrow[ox + shift];
                        }
                    }
        }
}

template <typename Real>
void conv2d_input_grad(const ConvGeom& g, const Real* __restrict dy,
                       const Real* __restrict k, Real* __restrict dx) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t b = 0; b < g.batch; ++b)
        for (std::int64_t fi = 0; fi < g.fin; ++fi) {
            Real* dxrow0 = dx + ((b * g.fin + fi) * g.in_h) * g.in_w;
            for (std::int64_t i = 0; i < g.in_h * g.in_w; ++i) dxrow0[i] = 0;
            for (std::int64_t fo = 0; fo < g.fout; ++fo)
                for (std::int64_t ky = 0; ky < g.kh; ++ky)
                    for (std::int64_t kx = 0; kx < g.kw; ++kx) {
                        const Real kv = k[((fo * g.fin + fi) * g.kh + ky) * g.kw + kx];
                        for (std::int64_t iy = 0; iy < g.in_h; ++iy) {
                            const std::int64_t oy = iy - ky + g.pad_top;
                            if (oy < 0 || oy >= oh) continue;
                            const Real* dyrow = dy + ((b * g.fout + fo) * oh + oy) * ow;
                            Real* dxrow = dxrow0 + iy * g.in_w;
                            const std::int64_t lo =
                                std::max<std::int64_t>(0, kx - g.pad_left);
                            const std::int64_t hi = std::min<std::int64_t>(
                                g.in_w, ow + kx - g.pad_left);
                            const std::int64_t shift = g.pad_left - kx;
                            for (std::int64_t ix = lo; ix < hi; ++ix)
                                dxrow[ix] += kv * dyrow[ix + shift];
                        }
                    }
        }
}

template <typename Real>
void conv2d_kernel_grad(const ConvGeom& g, const Real* __restrict x,
                        const Real* __restrict dy, Real* __restrict dk) {
    const std::int64_t oh = g.out_h(), ow = g.out_w();
    const std::int64_t taps = g.fin * g.kh * g.kw;
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t fo = 0; fo < g.fout; ++fo)
        for (std::int64_t t = 0; t < taps; ++t) {
            const std::int64_t fi = t / (g.kh * g.kw);
            const std::int64_t ky = (t / g.kw) % g.kh;
            const std::int64_t kx = t % g.kw;
            Real acc = 0;
            for (std::int64_t b = 0; b < g.batch; ++b)
                for (std::int64_t oy = 0; oy < oh; ++oy) {
                    const std::int64_t iy = oy + ky - g.pad_top;
                    if (iy < 0 || iy >= g.in_h) continue;
                    const Real* dyrow = dy + ((b * g.fout + fo) * oh + oy) * ow;
                    const Real* xrow = x + ((b * g.fin + fi) * g.in_h + iy) * g.in_w;
                    const std::int64_t lo = std::max<std::int64_t>(0, g.pad_left - kx);
                    const std::int64_t hi =
                        std::min<std::int64_t>(ow, g.in_w + g.pad_left - kx);
                    const std::int64_t shift = kx - g.pad_left;
                    Real row = 0;
                    for (std::int64_t ox = lo; ox < hi; ++ox)
                        row += dyrow[ox] * xrow[ox + shift];
                    acc += row;
                }
            dk[fo * taps + t] += acc;
        }
}

template <typename Real>
void dense_forward(std::int64_t batch, std::int64_t n, std::int64_t m,
                   const Real* __restrict x, const Real* __restrict w,
                   const Real* __restrict bias, Real* __restrict y) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t b = 0; b < batch; ++b)
        for (std::int64_t i = 0; i < m; ++i) {
            const Real* xr = x + b * n;
            const Real* wr = w + i * n;
            Real acc = bias ? bias[i] : Real(0);
            for (std::int64_t j = 0; j < n; ++j) acc += wr[j] * xr[j];
            y[b * m + i] = acc;
        }
}

template <typename Real>
void dense_input_grad(std::int64_t batch, std::int64_t n, std::int64_t m,
                      const Real* __restrict dy, const Real* __restrict w,
                      Real* __restrict dx) {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < batch; ++b) {
        Real* dxr = dx + b * n;
        for (std::int64_t j = 0; j < n; ++j) dxr[j] = 0;
        for (std::int64_t i = 0; i < m; ++i) {
            const Real d = dy[b * m + i];
            const Real* wr = w + i * n;
            for (std::int64_t j = 0; j < n; ++j) dxr[j] += d * wr[j];
        }
    }
}

template <typename Real>
void dense_param_grad(std::int64_t batch, std::int64_t n, std::int64_t m,
                      const Real* __restrict x, const Real* __restrict dy,
                      Real* __restrict dw, Real* __restrict db) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        Real* dwr = dw + i * n;
        for (std::int64_t b = 0; b < batch; ++b) {
            const Real d = dy[b * m + i];
            const Real* xr = x + b * n;
            for (std::int64_t j = 0; j < n; ++j) dwr[j] += d * xr[j];
        }
        if (db) {
            Real acc = 0;
            for (std::int64_t b = 0; b < batch; ++b) acc += dy[b * m + i];
            db[i] += acc;
        }
    }
}

} // namespace par

} // namespace eegvae

#endif // EEGVAE_KERNELS_HPP

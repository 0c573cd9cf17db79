#pragma once

#include <cmath>
#include <cstddef>

// Array kernels shared by the autodiff ops and the graph-free inference path.
// Both paths must produce bit-identical values, so everything here uses a
// fixed sequential accumulation order.

namespace viinter::detail {

// Multiply with the product rounded to storage before use. Keeps the compiler
// from fusing a*x + b*y into an fma, which would break the bitwise swap
// symmetry of blends (fma(a,x,round(b*y)) != fma(b,y,round(a*x))).
template <class T>
inline T mul_rounded(T x, T y) {
    volatile T p = x * y;
    return p;
}

// y[B,out] = x[B,in] . w[in,out] + b[out]
template <class T>
void linear_fwd(const T* x, const T* w, const T* b, T* y,
                std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < batch; ++r) {
        const T* xr = x + r * in;
        T* yr = y + r * out;
        for (std::size_t c = 0; c < out; ++c) yr[c] = b[c];
        for (std::size_t k = 0; k < in; ++k) {
            const T xk = xr[k];
            const T* wk = w + k * out;
            for (std::size_t c = 0; c < out; ++c) yr[c] += xk * wk[c];
        }
    }
}

template <class T>
void transpose(const T* a, T* at, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) at[c * rows + r] = a[r * cols + c];
}

// dx[B,in] += dy[B,out] . w^T, with wt given as the out-by-in transpose so the
// inner loop stays contiguous.
template <class T>
void linear_bwd_x(const T* dy, const T* wt, T* dx,
                  std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < batch; ++r) {
        const T* dyr = dy + r * out;
        T* dxr = dx + r * in;
        for (std::size_t c = 0; c < out; ++c) {
            const T d = dyr[c];
            const T* wtc = wt + c * in;
            for (std::size_t k = 0; k < in; ++k) dxr[k] += d * wtc[k];
        }
    }
}

// dw[in,out] += x^T . dy
template <class T>
void linear_bwd_w(const T* x, const T* dy, T* dw,
                  std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < batch; ++r) {
        const T* xr = x + r * in;
        const T* dyr = dy + r * out;
        for (std::size_t k = 0; k < in; ++k) {
            const T xk = xr[k];
            T* dwk = dw + k * out;
            for (std::size_t c = 0; c < out; ++c) dwk[c] += xk * dyr[c];
        }
    }
}

template <class T>
void linear_bwd_b(const T* dy, T* db, std::size_t batch, std::size_t out) {
    for (std::size_t r = 0; r < batch; ++r) {
        const T* dyr = dy + r * out;
        for (std::size_t c = 0; c < out; ++c) db[c] += dyr[c];
    }
}

template <class T>
void sine_fwd(const T* x, T* y, std::size_t n, T w0) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(w0 * x[i]);
}

template <class T>
void sine_bwd(const T* x, const T* dy, T* dx, std::size_t n, T w0) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += w0 * std::cos(w0 * x[i]) * dy[i];
}

template <class T>
void sigmoid_fwd(const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <class T>
void sigmoid_bwd(const T* y, const T* dy, T* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += y[i] * (T(1) - y[i]) * dy[i];
}

// Valid 2-D cross-correlation. Layouts: in [H,W,Cin], k [kh,kw,Cin,Cout],
// out [H-kh+1, W-kw+1, Cout].
template <class T>
void conv2d_fwd(const T* in, const T* k, T* out,
                std::size_t h, std::size_t w, std::size_t cin, std::size_t cout,
                std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            T* o = out + (r * ow + c) * cout;
            for (std::size_t oc = 0; oc < cout; ++oc) o[oc] = T(0);
            for (std::size_t dr = 0; dr < kh; ++dr) {
                for (std::size_t dc = 0; dc < kw; ++dc) {
                    const T* px = in + ((r + dr) * w + (c + dc)) * cin;
                    const T* kk = k + (dr * kw + dc) * cin * cout;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const T v = px[ic];
                        const T* kc = kk + ic * cout;
                        for (std::size_t oc = 0; oc < cout; ++oc) o[oc] += v * kc[oc];
                    }
                }
            }
        }
    }
}

template <class T>
void conv2d_bwd_in(const T* dy, const T* k, T* din,
                   std::size_t h, std::size_t w, std::size_t cin, std::size_t cout,
                   std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            const T* d = dy + (r * ow + c) * cout;
            for (std::size_t dr = 0; dr < kh; ++dr) {
                for (std::size_t dc = 0; dc < kw; ++dc) {
                    T* px = din + ((r + dr) * w + (c + dc)) * cin;
                    const T* kk = k + (dr * kw + dc) * cin * cout;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const T* kc = kk + ic * cout;
                        T acc = T(0);
                        for (std::size_t oc = 0; oc < cout; ++oc) acc += d[oc] * kc[oc];
                        px[ic] += acc;
                    }
                }
            }
        }
    }
}

template <class T>
void conv2d_bwd_k(const T* in, const T* dy, T* dk,
                  std::size_t h, std::size_t w, std::size_t cin, std::size_t cout,
                  std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            const T* d = dy + (r * ow + c) * cout;
            for (std::size_t dr = 0; dr < kh; ++dr) {
                for (std::size_t dc = 0; dc < kw; ++dc) {
                    const T* px = in + ((r + dr) * w + (c + dc)) * cin;
                    T* kk = dk + (dr * kw + dc) * cin * cout;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const T v = px[ic];
                        T* kc = kk + ic * cout;
                        for (std::size_t oc = 0; oc < cout; ++oc) kc[oc] += v * d[oc];
                    }
                }
            }
        }
    }
}

// 2x2 average pooling with stride 2; trailing odd row/column dropped.
template <class T>
void avgpool2_fwd(const T* in, T* out, std::size_t h, std::size_t w, std::size_t ch) {
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            const T* p00 = in + ((2 * r) * w + 2 * c) * ch;
            const T* p01 = p00 + ch;
            const T* p10 = in + ((2 * r + 1) * w + 2 * c) * ch;
            const T* p11 = p10 + ch;
            T* o = out + (r * ow + c) * ch;
            for (std::size_t k = 0; k < ch; ++k)
                o[k] = (p00[k] + p01[k] + p10[k] + p11[k]) * T(0.25);
        }
    }
}

template <class T>
void avgpool2_bwd(const T* dy, T* dx, std::size_t h, std::size_t w, std::size_t ch) {
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            const T* d = dy + (r * ow + c) * ch;
            T* p00 = dx + ((2 * r) * w + 2 * c) * ch;
            T* p10 = dx + ((2 * r + 1) * w + 2 * c) * ch;
            for (std::size_t k = 0; k < ch; ++k) {
                const T g = d[k] * T(0.25);
                p00[k] += g;
                p00[ch + k] += g;
                p10[k] += g;
                p10[ch + k] += g;
            }
        }
    }
}

} // namespace viinter::detail

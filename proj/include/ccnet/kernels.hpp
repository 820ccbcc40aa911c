#pragma once

#include <cstddef>
#include <string>

namespace ccnet::kernels {

// Arithmetic hot loops, provided as a scalar reference implementation plus an
// AVX2 variant selected at runtime. Both variants implement the *same* pinned
// accumulation orders, so their results are bit-identical — equivalence tests
// compare them with operator== and training trajectories do not depend on
// which one the dispatcher picked:
//
//   conv outputs:        taps accumulate in (ky, kx, ic) order per output
//                        channel; channels are independent chains.
//   conv kernel grads:   accumulate in (y, x) scan order per (tap, oc) entry.
//   conv input grads:    accumulate in (y, x, oc, ky, kx) visit order per
//                        input element; ic lanes are independent.
//   dense forward:       dot products are stripe-partitioned sums — stripe
//                        count 8 for f32 and 4 for f64, element i lands in
//                        stripe i % S, stripes combine by the fixed trees in
//                        stripe_combine8/4 — then bias is added last.
//   dense input grads:   accumulate in output-index order per input element.
//   elementwise kernels: per-element expression trees as written below.
//
// Neither variant may use fused multiply-add: the scalar TU is compiled
// without FMA and contraction is disabled project-wide, and the AVX2 TU uses
// explicit mul/add intrinsics.

template <typename T>
inline constexpr int stripe_count = sizeof(T) == 4 ? 8 : 4;

template <typename T>
inline T stripe_combine8(const T* s) {
  return ((s[0] + s[4]) + (s[2] + s[6])) + ((s[1] + s[5]) + (s[3] + s[7]));
}

template <typename T>
inline T stripe_combine4(const T* s) {
  return (s[0] + s[2]) + (s[1] + s[3]);
}

template <typename T>
inline T stripe_combine(const T* s) {
  if constexpr (stripe_count<T> == 8) {
    return stripe_combine8(s);
  } else {
    return stripe_combine4(s);
  }
}

// Layouts (all row-major, dimensions in element counts):
//   xpad  [hp, wp, cin]        zero-padded input plane
//   kt    [kh, kw, cin, cout]  kernels transposed so cout is contiguous
//   k     [cout, kh, kw, cin]  kernels in their stored layout
//   up    [ho, wo, cout]       upstream gradient
//   out   [ho, wo, cout]
//   gxpad [hp, wp, cin]        caller zeroes, then crops padding off
//   gkt   [kh, kw, cin, cout]  caller zeroes and transposes back
template <typename T>
struct Table {
  void (*conv_forward)(const T* xpad, int hp, int wp, int cin, const T* kt, int kh, int kw,
                       int cout, const T* bias, T* out, int ho, int wo);
  void (*conv_grad_input)(const T* up, int ho, int wo, int cout, const T* k, int kh, int kw,
                          int cin, T* gxpad, int hp, int wp);
  void (*conv_grad_kernels)(const T* xpad, int hp, int wp, int cin, const T* up, int ho, int wo,
                            int cout, T* gkt, int kh, int kw);
  void (*conv_grad_bias)(const T* up, int ho, int wo, int cout, T* gbias);

  // w [out_n, in_n]; y[o] = b[o] + striped dot(w row o, x)
  void (*dense_forward)(const T* w, const T* x, const T* b, T* y, int in_n, int out_n);
  // gx[i] += sum_o up[o] * w[o][i], o outer; caller zeroes gx
  void (*dense_grad_input)(const T* w, const T* up, T* gx, int in_n, int out_n);
  // gw[o][i] = up[o] * x[i]
  void (*dense_grad_weights)(const T* x, const T* up, T* gw, int in_n, int out_n);

  // y[i] = x[i] > 0 ? x[i] : 0
  void (*relu_forward)(const T* x, T* y, std::size_t n);
  // g[i] = x[i] > 0 ? up[i] : 0
  void (*relu_backward)(const T* x, const T* up, T* g, std::size_t n);

  // v[i] = momentum*v[i] - lr*g[i]; theta[i] += v[i]
  void (*sgd_update)(T* theta, T* vel, const T* grad, std::size_t n, T lr, T momentum);

  // y[i] += x[i]
  void (*vec_add)(T* y, const T* x, std::size_t n);
  // x[i] *= s
  void (*vec_scale)(T* x, T s, std::size_t n);
};

template <typename T>
const Table<T>& scalar_table();

// Null when this build or this CPU lacks AVX2.
template <typename T>
const Table<T>* avx2_table();

// The dispatched table: AVX2 when the CPU supports it, else scalar. The
// CCNET_KERNELS environment variable ("scalar" or "avx2") forces a variant;
// forcing avx2 on an unsupported CPU throws. Decided once per process.
template <typename T>
const Table<T>& active_table();

// Name of the variant active_table() resolved to ("scalar" or "avx2").
std::string active_name();

}  // namespace ccnet::kernels

#include <cstddef>

#include "ccnet/kernels.hpp"

// Reference implementations. Kept deliberately plain: these define the
// numeric behavior the AVX2 variants must reproduce bit for bit.

namespace ccnet::kernels {
namespace {

template <typename T>
void conv_forward_ref(const T* xpad, int hp, int wp, int cin, const T* kt, int kh, int kw,
                      int cout, const T* bias, T* out, int ho, int wo) {
  (void)hp;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      T* orow = out + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cout; ++oc) orow[oc] = bias[oc];
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const T* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
          const T* krow = kt + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
          for (int ic = 0; ic < cin; ++ic) {
            const T v = xrow[ic];
            const T* kc = krow + static_cast<std::size_t>(ic) * cout;
            for (int oc = 0; oc < cout; ++oc) orow[oc] += v * kc[oc];
          }
        }
      }
    }
  }
}

template <typename T>
void conv_grad_input_ref(const T* up, int ho, int wo, int cout, const T* k, int kh, int kw,
                         int cin, T* gxpad, int hp, int wp) {
  (void)hp;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const T* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cout; ++oc) {
        const T u = urow[oc];
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            T* grow = gxpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const T* krow = k + ((static_cast<std::size_t>(oc) * kh + ky) * kw + kx) * cin;
            for (int ic = 0; ic < cin; ++ic) grow[ic] += u * krow[ic];
          }
        }
      }
    }
  }
}

template <typename T>
void conv_grad_kernels_ref(const T* xpad, int hp, int wp, int cin, const T* up, int ho, int wo,
                           int cout, T* gkt, int kh, int kw) {
  (void)hp;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const T* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const T* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
          T* grow = gkt + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
          for (int ic = 0; ic < cin; ++ic) {
            const T v = xrow[ic];
            T* gc = grow + static_cast<std::size_t>(ic) * cout;
            for (int oc = 0; oc < cout; ++oc) gc[oc] += v * urow[oc];
          }
        }
      }
    }
  }
}

template <typename T>
void conv_grad_bias_ref(const T* up, int ho, int wo, int cout, T* gbias) {
  for (int oc = 0; oc < cout; ++oc) gbias[oc] = T(0);
  const std::size_t pixels = static_cast<std::size_t>(ho) * wo;
  for (std::size_t p = 0; p < pixels; ++p) {
    const T* urow = up + p * cout;
    for (int oc = 0; oc < cout; ++oc) gbias[oc] += urow[oc];
  }
}

template <typename T>
void dense_forward_ref(const T* w, const T* x, const T* b, T* y, int in_n, int out_n) {
  constexpr int S = stripe_count<T>;
  for (int o = 0; o < out_n; ++o) {
    const T* row = w + static_cast<std::size_t>(o) * in_n;
    T s[S] = {};
    for (int i = 0; i < in_n; ++i) s[i % S] += row[i] * x[i];
    y[o] = b[o] + stripe_combine<T>(s);
  }
}

template <typename T>
void dense_grad_input_ref(const T* w, const T* up, T* gx, int in_n, int out_n) {
  for (int o = 0; o < out_n; ++o) {
    const T u = up[o];
    const T* row = w + static_cast<std::size_t>(o) * in_n;
    for (int i = 0; i < in_n; ++i) gx[i] += u * row[i];
  }
}

template <typename T>
void dense_grad_weights_ref(const T* x, const T* up, T* gw, int in_n, int out_n) {
  for (int o = 0; o < out_n; ++o) {
    const T u = up[o];
    T* grow = gw + static_cast<std::size_t>(o) * in_n;
    for (int i = 0; i < in_n; ++i) grow[i] = u * x[i];
  }
}

template <typename T>
void relu_forward_ref(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward_ref(const T* x, const T* up, T* g, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) g[i] = x[i] > T(0) ? up[i] : T(0);
}

template <typename T>
void sgd_update_ref(T* theta, T* vel, const T* grad, std::size_t n, T lr, T momentum) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = momentum * vel[i] - lr * grad[i];
    vel[i] = v;
    theta[i] += v;
  }
}

template <typename T>
void vec_add_ref(T* y, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
void vec_scale_ref(T* x, T s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

template <typename T>
constexpr Table<T> make_scalar_table() {
  return Table<T>{
      conv_forward_ref<T>,      conv_grad_input_ref<T>, conv_grad_kernels_ref<T>,
      conv_grad_bias_ref<T>,    dense_forward_ref<T>,   dense_grad_input_ref<T>,
      dense_grad_weights_ref<T>, relu_forward_ref<T>,   relu_backward_ref<T>,
      sgd_update_ref<T>,        vec_add_ref<T>,         vec_scale_ref<T>,
  };
}

}  // namespace

template <>
const Table<float>& scalar_table<float>() {
  static constexpr Table<float> table = make_scalar_table<float>();
  return table;
}

template <>
const Table<double>& scalar_table<double>() {
  static constexpr Table<double> table = make_scalar_table<double>();
  return table;
}

}  // namespace ccnet::kernels

// AVX2 variants of the kernel table. Compiled with -mavx2 and nothing else;
// fused multiply-add is never emitted (explicit mul+add intrinsics only), so
// every result is bit-identical to the scalar reference.

#ifdef CCNET_BUILD_AVX2

#include <immintrin.h>

#include <cstddef>

#include "ccnet/kernels.hpp"

namespace ccnet::kernels {
namespace {

// ---- float (8 lanes) ----

void conv_forward_f32(const float* xpad, int hp, int wp, int cin, const float* kt, int kh, int kw,
                      int cout, const float* bias, float* out, int ho, int wo) {
  (void)hp;
  const int cblk = cout & ~7;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      float* orow = out + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cblk; oc += 8) {
        __m256 acc = _mm256_loadu_ps(bias + oc);
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const float* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const float* krow = kt + ((static_cast<std::size_t>(ky) * kw + kx) * cin) * cout + oc;
            for (int ic = 0; ic < cin; ++ic) {
              const __m256 xv = _mm256_set1_ps(xrow[ic]);
              const __m256 kv = _mm256_loadu_ps(krow + static_cast<std::size_t>(ic) * cout);
              acc = _mm256_add_ps(acc, _mm256_mul_ps(xv, kv));
            }
          }
        }
        _mm256_storeu_ps(orow + oc, acc);
      }
      for (int oc = cblk; oc < cout; ++oc) {
        float acc = bias[oc];
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const float* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const float* krow = kt + ((static_cast<std::size_t>(ky) * kw + kx) * cin) * cout + oc;
            for (int ic = 0; ic < cin; ++ic)
              acc += xrow[ic] * krow[static_cast<std::size_t>(ic) * cout];
          }
        }
        orow[oc] = acc;
      }
    }
  }
}

void conv_grad_input_f32(const float* up, int ho, int wo, int cout, const float* k, int kh,
                         int kw, int cin, float* gxpad, int hp, int wp) {
  (void)hp;
  const int cblk = cin & ~7;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const float* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cout; ++oc) {
        const float u = urow[oc];
        const __m256 uv = _mm256_set1_ps(u);
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            float* grow = gxpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const float* krow = k + ((static_cast<std::size_t>(oc) * kh + ky) * kw + kx) * cin;
            int ic = 0;
            for (; ic < cblk; ic += 8) {
              const __m256 g = _mm256_loadu_ps(grow + ic);
              const __m256 kv = _mm256_loadu_ps(krow + ic);
              _mm256_storeu_ps(grow + ic, _mm256_add_ps(g, _mm256_mul_ps(uv, kv)));
            }
            for (; ic < cin; ++ic) grow[ic] += u * krow[ic];
          }
        }
      }
    }
  }
}

void conv_grad_kernels_f32(const float* xpad, int hp, int wp, int cin, const float* up, int ho,
                           int wo, int cout, float* gkt, int kh, int kw) {
  (void)hp;
  const int cblk = cout & ~7;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const float* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const float* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
          float* grow = gkt + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
          for (int ic = 0; ic < cin; ++ic) {
            const float v = xrow[ic];
            const __m256 vv = _mm256_set1_ps(v);
            float* gc = grow + static_cast<std::size_t>(ic) * cout;
            int oc = 0;
            for (; oc < cblk; oc += 8) {
              const __m256 g = _mm256_loadu_ps(gc + oc);
              const __m256 uv = _mm256_loadu_ps(urow + oc);
              _mm256_storeu_ps(gc + oc, _mm256_add_ps(g, _mm256_mul_ps(vv, uv)));
            }
            for (; oc < cout; ++oc) gc[oc] += v * urow[oc];
          }
        }
      }
    }
  }
}

void conv_grad_bias_f32(const float* up, int ho, int wo, int cout, float* gbias) {
  const int cblk = cout & ~7;
  for (int oc = 0; oc < cout; ++oc) gbias[oc] = 0.0f;
  const std::size_t pixels = static_cast<std::size_t>(ho) * wo;
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* urow = up + p * cout;
    int oc = 0;
    for (; oc < cblk; oc += 8) {
      const __m256 g = _mm256_loadu_ps(gbias + oc);
      _mm256_storeu_ps(gbias + oc, _mm256_add_ps(g, _mm256_loadu_ps(urow + oc)));
    }
    for (; oc < cout; ++oc) gbias[oc] += urow[oc];
  }
}

void dense_forward_f32(const float* w, const float* x, const float* b, float* y, int in_n,
                       int out_n) {
  const int blk = in_n & ~7;
  for (int o = 0; o < out_n; ++o) {
    const float* row = w + static_cast<std::size_t>(o) * in_n;
    __m256 acc = _mm256_setzero_ps();
    int i = 0;
    for (; i < blk; i += 8)
      acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(row + i), _mm256_loadu_ps(x + i)));
    alignas(32) float s[8];
    _mm256_store_ps(s, acc);
    for (; i < in_n; ++i) s[i % 8] += row[i] * x[i];
    y[o] = b[o] + stripe_combine8(s);
  }
}

void dense_grad_input_f32(const float* w, const float* up, float* gx, int in_n, int out_n) {
  const int blk = in_n & ~7;
  for (int o = 0; o < out_n; ++o) {
    const float u = up[o];
    const __m256 uv = _mm256_set1_ps(u);
    const float* row = w + static_cast<std::size_t>(o) * in_n;
    int i = 0;
    for (; i < blk; i += 8) {
      const __m256 g = _mm256_loadu_ps(gx + i);
      _mm256_storeu_ps(gx + i, _mm256_add_ps(g, _mm256_mul_ps(uv, _mm256_loadu_ps(row + i))));
    }
    for (; i < in_n; ++i) gx[i] += u * row[i];
  }
}

void dense_grad_weights_f32(const float* x, const float* up, float* gw, int in_n, int out_n) {
  const int blk = in_n & ~7;
  for (int o = 0; o < out_n; ++o) {
    const float u = up[o];
    const __m256 uv = _mm256_set1_ps(u);
    float* grow = gw + static_cast<std::size_t>(o) * in_n;
    int i = 0;
    for (; i < blk; i += 8)
      _mm256_storeu_ps(grow + i, _mm256_mul_ps(uv, _mm256_loadu_ps(x + i)));
    for (; i < in_n; ++i) grow[i] = u * x[i];
  }
}

void relu_forward_f32(const float* x, float* y, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_f32(const float* x, const float* up, float* g, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(g + i, _mm256_and_ps(mask, _mm256_loadu_ps(up + i)));
  }
  for (; i < n; ++i) g[i] = x[i] > 0.0f ? up[i] : 0.0f;
}

void sgd_update_f32(float* theta, float* vel, const float* grad, std::size_t n, float lr,
                    float momentum) {
  const __m256 mv = _mm256_set1_ps(momentum);
  const __m256 lv = _mm256_set1_ps(lr);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_sub_ps(_mm256_mul_ps(mv, _mm256_loadu_ps(vel + i)),
                                   _mm256_mul_ps(lv, _mm256_loadu_ps(grad + i)));
    _mm256_storeu_ps(vel + i, v);
    _mm256_storeu_ps(theta + i, _mm256_add_ps(_mm256_loadu_ps(theta + i), v));
  }
  for (; i < n; ++i) {
    const float v = momentum * vel[i] - lr * grad[i];
    vel[i] = v;
    theta[i] += v;
  }
}

void vec_add_f32(float* y, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void vec_scale_f32(float* x, float s, std::size_t n) {
  const __m256 sv = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), sv));
  for (; i < n; ++i) x[i] *= s;
}

// ---- double (4 lanes) ----

void conv_forward_f64(const double* xpad, int hp, int wp, int cin, const double* kt, int kh,
                      int kw, int cout, const double* bias, double* out, int ho, int wo) {
  (void)hp;
  const int cblk = cout & ~3;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      double* orow = out + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cblk; oc += 4) {
        __m256d acc = _mm256_loadu_pd(bias + oc);
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const double* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const double* krow = kt + ((static_cast<std::size_t>(ky) * kw + kx) * cin) * cout + oc;
            for (int ic = 0; ic < cin; ++ic) {
              const __m256d xv = _mm256_set1_pd(xrow[ic]);
              const __m256d kv = _mm256_loadu_pd(krow + static_cast<std::size_t>(ic) * cout);
              acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, kv));
            }
          }
        }
        _mm256_storeu_pd(orow + oc, acc);
      }
      for (int oc = cblk; oc < cout; ++oc) {
        double acc = bias[oc];
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const double* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const double* krow = kt + ((static_cast<std::size_t>(ky) * kw + kx) * cin) * cout + oc;
            for (int ic = 0; ic < cin; ++ic)
              acc += xrow[ic] * krow[static_cast<std::size_t>(ic) * cout];
          }
        }
        orow[oc] = acc;
      }
    }
  }
}

void conv_grad_input_f64(const double* up, int ho, int wo, int cout, const double* k, int kh,
                         int kw, int cin, double* gxpad, int hp, int wp) {
  (void)hp;
  const int cblk = cin & ~3;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const double* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int oc = 0; oc < cout; ++oc) {
        const double u = urow[oc];
        const __m256d uv = _mm256_set1_pd(u);
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            double* grow = gxpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
            const double* krow = k + ((static_cast<std::size_t>(oc) * kh + ky) * kw + kx) * cin;
            int ic = 0;
            for (; ic < cblk; ic += 4) {
              const __m256d g = _mm256_loadu_pd(grow + ic);
              const __m256d kv = _mm256_loadu_pd(krow + ic);
              _mm256_storeu_pd(grow + ic, _mm256_add_pd(g, _mm256_mul_pd(uv, kv)));
            }
            for (; ic < cin; ++ic) grow[ic] += u * krow[ic];
          }
        }
      }
    }
  }
}

void conv_grad_kernels_f64(const double* xpad, int hp, int wp, int cin, const double* up, int ho,
                           int wo, int cout, double* gkt, int kh, int kw) {
  (void)hp;
  const int cblk = cout & ~3;
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      const double* urow = up + (static_cast<std::size_t>(y) * wo + x) * cout;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double* xrow = xpad + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * cin;
          double* grow = gkt + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
          for (int ic = 0; ic < cin; ++ic) {
            const double v = xrow[ic];
            const __m256d vv = _mm256_set1_pd(v);
            double* gc = grow + static_cast<std::size_t>(ic) * cout;
            int oc = 0;
            for (; oc < cblk; oc += 4) {
              const __m256d g = _mm256_loadu_pd(gc + oc);
              const __m256d uv = _mm256_loadu_pd(urow + oc);
              _mm256_storeu_pd(gc + oc, _mm256_add_pd(g, _mm256_mul_pd(vv, uv)));
            }
            for (; oc < cout; ++oc) gc[oc] += v * urow[oc];
          }
        }
      }
    }
  }
}

void conv_grad_bias_f64(const double* up, int ho, int wo, int cout, double* gbias) {
  const int cblk = cout & ~3;
  for (int oc = 0; oc < cout; ++oc) gbias[oc] = 0.0;
  const std::size_t pixels = static_cast<std::size_t>(ho) * wo;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* urow = up + p * cout;
    int oc = 0;
    for (; oc < cblk; oc += 4) {
      const __m256d g = _mm256_loadu_pd(gbias + oc);
      _mm256_storeu_pd(gbias + oc, _mm256_add_pd(g, _mm256_loadu_pd(urow + oc)));
    }
    for (; oc < cout; ++oc) gbias[oc] += urow[oc];
  }
}

void dense_forward_f64(const double* w, const double* x, const double* b, double* y, int in_n,
                       int out_n) {
  const int blk = in_n & ~3;
  for (int o = 0; o < out_n; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in_n;
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i < blk; i += 4)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(x + i)));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    for (; i < in_n; ++i) s[i % 4] += row[i] * x[i];
    y[o] = b[o] + stripe_combine4(s);
  }
}

void dense_grad_input_f64(const double* w, const double* up, double* gx, int in_n, int out_n) {
  const int blk = in_n & ~3;
  for (int o = 0; o < out_n; ++o) {
    const double u = up[o];
    const __m256d uv = _mm256_set1_pd(u);
    const double* row = w + static_cast<std::size_t>(o) * in_n;
    int i = 0;
    for (; i < blk; i += 4) {
      const __m256d g = _mm256_loadu_pd(gx + i);
      _mm256_storeu_pd(gx + i, _mm256_add_pd(g, _mm256_mul_pd(uv, _mm256_loadu_pd(row + i))));
    }
    for (; i < in_n; ++i) gx[i] += u * row[i];
  }
}

void dense_grad_weights_f64(const double* x, const double* up, double* gw, int in_n, int out_n) {
  const int blk = in_n & ~3;
  for (int o = 0; o < out_n; ++o) {
    const double u = up[o];
    const __m256d uv = _mm256_set1_pd(u);
    double* grow = gw + static_cast<std::size_t>(o) * in_n;
    int i = 0;
    for (; i < blk; i += 4)
      _mm256_storeu_pd(grow + i, _mm256_mul_pd(uv, _mm256_loadu_pd(x + i)));
    for (; i < in_n; ++i) grow[i] = u * x[i];
  }
}

void relu_forward_f64(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_f64(const double* x, const double* up, double* g, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + i, _mm256_and_pd(mask, _mm256_loadu_pd(up + i)));
  }
  for (; i < n; ++i) g[i] = x[i] > 0.0 ? up[i] : 0.0;
}

void sgd_update_f64(double* theta, double* vel, const double* grad, std::size_t n, double lr,
                    double momentum) {
  const __m256d mv = _mm256_set1_pd(momentum);
  const __m256d lv = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_sub_pd(_mm256_mul_pd(mv, _mm256_loadu_pd(vel + i)),
                                    _mm256_mul_pd(lv, _mm256_loadu_pd(grad + i)));
    _mm256_storeu_pd(vel + i, v);
    _mm256_storeu_pd(theta + i, _mm256_add_pd(_mm256_loadu_pd(theta + i), v));
  }
  for (; i < n; ++i) {
    const double v = momentum * vel[i] - lr * grad[i];
    vel[i] = v;
    theta[i] += v;
  }
}

void vec_add_f64(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void vec_scale_f64(double* x, double s, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), sv));
  for (; i < n; ++i) x[i] *= s;
}

constexpr Table<float> kAvx2F32{
    conv_forward_f32,      conv_grad_input_f32, conv_grad_kernels_f32, conv_grad_bias_f32,
    dense_forward_f32,     dense_grad_input_f32, dense_grad_weights_f32, relu_forward_f32,
    relu_backward_f32,     sgd_update_f32,      vec_add_f32,           vec_scale_f32,
};

constexpr Table<double> kAvx2F64{
    conv_forward_f64,      conv_grad_input_f64, conv_grad_kernels_f64, conv_grad_bias_f64,
    dense_forward_f64,     dense_grad_input_f64, dense_grad_weights_f64, relu_forward_f64,
    relu_backward_f64,     sgd_update_f64,      vec_add_f64,           vec_scale_f64,
};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace

template <>
const Table<float>* avx2_table<float>() {
  return cpu_has_avx2() ? &kAvx2F32 : nullptr;
}

template <>
const Table<double>* avx2_table<double>() {
  return cpu_has_avx2() ? &kAvx2F64 : nullptr;
}

}  // namespace ccnet::kernels

#endif  // CCNET_BUILD_AVX2

#include "lrf/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#if defined(__GNUC__)
#define LRF_NOINLINE __attribute__((noinline))
#else
#define LRF_NOINLINE
#endif

namespace lrf::kernels {

namespace {

std::atomic<bool> g_parallel{true};

using i64 = std::int64_t;

// The plane helpers below are noinline so the serial and OpenMP drivers run
// the exact same machine code per output block; bit-identical results across
// the two paths follow from that plus fixed accumulation order per element.

// One output plane y[b,co] of shape (H,W).
LRF_NOINLINE void conv2d_plane(const double* x, const double* w, double bias, double* y, i64 Cin,
                               i64 H, i64 W, i64 k) {
  const i64 pad = k / 2;
  for (i64 i = 0; i < H * W; ++i) y[i] = bias;
  for (i64 ci = 0; ci < Cin; ++ci) {
    const double* xc = x + ci * H * W;
    const double* wc = w + ci * k * k;
    for (i64 kh = 0; kh < k; ++kh) {
      const i64 dh = kh - pad;
      const i64 oh0 = std::max<i64>(0, -dh);
      const i64 oh1 = std::min<i64>(H, H - dh);
      for (i64 kw = 0; kw < k; ++kw) {
        const double wv = wc[kh * k + kw];
        const i64 dw = kw - pad;
        const i64 ow0 = std::max<i64>(0, -dw);
        const i64 ow1 = std::min<i64>(W, W - dw);
        for (i64 oh = oh0; oh < oh1; ++oh) {
          const double* xrow = xc + (oh + dh) * W + dw;
          double* yrow = y + oh * W;
          for (i64 ow = ow0; ow < ow1; ++ow) yrow[ow] += wv * xrow[ow];
        }
      }
    }
  }
}

// One input-gradient plane dx[b,ci] of shape (H,W); accumulates.
LRF_NOINLINE void conv2d_dx_plane(const double* dy, const double* w, double* dx, i64 Cin, i64 ci,
                                  i64 H, i64 W, i64 Cout, i64 k) {
  const i64 pad = k / 2;
  for (i64 co = 0; co < Cout; ++co) {
    const double* dyc = dy + co * H * W;
    const double* wc = w + (co * Cin + ci) * k * k;
    for (i64 kh = 0; kh < k; ++kh) {
      const i64 dh = pad - kh;
      const i64 ih0 = std::max<i64>(0, -dh);
      const i64 ih1 = std::min<i64>(H, H - dh);
      for (i64 kw = 0; kw < k; ++kw) {
        const double wv = wc[kh * k + kw];
        const i64 dw = pad - kw;
        const i64 iw0 = std::max<i64>(0, -dw);
        const i64 iw1 = std::min<i64>(W, W - dw);
        for (i64 ih = ih0; ih < ih1; ++ih) {
          const double* dyrow = dyc + (ih + dh) * W + dw;
          double* dxrow = dx + ih * W;
          for (i64 iw = iw0; iw < iw1; ++iw) dxrow[iw] += wv * dyrow[iw];
        }
      }
    }
  }
}

// Row dot product with four independent accumulators; the fixed lane split
// keeps results deterministic while letting the loop vectorize.
LRF_NOINLINE double dot_unrolled(const double* a, const double* b, i64 n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  i64 i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3));
}

// One weight-gradient block dw[co,ci] of shape (k,k); accumulates.
LRF_NOINLINE void conv2d_dw_block(const double* x, const double* dy, double* dwblock, i64 B,
                                  i64 Cin, i64 ci, i64 H, i64 W, i64 Cout, i64 co, i64 k) {
  const i64 pad = k / 2;
  for (i64 kh = 0; kh < k; ++kh) {
    const i64 dh = kh - pad;
    const i64 oh0 = std::max<i64>(0, -dh);
    const i64 oh1 = std::min<i64>(H, H - dh);
    for (i64 kw = 0; kw < k; ++kw) {
      const i64 dw = kw - pad;
      const i64 ow0 = std::max<i64>(0, -dw);
      const i64 ow1 = std::min<i64>(W, W - dw);
      double acc = 0.0;
      for (i64 b = 0; b < B; ++b) {
        const double* xb = x + (b * Cin + ci) * H * W;
        const double* dyb = dy + (b * Cout + co) * H * W;
        for (i64 oh = oh0; oh < oh1; ++oh)
          acc += dot_unrolled(xb + (oh + dh) * W + dw + ow0, dyb + oh * W + ow0, ow1 - ow0);
      }
      dwblock[kh * k + kw] += acc;
    }
  }
}

LRF_NOINLINE double sum_plane(const double* p, i64 n) {
  double acc = 0.0;
  for (i64 i = 0; i < n; ++i) acc += p[i];
  return acc;
}

LRF_NOINLINE void linear_row(const double* xrow, const double* w, const double* b, double* yrow,
                             i64 Din, i64 Dout) {
  for (i64 j = 0; j < Dout; ++j) yrow[j] = b[j];
  for (i64 i = 0; i < Din; ++i) {
    const double xv = xrow[i];
    const double* wrow = w + i * Dout;
    for (i64 j = 0; j < Dout; ++j) yrow[j] += xv * wrow[j];
  }
}

LRF_NOINLINE void linear_dx_row(const double* dyrow, const double* w, double* dxrow, i64 Din,
                                i64 Dout) {
  for (i64 i = 0; i < Din; ++i) {
    const double* wrow = w + i * Dout;
    double acc = 0.0;
    for (i64 j = 0; j < Dout; ++j) acc += dyrow[j] * wrow[j];
    dxrow[i] += acc;
  }
}

LRF_NOINLINE void linear_dw_row(const double* x, const double* dy, double* dwrow, i64 N, i64 i,
                                i64 Din, i64 Dout) {
  for (i64 n = 0; n < N; ++n) {
    const double xv = x[n * Din + i];
    const double* dyrow = dy + n * Dout;
    for (i64 j = 0; j < Dout; ++j) dwrow[j] += xv * dyrow[j];
  }
}

LRF_NOINLINE void sigmoid_span(const double* x, double* y, i64 n) {
  // Clamped away from 0 and 1 by one representable step: the contract is a
  // strictly open range for every finite input, and 1/(1+exp(-x)) rounds to
  // exactly 1.0 past x ~ 37.
  const double below_one = std::nextafter(1.0, 0.0);
  const double above_zero = std::numeric_limits<double>::min();
  for (i64 i = 0; i < n; ++i) {
    double v = 1.0 / (1.0 + std::exp(-x[i]));
    if (v >= 1.0)
      v = below_one;
    else if (v <= 0.0)
      v = above_zero;
    y[i] = v;
  }
}

}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

// -- conv2d forward -----------------------------------------------------------

void conv2d_forward_serial(const double* x, const double* w, const double* b, double* y, i64 B,
                           i64 Cin, i64 H, i64 W, i64 Cout, i64 k) {
  for (i64 bi = 0; bi < B; ++bi)
    for (i64 co = 0; co < Cout; ++co)
      conv2d_plane(x + bi * Cin * H * W, w + co * Cin * k * k, b[co],
                   y + (bi * Cout + co) * H * W, Cin, H, W, k);
}

void conv2d_forward_parallel(const double* x, const double* w, const double* b, double* y, i64 B,
                             i64 Cin, i64 H, i64 W, i64 Cout, i64 k) {
#pragma omp parallel for collapse(2) schedule(static)
  for (i64 bi = 0; bi < B; ++bi)
    for (i64 co = 0; co < Cout; ++co)
      conv2d_plane(x + bi * Cin * H * W, w + co * Cin * k * k, b[co],
                   y + (bi * Cout + co) * H * W, Cin, H, W, k);
}

void conv2d_forward(const double* x, const double* w, const double* b, double* y, i64 B, i64 Cin,
                    i64 H, i64 W, i64 Cout, i64 k) {
  if (parallel_enabled())
    conv2d_forward_parallel(x, w, b, y, B, Cin, H, W, Cout, k);
  else
    conv2d_forward_serial(x, w, b, y, B, Cin, H, W, Cout, k);
}

// -- conv2d backward, input ---------------------------------------------------

void conv2d_backward_input_serial(const double* dy, const double* w, double* dx, i64 B, i64 Cin,
                                  i64 H, i64 W, i64 Cout, i64 k) {
  for (i64 bi = 0; bi < B; ++bi)
    for (i64 ci = 0; ci < Cin; ++ci)
      conv2d_dx_plane(dy + bi * Cout * H * W, w, dx + (bi * Cin + ci) * H * W, Cin, ci, H, W, Cout,
                      k);
}

void conv2d_backward_input_parallel(const double* dy, const double* w, double* dx, i64 B, i64 Cin,
                                    i64 H, i64 W, i64 Cout, i64 k) {
#pragma omp parallel for collapse(2) schedule(static)
  for (i64 bi = 0; bi < B; ++bi)
    for (i64 ci = 0; ci < Cin; ++ci)
      conv2d_dx_plane(dy + bi * Cout * H * W, w, dx + (bi * Cin + ci) * H * W, Cin, ci, H, W, Cout,
                      k);
}

void conv2d_backward_input(const double* dy, const double* w, double* dx, i64 B, i64 Cin, i64 H,
                           i64 W, i64 Cout, i64 k) {
  if (parallel_enabled())
    conv2d_backward_input_parallel(dy, w, dx, B, Cin, H, W, Cout, k);
  else
    conv2d_backward_input_serial(dy, w, dx, B, Cin, H, W, Cout, k);
}

// -- conv2d backward, weights + bias ------------------------------------------

void conv2d_backward_weights_serial(const double* x, const double* dy, double* dw, double* db,
                                    i64 B, i64 Cin, i64 H, i64 W, i64 Cout, i64 k) {
  for (i64 co = 0; co < Cout; ++co)
    for (i64 ci = 0; ci < Cin; ++ci)
      conv2d_dw_block(x, dy, dw + (co * Cin + ci) * k * k, B, Cin, ci, H, W, Cout, co, k);
  for (i64 co = 0; co < Cout; ++co) {
    double acc = 0.0;
    for (i64 bi = 0; bi < B; ++bi) acc += sum_plane(dy + (bi * Cout + co) * H * W, H * W);
    db[co] += acc;
  }
}

void conv2d_backward_weights_parallel(const double* x, const double* dy, double* dw, double* db,
                                      i64 B, i64 Cin, i64 H, i64 W, i64 Cout, i64 k) {
#pragma omp parallel for collapse(2) schedule(static)
  for (i64 co = 0; co < Cout; ++co)
    for (i64 ci = 0; ci < Cin; ++ci)
      conv2d_dw_block(x, dy, dw + (co * Cin + ci) * k * k, B, Cin, ci, H, W, Cout, co, k);
#pragma omp parallel for schedule(static)
  for (i64 co = 0; co < Cout; ++co) {
    double acc = 0.0;
    for (i64 bi = 0; bi < B; ++bi) acc += sum_plane(dy + (bi * Cout + co) * H * W, H * W);
    db[co] += acc;
  }
}

void conv2d_backward_weights(const double* x, const double* dy, double* dw, double* db, i64 B,
                             i64 Cin, i64 H, i64 W, i64 Cout, i64 k) {
  if (parallel_enabled())
    conv2d_backward_weights_parallel(x, dy, dw, db, B, Cin, H, W, Cout, k);
  else
    conv2d_backward_weights_serial(x, dy, dw, db, B, Cin, H, W, Cout, k);
}

// -- linear -------------------------------------------------------------------

void linear_forward_serial(const double* x, const double* w, const double* b, double* y, i64 N,
                           i64 Din, i64 Dout) {
  for (i64 n = 0; n < N; ++n) linear_row(x + n * Din, w, b, y + n * Dout, Din, Dout);
}

void linear_forward_parallel(const double* x, const double* w, const double* b, double* y, i64 N,
                             i64 Din, i64 Dout) {
#pragma omp parallel for schedule(static)
  for (i64 n = 0; n < N; ++n) linear_row(x + n * Din, w, b, y + n * Dout, Din, Dout);
}

void linear_forward(const double* x, const double* w, const double* b, double* y, i64 N, i64 Din,
                    i64 Dout) {
  if (parallel_enabled())
    linear_forward_parallel(x, w, b, y, N, Din, Dout);
  else
    linear_forward_serial(x, w, b, y, N, Din, Dout);
}

void linear_backward_serial(const double* x, const double* w, const double* dy, double* dx,
                            double* dw, double* db, i64 N, i64 Din, i64 Dout) {
  for (i64 n = 0; n < N; ++n) linear_dx_row(dy + n * Dout, w, dx + n * Din, Din, Dout);
  for (i64 i = 0; i < Din; ++i) linear_dw_row(x, dy, dw + i * Dout, N, i, Din, Dout);
  for (i64 n = 0; n < N; ++n) {
    const double* dyrow = dy + n * Dout;
    for (i64 j = 0; j < Dout; ++j) db[j] += dyrow[j];
  }
}

void linear_backward_parallel(const double* x, const double* w, const double* dy, double* dx,
                              double* dw, double* db, i64 N, i64 Din, i64 Dout) {
#pragma omp parallel for schedule(static)
  for (i64 n = 0; n < N; ++n) linear_dx_row(dy + n * Dout, w, dx + n * Din, Din, Dout);
#pragma omp parallel for schedule(static)
  for (i64 i = 0; i < Din; ++i) linear_dw_row(x, dy, dw + i * Dout, N, i, Din, Dout);
  // db stays serial: the reduction is tiny and fixed order keeps it bit-equal
  // to the reference.
  for (i64 n = 0; n < N; ++n) {
    const double* dyrow = dy + n * Dout;
    for (i64 j = 0; j < Dout; ++j) db[j] += dyrow[j];
  }
}

void linear_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* db, i64 N, i64 Din, i64 Dout) {
  if (parallel_enabled())
    linear_backward_parallel(x, w, dy, dx, dw, db, N, Din, Dout);
  else
    linear_backward_serial(x, w, dy, dx, dw, db, N, Din, Dout);
}

// -- elementwise --------------------------------------------------------------

void sigmoid_serial(const double* x, double* y, i64 n) { sigmoid_span(x, y, n); }

void sigmoid_parallel(const double* x, double* y, i64 n) {
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (i64 i = 0; i < n; i += 4096) sigmoid_span(x + i, y + i, std::min<i64>(4096, n - i));
  }
}

void sigmoid(const double* x, double* y, i64 n) {
  if (parallel_enabled())
    sigmoid_parallel(x, y, n);
  else
    sigmoid_serial(x, y, n);
}

}  // namespace lrf::kernels

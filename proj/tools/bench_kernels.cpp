// Benchmarks the OpenMP kernels against their serial references on the
// pipeline's hot shapes and verifies that both paths agree bit-exactly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "lrf/kernels.hpp"
#include "lrf/rng.hpp"
#include "lrf/tensor.hpp"

namespace {

using lrf::Rng;
using lrf::Tensor;
namespace k = lrf::kernels;
using i64 = std::int64_t;

Tensor random_tensor(std::vector<i64> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
         static_cast<double>(reps);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (i64 i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

struct ConvShape {
  const char* name;
  i64 cin, cout, h, w, k;
};

void bench_conv(const ConvShape& s, int reps) {
  Rng rng(42);
  const Tensor x = random_tensor({1, s.cin, s.h, s.w}, rng);
  const Tensor w = random_tensor({s.cout, s.cin, s.k, s.k}, rng);
  const Tensor b = random_tensor({s.cout}, rng);
  const Tensor dy = random_tensor({1, s.cout, s.h, s.w}, rng);
  Tensor y_ser({1, s.cout, s.h, s.w}), y_par({1, s.cout, s.h, s.w});

  const double macs = static_cast<double>(s.cin) * s.cout * s.h * s.w * s.k * s.k;

  const double t_fs = time_of(
      [&] { k::conv2d_forward_serial(x.data(), w.data(), b.data(), y_ser.data(), 1, s.cin, s.h, s.w, s.cout, s.k); },
      reps);
  const double t_fp = time_of(
      [&] { k::conv2d_forward_parallel(x.data(), w.data(), b.data(), y_par.data(), 1, s.cin, s.h, s.w, s.cout, s.k); },
      reps);
  const double fwd_diff = max_abs_diff(y_ser, y_par);

  Tensor dx_ser({1, s.cin, s.h, s.w}), dx_par({1, s.cin, s.h, s.w});
  const double t_is = time_of(
      [&] {
        dx_ser.fill(0.0);
        k::conv2d_backward_input_serial(dy.data(), w.data(), dx_ser.data(), 1, s.cin, s.h, s.w, s.cout, s.k);
      },
      reps);
  const double t_ip = time_of(
      [&] {
        dx_par.fill(0.0);
        k::conv2d_backward_input_parallel(dy.data(), w.data(), dx_par.data(), 1, s.cin, s.h, s.w, s.cout, s.k);
      },
      reps);
  const double dx_diff = max_abs_diff(dx_ser, dx_par);

  Tensor dw_ser(w.shape()), dw_par(w.shape()), db_ser({s.cout}), db_par({s.cout});
  const double t_ws = time_of(
      [&] {
        dw_ser.fill(0.0);
        db_ser.fill(0.0);
        k::conv2d_backward_weights_serial(x.data(), dy.data(), dw_ser.data(), db_ser.data(), 1, s.cin, s.h, s.w, s.cout, s.k);
      },
      reps);
  const double t_wp = time_of(
      [&] {
        dw_par.fill(0.0);
        db_par.fill(0.0);
        k::conv2d_backward_weights_parallel(x.data(), dy.data(), dw_par.data(), db_par.data(), 1, s.cin, s.h, s.w, s.cout, s.k);
      },
      reps);
  const double dw_diff = std::max(max_abs_diff(dw_ser, dw_par), max_abs_diff(db_ser, db_par));

  std::printf("%-22s fwd %7.2f / %7.2f GMAC/s (x%.2f)  dx %7.2f / %7.2f  dw %7.2f / %7.2f  maxdiff %g\n",
              s.name, macs / t_fs * 1e-9, macs / t_fp * 1e-9, t_fs / t_fp, macs / t_is * 1e-9,
              macs / t_ip * 1e-9, macs / t_ws * 1e-9, macs / t_wp * 1e-9,
              std::max({fwd_diff, dx_diff, dw_diff}));
}

void bench_linear(int reps) {
  Rng rng(7);
  const i64 N = 4096, Din = 4, Dout = 4;
  const Tensor x = random_tensor({N, Din}, rng);
  const Tensor w = random_tensor({Din, Dout}, rng);
  const Tensor b = random_tensor({Dout}, rng);
  Tensor y_ser({N, Dout}), y_par({N, Dout});
  const double macs = static_cast<double>(N) * Din * Dout;
  const double t_s = time_of(
      [&] { k::linear_forward_serial(x.data(), w.data(), b.data(), y_ser.data(), N, Din, Dout); }, reps);
  const double t_p = time_of(
      [&] { k::linear_forward_parallel(x.data(), w.data(), b.data(), y_par.data(), N, Din, Dout); }, reps);
  std::printf("%-22s fwd %7.2f / %7.2f GMAC/s (x%.2f)  maxdiff %g\n", "linear 4096x4x4",
              macs / t_s * 1e-9, macs / t_p * 1e-9, t_s / t_p, max_abs_diff(y_ser, y_par));
}

void bench_sigmoid(int reps) {
  Rng rng(9);
  const i64 n = 1 << 20;
  const Tensor x = random_tensor({n}, rng);
  Tensor y_ser({n}), y_par({n});
  const double t_s = time_of([&] { k::sigmoid_serial(x.data(), y_ser.data(), n); }, reps);
  const double t_p = time_of([&] { k::sigmoid_parallel(x.data(), y_par.data(), n); }, reps);
  std::printf("%-22s fwd %7.2f / %7.2f Melem/s (x%.2f)  maxdiff %g\n", "sigmoid 1M",
              static_cast<double>(n) / t_s * 1e-6, static_cast<double>(n) / t_p * 1e-6, t_s / t_p,
              max_abs_diff(y_ser, y_par));
}

}  // namespace

int main(int argc, char** argv) {
  int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("kernel benchmark: serial / OpenMP (maxdiff must be 0)\n");
  const ConvShape shapes[] = {
      {"conv 36->16 128x128 k3", 36, 16, 128, 128, 3},
      {"conv 16->16 128x128 k3", 16, 16, 128, 128, 3},
      {"conv 24->16 128x128 k3", 24, 16, 128, 128, 3},
      {"conv 9->8 128x128 k3", 9, 8, 128, 128, 3},
      {"conv 24->8 128x128 k3", 24, 8, 128, 128, 3},
  };
  for (const ConvShape& s : shapes) bench_conv(s, reps);
  bench_linear(reps);
  bench_sigmoid(reps);
  return 0;
}

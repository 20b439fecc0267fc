#pragma once

#include <cstdint>

namespace lrf::kernels {

// Hot inner loops of the pipeline. Every kernel comes in a serial reference
// version and an OpenMP version that distributes independent output blocks
// across threads; within a block the accumulation order is identical, so the
// two variants produce bit-identical results (asserted in tests, compared in
// the bench tool). The unqualified name dispatches on set_parallel().

bool parallel_enabled();
void set_parallel(bool on);

// -- 2D cross-correlation, stride 1, zero "same" padding (odd k) -------------
// x: (B,Cin,H,W)  w: (Cout,Cin,k,k)  b: (Cout)  y: (B,Cout,H,W)

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                    std::int64_t Cout, std::int64_t k);
void conv2d_forward_serial(const double* x, const double* w, const double* b, double* y,
                           std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                           std::int64_t Cout, std::int64_t k);
void conv2d_forward_parallel(const double* x, const double* w, const double* b, double* y,
                             std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                             std::int64_t Cout, std::int64_t k);

// Accumulates into dx; caller zero-initializes.
void conv2d_backward_input(const double* dy, const double* w, double* dx,
                           std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                           std::int64_t Cout, std::int64_t k);
void conv2d_backward_input_serial(const double* dy, const double* w, double* dx,
                                  std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                                  std::int64_t Cout, std::int64_t k);
void conv2d_backward_input_parallel(const double* dy, const double* w, double* dx,
                                    std::int64_t B, std::int64_t Cin, std::int64_t H,
                                    std::int64_t W, std::int64_t Cout, std::int64_t k);

// Accumulates into dw (Cout,Cin,k,k) and db (Cout); caller zero-initializes.
void conv2d_backward_weights(const double* x, const double* dy, double* dw, double* db,
                             std::int64_t B, std::int64_t Cin, std::int64_t H, std::int64_t W,
                             std::int64_t Cout, std::int64_t k);
void conv2d_backward_weights_serial(const double* x, const double* dy, double* dw, double* db,
                                    std::int64_t B, std::int64_t Cin, std::int64_t H,
                                    std::int64_t W, std::int64_t Cout, std::int64_t k);
void conv2d_backward_weights_parallel(const double* x, const double* dy, double* dw, double* db,
                                      std::int64_t B, std::int64_t Cin, std::int64_t H,
                                      std::int64_t W, std::int64_t Cout, std::int64_t k);

// -- dense affine map ---------------------------------------------------------
// x: (N,Din)  w: (Din,Dout)  b: (Dout)  y: (N,Dout)

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    std::int64_t N, std::int64_t Din, std::int64_t Dout);
void linear_forward_serial(const double* x, const double* w, const double* b, double* y,
                           std::int64_t N, std::int64_t Din, std::int64_t Dout);
void linear_forward_parallel(const double* x, const double* w, const double* b, double* y,
                             std::int64_t N, std::int64_t Din, std::int64_t Dout);

// Accumulates into dx, dw, db; caller zero-initializes.
void linear_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* db, std::int64_t N, std::int64_t Din, std::int64_t Dout);
void linear_backward_serial(const double* x, const double* w, const double* dy, double* dx,
                            double* dw, double* db, std::int64_t N, std::int64_t Din,
                            std::int64_t Dout);
void linear_backward_parallel(const double* x, const double* w, const double* dy, double* dx,
                              double* dw, double* db, std::int64_t N, std::int64_t Din,
                              std::int64_t Dout);

// -- elementwise --------------------------------------------------------------

void sigmoid(const double* x, double* y, std::int64_t n);
void sigmoid_serial(const double* x, double* y, std::int64_t n);
void sigmoid_parallel(const double* x, double* y, std::int64_t n);

}  // namespace lrf::kernels

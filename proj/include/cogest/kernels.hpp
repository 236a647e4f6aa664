#pragma once

#include "cogest/tensor.hpp"

namespace cogest::kernels {

// Compute kernels for the hot inner loops. Every kernel has a serial
// reference implementation and an OpenMP variant; the parallel variant
// distributes independent output rows across threads and keeps the
// per-element arithmetic order identical, so the two produce bit-equal
// results. Tests assert that equality and the bench tool times the pair.

enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);

namespace serial {
void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out);  // out = a * b
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);  // out = a * b^T
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);  // out = a^T * b
void row_softmax(const Tensor& x, Tensor& out);
// 1-D convolution along rows (time), zero-padded to the same length.
// x: T x Cin, w: Cout x (Cin*k), bias: 1 x Cout, y: T x Cout.
void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y);
void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx);
void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db);
// 2-D convolution, kernel 3x3, zero padding 1, stride (stride_h, 1).
// x: (Cin*H) x W laid out channel-major, w: Cout x (Cin*9), y: (Cout*Hout) x W.
void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y);
void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx);
void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db);
}  // namespace serial

namespace par {
void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);
void row_softmax(const Tensor& x, Tensor& out);
void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y);
void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx);
void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db);
void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y);
void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx);
void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db);
}  // namespace par

// Dispatch on the active backend.
void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out);
void row_softmax(const Tensor& x, Tensor& out);
void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y);
void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx);
void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db);
void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y);
void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx);
void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db);

inline int conv2d_out_h(int h, int stride_h) { return (h + 2 - 3) / stride_h + 1; }

}  // namespace cogest::kernels

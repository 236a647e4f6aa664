#include "cogest/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace cogest::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::parallel};

// Below this many output elements the parallel variants run the serial code
// directly; thread startup would dominate.
constexpr size_t kGrain = 8192;
}  // namespace

Backend backend() { return g_backend.load(); }
void set_backend(Backend b) { g_backend.store(b); }

// ---------------------------------------------------------------- serial ---

namespace serial {

void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out) {
    for (int i = 0; i < a.rows; ++i) {
        double* o = out.row_ptr(i);
        std::fill(o, o + out.cols, 0.0);
        const double* ar = a.row_ptr(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = ar[k];
            const double* br = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) o[j] += aik * br[j];
        }
    }
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* o = out.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* br = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            o[j] = acc;
        }
    }
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    for (int i = 0; i < a.cols; ++i) {
        double* o = out.row_ptr(i);
        std::fill(o, o + out.cols, 0.0);
        for (int k = 0; k < a.rows; ++k) {
            const double aki = a(k, i);
            const double* br = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) o[j] += aki * br[j];
        }
    }
}

namespace detail {

inline void softmax_row(const double* x, double* y, int n) {
    double m = x[0];
    for (int j = 1; j < n; ++j) m = std::max(m, x[j]);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        y[j] = std::exp(x[j] - m);
        s += y[j];
    }
    const double inv = 1.0 / s;
    for (int j = 0; j < n; ++j) y[j] *= inv;
}

inline void conv1d_row(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y, int t) {
    const int half = k / 2;
    for (int o = 0; o < w.rows; ++o) {
        double acc = bias.v[o];
        const double* wr = w.row_ptr(o);
        for (int c = 0; c < x.cols; ++c) {
            for (int dk = 0; dk < k; ++dk) {
                const int s = t + dk - half;
                if (s < 0 || s >= x.rows) continue;
                acc += x(s, c) * wr[c * k + dk];
            }
        }
        y(t, o) = acc;
    }
}

inline void conv1d_grad_x_row(const Tensor& dy, const Tensor& w, int k, Tensor& dx, int s) {
    const int half = k / 2;
    for (int c = 0; c < dx.cols; ++c) {
        double acc = 0.0;
        for (int dk = 0; dk < k; ++dk) {
            const int t = s - dk + half;
            if (t < 0 || t >= dy.rows) continue;
            for (int o = 0; o < dy.cols; ++o) acc += dy(t, o) * w(o, c * k + dk);
        }
        dx(s, c) = acc;
    }
}

inline void conv1d_grad_w_chan(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db, int o) {
    const int half = k / 2;
    double bacc = 0.0;
    for (int t = 0; t < dy.rows; ++t) bacc += dy(t, o);
    db.v[o] = bacc;
    double* wr = dw.row_ptr(o);
    for (int c = 0; c < x.cols; ++c) {
        for (int dk = 0; dk < k; ++dk) {
            double acc = 0.0;
            for (int t = 0; t < dy.rows; ++t) {
                const int s = t + dk - half;
                if (s < 0 || s >= x.rows) continue;
                acc += dy(t, o) * x(s, c);
            }
            wr[c * k + dk] = acc;
        }
    }
}

inline void conv2d_row(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h,
                       Tensor& y, int hout, int orow) {
    const int o = orow / hout;
    const int i = orow % hout;
    const int wd = x.cols;
    const double* wr = w.row_ptr(o);
    for (int j = 0; j < wd; ++j) {
        double acc = bias.v[o];
        for (int c = 0; c < cin; ++c) {
            for (int di = 0; di < 3; ++di) {
                const int p = i * stride_h + di - 1;
                if (p < 0 || p >= h) continue;
                const double* xr = x.row_ptr(c * h + p);
                for (int dj = 0; dj < 3; ++dj) {
                    const int q = j + dj - 1;
                    if (q < 0 || q >= wd) continue;
                    acc += xr[q] * wr[c * 9 + di * 3 + dj];
                }
            }
        }
        y(orow, j) = acc;
    }
}

inline void conv2d_grad_x_row(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx,
                              int hout, int cout, int xrow) {
    const int c = xrow / h;
    const int p = xrow % h;
    const int wd = dx.cols;
    for (int q = 0; q < wd; ++q) {
        double acc = 0.0;
        for (int di = 0; di < 3; ++di) {
            const int num = p + 1 - di;
            if (num < 0 || num % stride_h != 0) continue;
            const int i = num / stride_h;
            if (i >= hout) continue;
            for (int dj = 0; dj < 3; ++dj) {
                const int j = q + 1 - dj;
                if (j < 0 || j >= wd) continue;
                for (int o = 0; o < cout; ++o) acc += dy(o * hout + i, j) * w(o, c * 9 + di * 3 + dj);
            }
        }
        dx(xrow, q) = acc;
    }
    (void)cin;
}

inline void conv2d_grad_w_chan(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw,
                               Tensor& db, int hout, int o) {
    const int wd = x.cols;
    double bacc = 0.0;
    for (int i = 0; i < hout; ++i)
        for (int j = 0; j < wd; ++j) bacc += dy(o * hout + i, j);
    db.v[o] = bacc;
    double* wr = dw.row_ptr(o);
    for (int c = 0; c < cin; ++c) {
        for (int di = 0; di < 3; ++di) {
            for (int dj = 0; dj < 3; ++dj) {
                double acc = 0.0;
                for (int i = 0; i < hout; ++i) {
                    const int p = i * stride_h + di - 1;
                    if (p < 0 || p >= h) continue;
                    const double* xr = x.row_ptr(c * h + p);
                    for (int j = 0; j < wd; ++j) {
                        const int q = j + dj - 1;
                        if (q < 0 || q >= wd) continue;
                        acc += dy(o * hout + i, j) * xr[q];
                    }
                }
                wr[c * 9 + di * 3 + dj] = acc;
            }
        }
    }
}

}  // namespace detail

void row_softmax(const Tensor& x, Tensor& out) {
    for (int i = 0; i < x.rows; ++i) detail::softmax_row(x.row_ptr(i), out.row_ptr(i), x.cols);
}

void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y) {
    for (int t = 0; t < x.rows; ++t) detail::conv1d_row(x, w, bias, k, y, t);
}

void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx) {
    for (int s = 0; s < dx.rows; ++s) detail::conv1d_grad_x_row(dy, w, k, dx, s);
}

void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db) {
    for (int o = 0; o < dy.cols; ++o) detail::conv1d_grad_w_chan(dy, x, k, dw, db, o);
}

void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y) {
    const int hout = conv2d_out_h(h, stride_h);
    for (int r = 0; r < y.rows; ++r) detail::conv2d_row(x, w, bias, cin, h, stride_h, y, hout, r);
}

void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx) {
    const int hout = conv2d_out_h(h, stride_h);
    const int cout = dy.rows / hout;
    for (int r = 0; r < dx.rows; ++r) detail::conv2d_grad_x_row(dy, w, cin, h, stride_h, dx, hout, cout, r);
}

void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db) {
    const int hout = conv2d_out_h(h, stride_h);
    const int cout = dw.rows;
    for (int o = 0; o < cout; ++o) detail::conv2d_grad_w_chan(dy, x, cin, h, stride_h, dw, db, hout, o);
}

}  // namespace serial

// ------------------------------------------------------------- parallel ---

namespace par {

void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out) {
    if (out.size() * static_cast<size_t>(a.cols) < kGrain) return serial::matmul_nn(a, b, out);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) {
        double* o = out.row_ptr(i);
        std::fill(o, o + out.cols, 0.0);
        const double* ar = a.row_ptr(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = ar[k];
            const double* br = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) o[j] += aik * br[j];
        }
    }
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    if (out.size() * static_cast<size_t>(a.cols) < kGrain) return serial::matmul_nt(a, b, out);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row_ptr(i);
        double* o = out.row_ptr(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* br = b.row_ptr(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            o[j] = acc;
        }
    }
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    if (out.size() * static_cast<size_t>(a.rows) < kGrain) return serial::matmul_tn(a, b, out);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.cols; ++i) {
        double* o = out.row_ptr(i);
        std::fill(o, o + out.cols, 0.0);
        for (int k = 0; k < a.rows; ++k) {
            const double aki = a(k, i);
            const double* br = b.row_ptr(k);
            for (int j = 0; j < b.cols; ++j) o[j] += aki * br[j];
        }
    }
}

void row_softmax(const Tensor& x, Tensor& out) {
    if (x.size() < kGrain) return serial::row_softmax(x, out);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < x.rows; ++i) serial::detail::softmax_row(x.row_ptr(i), out.row_ptr(i), x.cols);
}

void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y) {
    if (y.size() * static_cast<size_t>(x.cols * k) < kGrain) return serial::conv1d(x, w, bias, k, y);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < x.rows; ++t) serial::detail::conv1d_row(x, w, bias, k, y, t);
}

void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx) {
    if (dx.size() * static_cast<size_t>(dy.cols * k) < kGrain) return serial::conv1d_grad_x(dy, w, k, dx);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < dx.rows; ++s) serial::detail::conv1d_grad_x_row(dy, w, k, dx, s);
}

void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db) {
    if (dw.size() * static_cast<size_t>(dy.rows) < kGrain) return serial::conv1d_grad_w(dy, x, k, dw, db);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < dy.cols; ++o) serial::detail::conv1d_grad_w_chan(dy, x, k, dw, db, o);
}

void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y) {
    const int hout = conv2d_out_h(h, stride_h);
    if (y.size() * static_cast<size_t>(cin * 9) < kGrain) return serial::conv2d(x, w, bias, cin, h, stride_h, y);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < y.rows; ++r) serial::detail::conv2d_row(x, w, bias, cin, h, stride_h, y, hout, r);
}

void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx) {
    const int hout = conv2d_out_h(h, stride_h);
    const int cout = dy.rows / hout;
    if (dx.size() * static_cast<size_t>(cout * 9) < kGrain) return serial::conv2d_grad_x(dy, w, cin, h, stride_h, dx);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < dx.rows; ++r) serial::detail::conv2d_grad_x_row(dy, w, cin, h, stride_h, dx, hout, cout, r);
}

void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db) {
    const int hout = conv2d_out_h(h, stride_h);
    const int cout = dw.rows;
    if (dw.size() * static_cast<size_t>(hout) < kGrain) return serial::conv2d_grad_w(dy, x, cin, h, stride_h, dw, db);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < cout; ++o) serial::detail::conv2d_grad_w_chan(dy, x, cin, h, stride_h, dw, db, hout, o);
}

}  // namespace par

// ------------------------------------------------------------- dispatch ---

namespace {
void check_matmul(int ar, int ac, int br, int bc, int orows, int ocols, const char* what) {
    if (ac != br) throw ShapeError(std::string(what) + ": inner dimensions disagree");
    if (orows != ar || ocols != bc) throw ShapeError(std::string(what) + ": output shape wrong");
}
}  // namespace

void matmul_nn(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a.rows, a.cols, b.rows, b.cols, out.rows, out.cols, "matmul_nn");
    backend() == Backend::serial ? serial::matmul_nn(a, b, out) : par::matmul_nn(a, b, out);
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a.rows, a.cols, b.cols, b.rows, out.rows, out.cols, "matmul_nt");
    backend() == Backend::serial ? serial::matmul_nt(a, b, out) : par::matmul_nt(a, b, out);
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    check_matmul(a.cols, a.rows, b.rows, b.cols, out.rows, out.cols, "matmul_tn");
    backend() == Backend::serial ? serial::matmul_tn(a, b, out) : par::matmul_tn(a, b, out);
}

void row_softmax(const Tensor& x, Tensor& out) {
    if (!x.same_shape(out)) throw ShapeError("row_softmax: output shape wrong");
    backend() == Backend::serial ? serial::row_softmax(x, out) : par::row_softmax(x, out);
}

void conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int k, Tensor& y) {
    if (w.cols != x.cols * k) throw ShapeError("conv1d: weight shape disagrees with input channels");
    if (y.rows != x.rows || y.cols != w.rows) throw ShapeError("conv1d: output shape wrong");
    backend() == Backend::serial ? serial::conv1d(x, w, bias, k, y) : par::conv1d(x, w, bias, k, y);
}

void conv1d_grad_x(const Tensor& dy, const Tensor& w, int k, Tensor& dx) {
    backend() == Backend::serial ? serial::conv1d_grad_x(dy, w, k, dx) : par::conv1d_grad_x(dy, w, k, dx);
}

void conv1d_grad_w(const Tensor& dy, const Tensor& x, int k, Tensor& dw, Tensor& db) {
    backend() == Backend::serial ? serial::conv1d_grad_w(dy, x, k, dw, db) : par::conv1d_grad_w(dy, x, k, dw, db);
}

void conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int cin, int h, int stride_h, Tensor& y) {
    if (x.rows != cin * h) throw ShapeError("conv2d: input rows disagree with cin*h");
    if (w.cols != cin * 9) throw ShapeError("conv2d: weight shape disagrees with cin");
    if (y.rows != w.rows * conv2d_out_h(h, stride_h) || y.cols != x.cols) throw ShapeError("conv2d: output shape wrong");
    backend() == Backend::serial ? serial::conv2d(x, w, bias, cin, h, stride_h, y)
                                 : par::conv2d(x, w, bias, cin, h, stride_h, y);
}

void conv2d_grad_x(const Tensor& dy, const Tensor& w, int cin, int h, int stride_h, Tensor& dx) {
    backend() == Backend::serial ? serial::conv2d_grad_x(dy, w, cin, h, stride_h, dx)
                                 : par::conv2d_grad_x(dy, w, cin, h, stride_h, dx);
}

void conv2d_grad_w(const Tensor& dy, const Tensor& x, int cin, int h, int stride_h, Tensor& dw, Tensor& db) {
    backend() == Backend::serial ? serial::conv2d_grad_w(dy, x, cin, h, stride_h, dw, db)
                                 : par::conv2d_grad_w(dy, x, cin, h, stride_h, dw, db);
}

}  // namespace cogest::kernels

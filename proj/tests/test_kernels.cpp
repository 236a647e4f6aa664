#include <cmath>

#include "cogest/kernels.hpp"
#include "support.hpp"

using namespace cogest;
using testsupport::random_tensor;

namespace {

// Direct-definition matmul used as the oracle: plain dot products, no
// accumulation-order tricks shared with the library code.
Tensor naive_matmul(const Tensor& a, const Tensor& b, bool ta, bool tb) {
    const int m = ta ? a.cols : a.rows;
    const int kk = ta ? a.rows : a.cols;
    const int n = tb ? b.rows : b.cols;
    Tensor y(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < kk; ++k) {
                const double av = ta ? a(k, i) : a(i, k);
                const double bv = tb ? b(j, k) : b(k, j);
                s += av * bv;
            }
            y(i, j) = s;
        }
    return y;
}

void expect_close(const Tensor& a, const Tensor& b, double tol) {
    REQUIRE(a.same_shape(b));
    double worst = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) worst = std::max(worst, std::fabs(a.v[i] - b.v[i]));
    CHECK(worst <= tol);
}

void expect_bitequal(const Tensor& a, const Tensor& b) {
    REQUIRE(a.same_shape(b));
    size_t diff = 0;
    for (size_t i = 0; i < a.v.size(); ++i)
        if (a.v[i] != b.v[i]) ++diff;
    CHECK(diff == 0);
}

struct BackendGuard {
    kernels::Backend saved = kernels::backend();
    ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul variants match the direct definition") {
    Rng rng(11);
    const Tensor a = random_tensor(17, 9, rng);
    const Tensor b = random_tensor(9, 13, rng);
    const Tensor bt = random_tensor(13, 9, rng);
    const Tensor at = random_tensor(9, 17, rng);

    Tensor y(17, 13);
    kernels::matmul_nn(a, b, y);
    expect_close(y, naive_matmul(a, b, false, false), 1e-12);

    kernels::matmul_nt(a, bt, y);
    expect_close(y, naive_matmul(a, bt, false, true), 1e-12);

    kernels::matmul_tn(at, b, y);
    expect_close(y, naive_matmul(at, b, true, false), 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes") {
    Tensor a(3, 4), b(5, 2), y(3, 2);
    CHECK_THROWS_AS(kernels::matmul_nn(a, b, y), ShapeError);
}

TEST_CASE("row_softmax rows sum to one and shifting logits changes nothing") {
    Rng rng(12);
    const Tensor x = random_tensor(6, 9, rng, 4.0);
    Tensor y(6, 9);
    kernels::row_softmax(x, y);
    for (int i = 0; i < y.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < y.cols; ++j) {
            CHECK(y(i, j) > 0.0);
            s += y(i, j);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    Tensor shifted = x;
    for (int j = 0; j < shifted.cols; ++j) shifted(2, j) += 123.0;
    Tensor y2(6, 9);
    kernels::row_softmax(shifted, y2);
    for (int j = 0; j < y.cols; ++j) CHECK(y2(2, j) == doctest::Approx(y(2, j)).epsilon(1e-12));
}

TEST_CASE("conv1d matches a direct sliding-window evaluation") {
    Rng rng(13);
    const int t = 14, cin = 3, cout = 5, k = 3;
    const Tensor x = random_tensor(t, cin, rng);
    const Tensor w = random_tensor(cout, cin * k, rng);
    const Tensor bias = random_tensor(1, cout, rng);
    Tensor y(t, cout);
    kernels::conv1d(x, w, bias, k, y);

    for (int tt = 0; tt < t; ++tt)
        for (int o = 0; o < cout; ++o) {
            double want = bias(0, o);
            for (int c = 0; c < cin; ++c)
                for (int dk = 0; dk < k; ++dk) {
                    const int s = tt + dk - k / 2;
                    if (s >= 0 && s < t) want += x(s, c) * w(o, c * k + dk);
                }
            CHECK(y(tt, o) == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("conv2d matches a direct 3x3 evaluation including stride") {
    Rng rng(14);
    const int h = 8, wd = 7, cin = 2, cout = 3, sh = 2;
    const Tensor x = random_tensor(cin * h, wd, rng);
    const Tensor w = random_tensor(cout, cin * 9, rng);
    const Tensor bias = random_tensor(1, cout, rng);
    const int hout = kernels::conv2d_out_h(h, sh);
    Tensor y(cout * hout, wd);
    kernels::conv2d(x, w, bias, cin, h, sh, y);

    for (int o = 0; o < cout; ++o)
        for (int i = 0; i < hout; ++i)
            for (int j = 0; j < wd; ++j) {
                double want = bias(0, o);
                for (int c = 0; c < cin; ++c)
                    for (int di = 0; di < 3; ++di)
                        for (int dj = 0; dj < 3; ++dj) {
                            const int p = i * sh + di - 1;
                            const int q = j + dj - 1;
                            if (p >= 0 && p < h && q >= 0 && q < wd)
                                want += x(c * h + p, q) * w(o, c * 9 + di * 3 + dj);
                        }
                CHECK(y(o * hout + i, j) == doctest::Approx(want).epsilon(1e-12));
            }
}

TEST_CASE("parallel backend is bit-identical to the serial reference") {
    BackendGuard guard;
    Rng rng(15);
    // Sizes chosen above the parallel grain so the threaded paths actually run.
    const Tensor a = random_tensor(64, 96, rng);
    const Tensor b = random_tensor(96, 80, rng);
    Tensor ys(64, 80), yp(64, 80);
    kernels::serial::matmul_nn(a, b, ys);
    kernels::par::matmul_nn(a, b, yp);
    expect_bitequal(ys, yp);

    const Tensor x = random_tensor(128, 24, rng);
    const Tensor w = random_tensor(32, 24 * 5, rng);
    const Tensor bias = random_tensor(1, 32, rng);
    Tensor cs(128, 32), cp(128, 32);
    kernels::serial::conv1d(x, w, bias, 5, cs);
    kernels::par::conv1d(x, w, bias, 5, cp);
    expect_bitequal(cs, cp);

    const Tensor dy = random_tensor(128, 32, rng);
    Tensor dxs(128, 24), dxp(128, 24), dws(32, 24 * 5), dwp(32, 24 * 5), dbs(1, 32), dbp(1, 32);
    kernels::serial::conv1d_grad_x(dy, w, 5, dxs);
    kernels::par::conv1d_grad_x(dy, w, 5, dxp);
    expect_bitequal(dxs, dxp);
    kernels::serial::conv1d_grad_w(dy, x, 5, dws, dbs);
    kernels::par::conv1d_grad_w(dy, x, 5, dwp, dbp);
    expect_bitequal(dws, dwp);
    expect_bitequal(dbs, dbp);

    const int h = 128, wd2 = 60, cin = 4, cout = 8, sh = 2;
    const Tensor x2 = random_tensor(cin * h, wd2, rng);
    const Tensor w2 = random_tensor(cout, cin * 9, rng);
    const Tensor b2 = random_tensor(1, cout, rng);
    const int hout = kernels::conv2d_out_h(h, sh);
    Tensor es(cout * hout, wd2), ep(cout * hout, wd2);
    kernels::serial::conv2d(x2, w2, b2, cin, h, sh, es);
    kernels::par::conv2d(x2, w2, b2, cin, h, sh, ep);
    expect_bitequal(es, ep);

    const Tensor dy2 = random_tensor(cout * hout, wd2, rng);
    Tensor gs(cin * h, wd2), gp(cin * h, wd2);
    kernels::serial::conv2d_grad_x(dy2, w2, cin, h, sh, gs);
    kernels::par::conv2d_grad_x(dy2, w2, cin, h, sh, gp);
    expect_bitequal(gs, gp);

    const Tensor sx = random_tensor(256, 48, rng, 5.0);
    Tensor ss(256, 48), sp(256, 48);
    kernels::serial::row_softmax(sx, ss);
    kernels::par::row_softmax(sx, sp);
    expect_bitequal(ss, sp);
}

TEST_CASE("backend flag routes dispatch calls") {
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::serial);
    CHECK(kernels::backend() == kernels::Backend::serial);
    kernels::set_backend(kernels::Backend::parallel);
    CHECK(kernels::backend() == kernels::Backend::parallel);
}

}  // TEST_SUITE

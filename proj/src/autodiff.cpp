#include "cogest/autodiff.hpp"

#include <cmath>

#include "cogest/kernels.hpp"

namespace cogest::ad {

namespace {

inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline void axpy_all(Tensor& dst, const Tensor& src) {
    for (size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

}  // namespace

Var Tape::push(Tensor val, bool needs_grad) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buf(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) {
        n.grad = Tensor(n.val.rows, n.val.cols);  // zero-filled
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    const Tensor& lv = val(loss.id);
    if (lv.rows != 1 || lv.cols != 1) throw ShapeError("backward: loss must be a 1x1 scalar");
    grad_buf(loss.id).v[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.empty() || !n.back) continue;
        n.back();
    }
}

// -------------------------------------------------------------- leaves ----

Var Tape::input(Tensor v) { return push(std::move(v), false); }

Var Tape::param(Parameter& p) {
    Var out = push(p.value, true);
    Parameter* pp = &p;
    nodes_.back().back = [this, oi = out.id, pp] { axpy_all(pp->grad, nodes_[static_cast<size_t>(oi)].grad); };
    return out;
}

// --------------------------------------------------------- elementwise ----

Var Tape::add(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (!av.same_shape(bv)) throw ShapeError("add: shapes disagree");
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] + bv.v[i];
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            if (wants(ai)) axpy_all(grad_buf(ai), dy);
            if (wants(bi)) axpy_all(grad_buf(bi), dy);
        };
    return out;
}

Var Tape::sub(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (!av.same_shape(bv)) throw ShapeError("sub: shapes disagree");
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] - bv.v[i];
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            if (wants(ai)) axpy_all(grad_buf(ai), dy);
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (size_t i = 0; i < db.v.size(); ++i) db.v[i] -= dy.v[i];
            }
        };
    return out;
}

Var Tape::mul(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (!av.same_shape(bv)) throw ShapeError("mul: shapes disagree");
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] * bv.v[i];
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += dy.v[i] * B.v[i];
            }
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (size_t i = 0; i < db.v.size(); ++i) db.v[i] += dy.v[i] * A.v[i];
            }
        };
    return out;
}

Var Tape::scale(Var a, double s) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] * s;
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, s] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += dy.v[i] * s;
        };
    return out;
}

Var Tape::add_scalar(Var a, double c) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] + c;
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            axpy_all(grad_buf(ai), nodes_[static_cast<size_t>(oi)].grad);
        };
    return out;
}

Var Tape::square(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] * av.v[i];
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& A = val(ai);
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += 2.0 * A.v[i] * dy.v[i];
        };
    return out;
}

Var Tape::abs(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = std::fabs(av.v[i]);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& A = val(ai);
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) {
                const double s = A.v[i] > 0.0 ? 1.0 : (A.v[i] < 0.0 ? -1.0 : 0.0);
                da.v[i] += s * dy.v[i];
            }
        };
    return out;
}

Var Tape::exp(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = std::exp(av.v[i]);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += o.val.v[i] * o.grad.v[i];
        };
    return out;
}

Var Tape::log(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = std::log(std::max(av.v[i], 1e-300));
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& A = val(ai);
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += dy.v[i] / std::max(A.v[i], 1e-300);
        };
    return out;
}

Var Tape::sigmoid(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = stable_sigmoid(av.v[i]);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += o.val.v[i] * (1.0 - o.val.v[i]) * o.grad.v[i];
        };
    return out;
}

Var Tape::tanh(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = std::tanh(av.v[i]);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += (1.0 - o.val.v[i] * o.val.v[i]) * o.grad.v[i];
        };
    return out;
}

Var Tape::relu(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] > 0.0 ? av.v[i] : 0.0;
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& A = val(ai);
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i)
                if (A.v[i] > 0.0) da.v[i] += dy.v[i];
        };
    return out;
}

Var Tape::leaky_relu(Var a, double alpha) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = av.v[i] > 0.0 ? av.v[i] : alpha * av.v[i];
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, alpha] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& A = val(ai);
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += (A.v[i] > 0.0 ? 1.0 : alpha) * dy.v[i];
        };
    return out;
}

// ----------------------------------------------------- matrix products ----

Var Tape::matmul(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    Tensor y(av.rows, bv.cols);
    kernels::matmul_nn(av, bv, y);
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor t(A.rows, A.cols);
                kernels::matmul_nt(dy, B, t);
                axpy_all(grad_buf(ai), t);
            }
            if (wants(bi)) {
                Tensor t(B.rows, B.cols);
                kernels::matmul_tn(A, dy, t);
                axpy_all(grad_buf(bi), t);
            }
        };
    return out;
}

Var Tape::matmul_nt(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    Tensor y(av.rows, bv.rows);
    kernels::matmul_nt(av, bv, y);
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor t(A.rows, A.cols);
                kernels::matmul_nn(dy, B, t);
                axpy_all(grad_buf(ai), t);
            }
            if (wants(bi)) {
                Tensor t(B.rows, B.cols);
                kernels::matmul_tn(dy, A, t);
                axpy_all(grad_buf(bi), t);
            }
        };
    return out;
}

Var Tape::matmul_tn(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    Tensor y(av.cols, bv.cols);
    kernels::matmul_tn(av, bv, y);
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor t(A.rows, A.cols);
                kernels::matmul_nt(B, dy, t);
                axpy_all(grad_buf(ai), t);
            }
            if (wants(bi)) {
                Tensor t(B.rows, B.cols);
                kernels::matmul_nn(A, dy, t);
                axpy_all(grad_buf(bi), t);
            }
        };
    return out;
}

Var Tape::transpose(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.cols, av.rows);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(j, i) = av(i, j);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < da.rows; ++i)
                for (int j = 0; j < da.cols; ++j) da(i, j) += dy(j, i);
        };
    return out;
}

// ---------------------------------------------------------------- shape ----

Var Tape::concat_rows(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (av.cols != bv.cols) throw ShapeError("concat_rows: column counts disagree");
    Tensor y(av.rows + bv.rows, av.cols);
    std::copy(av.v.begin(), av.v.end(), y.v.begin());
    std::copy(bv.v.begin(), bv.v.end(), y.v.begin() + static_cast<long>(av.v.size()));
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const size_t na = val(ai).v.size();
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (size_t i = 0; i < na; ++i) da.v[i] += dy.v[i];
            }
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (size_t i = 0; i < db.v.size(); ++i) db.v[i] += dy.v[na + i];
            }
        };
    return out;
}

Var Tape::concat_cols(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (av.rows != bv.rows) throw ShapeError("concat_cols: row counts disagree");
    Tensor y(av.rows, av.cols + bv.cols);
    for (int i = 0; i < av.rows; ++i) {
        std::copy(av.row_ptr(i), av.row_ptr(i) + av.cols, y.row_ptr(i));
        std::copy(bv.row_ptr(i), bv.row_ptr(i) + bv.cols, y.row_ptr(i) + av.cols);
    }
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const int ca = val(ai).cols;
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (int i = 0; i < da.rows; ++i)
                    for (int j = 0; j < ca; ++j) da(i, j) += dy(i, j);
            }
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (int i = 0; i < db.rows; ++i)
                    for (int j = 0; j < db.cols; ++j) db(i, j) += dy(i, ca + j);
            }
        };
    return out;
}

Var Tape::slice_rows(Var a, int r0, int r1) {
    const Tensor& av = val(a.id);
    if (r0 < 0 || r1 > av.rows || r0 >= r1) throw ShapeError("slice_rows: range out of bounds");
    Tensor y(r1 - r0, av.cols);
    std::copy(av.row_ptr(r0), av.row_ptr(r0) + y.v.size(), y.v.begin());
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, r0] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < dy.rows; ++i)
                for (int j = 0; j < dy.cols; ++j) da(r0 + i, j) += dy(i, j);
        };
    return out;
}

Var Tape::slice_cols(Var a, int c0, int c1) {
    const Tensor& av = val(a.id);
    if (c0 < 0 || c1 > av.cols || c0 >= c1) throw ShapeError("slice_cols: range out of bounds");
    Tensor y(av.rows, c1 - c0);
    for (int i = 0; i < av.rows; ++i)
        std::copy(av.row_ptr(i) + c0, av.row_ptr(i) + c1, y.row_ptr(i));
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, c0] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < dy.rows; ++i)
                for (int j = 0; j < dy.cols; ++j) da(i, c0 + j) += dy(i, j);
        };
    return out;
}

Var Tape::repeat_rows(Var a, int n) {
    const Tensor& av = val(a.id);
    if (av.rows != 1) throw ShapeError("repeat_rows: input must have one row");
    Tensor y(n, av.cols);
    for (int i = 0; i < n; ++i) std::copy(av.v.begin(), av.v.end(), y.row_ptr(i));
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < dy.rows; ++i)
                for (int j = 0; j < dy.cols; ++j) da(0, j) += dy(i, j);
        };
    return out;
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
    const Tensor& av = val(a.id);
    Tensor y(static_cast<int>(idx.size()), av.cols);
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= av.rows) throw ShapeError("gather_rows: index out of bounds");
        std::copy(av.row_ptr(idx[i]), av.row_ptr(idx[i]) + av.cols, y.row_ptr(static_cast<int>(i)));
    }
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, idx = std::move(idx)] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < idx.size(); ++i)
                for (int j = 0; j < dy.cols; ++j) da(idx[i], j) += dy(static_cast<int>(i), j);
        };
    return out;
}

// --------------------------------------------- reductions / broadcasts ----

Var Tape::sum(Var a) {
    const Tensor& av = val(a.id);
    double s = 0.0;
    for (double x : av.v) s += x;
    Tensor y(1, 1);
    y.v[0] = s;
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const double g = nodes_[static_cast<size_t>(oi)].grad.v[0];
            Tensor& da = grad_buf(ai);
            for (size_t i = 0; i < da.v.size(); ++i) da.v[i] += g;
        };
    return out;
}

Var Tape::mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(val(a.id).size())); }

Var Tape::mean_rows(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(1, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(0, j) += av(i, j);
    const double inv = 1.0 / static_cast<double>(av.rows);
    for (int j = 0; j < av.cols; ++j) y(0, j) *= inv;
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, inv] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < da.rows; ++i)
                for (int j = 0; j < da.cols; ++j) da(i, j) += dy(0, j) * inv;
        };
    return out;
}

Var Tape::sum_cols(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, 1);
    for (int i = 0; i < av.rows; ++i) {
        double s = 0.0;
        const double* r = av.row_ptr(i);
        for (int j = 0; j < av.cols; ++j) s += r[j];
        y(i, 0) = s;
    }
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < da.rows; ++i)
                for (int j = 0; j < da.cols; ++j) da(i, j) += dy(i, 0);
        };
    return out;
}

Var Tape::add_rowvec(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (bv.rows != 1 || bv.cols != av.cols) throw ShapeError("add_rowvec: vector shape disagrees");
    Tensor y(av.rows, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(i, j) = av(i, j) + bv.v[static_cast<size_t>(j)];
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            if (wants(ai)) axpy_all(grad_buf(ai), dy);
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (int i = 0; i < dy.rows; ++i)
                    for (int j = 0; j < dy.cols; ++j) db(0, j) += dy(i, j);
            }
        };
    return out;
}

Var Tape::mul_rowvec(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (bv.rows != 1 || bv.cols != av.cols) throw ShapeError("mul_rowvec: vector shape disagrees");
    Tensor y(av.rows, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(i, j) = av(i, j) * bv.v[static_cast<size_t>(j)];
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (int i = 0; i < dy.rows; ++i)
                    for (int j = 0; j < dy.cols; ++j) da(i, j) += dy(i, j) * B.v[static_cast<size_t>(j)];
            }
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (int i = 0; i < dy.rows; ++i)
                    for (int j = 0; j < dy.cols; ++j) db(0, j) += dy(i, j) * A(i, j);
            }
        };
    return out;
}

Var Tape::mul_colvec(Var a, Var b) {
    const Tensor &av = val(a.id), &bv = val(b.id);
    if (bv.cols != 1 || bv.rows != av.rows) throw ShapeError("mul_colvec: vector shape disagrees");
    Tensor y(av.rows, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(i, j) = av(i, j) * bv(i, 0);
    const bool ng = wants(a.id) || wants(b.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, bi = b.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &A = val(ai), &B = val(bi);
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (int i = 0; i < dy.rows; ++i)
                    for (int j = 0; j < dy.cols; ++j) da(i, j) += dy(i, j) * B(i, 0);
            }
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (int i = 0; i < dy.rows; ++i)
                    for (int j = 0; j < dy.cols; ++j) db(i, 0) += dy(i, j) * A(i, j);
            }
        };
    return out;
}

// ------------------------------------------------------- normalizations ----

Var Tape::row_softmax(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    kernels::row_softmax(av, y);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            for (int i = 0; i < da.rows; ++i) {
                double dot = 0.0;
                for (int j = 0; j < da.cols; ++j) dot += o.grad(i, j) * o.val(i, j);
                for (int j = 0; j < da.cols; ++j) da(i, j) += o.val(i, j) * (o.grad(i, j) - dot);
            }
        };
    return out;
}

Var Tape::softmax_cols(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (int j = 0; j < av.cols; ++j) {
        double m = av(0, j);
        for (int i = 1; i < av.rows; ++i) m = std::max(m, av(i, j));
        double s = 0.0;
        for (int i = 0; i < av.rows; ++i) {
            y(i, j) = std::exp(av(i, j) - m);
            s += y(i, j);
        }
        const double inv = 1.0 / s;
        for (int i = 0; i < av.rows; ++i) y(i, j) *= inv;
    }
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            for (int j = 0; j < da.cols; ++j) {
                double dot = 0.0;
                for (int i = 0; i < da.rows; ++i) dot += o.grad(i, j) * o.val(i, j);
                for (int i = 0; i < da.rows; ++i) da(i, j) += o.val(i, j) * (o.grad(i, j) - dot);
            }
        };
    return out;
}

Var Tape::layer_norm(Var a, Var gamma, Var beta, double eps) {
    const Tensor &av = val(a.id), &gv = val(gamma.id), &bv = val(beta.id);
    if (gv.rows != 1 || gv.cols != av.cols || bv.rows != 1 || bv.cols != av.cols)
        throw ShapeError("layer_norm: affine shape disagrees");
    const int n = av.rows, c = av.cols;
    Tensor y(n, c), xhat(n, c), inv_s(n, 1);
    for (int i = 0; i < n; ++i) {
        double mu = 0.0;
        for (int j = 0; j < c; ++j) mu += av(i, j);
        mu /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) {
            const double d = av(i, j) - mu;
            var += d * d;
        }
        var /= c;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_s(i, 0) = inv;
        for (int j = 0; j < c; ++j) {
            xhat(i, j) = (av(i, j) - mu) * inv;
            y(i, j) = gv.v[static_cast<size_t>(j)] * xhat(i, j) + bv.v[static_cast<size_t>(j)];
        }
    }
    const bool ng = wants(a.id) || wants(gamma.id) || wants(beta.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, gi = gamma.id, bi = beta.id, oi = out.id,
                              xhat = std::move(xhat), inv_s = std::move(inv_s)] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor& G = val(gi);
            const int n = dy.rows, c = dy.cols;
            if (wants(bi)) {
                Tensor& db = grad_buf(bi);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < c; ++j) db(0, j) += dy(i, j);
            }
            if (wants(gi)) {
                Tensor& dg = grad_buf(gi);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < c; ++j) dg(0, j) += dy(i, j) * xhat(i, j);
            }
            if (wants(ai)) {
                Tensor& da = grad_buf(ai);
                for (int i = 0; i < n; ++i) {
                    double m1 = 0.0, m2 = 0.0;
                    for (int j = 0; j < c; ++j) {
                        const double dxh = dy(i, j) * G.v[static_cast<size_t>(j)];
                        m1 += dxh;
                        m2 += dxh * xhat(i, j);
                    }
                    m1 /= c;
                    m2 /= c;
                    for (int j = 0; j < c; ++j) {
                        const double dxh = dy(i, j) * G.v[static_cast<size_t>(j)];
                        da(i, j) += inv_s(i, 0) * (dxh - m1 - xhat(i, j) * m2);
                    }
                }
            }
        };
    return out;
}

Var Tape::row_normalize(Var a, double eps) {
    const Tensor& av = val(a.id);
    const int n = av.rows, c = av.cols;
    Tensor y(n, c), norm(n, 1);
    for (int i = 0; i < n; ++i) {
        double ss = 0.0;
        for (int j = 0; j < c; ++j) ss += av(i, j) * av(i, j);
        const double nm = std::max(std::sqrt(ss), eps);
        norm(i, 0) = nm;
        for (int j = 0; j < c; ++j) y(i, j) = av(i, j) / nm;
    }
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id, norm = std::move(norm), eps] {
            const Node& o = nodes_[static_cast<size_t>(oi)];
            Tensor& da = grad_buf(ai);
            const int n = da.rows, c = da.cols;
            for (int i = 0; i < n; ++i) {
                const double inv = 1.0 / norm(i, 0);
                if (norm(i, 0) <= eps) {
                    for (int j = 0; j < c; ++j) da(i, j) += o.grad(i, j) * inv;
                    continue;
                }
                double dot = 0.0;
                for (int j = 0; j < c; ++j) dot += o.grad(i, j) * o.val(i, j);
                for (int j = 0; j < c; ++j) da(i, j) += (o.grad(i, j) - o.val(i, j) * dot) * inv;
            }
        };
    return out;
}

// ----------------------------------------------------------- structured ----

Var Tape::row_diff_padded(Var a) {
    const Tensor& av = val(a.id);
    Tensor y(av.rows, av.cols);
    for (int i = 1; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) y(i, j) = av(i, j) - av(i - 1, j);
    const bool ng = wants(a.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, ai = a.id, oi = out.id] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& da = grad_buf(ai);
            const int n = da.rows;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < da.cols; ++j) {
                    double g = 0.0;
                    if (i > 0) g += dy(i, j);
                    if (i + 1 < n) g -= dy(i + 1, j);
                    da(i, j) += g;
                }
        };
    return out;
}

Var Tape::conv1d(Var x, Var w, Var bias, int k) {
    const Tensor &xv = val(x.id), &wv = val(w.id), &bv = val(bias.id);
    Tensor y(xv.rows, wv.rows);
    kernels::conv1d(xv, wv, bv, k, y);
    const bool ng = wants(x.id) || wants(w.id) || wants(bias.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, xi = x.id, wi = w.id, bi = bias.id, oi = out.id, k] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &X = val(xi), &W = val(wi);
            if (wants(xi)) {
                Tensor dx(X.rows, X.cols);
                kernels::conv1d_grad_x(dy, W, k, dx);
                axpy_all(grad_buf(xi), dx);
            }
            if (wants(wi) || wants(bi)) {
                Tensor dw(W.rows, W.cols), db(1, W.rows);
                kernels::conv1d_grad_w(dy, X, k, dw, db);
                if (wants(wi)) axpy_all(grad_buf(wi), dw);
                if (wants(bi)) axpy_all(grad_buf(bi), db);
            }
        };
    return out;
}

Var Tape::conv2d(Var x, Var w, Var bias, int cin, int h, int stride_h) {
    const Tensor &xv = val(x.id), &wv = val(w.id), &bv = val(bias.id);
    Tensor y(wv.rows * kernels::conv2d_out_h(h, stride_h), xv.cols);
    kernels::conv2d(xv, wv, bv, cin, h, stride_h, y);
    const bool ng = wants(x.id) || wants(w.id) || wants(bias.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, xi = x.id, wi = w.id, bi = bias.id, oi = out.id, cin, h, stride_h] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &X = val(xi), &W = val(wi);
            if (wants(xi)) {
                Tensor dx(X.rows, X.cols);
                kernels::conv2d_grad_x(dy, W, cin, h, stride_h, dx);
                axpy_all(grad_buf(xi), dx);
            }
            if (wants(wi) || wants(bi)) {
                Tensor dw(W.rows, W.cols), db(1, W.rows);
                kernels::conv2d_grad_w(dy, X, cin, h, stride_h, dw, db);
                if (wants(wi)) axpy_all(grad_buf(wi), dw);
                if (wants(bi)) axpy_all(grad_buf(bi), db);
            }
        };
    return out;
}

Var Tape::mean_pool_chw(Var x, int c, int h) {
    const Tensor& xv = val(x.id);
    if (xv.rows != c * h) throw ShapeError("mean_pool_chw: rows disagree with c*h");
    const int w = xv.cols;
    Tensor y(1, c);
    const double inv = 1.0 / static_cast<double>(h * w);
    for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int p = 0; p < h; ++p) {
            const double* r = xv.row_ptr(ch * h + p);
            for (int q = 0; q < w; ++q) s += r[q];
        }
        y(0, ch) = s * inv;
    }
    const bool ng = wants(x.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, xi = x.id, oi = out.id, c, h, inv] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            Tensor& dx = grad_buf(xi);
            for (int ch = 0; ch < c; ++ch) {
                const double g = dy(0, ch) * inv;
                for (int p = 0; p < h; ++p) {
                    double* r = dx.row_ptr(ch * h + p);
                    for (int q = 0; q < dx.cols; ++q) r[q] += g;
                }
            }
        };
    return out;
}

Var Tape::scale_channels(Var x, Var s, int c, int h) {
    const Tensor &xv = val(x.id), &sv = val(s.id);
    if (xv.rows != c * h) throw ShapeError("scale_channels: rows disagree with c*h");
    if (sv.rows != 1 || sv.cols != c) throw ShapeError("scale_channels: gain shape disagrees");
    Tensor y(xv.rows, xv.cols);
    for (int ch = 0; ch < c; ++ch) {
        const double g = sv(0, ch);
        for (int p = 0; p < h; ++p) {
            const double* xr = xv.row_ptr(ch * h + p);
            double* yr = y.row_ptr(ch * h + p);
            for (int q = 0; q < xv.cols; ++q) yr[q] = xr[q] * g;
        }
    }
    const bool ng = wants(x.id) || wants(s.id);
    Var out = push(std::move(y), ng);
    if (ng)
        nodes_.back().back = [this, xi = x.id, si = s.id, oi = out.id, c, h] {
            const Tensor& dy = nodes_[static_cast<size_t>(oi)].grad;
            const Tensor &X = val(xi), &S = val(si);
            if (wants(xi)) {
                Tensor& dx = grad_buf(xi);
                for (int ch = 0; ch < c; ++ch) {
                    const double g = S(0, ch);
                    for (int p = 0; p < h; ++p) {
                        const double* dr = dy.row_ptr(ch * h + p);
                        double* xr = dx.row_ptr(ch * h + p);
                        for (int q = 0; q < dx.cols; ++q) xr[q] += dr[q] * g;
                    }
                }
            }
            if (wants(si)) {
                Tensor& ds = grad_buf(si);
                for (int ch = 0; ch < c; ++ch) {
                    double acc = 0.0;
                    for (int p = 0; p < h; ++p) {
                        const double* dr = dy.row_ptr(ch * h + p);
                        const double* xr = X.row_ptr(ch * h + p);
                        for (int q = 0; q < X.cols; ++q) acc += dr[q] * xr[q];
                    }
                    ds(0, ch) += acc;
                }
            }
        };
    return out;
}

}  // namespace cogest::ad

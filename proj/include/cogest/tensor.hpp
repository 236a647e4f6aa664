#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cogest/errors.hpp"

namespace cogest {

// Dense row-major matrix of doubles. The single numeric container used by
// kernels, the autodiff tape, and model parameters. Row vectors are 1 x C,
// column vectors R x 1, scalars 1 x 1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    static Tensor scalar(double x) {
        Tensor t(1, 1);
        t.v[0] = x;
        return t;
    }

    static Tensor row(std::vector<double> data) {
        Tensor t;
        t.rows = 1;
        t.cols = static_cast<int>(data.size());
        t.v = std::move(data);
        return t;
    }

    double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    double* row_ptr(int r) { return v.data() + static_cast<size_t>(r) * cols; }
    const double* row_ptr(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void require_shape(int r, int c, const char* what) const {
        if (rows != r || cols != c)
            throw ShapeError(std::string(what) + ": expected " + std::to_string(r) + "x" + std::to_string(c) +
                             ", got " + std::to_string(rows) + "x" + std::to_string(cols));
    }
};

}  // namespace cogest

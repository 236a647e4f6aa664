#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cogest/tensor.hpp"

// Reverse-mode autodiff on a tape of matrix nodes.  A Tape is built fresh for
// every training step: modules push operations during the forward pass, then
// backward() replays the tape in reverse and accumulates gradients into the
// bound Parameters.  Matrix products and convolutions run through the kernels
// layer, so the serial/parallel backend choice applies here too.

namespace cogest::ad {

class Tape;

// Trainable weight with its gradient accumulator.  Layers own Parameters;
// optimizers read value/grad pairs through the module's parameter list.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
    void zero_grad() { grad.fill(0.0); }
};

// Handle to a tape node.  Cheap to copy; valid until the tape is destroyed.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& val() const;
    int rows() const { return val().rows; }
    int cols() const { return val().cols; }
};

class Tape {
  public:
    // ---- leaves ----
    Var input(Tensor v);       // constant w.r.t. the loss
    Var param(Parameter& p);   // gradient flows into p.grad on backward()

    // ---- elementwise ----
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double c);
    Var square(Var a);
    Var abs(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var leaky_relu(Var a, double alpha);

    // ---- matrix products ----
    Var matmul(Var a, Var b);     // a · b
    Var matmul_nt(Var a, Var b);  // a · bᵀ
    Var matmul_tn(Var a, Var b);  // aᵀ · b
    Var transpose(Var a);

    // ---- shape ----
    Var concat_rows(Var a, Var b);
    Var concat_cols(Var a, Var b);
    Var slice_rows(Var a, int r0, int r1);
    Var slice_cols(Var a, int c0, int c1);
    Var repeat_rows(Var a, int n);               // 1×C -> n×C
    Var gather_rows(Var a, std::vector<int> idx);

    // ---- reductions and broadcasts ----
    Var sum(Var a);        // -> 1×1
    Var mean(Var a);       // -> 1×1
    Var mean_rows(Var a);  // N×C -> 1×C
    Var sum_cols(Var a);   // N×C -> N×1
    Var add_rowvec(Var a, Var b);  // N×C + 1×C
    Var mul_rowvec(Var a, Var b);  // N×C ∘ 1×C
    Var mul_colvec(Var a, Var b);  // N×C ∘ N×1

    // ---- normalizations ----
    Var row_softmax(Var a);
    Var softmax_cols(Var a);  // softmax over the row index, per column
    Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
    Var row_normalize(Var a, double eps = 1e-8);  // rows scaled to unit length

    // ---- structured ----
    Var row_diff_padded(Var a);  // y[0]=0, y[i]=a[i]-a[i-1]
    Var conv1d(Var x, Var w, Var bias, int k);
    Var conv2d(Var x, Var w, Var bias, int cin, int h, int stride_h);
    Var mean_pool_chw(Var x, int c, int h);          // (c*h)×W -> 1×c
    Var scale_channels(Var x, Var s, int c, int h);  // per-channel gain, s is 1×c

    // Runs the reverse pass from a scalar node.  Parameters touched by the
    // forward pass receive accumulated gradients; everything else is skipped.
    void backward(Var loss);

    const Tensor& val(int id) const { return nodes_[static_cast<size_t>(id)].val; }
    // Gradient of the last backward() w.r.t. a node (empty tensor if unreached).
    const Tensor& grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].grad; }
    size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor val;
        Tensor grad;  // allocated on first touch during backward
        std::function<void()> back;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;

    Var push(Tensor val, bool needs_grad);
    Tensor& grad_buf(int id);
    bool wants(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

    friend struct Var;
};

inline const Tensor& Var::val() const { return tape->val(id); }

}  // namespace cogest::ad

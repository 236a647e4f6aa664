#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "cogest/autodiff.hpp"
#include "cogest/rng.hpp"

// Layers and the optimizer.  All trainable state lives in a ParamStore; layers
// register their Parameters there at construction time, so parameter order —
// and with it initialization and checkpoint layout — is fixed by the order in
// which a model builds its layers.

namespace cogest::nn {

using ad::Parameter;
using ad::Tape;
using ad::Var;

class ParamStore {
  public:
    Parameter& create(const std::string& name, int rows, int cols);
    const std::vector<Parameter*>& all() const { return order_; }
    Parameter* find(const std::string& name);
    void zero_grads();
    size_t scalar_count() const;
    // FNV-1a over names and raw value bits; changes iff any weight changes.
    uint64_t checksum() const;

  private:
    std::deque<Parameter> owned_;  // deque keeps pointers stable
    std::vector<Parameter*> order_;
};

struct Linear {
    Parameter* w = nullptr;  // in×out
    Parameter* b = nullptr;  // 1×out

    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);
    Var operator()(Tape& t, Var x) const { return t.add_rowvec(t.matmul(x, t.param(*w)), t.param(*b)); }
};

struct Conv1d {
    Parameter* w = nullptr;  // cout×(cin*k)
    Parameter* b = nullptr;
    int k = 0;

    Conv1d() = default;
    Conv1d(ParamStore& ps, const std::string& name, int cin, int cout, int k, Rng& rng);
    Var operator()(Tape& t, Var x) const { return t.conv1d(x, t.param(*w), t.param(*b), k); }
};

struct Conv2d {
    Parameter* w = nullptr;  // cout×(cin*9), 3×3 taps
    Parameter* b = nullptr;
    int cin = 0;
    int stride_h = 1;

    Conv2d() = default;
    Conv2d(ParamStore& ps, const std::string& name, int cin, int cout, int stride_h, Rng& rng);
    Var operator()(Tape& t, Var x, int h) const {
        return t.conv2d(x, t.param(*w), t.param(*b), cin, h, stride_h);
    }
};

struct LayerNorm {
    Parameter* gamma = nullptr;
    Parameter* beta = nullptr;

    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, int dim);
    Var operator()(Tape& t, Var x) const { return t.layer_norm(x, t.param(*gamma), t.param(*beta)); }
};

struct Embedding {
    Parameter* table = nullptr;  // vocab×dim

    Embedding() = default;
    Embedding(ParamStore& ps, const std::string& name, int vocab, int dim, Rng& rng);
    Var operator()(Tape& t, const std::vector<int>& idx) const {
        return t.gather_rows(t.param(*table), idx);
    }
};

// Squeeze-and-excitation gate over channel blocks of a (c*h)×w feature map.
struct SEBlock {
    Linear fc1, fc2;
    int c = 0;

    SEBlock() = default;
    SEBlock(ParamStore& ps, const std::string& name, int channels, int reduction, Rng& rng);
    Var operator()(Tape& t, Var x, int h) const {
        Var pooled = t.mean_pool_chw(x, c, h);
        Var gate = t.sigmoid(fc2(t, t.relu(fc1(t, pooled))));
        return t.scale_channels(x, gate, c, h);
    }
};

class Adam {
  public:
    Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // Applies one update to every parameter in `params` from its .grad.
    void step(const std::vector<Parameter*>& params);
    void reset();
    double lr() const { return lr_; }

  private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;  // slot i follows params[i]
};

// Scales all grads so their joint L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace cogest::nn

#include "cogest/nn.hpp"

#include <cmath>

#include "cogest/errors.hpp"

namespace cogest::nn {

namespace {

// Uniform Glorot fill keyed off the weight matrix shape.
void glorot_fill(Tensor& w, int fan_in, int fan_out, Rng& rng) {
    const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w.v) x = rng.uniform(-lim, lim);
}

}  // namespace

Parameter& ParamStore::create(const std::string& name, int rows, int cols) {
    if (find(name)) throw StateError("parameter registered twice: " + name);
    owned_.emplace_back(name, Tensor(rows, cols));
    order_.push_back(&owned_.back());
    return owned_.back();
}

Parameter* ParamStore::find(const std::string& name) {
    for (Parameter* p : order_)
        if (p->name == name) return p;
    return nullptr;
}

void ParamStore::zero_grads() {
    for (Parameter* p : order_) p->zero_grad();
}

size_t ParamStore::scalar_count() const {
    size_t n = 0;
    for (const Parameter& p : owned_) n += p.value.v.size();
    return n;
}

uint64_t ParamStore::checksum() const {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](const void* data, size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const Parameter& p : owned_) {
        mix(p.name.data(), p.name.size());
        mix(p.value.v.data(), p.value.v.size() * sizeof(double));
    }
    return h;
}

Linear::Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
    w = &ps.create(name + ".w", in, out);
    b = &ps.create(name + ".b", 1, out);
    glorot_fill(w->value, in, out, rng);
}

Conv1d::Conv1d(ParamStore& ps, const std::string& name, int cin, int cout, int k_, Rng& rng) : k(k_) {
    w = &ps.create(name + ".w", cout, cin * k);
    b = &ps.create(name + ".b", 1, cout);
    glorot_fill(w->value, cin * k, cout, rng);
}

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int cin_, int cout, int stride_h_, Rng& rng)
    : cin(cin_), stride_h(stride_h_) {
    w = &ps.create(name + ".w", cout, cin * 9);
    b = &ps.create(name + ".b", 1, cout);
    glorot_fill(w->value, cin * 9, cout, rng);
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int dim) {
    gamma = &ps.create(name + ".gamma", 1, dim);
    beta = &ps.create(name + ".beta", 1, dim);
    gamma->value.fill(1.0);
}

Embedding::Embedding(ParamStore& ps, const std::string& name, int vocab, int dim, Rng& rng) {
    table = &ps.create(name + ".table", vocab, dim);
    for (double& x : table->value.v) x = rng.normal(0.0, 0.02);
}

SEBlock::SEBlock(ParamStore& ps, const std::string& name, int channels, int reduction, Rng& rng) : c(channels) {
    const int mid = std::max(1, channels / reduction);
    fc1 = Linear(ps, name + ".fc1", channels, mid, rng);
    fc2 = Linear(ps, name + ".fc2", mid, channels, rng);
}

void Adam::step(const std::vector<Parameter*>& params) {
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Parameter* p : params) {
            m_.emplace_back(p->value.rows, p->value.cols);
            v_.emplace_back(p->value.rows, p->value.cols);
        }
    }
    if (m_.size() != params.size()) throw StateError("optimizer bound to a different parameter set");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (size_t j = 0; j < p.value.v.size(); ++j) {
            const double g = p.grad.v[j];
            m.v[j] = beta1_ * m.v[j] + (1.0 - beta1_) * g;
            v.v[j] = beta2_ * v.v[j] + (1.0 - beta2_) * g * g;
            const double mhat = m.v[j] / bc1;
            const double vhat = v.v[j] / bc2;
            p.value.v[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::reset() {
    t_ = 0;
    m_.clear();
    v_.clear();
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
    double ss = 0.0;
    for (const Parameter* p : params)
        for (double g : p->grad.v) ss += g * g;
    const double norm = std::sqrt(ss);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (Parameter* p : params)
            for (double& g : p->grad.v) g *= s;
    }
    return norm;
}

}  // namespace cogest::nn

#include "cogest/generator.hpp"

#include <cmath>

#include "cogest/errors.hpp"

namespace cogest::gen {

using ad::Tape;
using ad::Var;

Var build_conditioning(Tape& t, Var beat, Var emotion) {
    if (emotion.rows() != 1 || emotion.cols() != beat.cols())
        throw ShapeError("build_conditioning: emotion must be 1 x beat-width");
    return t.add(beat, t.repeat_rows(emotion, beat.rows()));
}

Var scaled_attention(Tape& t, Var q, Var k, Var v, int heads) {
    const int d_model = q.cols();
    if (heads < 1 || d_model % heads != 0)
        throw ValidationError("scaled_attention: width must divide evenly into heads");
    if (k.cols() != d_model || v.cols() != d_model || k.rows() != v.rows())
        throw ShapeError("scaled_attention: key/value shapes disagree with query");
    const int d = d_model / heads;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    Var out;
    for (int h = 0; h < heads; ++h) {
        Var qh = t.slice_cols(q, h * d, (h + 1) * d);
        Var kh = t.slice_cols(k, h * d, (h + 1) * d);
        Var vh = t.slice_cols(v, h * d, (h + 1) * d);
        Var weights = t.row_softmax(t.scale(t.matmul_nt(qh, kh), inv_sqrt_d));
        Var oh = t.matmul(weights, vh);
        out = (h == 0) ? oh : t.concat_cols(out, oh);
    }
    return out;
}

MultiHeadAttention::MultiHeadAttention(nn::ParamStore& ps, const std::string& name, int d, int n_heads,
                                       Rng& rng)
    : wq(ps, name + ".wq", d, d, rng),
      wk(ps, name + ".wk", d, d, rng),
      wv(ps, name + ".wv", d, d, rng),
      wo(ps, name + ".wo", d, d, rng),
      heads(n_heads) {
    if (n_heads < 1 || d % n_heads != 0)
        throw ValidationError("attention: width must divide evenly into heads");
}

Decoder::Decoder(nn::ParamStore& ps, const std::string& prefix, const DecoderConfig& cfg, Rng& rng)
    : cfg_(cfg), cond_ln_(ps, prefix + ".cond_ln", cfg.d_model), final_ln_(ps, prefix + ".final_ln", cfg.d_model),
      head_(ps, prefix + ".head", cfg.d_model, cfg.out_dim, rng) {
    if (cfg.depth < 1) throw ValidationError("decoder: need at least one block");
    if (cfg.heads < 1 || cfg.d_model % cfg.heads != 0)
        throw ValidationError("decoder: width must divide evenly into heads");
    pos_ = &ps.create(prefix + ".pos", cfg.n_frames, cfg.d_model);
    for (double& x : pos_->value.v) x = rng.normal(0.0, 0.02);
    blocks_.reserve(static_cast<size_t>(cfg.depth));
    for (int b = 0; b < cfg.depth; ++b) {
        const std::string bp = prefix + ".block" + std::to_string(b);
        Block blk;
        blk.ln1 = nn::LayerNorm(ps, bp + ".ln1", cfg.d_model);
        blk.ln2 = nn::LayerNorm(ps, bp + ".ln2", cfg.d_model);
        blk.attn = MultiHeadAttention(ps, bp + ".attn", cfg.d_model, cfg.heads, rng);
        blk.ff1 = nn::Linear(ps, bp + ".ff1", cfg.d_model, cfg.ff_width, rng);
        blk.ff2 = nn::Linear(ps, bp + ".ff2", cfg.ff_width, cfg.d_model, rng);
        blocks_.push_back(blk);
    }
}

Var Decoder::decode(Tape& t, Var prompt, Var cond) const {
    const int n = prompt.rows();
    if (prompt.cols() != cfg_.d_model || cond.cols() != cfg_.d_model || cond.rows() != n)
        throw ShapeError("decode: prompt/conditioning must both be N x d_model");
    if (n < 1 || n > cfg_.n_frames) throw ShapeError("decode: sequence longer than the positional table");

    Var pos = t.slice_rows(t.param(*pos_), 0, n);
    Var x = t.add(prompt, pos);
    Var c = cond_ln_(t, t.add(cond, pos));
    for (const Block& blk : blocks_) {
        Var a = t.add(x, blk.attn(t, blk.ln1(t, x), c));
        x = t.add(a, blk.ff2(t, t.relu(blk.ff1(t, blk.ln2(t, a)))));
    }
    return head_(t, final_ln_(t, x));
}

Discriminator::Discriminator(nn::ParamStore& ps, const std::string& prefix, const DiscriminatorConfig& cfg,
                             Rng& rng)
    : cfg_(cfg),
      c1_(ps, prefix + ".c1", cfg.in_dim, cfg.channels, 3, rng),
      c2_(ps, prefix + ".c2", cfg.channels, cfg.channels, 3, rng),
      out_(ps, prefix + ".out", cfg.channels, 1, rng) {}

Var Discriminator::logit(Tape& t, Var seq) const {
    if (seq.cols() != cfg_.in_dim) throw ShapeError("discriminator: pose width mismatch");
    Var x = cfg_.use_offsets ? t.row_diff_padded(seq) : seq;
    Var h = t.leaky_relu(c1_(t, x), 0.2);
    h = t.leaky_relu(c2_(t, h), 0.2);
    return out_(t, t.mean_rows(h));
}

}  // namespace cogest::gen

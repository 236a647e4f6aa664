#pragma once

#include <string>
#include <vector>

#include "cogest/nn.hpp"

// Gesture decoder and motion discriminator.  The decoder runs stacked
// pre-norm cross-attention blocks: the pose prompt is the query track, and the
// beat features summed with the broadcast emotion feature form the key/value
// track.  Learned positional embeddings are added to both tracks.  The
// discriminator is a temporal convolution stack over motion offsets.

namespace cogest::gen {

struct DecoderConfig {
    int d_model = 64;
    int depth = 3;
    int heads = 4;
    int ff_width = 128;
    int n_frames = 60;  // positional table length; inputs may be shorter
    int out_dim = 96;   // J·6 pose width
};

struct DiscriminatorConfig {
    int in_dim = 96;
    int channels = 16;
    bool use_offsets = true;  // judge velocities rather than absolute poses
};

// K/V summed conditioning: beat rows plus the pooled emotion row broadcast
// over time.
ad::Var build_conditioning(ad::Tape& t, ad::Var beat, ad::Var emotion);

// Per-head softmax(q·kᵀ/√d)·v with heads split along columns and concatenated
// back; no projections.
ad::Var scaled_attention(ad::Tape& t, ad::Var q, ad::Var k, ad::Var v, int heads);

struct MultiHeadAttention {
    nn::Linear wq, wk, wv, wo;
    int heads = 1;

    MultiHeadAttention() = default;
    MultiHeadAttention(nn::ParamStore& ps, const std::string& name, int d, int heads, Rng& rng);
    ad::Var operator()(ad::Tape& t, ad::Var q, ad::Var kv) const {
        return wo(t, scaled_attention(t, wq(t, q), wk(t, kv), wv(t, kv), heads));
    }
};

class Decoder {
  public:
    Decoder(nn::ParamStore& ps, const std::string& prefix, const DecoderConfig& cfg, Rng& rng);

    // prompt and cond are N×D with N at most the positional table length.
    ad::Var decode(ad::Tape& t, ad::Var prompt, ad::Var cond) const;
    const DecoderConfig& config() const { return cfg_; }

  private:
    struct Block {
        nn::LayerNorm ln1, ln2;
        MultiHeadAttention attn;
        nn::Linear ff1, ff2;
    };

    DecoderConfig cfg_;
    ad::Parameter* pos_ = nullptr;  // shared positional table for both tracks
    nn::LayerNorm cond_ln_;
    std::vector<Block> blocks_;
    nn::LayerNorm final_ln_;
    nn::Linear head_;
};

class Discriminator {
  public:
    Discriminator(nn::ParamStore& ps, const std::string& prefix, const DiscriminatorConfig& cfg, Rng& rng);

    // Pre-sigmoid realism score, 1×1; the stable input to adversarial losses.
    ad::Var logit(ad::Tape& t, ad::Var seq) const;
    // Probability form in (0,1).
    ad::Var score(ad::Tape& t, ad::Var seq) const { return t.sigmoid(logit(t, seq)); }
    const DiscriminatorConfig& config() const { return cfg_; }

  private:
    DiscriminatorConfig cfg_;
    nn::Conv1d c1_, c2_;
    nn::Linear out_;
};

}  // namespace cogest::gen

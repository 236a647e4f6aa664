#pragma once

#include <array>
#include <string>
#include <vector>

#include "cogest/nn.hpp"

// Emotion-beat mining: a convolutional audio backbone over the log-mel input
// producing a per-frame beat track and a pooled emotion vector, plus the two
// supervision losses (contrastive beat alignment, emotion cross-entropy).

namespace cogest::ebm {

struct EncoderConfig {
    int d_model = 64;
    int n_classes = 4;
    std::array<int, 3> channels = {4, 8, 16};  // backbone widths, each block halves the mel axis
};

// Linear-interpolation resampling matrix along time (to×from); row i mixes the
// two source frames bracketing position i·(from−1)/(to−1).
Tensor time_resample_matrix(int from_frames, int to_frames);

class AudioEncoder {
  public:
    AudioEncoder(nn::ParamStore& ps, const std::string& prefix, const EncoderConfig& cfg, Rng& rng);

    struct Output {
        ad::Var beat;     // N×D
        ad::Var emotion;  // 1×D, mean-pooled over time
        ad::Var logits;   // 1×C
    };
    // mel is bins×T; the hidden track is resampled from T to n_frames.
    Output forward(ad::Tape& t, const Tensor& mel, int n_frames) const;

    const EncoderConfig& config() const { return cfg_; }

  private:
    EncoderConfig cfg_;
    nn::Conv2d conv_[3];
    nn::SEBlock se_[3];
    nn::Linear flatten_proj_;           // (c3·h3) → D
    nn::Linear beat_fc1_, beat_fc2_;    // per-frame MLP projector
    nn::Linear emo_fc1_, emo_fc2_;      // per-frame MLP projector before pooling
    nn::Linear classifier_;             // D → C
    int mel_bins_;
    int h_[4];  // mel-axis heights entering/leaving each block
};

// Contrastive beat alignment over one sequence.  Anchors are the transcript
// feature rows at `uttered_frames`; the positive is the beat feature at the
// same frame; every other frame of the sequence is a negative.  The loss is
// the negated log of the summed per-anchor ratios
//     exp(sim(anchor,pos)/τ) / Σ_other exp(sim(anchor,neg)/τ)
// with cosine similarity, and 0 when no frame is uttered.  The flag moves the
// positive into the denominator (the standard contrastive form).
ad::Var beat_contrastive_loss(ad::Tape& t, ad::Var transcript_feats, ad::Var beat_feats,
                              const std::vector<int>& uttered_frames, double tau,
                              bool include_positive_in_denominator = false);

// −log softmax(logits)[label], computed with a max-shifted log-sum-exp.
ad::Var emotion_ce_loss(ad::Tape& t, ad::Var logits, int label);

}  // namespace cogest::ebm

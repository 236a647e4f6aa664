#pragma once

#include <string>

#include "cogest/nn.hpp"

// Emotion-conditioned VAE over pooled emotion features.  Trained after the
// main model with the backbone frozen; at inference it turns a one-hot emotion
// code and a latent draw into a fresh emotion feature, which is what makes
// generation diverse.

namespace cogest::vae {

struct CVAEConfig {
    int d_feature = 64;  // width of the emotion feature
    int latent = 32;
    int hidden = 256;
    int n_classes = 4;  // one-hot code length
    double beta = 1.0;  // KL weight in the objective
};

// ½ Σ (μ² + σ² − 1 − logσ²) against the standard-normal prior; 1×1.
ad::Var kl_divergence(ad::Tape& t, ad::Var mu, ad::Var logvar);

class EmotionVAE {
  public:
    EmotionVAE(nn::ParamStore& ps, const std::string& prefix, const CVAEConfig& cfg, Rng& rng);

    struct ForwardOut {
        ad::Var recon;   // 1×D
        ad::Var mu;      // 1×Z
        ad::Var logvar;  // 1×Z
        ad::Var z;       // 1×Z reparameterized latent
    };
    // eps is the 1×Z noise injection; pass zeros to make z = μ exactly.
    ForwardOut forward(ad::Tape& t, ad::Var feature, int label, const Tensor& eps) const;

    // Mean-squared reconstruction + β·KL.
    ad::Var loss(ad::Tape& t, const ForwardOut& out, ad::Var target) const;

    // Decode z ⊕ code without building gradient state.
    Tensor decode_latent(const Tensor& z, int label) const;
    // Draw z ~ N(0, I) from rng and decode.  Requires mark_trained() first.
    Tensor sample(int label, Rng& rng) const;

    void mark_trained() { trained_ = true; }
    bool is_trained() const { return trained_; }
    const CVAEConfig& config() const { return cfg_; }

  private:
    Tensor one_hot(int label) const;

    CVAEConfig cfg_;
    bool trained_ = false;
    nn::Linear enc1_, enc_mu_, enc_logvar_, dec1_, dec2_;
};

}  // namespace cogest::vae

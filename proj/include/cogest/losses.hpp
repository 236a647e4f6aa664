#pragma once

#include <utility>

#include "cogest/autodiff.hpp"

// Training objectives: temporal motion-smoothing KL, L1 reconstruction, the
// adversarial pair, and the weighted total.  Adversarial terms exist in both
// probability space (mirrors the printed definition, inputs clamped away from
// 0/1) and logit space (softplus form, safe at any saturation — the one the
// trainer uses).

namespace cogest::loss {

using ad::Tape;
using ad::Var;

struct LossWeights {
    double lambda_r = 100.0;  // reconstruction
    double lambda_b = 0.05;   // beat contrast
    double lambda_e = 0.1;    // emotion classification
    double lambda_s = 0.5;    // motion smoothness
    double gamma = 10.0;      // smoothing temperature for real offsets
    double tau = 0.1;         // contrastive temperature

    void validate() const;  // every field strictly positive
};

// Mean over feature dimensions of KL(softmax_time(real/gamma) ‖ softmax_time(fake)).
// Inputs are motion-offset tracks of equal shape (N−1)×(J·6).
Var motion_smooth_loss(Tape& t, Var real_offsets, Var fake_offsets, double gamma);

// Mean absolute difference over all entries.
Var reconstruction_loss(Tape& t, Var real, Var fake);

// Probability-space adversarial pair from discriminator outputs in (0,1);
// inputs are clamped to [1e−7, 1−1e−7] first.  non_saturating selects
// −log D(fake) for the generator; the literal minimax form is log(1−D(fake)).
std::pair<Var, Var> adversarial_losses(Tape& t, Var d_real, Var d_fake, bool non_saturating = true);

// Logit-space equivalents (softplus form).
Var d_loss_from_logits(Tape& t, Var logit_real, Var logit_fake);
Var g_loss_from_logits(Tape& t, Var logit_fake, bool non_saturating = true);

// λ_r·rec + adv + λ_b·beat + λ_e·emo + λ_s·smooth, each part a 1×1 node.
Var total_objective(Tape& t, Var rec, Var adv, Var beat, Var emo, Var smooth, const LossWeights& w);

}  // namespace cogest::loss

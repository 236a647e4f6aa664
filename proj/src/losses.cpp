#include "cogest/losses.hpp"

#include "cogest/errors.hpp"

namespace cogest::loss {

namespace {

constexpr double kProbEps = 1e-7;

void require_scalar(Var v, const char* who) {
    if (v.rows() != 1 || v.cols() != 1) throw ShapeError(std::string(who) + ": expected a 1x1 node");
}

// max(x, lo) and min(x, hi) built from relu so the clamp stays on the tape.
Var clamp_unit(Tape& t, Var x) {
    Var lo = t.add_scalar(t.relu(t.add_scalar(x, -kProbEps)), kProbEps);
    return t.sub(lo, t.relu(t.add_scalar(lo, kProbEps - 1.0)));
}

// log(1 + e^x) as relu(x) + log(1 + e^−|x|); never overflows.
Var softplus(Tape& t, Var x) {
    return t.add(t.relu(x), t.log(t.add_scalar(t.exp(t.scale(t.abs(x), -1.0)), 1.0)));
}

}  // namespace

void LossWeights::validate() const {
    if (lambda_r <= 0.0 || lambda_b <= 0.0 || lambda_e <= 0.0 || lambda_s <= 0.0 || gamma <= 0.0 ||
        tau <= 0.0)
        throw ValidationError("loss weights must all be strictly positive");
}

Var motion_smooth_loss(Tape& t, Var real_offsets, Var fake_offsets, double gamma) {
    if (real_offsets.rows() != fake_offsets.rows() || real_offsets.cols() != fake_offsets.cols())
        throw ShapeError("motion_smooth_loss: offset tracks must have equal shapes");
    if (gamma <= 0.0) throw ValidationError("motion_smooth_loss: temperature must be positive");
    Var p = t.softmax_cols(t.scale(real_offsets, 1.0 / gamma));
    Var q = t.softmax_cols(fake_offsets);
    Var kl_cells = t.mul(p, t.sub(t.log(p), t.log(q)));
    return t.scale(t.sum(kl_cells), 1.0 / static_cast<double>(real_offsets.cols()));
}

Var reconstruction_loss(Tape& t, Var real, Var fake) {
    if (real.rows() != fake.rows() || real.cols() != fake.cols())
        throw ShapeError("reconstruction_loss: shapes must match");
    return t.mean(t.abs(t.sub(real, fake)));
}

std::pair<Var, Var> adversarial_losses(Tape& t, Var d_real, Var d_fake, bool non_saturating) {
    require_scalar(d_real, "adversarial_losses");
    require_scalar(d_fake, "adversarial_losses");
    Var pr = clamp_unit(t, d_real);
    Var pf = clamp_unit(t, d_fake);
    Var one_minus_pf = t.add_scalar(t.scale(pf, -1.0), 1.0);
    Var d_loss = t.scale(t.add(t.log(pr), t.log(one_minus_pf)), -1.0);
    Var g_loss = non_saturating ? t.scale(t.log(pf), -1.0) : t.log(one_minus_pf);
    return {d_loss, g_loss};
}

Var d_loss_from_logits(Tape& t, Var logit_real, Var logit_fake) {
    require_scalar(logit_real, "d_loss_from_logits");
    require_scalar(logit_fake, "d_loss_from_logits");
    // −log σ(a) = softplus(−a); −log(1−σ(b)) = softplus(b).
    return t.add(softplus(t, t.scale(logit_real, -1.0)), softplus(t, logit_fake));
}

Var g_loss_from_logits(Tape& t, Var logit_fake, bool non_saturating) {
    require_scalar(logit_fake, "g_loss_from_logits");
    if (non_saturating) return softplus(t, t.scale(logit_fake, -1.0));
    return t.scale(softplus(t, logit_fake), -1.0);  // log(1−σ(b)) = −softplus(b)
}

Var total_objective(Tape& t, Var rec, Var adv, Var beat, Var emo, Var smooth, const LossWeights& w) {
    w.validate();
    require_scalar(rec, "total_objective");
    require_scalar(adv, "total_objective");
    require_scalar(beat, "total_objective");
    require_scalar(emo, "total_objective");
    require_scalar(smooth, "total_objective");
    Var acc = t.add(t.scale(rec, w.lambda_r), adv);
    acc = t.add(acc, t.scale(beat, w.lambda_b));
    acc = t.add(acc, t.scale(emo, w.lambda_e));
    return t.add(acc, t.scale(smooth, w.lambda_s));
}

}  // namespace cogest::loss

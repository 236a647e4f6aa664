#include "cogest/vae.hpp"

#include "cogest/errors.hpp"

namespace cogest::vae {

using ad::Tape;
using ad::Var;

Var kl_divergence(Tape& t, Var mu, Var logvar) {
    if (mu.rows() != 1 || logvar.rows() != 1 || mu.cols() != logvar.cols())
        throw ShapeError("kl_divergence: mu and logvar must be matching row vectors");
    Var var = t.exp(logvar);
    Var terms = t.sub(t.add(t.square(mu), var), t.add_scalar(logvar, 1.0));
    return t.scale(t.sum(terms), 0.5);
}

EmotionVAE::EmotionVAE(nn::ParamStore& ps, const std::string& prefix, const CVAEConfig& cfg, Rng& rng)
    : cfg_(cfg),
      enc1_(ps, prefix + ".enc1", cfg.d_feature + cfg.n_classes, cfg.hidden, rng),
      enc_mu_(ps, prefix + ".mu", cfg.hidden, cfg.latent, rng),
      enc_logvar_(ps, prefix + ".logvar", cfg.hidden, cfg.latent, rng),
      dec1_(ps, prefix + ".dec1", cfg.latent + cfg.n_classes, cfg.hidden, rng),
      dec2_(ps, prefix + ".dec2", cfg.hidden, cfg.d_feature, rng) {
    if (cfg.latent < 1 || cfg.hidden < 1 || cfg.n_classes < 1 || cfg.d_feature < 1)
        throw ValidationError("cvae: all dimensions must be positive");
    if (cfg.beta <= 0.0) throw ValidationError("cvae: beta must be positive");
}

Tensor EmotionVAE::one_hot(int label) const {
    if (label < 0 || label >= cfg_.n_classes) throw ValidationError("cvae: emotion label out of range");
    Tensor code(1, cfg_.n_classes);
    code(0, label) = 1.0;
    return code;
}

EmotionVAE::ForwardOut EmotionVAE::forward(Tape& t, Var feature, int label, const Tensor& eps) const {
    if (feature.rows() != 1 || feature.cols() != cfg_.d_feature)
        throw ShapeError("cvae: feature must be 1 x d_feature");
    if (eps.rows != 1 || eps.cols != cfg_.latent) throw ShapeError("cvae: eps must be 1 x latent");
    Var code = t.input(one_hot(label));
    Var h = t.relu(enc1_(t, t.concat_cols(feature, code)));
    ForwardOut out;
    out.mu = enc_mu_(t, h);
    out.logvar = enc_logvar_(t, h);
    out.z = t.add(out.mu, t.mul(t.exp(t.scale(out.logvar, 0.5)), t.input(eps)));
    out.recon = dec2_(t, t.relu(dec1_(t, t.concat_cols(out.z, code))));
    return out;
}

Var EmotionVAE::loss(Tape& t, const ForwardOut& out, Var target) const {
    Var mse = t.mean(t.square(t.sub(out.recon, target)));
    return t.add(mse, t.scale(kl_divergence(t, out.mu, out.logvar), cfg_.beta));
}

Tensor EmotionVAE::decode_latent(const Tensor& z, int label) const {
    if (z.rows != 1 || z.cols != cfg_.latent) throw ShapeError("cvae: latent must be 1 x latent");
    Tape t;
    Var code = t.input(one_hot(label));
    return dec2_(t, t.relu(dec1_(t, t.concat_cols(t.input(z), code)))).val();
}

Tensor EmotionVAE::sample(int label, Rng& rng) const {
    if (!trained_) throw StateError("cvae: sampling requires a trained model");
    Tensor z(1, cfg_.latent);
    for (double& x : z.v) x = rng.normal();
    return decode_latent(z, label);
}

}  // namespace cogest::vae

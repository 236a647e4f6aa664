#include "cogest/ebm.hpp"

#include <cmath>

#include "cogest/errors.hpp"
#include "cogest/kernels.hpp"

namespace cogest::ebm {

using ad::Tape;
using ad::Var;

Tensor time_resample_matrix(int from_frames, int to_frames) {
    if (from_frames < 2 || to_frames < 2) throw ShapeError("time_resample_matrix: need at least two frames each side");
    Tensor r(to_frames, from_frames);
    const double step = static_cast<double>(from_frames - 1) / static_cast<double>(to_frames - 1);
    for (int i = 0; i < to_frames; ++i) {
        const double p = i * step;
        const int lo = std::min(static_cast<int>(p), from_frames - 2);
        const double frac = std::clamp(p - lo, 0.0, 1.0);
        r(i, lo) = 1.0 - frac;
        r(i, lo + 1) = frac;
    }
    return r;
}

AudioEncoder::AudioEncoder(nn::ParamStore& ps, const std::string& prefix, const EncoderConfig& cfg, Rng& rng)
    : cfg_(cfg), mel_bins_(128) {
    h_[0] = mel_bins_;
    int cin = 1;
    for (int b = 0; b < 3; ++b) {
        const int cout = cfg.channels[static_cast<size_t>(b)];
        conv_[b] = nn::Conv2d(ps, prefix + ".conv" + std::to_string(b), cin, cout, 2, rng);
        se_[b] = nn::SEBlock(ps, prefix + ".se" + std::to_string(b), cout, 4, rng);
        h_[b + 1] = kernels::conv2d_out_h(h_[b], 2);
        cin = cout;
    }
    const int flat = cfg.channels[2] * h_[3];
    flatten_proj_ = nn::Linear(ps, prefix + ".flatten", flat, cfg.d_model, rng);
    beat_fc1_ = nn::Linear(ps, prefix + ".beat1", cfg.d_model, cfg.d_model, rng);
    beat_fc2_ = nn::Linear(ps, prefix + ".beat2", cfg.d_model, cfg.d_model, rng);
    emo_fc1_ = nn::Linear(ps, prefix + ".emo1", cfg.d_model, cfg.d_model, rng);
    emo_fc2_ = nn::Linear(ps, prefix + ".emo2", cfg.d_model, cfg.d_model, rng);
    classifier_ = nn::Linear(ps, prefix + ".classifier", cfg.d_model, cfg.n_classes, rng);
}

AudioEncoder::Output AudioEncoder::forward(Tape& t, const Tensor& mel, int n_frames) const {
    if (mel.rows != mel_bins_) throw ShapeError("audio encoder: expected " + std::to_string(mel_bins_) + " mel bins");
    if (n_frames < 2) throw ShapeError("audio encoder: need at least two output frames");

    Var x = t.input(mel);  // (1·128)×T
    for (int b = 0; b < 3; ++b) {
        x = t.relu(conv_[b](t, x, h_[b]));
        x = se_[b](t, x, h_[b + 1]);
    }
    // (c3·h3)×T → T×(c3·h3) → T×D → N×D
    Var track = flatten_proj_(t, t.transpose(x));
    Var resample = t.input(time_resample_matrix(mel.cols, n_frames));
    Var hidden = t.matmul(resample, track);

    Output out;
    out.beat = beat_fc2_(t, t.relu(beat_fc1_(t, hidden)));
    Var emo_track = emo_fc2_(t, t.relu(emo_fc1_(t, hidden)));
    out.emotion = t.mean_rows(emo_track);
    out.logits = classifier_(t, out.emotion);
    return out;
}

Var beat_contrastive_loss(Tape& t, Var transcript_feats, Var beat_feats, const std::vector<int>& uttered_frames,
                          double tau, bool include_positive_in_denominator) {
    if (tau <= 0.0) throw ValidationError("beat loss: temperature must be positive");
    const Tensor& ft = transcript_feats.val();
    const Tensor& fb = beat_feats.val();
    if (!ft.same_shape(fb)) throw ShapeError("beat loss: transcript and beat feature shapes disagree");
    const int n = fb.rows;
    if (n < 2) throw ShapeError("beat loss: need at least two frames for negatives");
    if (uttered_frames.empty()) return t.input(Tensor::scalar(0.0));

    for (int u : uttered_frames)
        if (u < 0 || u >= n) throw ValidationError("beat loss: uttered frame index out of range");
    auto check_norms = [](const Tensor& m, const char* what) {
        for (int i = 0; i < m.rows; ++i) {
            double ss = 0.0;
            for (int j = 0; j < m.cols; ++j) ss += m(i, j) * m(i, j);
            if (ss < 1e-24) throw DegenerateInputError(std::string("beat loss: zero-norm ") + what + " row");
        }
    };
    check_norms(fb, "beat");
    for (int u : uttered_frames) {
        double ss = 0.0;
        for (int j = 0; j < ft.cols; ++j) ss += ft(u, j) * ft(u, j);
        if (ss < 1e-24) throw DegenerateInputError("beat loss: zero-norm anchor row");
    }

    const int u_count = static_cast<int>(uttered_frames.size());
    Var anchors = t.row_normalize(t.gather_rows(transcript_feats, uttered_frames));
    Var beats = t.row_normalize(beat_feats);
    Var sims = t.matmul_nt(anchors, beats);             // U×N cosine similarities
    Var expd = t.exp(t.scale(sims, 1.0 / tau));         // bounded by e^{1/τ}

    // Select the positive and negative terms by masking before the row sums;
    // subtracting the positive from a total instead would cancel badly when
    // the positive dominates.
    Tensor pos_mask(u_count, n), neg_mask(u_count, n);
    neg_mask.fill(1.0);
    for (int u = 0; u < u_count; ++u) {
        pos_mask(u, uttered_frames[static_cast<size_t>(u)]) = 1.0;
        if (!include_positive_in_denominator) neg_mask(u, uttered_frames[static_cast<size_t>(u)]) = 0.0;
    }
    Var numer = t.sum_cols(t.mul(expd, t.input(pos_mask)));  // U×1, the positive terms
    Var denom = t.sum_cols(t.mul(expd, t.input(neg_mask)));

    // num/den via exp(log num − log den); both sides are strictly positive.
    Var ratios = t.exp(t.sub(t.log(numer), t.log(denom)));
    return t.scale(t.log(t.sum(ratios)), -1.0);
}

Var emotion_ce_loss(Tape& t, Var logits, int label) {
    const Tensor& lv = logits.val();
    if (lv.rows != 1) throw ShapeError("emotion loss: logits must be a single row");
    if (label < 0 || label >= lv.cols) throw ValidationError("emotion loss: label outside the class range");
    if (!lv.all_finite()) throw ValidationError("emotion loss: non-finite logits");
    double shift = lv(0, 0);
    for (int j = 1; j < lv.cols; ++j) shift = std::max(shift, lv(0, j));
    Var lse = t.add_scalar(t.log(t.sum(t.exp(t.add_scalar(logits, -shift)))), shift);
    return t.sub(lse, t.slice_cols(logits, label, label + 1));
}

}  // namespace cogest::ebm

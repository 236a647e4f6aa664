#include "cogest/stp.hpp"

#include "cogest/errors.hpp"

namespace cogest::stp {

using ad::Tape;
using ad::Var;

PromptMode prompt_mode_from_string(const std::string& s) {
    if (s == "enhanced") return PromptMode::enhanced;
    if (s == "zero") return PromptMode::zero_pad;
    if (s == "duplicate") return PromptMode::duplicate_pad;
    throw ValidationError("unknown prompt mode: " + s);
}

std::string to_string(PromptMode m) {
    switch (m) {
        case PromptMode::enhanced: return "enhanced";
        case PromptMode::zero_pad: return "zero";
        default: return "duplicate";
    }
}

std::vector<int> repeat_indices(int from_rows, int to_rows) {
    if (from_rows < 1 || to_rows < 1) throw ShapeError("repeat_indices: need positive row counts");
    std::vector<int> idx(static_cast<size_t>(to_rows));
    for (int r = 0; r < to_rows; ++r) {
        int src = static_cast<int>(static_cast<long>(r) * from_rows / to_rows);
        idx[static_cast<size_t>(r)] = std::min(src, from_rows - 1);
    }
    return idx;
}

namespace {

void check_enhance_shapes(Var spatial, Var future, int l, const char* who) {
    if (spatial.rows() != 1 || spatial.cols() != future.cols())
        throw ShapeError(std::string(who) + ": spatial summary must be 1 x future-width");
    if (l < 1 || l > future.rows())
        throw ShapeError(std::string(who) + ": transition length out of range");
}

Var with_tail(Tape& t, Var head, Var future, int l) {
    if (l == future.rows()) return head;
    return t.concat_rows(head, t.slice_rows(future, l, future.rows()));
}

}  // namespace

Var spatial_interpolation(Tape& t, Var spatial, Var future, int l) {
    check_enhance_shapes(spatial, future, l, "spatial_interpolation");
    Var head = t.slice_rows(future, 0, l);
    Var sig = t.sigmoid(t.matmul_nt(head, spatial));              // l×1 gates
    Var inv = t.add_scalar(t.scale(sig, -1.0), 1.0);              // 1−σ
    Var mixed = t.add(t.mul_colvec(head, sig), t.mul_colvec(t.repeat_rows(spatial, l), inv));
    return with_tail(t, mixed, future, l);
}

Var temporal_reinforcement(Tape& t, Var spatial, Var temporal, Var future, int l) {
    check_enhance_shapes(spatial, future, l, "temporal_reinforcement");
    if (temporal.rows() != l || temporal.cols() != 1)
        throw ShapeError("temporal_reinforcement: temporal embedding must be l x 1");
    Var outer = t.matmul(temporal, spatial);         // l×D
    Var scores = t.matmul_nt(outer, spatial);        // l×1
    Var omega = t.softmax_cols(scores);              // sums to 1 down the rows
    Var head = t.slice_rows(future, 0, l);
    Var boosted = t.add(head, t.mul_colvec(head, omega));
    return with_tail(t, boosted, future, l);
}

Prompter::Prompter(nn::ParamStore& ps, const std::string& prefix, const PrompterConfig& cfg, Rng& rng)
    : cfg_(cfg),
      enc1_(ps, prefix + ".enc1", cfg.pose_dim, cfg.d_model, rng),
      enc2_(ps, prefix + ".enc2", cfg.d_model, cfg.d_model, rng),
      pred1_(ps, prefix + ".pred1", cfg.d_model, cfg.d_model, 3, rng),
      pred2_(ps, prefix + ".pred2", cfg.d_model, cfg.d_model, 3, rng),
      spatial_aff_(ps, prefix + ".spatial", cfg.d_model, cfg.d_model, rng),
      motion_conv_(ps, prefix + ".motion_conv", cfg.d_model, cfg.d_model, 3, rng),
      motion_aff_(ps, prefix + ".motion_aff", cfg.d_model, 1, rng) {
    if (cfg.m_initial < 1 || cfg.m_initial >= cfg.n_frames)
        throw ValidationError("prompter: need 1 <= m_initial < n_frames");
    if (cfg.l_transition < 1 || cfg.l_transition > cfg.n_frames - cfg.m_initial ||
        cfg.l_transition > cfg.m_initial)
        throw ValidationError("prompter: transition length must fit both chunks");
}

Var Prompter::encode_initial(Tape& t, Var poses) const {
    if (poses.cols() != cfg_.pose_dim) throw ShapeError("encode_initial: pose width mismatch");
    return enc2_(t, t.relu(enc1_(t, poses)));
}

Var Prompter::predict_future(Tape& t, Var initial_embedding) const {
    if (initial_embedding.rows() != cfg_.m_initial || initial_embedding.cols() != cfg_.d_model)
        throw ShapeError("predict_future: expected M x d_model embedding");
    Var seed = t.gather_rows(initial_embedding, repeat_indices(cfg_.m_initial, cfg_.n_frames - cfg_.m_initial));
    return pred2_(t, t.relu(pred1_(t, seed)));
}

Prompter::Output Prompter::forward(Tape& t, const Tensor& initial_poses) const {
    if (initial_poses.rows != cfg_.m_initial || initial_poses.cols != cfg_.pose_dim)
        throw ShapeError("prompter: expected M x pose_dim initial poses");
    const int n_future = cfg_.n_frames - cfg_.m_initial;
    Output out;
    out.initial = encode_initial(t, t.input(initial_poses));

    if (cfg_.mode == PromptMode::zero_pad) {
        out.future_raw = t.input(Tensor(n_future, cfg_.d_model));
        out.future = out.future_raw;
        out.prompt = t.concat_rows(out.initial, out.future);
        return out;
    }
    if (cfg_.mode == PromptMode::duplicate_pad) {
        std::vector<int> idx(static_cast<size_t>(n_future));
        for (int r = 0; r < n_future; ++r) idx[static_cast<size_t>(r)] = r % cfg_.m_initial;
        out.future_raw = t.gather_rows(out.initial, idx);
        out.future = out.future_raw;
        out.prompt = t.concat_rows(out.initial, out.future);
        return out;
    }

    out.future_raw = predict_future(t, out.initial);

    const int l = cfg_.l_transition;
    // Spatial summary: mean of the last L initial rows, then an affine map.
    Var tail = t.slice_rows(out.initial, cfg_.m_initial - l, cfg_.m_initial);
    out.spatial = spatial_aff_(t, t.mean_rows(tail));
    // Temporal embedding: velocities of the first L future rows through a conv
    // and a per-row projection to one channel.
    Var head = t.slice_rows(out.future_raw, 0, l);
    out.temporal = motion_aff_(t, motion_conv_(t, t.row_diff_padded(head)));

    Var mixed = spatial_interpolation(t, out.spatial, out.future_raw, l);
    out.future = temporal_reinforcement(t, out.spatial, out.temporal, mixed, l);
    out.prompt = t.concat_rows(out.initial, out.future);
    return out;
}

}  // namespace cogest::stp

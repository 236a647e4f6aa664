#pragma once

#include <string>
#include <vector>

#include "cogest/nn.hpp"

// Spatial-temporal prompter: turns M initial pose frames into an N-frame pose
// prompt.  A pose encoder embeds the initial frames, a 1-D convolutional
// predictor rolls them forward, and two enhancement steps couple the first L
// future rows to the initial chunk — a sigmoid-gated interpolation toward the
// pooled spatial summary, and a softmax-weighted row reinforcement driven by
// the temporal embedding.  Zero- and duplicate-padding baselines are kept for
// comparison runs.

namespace cogest::stp {

enum class PromptMode { enhanced, zero_pad, duplicate_pad };

PromptMode prompt_mode_from_string(const std::string& s);
std::string to_string(PromptMode m);

struct PrompterConfig {
    int d_model = 64;
    int pose_dim = 96;      // J·6 input width
    int n_frames = 60;      // N
    int m_initial = 10;     // M
    int l_transition = 10;  // L
    PromptMode mode = PromptMode::enhanced;
};

// Nearest-neighbour source row for each of `to_rows` target rows.
std::vector<int> repeat_indices(int from_rows, int to_rows);

// Gated interpolation on the first l rows: σ_i = sigmoid(spatial · rowᵢᵀ) and
// rowᵢ ← σ_i·rowᵢ + (1−σ_i)·spatial.  Rows past l pass through untouched.
ad::Var spatial_interpolation(ad::Tape& t, ad::Var spatial, ad::Var future, int l);

// Row reinforcement on the first l rows: ω = softmax((temporal·spatial)·spatialᵀ)
// over the l axis, rowᵢ ← rowᵢ·(1+ω_i).  temporal is l×1, spatial is 1×D.
ad::Var temporal_reinforcement(ad::Tape& t, ad::Var spatial, ad::Var temporal, ad::Var future, int l);

class Prompter {
  public:
    Prompter(nn::ParamStore& ps, const std::string& prefix, const PrompterConfig& cfg, Rng& rng);

    struct Output {
        ad::Var prompt;       // N×D
        ad::Var initial;      // M×D pose embedding
        ad::Var future_raw;   // (N−M)×D predictor output
        ad::Var future;       // (N−M)×D after enhancement (equals raw in baseline modes)
        ad::Var spatial;      // 1×D pooled summary (enhanced mode only; empty otherwise)
        ad::Var temporal;     // L×1 temporal embedding (enhanced mode only; empty otherwise)
    };
    // initial_poses is M×pose_dim.
    Output forward(ad::Tape& t, const Tensor& initial_poses) const;

    // Pose encoder alone (per-frame MLP), exposed for the encoder contract.
    ad::Var encode_initial(ad::Tape& t, ad::Var poses) const;
    // Predictor alone: nearest-neighbour repeat to N−M rows, then the conv stack.
    ad::Var predict_future(ad::Tape& t, ad::Var initial_embedding) const;

    const PrompterConfig& config() const { return cfg_; }

  private:
    PrompterConfig cfg_;
    nn::Linear enc1_, enc2_;
    nn::Conv1d pred1_, pred2_;
    nn::Linear spatial_aff_;
    nn::Conv1d motion_conv_;
    nn::Linear motion_aff_;
};

}  // namespace cogest::stp

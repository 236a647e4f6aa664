#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cogest/audio.hpp"
#include "cogest/ebm.hpp"
#include "cogest/generator.hpp"
#include "cogest/stp.hpp"
#include "cogest/vae.hpp"

// The assembled model: audio encoder, word embedding, prompter, decoder,
// discriminator, and emotion VAE, wired into one forward pass.  Generator,
// discriminator, and VAE parameters live in three separate stores so the
// adversarial updates and the frozen-backbone VAE stage stay isolated by
// construction.  Checkpoints serialize all three stores plus the config and
// vocabulary into a single versioned container.

namespace cogest::pipeline {

enum class EmotionMode { encoded, sampled, onehot };

EmotionMode emotion_mode_from_string(const std::string& s);
std::string to_string(EmotionMode m);

struct ModelConfig {
    int d_model = 64;
    int n_frames = 60;      // N
    int m_initial = 10;     // M
    int l_transition = 10;  // L
    int n_joints = 16;      // J; pose width is J·6
    int heads = 4;
    int depth = 3;
    int ff_width = 128;
    int n_classes = 4;
    std::array<int, 3> ebm_channels = {4, 8, 16};
    stp::PromptMode prompt_mode = stp::PromptMode::enhanced;
    bool disc_use_offsets = true;
    int disc_channels = 16;
    int vae_latent = 32;
    int vae_hidden = 256;
    double vae_beta = 1.0;

    int pose_dim() const { return n_joints * 6; }
};

// One-hot class code lifted to a unit-norm 1×d feature by tiling; the
// deterministic stand-in for mined emotion features in the ablation mode.
Tensor onehot_feature(int label, int n_classes, int d);

class GestureModel {
  public:
    GestureModel(const ModelConfig& cfg, const audio::Vocabulary& vocab, uint64_t seed);

    struct Forward {
        ad::Var poses;       // N×(J·6)
        ad::Var beat;        // N×D
        ad::Var emotion;     // 1×D, the conditioning row actually used
        ad::Var logits;      // 1×C audio emotion logits
        ad::Var transcript;  // N×D word features; unset when token_ids is empty
        stp::Prompter::Output prompt;
    };
    // mel is bins×T; initial_poses is M×(J·6).  A non-null emotion_override
    // replaces the encoded emotion feature in the conditioning track.
    Forward forward(ad::Tape& t, const Tensor& mel, const std::vector<int>& token_ids,
                    const Tensor& initial_poses, const Tensor* emotion_override = nullptr) const;

    // Inference: encode audio, pick the emotion source per mode, prompt,
    // decode.  Throws StateError until the model is trained or loaded;
    // sampled mode additionally needs a trained VAE and an rng, and sampled /
    // onehot modes need a class label.
    Tensor generate(const Tensor& mel, const Tensor& initial_poses, EmotionMode mode,
                    int label = -1, Rng* rng = nullptr) const;

    void save_checkpoint(const std::string& path) const;
    static std::unique_ptr<GestureModel> load_checkpoint(const std::string& path);

    void mark_ready() { ready_ = true; }
    bool ready() const { return ready_; }

    const ModelConfig& config() const { return cfg_; }
    const audio::Vocabulary& vocab() const { return vocab_; }
    uint64_t seed() const { return seed_; }

    nn::ParamStore& generator_params() { return gen_ps_; }
    nn::ParamStore& discriminator_params() { return disc_ps_; }
    nn::ParamStore& vae_params() { return vae_ps_; }
    const nn::ParamStore& generator_params() const { return gen_ps_; }
    const nn::ParamStore& discriminator_params() const { return disc_ps_; }
    const nn::ParamStore& vae_params() const { return vae_ps_; }

    const ebm::AudioEncoder& audio_encoder() const { return audio_; }
    const stp::Prompter& prompter() const { return prompter_; }
    const gen::Decoder& decoder() const { return decoder_; }
    const gen::Discriminator& discriminator() const { return disc_; }
    vae::EmotionVAE& emotion_vae() { return vae_; }
    const vae::EmotionVAE& emotion_vae() const { return vae_; }

  private:
    GestureModel(const ModelConfig& cfg, const audio::Vocabulary& vocab, uint64_t seed, Rng grng,
                 Rng drng, Rng vrng);

    ModelConfig cfg_;
    audio::Vocabulary vocab_;
    uint64_t seed_ = 0;
    bool ready_ = false;

    nn::ParamStore gen_ps_, disc_ps_, vae_ps_;
    ebm::AudioEncoder audio_;
    nn::Embedding words_;
    stp::Prompter prompter_;
    gen::Decoder decoder_;
    gen::Discriminator disc_;
    vae::EmotionVAE vae_;
};

}  // namespace cogest::pipeline

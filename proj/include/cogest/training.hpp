#pragma once

#include <string>
#include <vector>

#include "cogest/dataset.hpp"
#include "cogest/losses.hpp"
#include "cogest/pipeline.hpp"

// Two-stage trainer.  The main stage alternates discriminator and generator
// updates over the train split with all five objective terms; the second stage
// freezes the backbone (verified by parameter checksums) and fits the emotion
// VAE on pooled emotion features.  Every random choice derives from the run
// seed, so equal seeds give equal histories and checkpoints.

namespace cogest::training {

struct TrainConfig {
    int epochs = 100;      // full-scale default; desk() shrinks this
    int batch_size = 128;
    double lr = 2e-4;
    uint64_t seed = 1;
    loss::LossWeights weights;  // strictly positive; disable terms via flags
    bool enable_adversarial = true;
    bool enable_beat = true;
    bool enable_emotion = true;
    bool enable_smooth = true;
    bool contrastive_include_positive = false;  // denominator variant of the beat loss
    bool onehot_emotion = false;                // condition on the lifted one-hot instead of F^E
    bool generator_literal_loss = false;        // literal minimax generator term
    double grad_clip = 5.0;                     // joint L2 cap; 0 disables
    int d_steps = 1;                            // discriminator updates per generator update

    // CPU-minutes profile: batch 16, 30 epochs.
    static TrainConfig desk();
    void validate() const;
};

struct LossRecord {
    int step = 0;  // generator step for the main stage, batch step for the VAE stage
    std::string name;
    double value = 0.0;
};

struct TrainResult {
    std::vector<LossRecord> history;
    std::string checkpoint_path;
};

// Vocabulary over the words of one split's transcripts (pad id included).
audio::Vocabulary build_vocabulary(const dataset::CorpusManifest& corpus,
                                   const std::string& split = "train");

// Adversarial main stage on the corpus train split.  Writes
// run_dir/checkpoint.ckpt after every epoch, run_dir/losses.csv, and
// run_dir/train_config.json.  Non-finite losses abort with the component and
// step named.
TrainResult train_main(pipeline::GestureModel& model, const dataset::CorpusManifest& corpus,
                       const TrainConfig& cfg, const std::string& run_dir);

// Frozen-backbone VAE stage.  Requires a trained (or loaded) model; verifies
// the generator and discriminator checksums are untouched, marks the VAE
// trained, and rewrites the checkpoint with the VAE weights included.  Loss
// log goes to run_dir/vae_losses.csv.
TrainResult train_vae_stage(pipeline::GestureModel& model, const dataset::CorpusManifest& corpus,
                            const TrainConfig& cfg, const std::string& run_dir);

// CSV with a "step,loss_name,value" header line.
void write_loss_csv(const std::string& path, const std::vector<LossRecord>& history);

}  // namespace cogest::training

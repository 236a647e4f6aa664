#pragma once

#include <string>
#include <vector>

#include "cogest/nn.hpp"

// Evaluation suite: coefficient-space L2, mean per-joint rotation error,
// Fréchet gesture distance over learned clip embeddings, beat alignment
// between audio onsets and gesture-speed minima, emotion accuracy via a
// gesture classifier, and pairwise diversity with a bootstrap interval.

namespace cogest::metrics {

struct MetricsReport {
    double l2 = 0.0;
    double mpjre_deg = 0.0;
    double fgd = 0.0;
    double ba = 0.0;
    double ea_percent = 0.0;
    double diversity_mean = 0.0;
    double diversity_ci95 = 0.0;
};

// Mean over frames of the Euclidean norm of the coefficient difference,
// normalized by √(pose width) so values compare across skeletons.
double l2_distance(const Tensor& real, const Tensor& fake);

// Mean geodesic angle between per-joint rotations, in degrees.  Pose width
// must be a multiple of 6.
double mpjre_degrees(const Tensor& real, const Tensor& fake);

// ‖μ₁−μ₂‖² + Tr(Σ₁+Σ₂−2(Σ₁Σ₂)^½) over embedding rows (n×Z, n ≥ 2 each);
// covariances are regularized by 1e−6·I.
double frechet_distance(const Tensor& a_feats, const Tensor& b_feats);

// Peak times (seconds) of positive spectral flux in a log-mel spectrogram;
// threshold = mean + k·std of the flux track.
std::vector<double> audio_onsets(const Tensor& mel, double k = 1.0);

// Local minima of joint-averaged angular speed that fall below the mean
// speed; returned as times in seconds (midpoints of the frame steps).
std::vector<double> gesture_beats(const Tensor& poses, double fps);

// Mean over audio beats of exp(−Δt²/(2σ²)) to the nearest gesture beat.
// No audio beats → 1; audio beats but no gesture beats → 0.
double beat_score(const std::vector<double>& audio_beats, const std::vector<double>& gesture_beats,
                  double sigma = 0.1);

struct BeatAlignResult {
    double score = 1.0;
    int n_audio = 0;
    int n_gesture = 0;
};
BeatAlignResult beat_align(const std::vector<double>& audio_beats, const Tensor& poses, double fps,
                           double sigma = 0.1);

struct DiversityResult {
    double mean = 0.0;
    double ci95 = 0.0;  // half-width from bootstrap resampling of the pair set
};
DiversityResult diversity(const std::vector<Tensor>& samples, uint64_t seed = 0, int resamples = 200);

// Clip autoencoder whose encoder provides the embedding space for the Fréchet
// metric.  Temporal convolutions pool each clip to one latent row.
struct AutoencoderConfig {
    int in_dim = 96;
    int channels = 16;
    int latent = 32;
};

class SequenceAutoencoder {
  public:
    SequenceAutoencoder(const AutoencoderConfig& cfg, uint64_t seed);

    ad::Var embed_var(ad::Tape& t, ad::Var seq) const;        // 1×latent
    ad::Var reconstruct(ad::Tape& t, ad::Var seq) const;      // same shape as seq
    Tensor embed(const Tensor& clip) const;                   // requires training
    // Mean reconstruction loss of the final epoch.
    double fit(const std::vector<Tensor>& clips, int epochs, double lr);
    Tensor embed_all(const std::vector<Tensor>& clips) const; // n×latent

    bool is_trained() const { return trained_; }
    void mark_trained() { trained_ = true; }
    nn::ParamStore& params() { return ps_; }
    const AutoencoderConfig& config() const { return cfg_; }

  private:
    AutoencoderConfig cfg_;
    bool trained_ = false;
    nn::ParamStore ps_;
    nn::Conv1d ec1_, ec2_;
    nn::Linear elat_, dlat_;
    nn::Conv1d dc1_, dc2_;
};

double fgd(const std::vector<Tensor>& real_clips, const std::vector<Tensor>& fake_clips,
           const SequenceAutoencoder& embedder);

// Emotion classifier over motion offsets; the reference for the emotion
// accuracy metric.
struct ClassifierConfig {
    int in_dim = 96;
    int channels = 16;
    int n_classes = 4;
};

class GestureClassifier {
  public:
    GestureClassifier(const ClassifierConfig& cfg, uint64_t seed);

    ad::Var logits(ad::Tape& t, ad::Var seq) const;  // 1×C
    // Per-sample cross-entropy training; returns mean loss of the final epoch.
    double fit(const std::vector<Tensor>& clips, const std::vector<int>& labels, int epochs, double lr);
    int predict(const Tensor& clip) const;  // requires training
    double accuracy_percent(const std::vector<Tensor>& clips, const std::vector<int>& labels) const;

    bool is_trained() const { return trained_; }
    void mark_trained() { trained_ = true; }
    nn::ParamStore& params() { return ps_; }
    const ClassifierConfig& config() const { return cfg_; }

  private:
    ClassifierConfig cfg_;
    bool trained_ = false;
    nn::ParamStore ps_;
    nn::Conv1d c1_, c2_;
    nn::Linear out_;
};

}  // namespace cogest::metrics

#include "cogest/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogest/audio.hpp"
#include "cogest/ebm.hpp"
#include "cogest/errors.hpp"
#include "cogest/motion.hpp"

namespace cogest::metrics {

using ad::Tape;
using ad::Var;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeError(std::string(who) + ": shapes must match");
}

motion::Rot6D joint_coeffs(const Tensor& p, int frame, int joint) {
    motion::Rot6D r;
    for (int i = 0; i < 6; ++i) r[static_cast<size_t>(i)] = p(frame, joint * 6 + i);
    return r;
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
    Eigen::MatrixXd m(t.rows, t.cols);
    for (int r = 0; r < t.rows; ++r)
        for (int c = 0; c < t.cols; ++c) m(r, c) = t(r, c);
    return m;
}

// Symmetric PSD square root via eigendecomposition, negative ulps clamped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double l2_distance(const Tensor& real, const Tensor& fake) {
    require_same_shape(real, fake, "l2_distance");
    const double norm = std::sqrt(static_cast<double>(real.cols));
    double acc = 0.0;
    for (int r = 0; r < real.rows; ++r) {
        double ss = 0.0;
        for (int c = 0; c < real.cols; ++c) {
            const double d = real(r, c) - fake(r, c);
            ss += d * d;
        }
        acc += std::sqrt(ss) / norm;
    }
    return acc / static_cast<double>(real.rows);
}

double mpjre_degrees(const Tensor& real, const Tensor& fake) {
    require_same_shape(real, fake, "mpjre");
    if (real.cols % 6 != 0) throw ShapeError("mpjre: pose width must be a multiple of 6");
    const int joints = real.cols / 6;
    double acc = 0.0;
    for (int r = 0; r < real.rows; ++r) {
        for (int j = 0; j < joints; ++j) {
            const auto ra = motion::rot6d_to_matrix(joint_coeffs(real, r, j));
            const auto rb = motion::rot6d_to_matrix(joint_coeffs(fake, r, j));
            acc += motion::geodesic_angle(ra, rb);
        }
    }
    return acc / static_cast<double>(real.rows * joints) * (180.0 / M_PI);
}

double frechet_distance(const Tensor& a_feats, const Tensor& b_feats) {
    if (a_feats.cols != b_feats.cols) throw ShapeError("frechet_distance: feature widths must match");
    if (a_feats.rows < 2 || b_feats.rows < 2)
        throw ValidationError("frechet_distance: need at least two samples per set");
    const int z = a_feats.cols;

    auto stats = [&](const Tensor& t, Eigen::VectorXd& mu, Eigen::MatrixXd& sigma) {
        Eigen::MatrixXd x = to_eigen(t);
        mu = x.colwise().mean();
        Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
        sigma = centered.transpose() * centered / static_cast<double>(t.rows - 1);
        sigma += 1e-6 * Eigen::MatrixXd::Identity(z, z);
    };
    Eigen::VectorXd mu1, mu2;
    Eigen::MatrixXd s1, s2;
    stats(a_feats, mu1, s1);
    stats(b_feats, mu2, s2);

    const double mean_term = (mu1 - mu2).squaredNorm();
    // Tr((Σ₁Σ₂)^½) computed symmetrically as Tr((Σ₁^½ Σ₂ Σ₁^½)^½).
    Eigen::MatrixXd root1 = psd_sqrt(s1);
    Eigen::MatrixXd inner = root1 * s2 * root1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()));
    double cross = 0.0;
    for (int i = 0; i < z; ++i) cross += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
    return mean_term + s1.trace() + s2.trace() - 2.0 * cross;
}

std::vector<double> audio_onsets(const Tensor& mel, double k) {
    const int frames = mel.cols;
    std::vector<double> flux(static_cast<size_t>(frames), 0.0);
    for (int t = 1; t < frames; ++t) {
        double f = 0.0;
        for (int b = 0; b < mel.rows; ++b) f += std::max(0.0, mel(b, t) - mel(b, t - 1));
        flux[static_cast<size_t>(t)] = f;
    }
    if (frames < 3) return {};
    double mean = 0.0;
    for (int t = 1; t < frames; ++t) mean += flux[static_cast<size_t>(t)];
    mean /= static_cast<double>(frames - 1);
    double var = 0.0;
    for (int t = 1; t < frames; ++t) {
        const double d = flux[static_cast<size_t>(t)] - mean;
        var += d * d;
    }
    const double thresh = mean + k * std::sqrt(var / static_cast<double>(frames - 1));

    std::vector<double> times;
    const double dt = static_cast<double>(audio::kHop) / static_cast<double>(audio::kSampleRate);
    for (int t = 1; t + 1 < frames; ++t) {
        const double f = flux[static_cast<size_t>(t)];
        if (f > thresh && f >= flux[static_cast<size_t>(t - 1)] && f > flux[static_cast<size_t>(t + 1)])
            times.push_back(t * dt);
    }
    return times;
}

std::vector<double> gesture_beats(const Tensor& poses, double fps) {
    if (poses.cols % 6 != 0) throw ShapeError("gesture_beats: pose width must be a multiple of 6");
    if (fps <= 0.0) throw ValidationError("gesture_beats: fps must be positive");
    const int joints = poses.cols / 6;
    const int steps = poses.rows - 1;
    if (steps < 3) return {};

    std::vector<double> speed(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        double s = 0.0;
        for (int j = 0; j < joints; ++j) {
            const auto ra = motion::rot6d_to_matrix(joint_coeffs(poses, i, j));
            const auto rb = motion::rot6d_to_matrix(joint_coeffs(poses, i + 1, j));
            s += motion::geodesic_angle(ra, rb);
        }
        speed[static_cast<size_t>(i)] = s / static_cast<double>(joints) * fps;
    }
    const double mean = std::accumulate(speed.begin(), speed.end(), 0.0) / static_cast<double>(steps);

    std::vector<double> times;
    for (int i = 1; i + 1 < steps; ++i) {
        const double s = speed[static_cast<size_t>(i)];
        if (s < speed[static_cast<size_t>(i - 1)] && s <= speed[static_cast<size_t>(i + 1)] && s <= mean)
            times.push_back((i + 0.5) / fps);
    }
    return times;
}

double beat_score(const std::vector<double>& audio_beats, const std::vector<double>& gesture_beats,
                  double sigma) {
    if (sigma <= 0.0) throw ValidationError("beat_score: sigma must be positive");
    if (audio_beats.empty()) return 1.0;
    if (gesture_beats.empty()) return 0.0;
    double acc = 0.0;
    for (double ta : audio_beats) {
        double best = 1e300;
        for (double tg : gesture_beats) best = std::min(best, (ta - tg) * (ta - tg));
        acc += std::exp(-best / (2.0 * sigma * sigma));
    }
    return acc / static_cast<double>(audio_beats.size());
}

BeatAlignResult beat_align(const std::vector<double>& audio_beats, const Tensor& poses, double fps,
                           double sigma) {
    BeatAlignResult out;
    const auto gests = gesture_beats(poses, fps);
    out.n_audio = static_cast<int>(audio_beats.size());
    out.n_gesture = static_cast<int>(gests.size());
    out.score = beat_score(audio_beats, gests, sigma);
    return out;
}

DiversityResult diversity(const std::vector<Tensor>& samples, uint64_t seed, int resamples) {
    if (samples.size() < 2) throw ValidationError("diversity: need at least two samples");
    std::vector<double> dists;
    for (size_t i = 0; i < samples.size(); ++i)
        for (size_t j = i + 1; j < samples.size(); ++j)
            dists.push_back(l2_distance(samples[i], samples[j]));

    DiversityResult out;
    out.mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());

    // Bootstrap the pair set; the half-width is 1.96 × the std of the means.
    Rng rng(Rng::derive(seed, 0xD1Dull));
    double acc = 0.0, acc2 = 0.0;
    for (int r = 0; r < resamples; ++r) {
        double m = 0.0;
        for (size_t n = 0; n < dists.size(); ++n)
            m += dists[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(dists.size()) - 1))];
        m /= static_cast<double>(dists.size());
        acc += m;
        acc2 += m * m;
    }
    const double mean_b = acc / resamples;
    out.ci95 = 1.96 * std::sqrt(std::max(0.0, acc2 / resamples - mean_b * mean_b));
    return out;
}

SequenceAutoencoder::SequenceAutoencoder(const AutoencoderConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(Rng::derive(seed, 0xAEull));
    ec1_ = nn::Conv1d(ps_, "ae.ec1", cfg.in_dim, cfg.channels, 3, rng);
    ec2_ = nn::Conv1d(ps_, "ae.ec2", cfg.channels, cfg.channels, 3, rng);
    elat_ = nn::Linear(ps_, "ae.elat", cfg.channels, cfg.latent, rng);
    dlat_ = nn::Linear(ps_, "ae.dlat", cfg.latent, cfg.channels, rng);
    dc1_ = nn::Conv1d(ps_, "ae.dc1", cfg.channels, cfg.channels, 3, rng);
    dc2_ = nn::Conv1d(ps_, "ae.dc2", cfg.channels, cfg.in_dim, 3, rng);
}

Var SequenceAutoencoder::embed_var(Tape& t, Var seq) const {
    if (seq.cols() != cfg_.in_dim) throw ShapeError("autoencoder: pose width mismatch");
    Var h = t.relu(ec1_(t, seq));
    h = t.relu(ec2_(t, h));
    return elat_(t, t.mean_rows(h));
}

Var SequenceAutoencoder::reconstruct(Tape& t, Var seq) const {
    Var lat = embed_var(t, seq);
    Var h = t.relu(dlat_(t, lat));
    Var track = t.repeat_rows(h, seq.rows());
    return dc2_(t, t.relu(dc1_(t, track)));
}

Tensor SequenceAutoencoder::embed(const Tensor& clip) const {
    if (!trained_) throw StateError("autoencoder: embedding requires a trained model");
    Tape t;
    return embed_var(t, t.input(clip)).val();
}

double SequenceAutoencoder::fit(const std::vector<Tensor>& clips, int epochs, double lr) {
    if (clips.empty()) throw ValidationError("autoencoder: no training clips");
    nn::Adam opt(lr);
    double last = 0.0;
    for (int e = 0; e < epochs; ++e) {
        last = 0.0;
        for (const Tensor& clip : clips) {
            Tape t;
            Var x = t.input(clip);
            Var loss = t.mean(t.square(t.sub(reconstruct(t, x), x)));
            ps_.zero_grads();
            t.backward(loss);
            opt.step(ps_.all());
            last += loss.val()(0, 0);
        }
        last /= static_cast<double>(clips.size());
    }
    trained_ = true;
    return last;
}

Tensor SequenceAutoencoder::embed_all(const std::vector<Tensor>& clips) const {
    if (clips.empty()) throw ValidationError("autoencoder: no clips to embed");
    Tensor out(static_cast<int>(clips.size()), cfg_.latent);
    for (size_t i = 0; i < clips.size(); ++i) {
        Tensor e = embed(clips[i]);
        for (int c = 0; c < cfg_.latent; ++c) out(static_cast<int>(i), c) = e(0, c);
    }
    return out;
}

double fgd(const std::vector<Tensor>& real_clips, const std::vector<Tensor>& fake_clips,
           const SequenceAutoencoder& embedder) {
    return frechet_distance(embedder.embed_all(real_clips), embedder.embed_all(fake_clips));
}

GestureClassifier::GestureClassifier(const ClassifierConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(Rng::derive(seed, 0xC1ull));
    c1_ = nn::Conv1d(ps_, "clf.c1", cfg.in_dim, cfg.channels, 3, rng);
    c2_ = nn::Conv1d(ps_, "clf.c2", cfg.channels, cfg.channels, 3, rng);
    out_ = nn::Linear(ps_, "clf.out", cfg.channels, cfg.n_classes, rng);
}

Var GestureClassifier::logits(Tape& t, Var seq) const {
    if (seq.cols() != cfg_.in_dim) throw ShapeError("classifier: pose width mismatch");
    Var x = t.row_diff_padded(seq);
    Var h = t.relu(c1_(t, x));
    h = t.relu(c2_(t, h));
    return out_(t, t.mean_rows(h));
}

double GestureClassifier::fit(const std::vector<Tensor>& clips, const std::vector<int>& labels, int epochs,
                              double lr) {
    if (clips.size() != labels.size() || clips.empty())
        throw ValidationError("classifier: clips and labels must align and be non-empty");
    nn::Adam opt(lr);
    std::vector<size_t> order(clips.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::derive(0xC1ull, 1));
    double last = 0.0;
    for (int e = 0; e < epochs; ++e) {
        shuffle_rng.shuffle(order);
        last = 0.0;
        for (size_t idx : order) {
            Tape t;
            Var loss = ebm::emotion_ce_loss(t, logits(t, t.input(clips[idx])), labels[idx]);
            ps_.zero_grads();
            t.backward(loss);
            opt.step(ps_.all());
            last += loss.val()(0, 0);
        }
        last /= static_cast<double>(clips.size());
    }
    trained_ = true;
    return last;
}

int GestureClassifier::predict(const Tensor& clip) const {
    if (!trained_) throw StateError("classifier: prediction requires a trained model");
    Tape t;
    const Tensor& lg = logits(t, t.input(clip)).val();
    int best = 0;
    for (int c = 1; c < lg.cols; ++c)
        if (lg(0, c) > lg(0, best)) best = c;
    return best;
}

double GestureClassifier::accuracy_percent(const std::vector<Tensor>& clips,
                                           const std::vector<int>& labels) const {
    if (clips.size() != labels.size() || clips.empty())
        throw ValidationError("classifier: clips and labels must align and be non-empty");
    int hits = 0;
    for (size_t i = 0; i < clips.size(); ++i)
        if (predict(clips[i]) == labels[i]) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(clips.size());
}

}  // namespace cogest::metrics

#include "cogest/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "cogest/ebm.hpp"
#include "cogest/errors.hpp"
#include "cogest/motion.hpp"
#include "json.hpp"

namespace cogest::training {

namespace fs = std::filesystem;

TrainConfig TrainConfig::desk() {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    return cfg;
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1 || d_steps < 1)
        throw ValidationError("train config: epochs, batch size, and d steps must be positive");
    if (lr <= 0.0 || grad_clip < 0.0)
        throw ValidationError("train config: lr must be positive and grad clip non-negative");
    weights.validate();
}

audio::Vocabulary build_vocabulary(const dataset::CorpusManifest& corpus, const std::string& split) {
    audio::Vocabulary vocab;
    for (const dataset::ClipRecord& rec : corpus.clips) {
        if (rec.split != split) continue;
        const auto words = audio::load_transcript_words(
            (fs::path(corpus.root) / rec.transcript_path).string());
        for (const audio::WordSpan& w : words) vocab.add(w.word);
    }
    return vocab;
}

namespace {

// Everything the step loop needs per clip, loaded and featurized once.
struct ClipCache {
    Tensor mel;
    Tensor poses;         // N×(J·6)
    Tensor real_offsets;  // (N−1)×(J·6)
    Tensor initial;       // M×(J·6)
    std::vector<int> token_ids;
    std::vector<int> uttered;
    int label = 0;
};

std::vector<ClipCache> load_split(const pipeline::GestureModel& model,
                                  const dataset::CorpusManifest& corpus,
                                  const std::string& split) {
    const auto& cfg = model.config();
    audio::Vocabulary vocab = model.vocab();  // local copy; lookups only
    std::vector<ClipCache> out;
    for (int idx : corpus.split_indices(split)) {
        const auto loaded = dataset::load_clip(corpus, corpus.clips[static_cast<size_t>(idx)]);
        ClipCache c;
        c.mel = audio::compute_mel(loaded.audio);
        c.poses = loaded.pose.frames;
        c.real_offsets = motion::motion_offsets(loaded.pose.frames);
        c.initial = Tensor(cfg.m_initial, cfg.pose_dim());
        for (int r = 0; r < cfg.m_initial; ++r)
            for (int col = 0; col < cfg.pose_dim(); ++col) c.initial(r, col) = loaded.pose.frames(r, col);
        const audio::Transcript tr =
            audio::align_transcript(loaded.words, cfg.n_frames, corpus.fps, vocab, false);
        c.token_ids = tr.ids;
        c.uttered = tr.uttered_frames();
        c.label = loaded.emotion;
        out.push_back(std::move(c));
    }
    return out;
}

void check_model_matches_corpus(const pipeline::GestureModel& model,
                                const dataset::CorpusManifest& corpus) {
    const auto& cfg = model.config();
    if (cfg.n_frames != corpus.n_frames)
        throw ValidationError("training: model expects " + std::to_string(cfg.n_frames) +
                              " frames, corpus clips have " + std::to_string(corpus.n_frames));
    if (cfg.pose_dim() != corpus.n_joints * 6)
        throw ValidationError("training: model pose width " + std::to_string(cfg.pose_dim()) +
                              " does not match corpus " + std::to_string(corpus.n_joints * 6));
    if (cfg.n_classes != static_cast<int>(corpus.emotions.size()))
        throw ValidationError("training: model has " + std::to_string(cfg.n_classes) +
                              " classes, corpus has " + std::to_string(corpus.emotions.size()));
}

double checked(double value, const char* name, int step) {
    if (!std::isfinite(value))
        throw StateError("training: non-finite " + std::string(name) + " at step " +
                         std::to_string(step));
    return value;
}

ad::Var zero_node(ad::Tape& t) { return t.input(Tensor(1, 1)); }

void write_config_snapshot(const std::string& path, const TrainConfig& cfg,
                           const pipeline::GestureModel& model, size_t n_train) {
    nlohmann::json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["seed"] = cfg.seed;
    j["weights"] = {{"lambda_r", cfg.weights.lambda_r}, {"lambda_b", cfg.weights.lambda_b},
                    {"lambda_e", cfg.weights.lambda_e}, {"lambda_s", cfg.weights.lambda_s},
                    {"gamma", cfg.weights.gamma},       {"tau", cfg.weights.tau}};
    j["flags"] = {{"adversarial", cfg.enable_adversarial},
                  {"beat", cfg.enable_beat},
                  {"emotion", cfg.enable_emotion},
                  {"smooth", cfg.enable_smooth},
                  {"contrastive_include_positive", cfg.contrastive_include_positive},
                  {"onehot_emotion", cfg.onehot_emotion},
                  {"generator_literal_loss", cfg.generator_literal_loss}};
    j["grad_clip"] = cfg.grad_clip;
    j["d_steps"] = cfg.d_steps;
    j["model"] = {{"d_model", model.config().d_model},
                  {"n_frames", model.config().n_frames},
                  {"prompt_mode", stp::to_string(model.config().prompt_mode)}};
    j["n_train_clips"] = n_train;
    std::ofstream out(path);
    if (!out) throw IoError("training: cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

void write_loss_csv(const std::string& path, const std::vector<LossRecord>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("training: cannot write " + path);
    out << "step,loss_name,value\n" << std::setprecision(17);
    for (const LossRecord& rec : history) out << rec.step << ',' << rec.name << ',' << rec.value << '\n';
}

TrainResult train_main(pipeline::GestureModel& model, const dataset::CorpusManifest& corpus,
                       const TrainConfig& cfg, const std::string& run_dir) {
    cfg.validate();
    corpus.validate();
    check_model_matches_corpus(model, corpus);
    fs::create_directories(run_dir);

    const std::vector<ClipCache> clips = load_split(model, corpus, "train");
    if (clips.empty()) throw ValidationError("training: corpus has no train clips");
    write_config_snapshot((fs::path(run_dir) / "train_config.json").string(), cfg, model,
                          clips.size());

    const auto& mc = model.config();
    std::vector<Tensor> onehot;  // lifted codes reused across steps in the ablation
    if (cfg.onehot_emotion)
        for (int e = 0; e < mc.n_classes; ++e)
            onehot.push_back(pipeline::onehot_feature(e, mc.n_classes, mc.d_model));

    nn::Adam g_opt(cfg.lr), d_opt(cfg.lr);
    const auto& gen_params = model.generator_params().all();
    const auto& disc_params = model.discriminator_params().all();

    TrainResult result;
    result.checkpoint_path = (fs::path(run_dir) / "checkpoint.ckpt").string();
    const std::string csv_path = (fs::path(run_dir) / "losses.csv").string();
    int g_step = 0;

    std::vector<int> order(clips.size());
    for (size_t i = 0; i < clips.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng erng(Rng::derive(cfg.seed, 0xE90000ULL + static_cast<uint64_t>(epoch)));
        erng.shuffle(order);

        for (size_t batch_lo = 0; batch_lo < order.size(); batch_lo += static_cast<size_t>(cfg.batch_size)) {
            const size_t batch_hi = std::min(order.size(), batch_lo + static_cast<size_t>(cfg.batch_size));
            const double inv_n = 1.0 / static_cast<double>(batch_hi - batch_lo);
            double d_value = 0.0;

            if (cfg.enable_adversarial) {
                // Detached generator outputs: values only, no generator graph.
                std::vector<Tensor> fakes;
                for (size_t bi = batch_lo; bi < batch_hi; ++bi) {
                    const ClipCache& c = clips[static_cast<size_t>(order[bi])];
                    ad::Tape ft;
                    const Tensor* ov = cfg.onehot_emotion ? &onehot[static_cast<size_t>(c.label)] : nullptr;
                    fakes.push_back(model.forward(ft, c.mel, {}, c.initial, ov).poses.val());
                }
                for (int ds = 0; ds < cfg.d_steps; ++ds) {
                    model.discriminator_params().zero_grads();
                    ad::Tape dt;
                    ad::Var d_sum = zero_node(dt);
                    for (size_t bi = batch_lo; bi < batch_hi; ++bi) {
                        const ClipCache& c = clips[static_cast<size_t>(order[bi])];
                        const ad::Var lr_ = model.discriminator().logit(dt, dt.input(c.poses));
                        const ad::Var lf = model.discriminator().logit(dt, dt.input(fakes[bi - batch_lo]));
                        d_sum = dt.add(d_sum, loss::d_loss_from_logits(dt, lr_, lf));
                    }
                    const ad::Var d_loss = dt.scale(d_sum, inv_n);
                    dt.backward(d_loss);
                    if (cfg.grad_clip > 0.0) nn::clip_grad_norm(disc_params, cfg.grad_clip);
                    d_opt.step(disc_params);
                    d_value = checked(d_loss.val()(0, 0), "d", g_step);
                }
            }

            model.generator_params().zero_grads();
            ad::Tape t;
            ad::Var rec_sum = zero_node(t), adv_sum = zero_node(t), beat_sum = zero_node(t);
            ad::Var emo_sum = zero_node(t), smooth_sum = zero_node(t);
            for (size_t bi = batch_lo; bi < batch_hi; ++bi) {
                const ClipCache& c = clips[static_cast<size_t>(order[bi])];
                const Tensor* ov = cfg.onehot_emotion ? &onehot[static_cast<size_t>(c.label)] : nullptr;
                const auto fwd = model.forward(t, c.mel, cfg.enable_beat ? c.token_ids : std::vector<int>{},
                                               c.initial, ov);
                rec_sum = t.add(rec_sum, loss::reconstruction_loss(t, t.input(c.poses), fwd.poses));
                if (cfg.enable_adversarial) {
                    const ad::Var lf = model.discriminator().logit(t, fwd.poses);
                    adv_sum = t.add(adv_sum,
                                    loss::g_loss_from_logits(t, lf, !cfg.generator_literal_loss));
                }
                if (cfg.enable_beat)
                    beat_sum = t.add(beat_sum, ebm::beat_contrastive_loss(
                                                   t, fwd.transcript, fwd.beat, c.uttered,
                                                   cfg.weights.tau, cfg.contrastive_include_positive));
                if (cfg.enable_emotion)
                    emo_sum = t.add(emo_sum, ebm::emotion_ce_loss(t, fwd.logits, c.label));
                if (cfg.enable_smooth) {
                    const ad::Var fake_offsets =
                        t.slice_rows(t.row_diff_padded(fwd.poses), 1, mc.n_frames);
                    smooth_sum = t.add(smooth_sum, loss::motion_smooth_loss(t, t.input(c.real_offsets),
                                                                            fake_offsets,
                                                                            cfg.weights.gamma));
                }
            }
            const ad::Var rec = t.scale(rec_sum, inv_n);
            const ad::Var adv = t.scale(adv_sum, inv_n);
            const ad::Var beat = t.scale(beat_sum, inv_n);
            const ad::Var emo = t.scale(emo_sum, inv_n);
            const ad::Var smooth = t.scale(smooth_sum, inv_n);
            const ad::Var total = loss::total_objective(t, rec, adv, beat, emo, smooth, cfg.weights);
            t.backward(total);
            if (cfg.grad_clip > 0.0) nn::clip_grad_norm(gen_params, cfg.grad_clip);
            g_opt.step(gen_params);

            result.history.push_back({g_step, "total", checked(total.val()(0, 0), "total", g_step)});
            result.history.push_back({g_step, "rec", checked(rec.val()(0, 0), "rec", g_step)});
            result.history.push_back({g_step, "adv", checked(adv.val()(0, 0), "adv", g_step)});
            result.history.push_back({g_step, "d", d_value});
            result.history.push_back({g_step, "beat", checked(beat.val()(0, 0), "beat", g_step)});
            result.history.push_back({g_step, "emo", checked(emo.val()(0, 0), "emo", g_step)});
            result.history.push_back({g_step, "smooth", checked(smooth.val()(0, 0), "smooth", g_step)});
            ++g_step;
        }

        model.mark_ready();
        model.save_checkpoint(result.checkpoint_path);
        write_loss_csv(csv_path, result.history);
    }
    return result;
}

TrainResult train_vae_stage(pipeline::GestureModel& model, const dataset::CorpusManifest& corpus,
                            const TrainConfig& cfg, const std::string& run_dir) {
    cfg.validate();
    corpus.validate();
    check_model_matches_corpus(model, corpus);
    if (!model.ready()) throw StateError("vae stage: main training has not produced a model");
    fs::create_directories(run_dir);

    const uint64_t gen_sum = model.generator_params().checksum();
    const uint64_t disc_sum = model.discriminator_params().checksum();

    // Pooled emotion features from the frozen backbone, extracted once.
    const std::vector<ClipCache> clips = load_split(model, corpus, "train");
    if (clips.empty()) throw ValidationError("vae stage: corpus has no train clips");
    std::vector<Tensor> features;
    std::vector<int> labels;
    for (const ClipCache& c : clips) {
        ad::Tape t;
        features.push_back(model.audio_encoder().forward(t, c.mel, model.config().n_frames).emotion.val());
        labels.push_back(c.label);
    }

    nn::Adam opt(cfg.lr);
    const auto& vae_params = model.vae_params().all();
    const int latent = model.config().vae_latent;
    Rng noise(Rng::derive(cfg.seed, 0xEB5ULL));

    TrainResult result;
    result.checkpoint_path = (fs::path(run_dir) / "checkpoint.ckpt").string();
    int step = 0;
    std::vector<int> order(features.size());
    for (size_t i = 0; i < features.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng erng(Rng::derive(cfg.seed, 0xEA0000ULL + static_cast<uint64_t>(epoch)));
        erng.shuffle(order);
        for (size_t lo = 0; lo < order.size(); lo += static_cast<size_t>(cfg.batch_size)) {
            const size_t hi = std::min(order.size(), lo + static_cast<size_t>(cfg.batch_size));
            model.vae_params().zero_grads();
            ad::Tape t;
            ad::Var sum = zero_node(t);
            for (size_t bi = lo; bi < hi; ++bi) {
                const size_t i = static_cast<size_t>(order[bi]);
                Tensor eps(1, latent);
                for (double& x : eps.v) x = noise.normal();
                const ad::Var feat = t.input(features[i]);
                const auto out = model.emotion_vae().forward(t, feat, labels[i], eps);
                sum = t.add(sum, model.emotion_vae().loss(t, out, feat));
            }
            const ad::Var loss_mean = t.scale(sum, 1.0 / static_cast<double>(hi - lo));
            t.backward(loss_mean);
            if (cfg.grad_clip > 0.0) nn::clip_grad_norm(vae_params, cfg.grad_clip);
            opt.step(vae_params);
            result.history.push_back({step, "vae", checked(loss_mean.val()(0, 0), "vae", step)});
            ++step;
        }
    }

    if (model.generator_params().checksum() != gen_sum ||
        model.discriminator_params().checksum() != disc_sum)
        throw StateError("vae stage: backbone parameters changed while frozen");
    model.emotion_vae().mark_trained();
    model.save_checkpoint(result.checkpoint_path);
    write_loss_csv((fs::path(run_dir) / "vae_losses.csv").string(), result.history);
    return result;
}

}  // namespace cogest::training

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <vector>

#include "CLI11.hpp"
#include "cogest/config.hpp"
#include "cogest/dataset.hpp"
#include "cogest/errors.hpp"
#include "cogest/metrics.hpp"
#include "cogest/motion.hpp"
#include "cogest/pipeline.hpp"
#include "cogest/plot.hpp"
#include "cogest/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cogest;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

dataset::CorpusManifest open_corpus(const std::string& dir) {
    if (dir.empty()) throw ValidationError("a corpus directory is required (--corpus or config)");
    const fs::path manifest = fs::path(dir) / "manifest.json";
    if (!fs::exists(manifest)) throw IoError("missing corpus manifest " + manifest.string());
    return dataset::load_manifest(manifest.string());
}

std::unique_ptr<pipeline::GestureModel> open_model(const std::string& path) {
    if (path.empty()) throw ValidationError("a checkpoint path is required (--checkpoint)");
    if (!fs::exists(path)) throw IoError("missing checkpoint " + path);
    return pipeline::GestureModel::load_checkpoint(path);
}

void check_model_corpus(const pipeline::GestureModel& model, const dataset::CorpusManifest& m) {
    if (model.config().n_frames != m.n_frames || model.config().pose_dim() != m.n_joints * 6 ||
        model.config().n_classes != static_cast<int>(m.emotions.size()))
        throw ValidationError("checkpoint model shape does not match the corpus (frames " +
                              std::to_string(model.config().n_frames) + " vs " +
                              std::to_string(m.n_frames) + ", joints " +
                              std::to_string(model.config().n_joints) + " vs " +
                              std::to_string(m.n_joints) + ")");
}

int emotion_index(const dataset::CorpusManifest& m, const std::string& name) {
    for (size_t e = 0; e < m.emotions.size(); ++e)
        if (m.emotions[e] == name) return static_cast<int>(e);
    std::string known;
    for (const auto& e : m.emotions) known += (known.empty() ? "" : ", ") + e;
    throw ValidationError("unknown emotion '" + name + "' (corpus has: " + known + ")");
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
    std::string out;
    dataset::SynthConfig synth;
    uint64_t seed = 1;
    std::string skew = "uniform";
    bool force = false;
};

void cmd_prepare(const PrepareArgs& a) {
    if (a.skew != "uniform" && a.skew != "skewed")
        throw ValidationError("--emotion-skew must be 'uniform' or 'skewed'");
    if (a.out.empty()) throw ValidationError("an output directory is required (--out)");
    if (fs::exists(a.out) && fs::is_directory(a.out) && !fs::is_empty(a.out) && !a.force)
        throw ValidationError("output directory " + a.out + " is not empty; pass --force to reuse it");

    dataset::SynthConfig cfg = a.synth;
    cfg.skewed_labels = (a.skew == "skewed");
    const auto m = dataset::generate_synthetic_corpus(a.out, cfg, a.seed);

    std::printf("corpus: %zu clips in %s\n", m.clips.size(), a.out.c_str());
    std::printf("%-8s", "split");
    for (const auto& e : m.emotions) std::printf("%10s", e.c_str());
    std::printf("%10s\n", "total");
    for (const char* split : {"train", "val", "test"}) {
        std::vector<int> counts(m.emotions.size(), 0);
        int total = 0;
        for (const auto& rec : m.clips)
            if (rec.split == split) {
                ++counts[static_cast<size_t>(rec.emotion)];
                ++total;
            }
        std::printf("%-8s", split);
        for (int c : counts) std::printf("%10d", c);
        std::printf("%10d\n", total);
    }
}

// ------------------------------------------------------------------ train

// Flags that override values from --config.  Only options the user actually
// passed are applied, so file values survive unless overridden.
struct TrainArgs {
    std::string config_path, corpus, out;
    int epochs = 0, batch = 0, d_steps = 0;
    double lr = 0.0, grad_clip = 0.0;
    uint64_t seed = 0;
    std::string prompt_mode;
    bool no_adversarial = false, no_beat = false, no_emotion = false, no_smooth = false;
    bool onehot = false;
};

// True when the user actually passed a flag the subcommand registers.
bool provided(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

config::RunConfig merge_train_config(const TrainArgs& a, const CLI::App* cmd,
                                     const char* out_flag) {
    config::RunConfig rc =
        a.config_path.empty() ? config::RunConfig{} : config::load_run_config(a.config_path);
    if (provided(cmd, "--corpus")) rc.corpus = a.corpus;
    if (provided(cmd, out_flag)) rc.out = a.out;
    if (provided(cmd, "--epochs")) rc.train.epochs = a.epochs;
    if (provided(cmd, "--batch")) rc.train.batch_size = a.batch;
    if (provided(cmd, "--lr")) rc.train.lr = a.lr;
    if (provided(cmd, "--seed")) rc.train.seed = a.seed;
    if (provided(cmd, "--grad-clip")) rc.train.grad_clip = a.grad_clip;
    if (provided(cmd, "--d-steps")) rc.train.d_steps = a.d_steps;
    if (provided(cmd, "--prompt-mode"))
        rc.model.prompt_mode = stp::prompt_mode_from_string(a.prompt_mode);
    if (a.no_adversarial) rc.train.enable_adversarial = false;
    if (a.no_beat) rc.train.enable_beat = false;
    if (a.no_emotion) rc.train.enable_emotion = false;
    if (a.no_smooth) rc.train.enable_smooth = false;
    if (a.onehot) rc.train.onehot_emotion = true;
    return rc;
}

void print_final_losses(const training::TrainResult& res) {
    if (res.history.empty()) return;
    const int last = res.history.back().step;
    std::printf("final losses:");
    for (const auto& rec : res.history)
        if (rec.step == last) std::printf(" %s=%.4g", rec.name.c_str(), rec.value);
    std::printf("\n");
}

void cmd_train(const TrainArgs& a, const CLI::App* cmd) {
    config::RunConfig rc = merge_train_config(a, cmd, "--out");
    rc.validate();
    if (rc.out.empty()) throw ValidationError("a run directory is required (--out)");
    const auto corpus = open_corpus(rc.corpus);
    const auto vocab = training::build_vocabulary(corpus);
    pipeline::GestureModel model(rc.model, vocab, rc.train.seed);
    const size_t n_train = corpus.split_indices("train").size();
    std::printf("training on %zu clips for %d epochs (batch %d)\n", n_train, rc.train.epochs,
                rc.train.batch_size);
    const auto res = training::train_main(model, corpus, rc.train, rc.out);
    print_final_losses(res);
    std::printf("checkpoint: %s\n", res.checkpoint_path.c_str());
}

void cmd_train_vae(const TrainArgs& a, const CLI::App* cmd) {
    config::RunConfig rc = merge_train_config(a, cmd, "--run");
    rc.validate();
    if (rc.out.empty()) throw ValidationError("a run directory is required (--run)");
    const auto corpus = open_corpus(rc.corpus);
    const std::string ckpt = (fs::path(rc.out) / "checkpoint.ckpt").string();
    if (!fs::exists(ckpt)) throw IoError("missing checkpoint " + ckpt + " (run train first)");
    auto model = pipeline::GestureModel::load_checkpoint(ckpt);
    const auto res = training::train_vae_stage(*model, corpus, rc.train, rc.out);
    print_final_losses(res);
    std::printf("checkpoint updated: %s\n", res.checkpoint_path.c_str());
}

// --------------------------------------------------------------- generate

struct GenerateArgs {
    std::string config_path, corpus, checkpoint, out, split, mode, label, clip;
    int samples = 0;
    uint64_t seed = 0;
    bool svg = false;
};

void cmd_generate(const GenerateArgs& a, const CLI::App* cmd) {
    config::RunConfig rc =
        a.config_path.empty() ? config::RunConfig{} : config::load_run_config(a.config_path);
    if (cmd->count("--corpus")) rc.corpus = a.corpus;
    if (cmd->count("--out")) rc.out = a.out;
    if (cmd->count("--split")) rc.split = a.split;
    if (cmd->count("--mode")) rc.mode = a.mode;
    if (cmd->count("--label")) rc.label = a.label;
    if (cmd->count("--samples")) rc.samples = a.samples;
    if (a.svg) rc.svg = true;
    rc.validate();
    if (rc.out.empty()) throw ValidationError("an output directory is required (--out)");

    const auto corpus = open_corpus(rc.corpus);
    const auto model = open_model(a.checkpoint);
    check_model_corpus(*model, corpus);
    const auto mode = pipeline::emotion_mode_from_string(rc.mode);
    const int label_override = rc.label.empty() ? -1 : emotion_index(corpus, rc.label);
    if (rc.svg && corpus.n_joints != 16)
        throw ValidationError("stick-figure rendering supports the 16-joint skeleton only");

    std::vector<int> selected;
    if (!a.clip.empty()) {
        for (size_t i = 0; i < corpus.clips.size(); ++i)
            if (corpus.clips[i].id == a.clip) selected.push_back(static_cast<int>(i));
        if (selected.empty())
            throw ValidationError("clip '" + a.clip + "' is not in the corpus manifest");
    } else {
        selected = corpus.split_indices(rc.split);
    }

    fs::create_directories(rc.out);
    const auto skeleton = motion::SkeletonSpec::upper_body_16();
    int written = 0;
    for (int idx : selected) {
        const auto& rec = corpus.clips[static_cast<size_t>(idx)];
        const auto loaded = dataset::load_clip(corpus, rec);
        const Tensor mel = audio::compute_mel(loaded.audio);
        Tensor initial(model->config().m_initial, model->config().pose_dim());
        for (int r = 0; r < initial.rows; ++r)
            for (int c = 0; c < initial.cols; ++c) initial(r, c) = loaded.pose.frames(r, c);
        const int label = label_override >= 0 ? label_override : rec.emotion;

        for (int s = 0; s < rc.samples; ++s) {
            Tensor poses;
            if (mode == pipeline::EmotionMode::encoded) {
                poses = model->generate(mel, initial, mode);
            } else if (mode == pipeline::EmotionMode::onehot) {
                poses = model->generate(mel, initial, mode, label);
            } else {
                Rng rng(Rng::derive(a.seed, static_cast<uint64_t>(idx) * 1007ULL +
                                                static_cast<uint64_t>(s)));
                poses = model->generate(mel, initial, mode, label, &rng);
            }
            char suffix[16] = "";
            if (rc.samples > 1) std::snprintf(suffix, sizeof suffix, "_s%02d", s);
            const std::string stem = (fs::path(rc.out) / (rec.id + suffix)).string();
            motion::save_pose_clip(stem, {poses, corpus.fps});
            if (rc.svg)
                write_text(stem + "_keyframes.svg",
                           plot::keyframes_svg({poses, corpus.fps}, skeleton, 6));
            ++written;
        }
    }
    std::printf("wrote %d pose clips to %s\n", written, rc.out.c_str());
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string config_path, corpus, generated, out, split;
    double sigma = 0.0;
    uint64_t seed = 0;
};

void cmd_evaluate(const EvaluateArgs& a, const CLI::App* cmd) {
    config::RunConfig rc =
        a.config_path.empty() ? config::RunConfig{} : config::load_run_config(a.config_path);
    if (cmd->count("--corpus")) rc.corpus = a.corpus;
    if (cmd->count("--split")) rc.split = a.split;
    if (cmd->count("--sigma")) rc.sigma = a.sigma;
    rc.validate();
    if (a.generated.empty())
        throw ValidationError("a directory of generated clips is required (--generated)");
    if (!fs::is_directory(a.generated)) throw IoError("missing directory " + a.generated);
    const std::string out_path =
        a.out.empty() ? (fs::path(a.generated) / "metrics.json").string() : a.out;

    const auto corpus = open_corpus(rc.corpus);
    const auto split_records = corpus.split_indices(rc.split);
    if (split_records.empty())
        throw ValidationError("corpus has no clips in split '" + rc.split + "'");

    // Generated stems pair with a reference clip by exact id or by an id
    // plus a _sNN sample suffix, so per-clip files and multi-sample sets
    // evaluate through the same path.
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(a.generated))
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "metrics.json")
            stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());

    std::vector<Tensor> real_clips, gen_clips;
    std::vector<int> gen_records;  // index into corpus.clips per generated clip
    std::vector<std::vector<double>> onsets(corpus.clips.size());
    for (int idx : split_records) {
        const auto& rec = corpus.clips[static_cast<size_t>(idx)];
        const auto loaded = dataset::load_clip(corpus, rec);
        real_clips.push_back(loaded.pose.frames);
        onsets[static_cast<size_t>(idx)] = metrics::audio_onsets(audio::compute_mel(loaded.audio));
        for (const std::string& stem : stems) {
            if (stem != rec.id && stem.rfind(rec.id + "_s", 0) != 0) continue;
            const auto gen = motion::load_pose_clip((fs::path(a.generated) / stem).string());
            if (gen.frames.rows != corpus.n_frames || gen.frames.cols != corpus.n_joints * 6)
                throw ValidationError("generated clip " + stem + " is " +
                                      std::to_string(gen.frames.rows) + "x" +
                                      std::to_string(gen.frames.cols) + ", corpus clips are " +
                                      std::to_string(corpus.n_frames) + "x" +
                                      std::to_string(corpus.n_joints * 6));
            gen_clips.push_back(gen.frames);
            gen_records.push_back(idx);
        }
    }
    if (gen_clips.empty())
        throw ValidationError("no clips in " + a.generated + " match split '" + rc.split + "'");

    // Embedding and classification models are fit on train-split references;
    // fixed seeds keep repeated evaluations identical.
    std::vector<Tensor> train_clips;
    std::vector<int> train_labels;
    for (int idx : corpus.split_indices("train")) {
        const auto loaded = dataset::load_clip(corpus, corpus.clips[static_cast<size_t>(idx)]);
        train_clips.push_back(loaded.pose.frames);
        train_labels.push_back(loaded.emotion);
    }
    metrics::SequenceAutoencoder embedder({corpus.n_joints * 6, 16, 32}, 0xF6D);
    embedder.fit(train_clips, 40, 0.01);
    metrics::GestureClassifier classifier(
        {corpus.n_joints * 6, 16, static_cast<int>(corpus.emotions.size())}, 0xC1A55);
    classifier.fit(train_clips, train_labels, 40, 0.01);

    metrics::MetricsReport report;
    std::vector<int> gen_labels;
    for (size_t i = 0; i < gen_clips.size(); ++i) {
        const auto& rec = corpus.clips[static_cast<size_t>(gen_records[i])];
        const size_t ri =
            static_cast<size_t>(std::find(split_records.begin(), split_records.end(),
                                          gen_records[i]) -
                                split_records.begin());
        report.l2 += metrics::l2_distance(real_clips[ri], gen_clips[i]);
        report.mpjre_deg += metrics::mpjre_degrees(real_clips[ri], gen_clips[i]);
        report.ba += metrics::beat_align(onsets[static_cast<size_t>(gen_records[i])], gen_clips[i],
                                         corpus.fps, rc.sigma)
                         .score;
        gen_labels.push_back(rec.emotion);
    }
    const double inv = 1.0 / static_cast<double>(gen_clips.size());
    report.l2 *= inv;
    report.mpjre_deg *= inv;
    report.ba *= inv;
    report.fgd = metrics::fgd(real_clips, gen_clips, embedder);
    report.ea_percent = classifier.accuracy_percent(gen_clips, gen_labels);
    if (gen_clips.size() >= 2) {
        const auto div = metrics::diversity(gen_clips, a.seed);
        report.diversity_mean = div.mean;
        report.diversity_ci95 = div.ci95;
    }

    nlohmann::json j;
    j["l2"] = report.l2;
    j["mpjre_deg"] = report.mpjre_deg;
    j["fgd"] = report.fgd;
    j["ba"] = report.ba;
    j["ea_percent"] = report.ea_percent;
    j["diversity_mean"] = report.diversity_mean;
    j["diversity_ci95"] = report.diversity_ci95;
    j["n_reference"] = split_records.size();
    j["n_generated"] = gen_clips.size();
    j["split"] = rc.split;
    j["sigma"] = rc.sigma;
    write_text(out_path, j.dump(2) + "\n");

    std::printf("%-18s %s\n", "metric", "value");
    std::printf("%-18s %.4f\n", "l2", report.l2);
    std::printf("%-18s %.4f\n", "mpjre_deg", report.mpjre_deg);
    std::printf("%-18s %.4f\n", "fgd", report.fgd);
    std::printf("%-18s %.4f\n", "ba", report.ba);
    std::printf("%-18s %.2f\n", "ea_percent", report.ea_percent);
    std::printf("%-18s %.4f +/- %.4f\n", "diversity", report.diversity_mean, report.diversity_ci95);
    std::printf("%zu generated vs %zu reference clips (split %s)\n", gen_clips.size(),
                split_records.size(), rc.split.c_str());
    std::printf("wrote %s\n", out_path.c_str());
}

// ------------------------------------------------------------------- plot

struct PlotArgs {
    std::string run, poses, out;
    int frames = 6;
};

void cmd_plot(const PlotArgs& a) {
    if (a.run.empty() && a.poses.empty())
        throw ValidationError("nothing to plot; pass --run and/or --poses");
    std::vector<std::string> written;
    if (!a.run.empty()) {
        const std::string out_dir = a.out.empty() ? a.run : a.out;
        fs::create_directories(out_dir);
        const fs::path csv = fs::path(a.run) / "losses.csv";
        if (!fs::exists(csv)) throw IoError("missing loss history " + csv.string());
        const fs::path svg = fs::path(out_dir) / "losses.svg";
        write_text(svg, plot::loss_curves_svg(plot::read_loss_csv(csv.string()), "training losses"));
        written.push_back(svg.string());
        const fs::path vae_csv = fs::path(a.run) / "vae_losses.csv";
        if (fs::exists(vae_csv)) {
            const fs::path vae_svg = fs::path(out_dir) / "vae_losses.svg";
            write_text(vae_svg,
                       plot::loss_curves_svg(plot::read_loss_csv(vae_csv.string()), "vae stage losses"));
            written.push_back(vae_svg.string());
        }
    }
    if (!a.poses.empty()) {
        const fs::path stem(a.poses);
        if (!fs::exists(fs::path(a.poses + ".json")))
            throw IoError("missing pose clip " + a.poses + ".json");
        const auto pose = motion::load_pose_clip(a.poses);
        if (pose.joint_count() != 16)
            throw ValidationError("stick-figure rendering supports the 16-joint skeleton only");
        const std::string out_dir = a.out.empty() ? stem.parent_path().string() : a.out;
        fs::create_directories(out_dir.empty() ? "." : out_dir);
        const fs::path svg = fs::path(out_dir.empty() ? "." : out_dir) /
                             (stem.filename().string() + "_keyframes.svg");
        write_text(svg, plot::keyframes_svg(pose, motion::SkeletonSpec::upper_body_16(), a.frames));
        written.push_back(svg.string());
    }
    for (const auto& f : written) std::printf("wrote %s\n", f.c_str());
}

// -------------------------------------------------------------- app wiring

int run_cli(int argc, char** argv) {
    CLI::App app{"audio-driven emotional co-speech gesture generation"};
    app.require_subcommand(1);

    PrepareArgs pa;
    auto* prepare = app.add_subcommand("prepare", "generate a synthetic corpus with manifest");
    prepare->add_option("--out", pa.out, "corpus output directory");
    prepare->add_option("--takes", pa.synth.n_takes, "number of takes")->capture_default_str();
    prepare->add_option("--take-frames", pa.synth.take_frames, "frames per take")->capture_default_str();
    prepare->add_option("--clip-frames", pa.synth.clip_frames, "frames per clip window")->capture_default_str();
    prepare->add_option("--stride", pa.synth.stride, "window stride in frames")->capture_default_str();
    prepare->add_option("--seed", pa.seed, "corpus seed")->capture_default_str();
    prepare->add_option("--emotion-skew", pa.skew, "label mix: uniform | skewed")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "skewed"}));
    prepare->add_flag("--force", pa.force, "reuse a non-empty output directory");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train the gesture model");
    auto add_train_opts = [](CLI::App* cmd, TrainArgs& t, const char* out_flag, const char* out_help) {
        cmd->add_option("--config", t.config_path, "JSON run config");
        cmd->add_option("--corpus", t.corpus, "corpus directory");
        cmd->add_option(out_flag, t.out, out_help);
        cmd->add_option("--epochs", t.epochs, "training epochs");
        cmd->add_option("--batch", t.batch, "batch size");
        cmd->add_option("--lr", t.lr, "learning rate");
        cmd->add_option("--seed", t.seed, "training and model seed");
    };
    add_train_opts(train, ta, "--out", "run directory for checkpoint and logs");
    train->add_option("--grad-clip", ta.grad_clip, "gradient norm clip (0 disables)");
    train->add_option("--d-steps", ta.d_steps, "discriminator steps per batch");
    train->add_option("--prompt-mode", ta.prompt_mode, "prompt construction: enhanced | zero | duplicate")
        ->check(CLI::IsMember({"enhanced", "zero", "duplicate"}));
    train->add_flag("--no-adversarial", ta.no_adversarial, "disable the adversarial objective");
    train->add_flag("--no-beat", ta.no_beat, "disable the beat contrastive objective");
    train->add_flag("--no-emotion", ta.no_emotion, "disable the emotion classification objective");
    train->add_flag("--no-smooth", ta.no_smooth, "disable the smoothness objective");
    train->add_flag("--onehot-emotion", ta.onehot, "condition on one-hot labels instead of mined features");

    TrainArgs va;
    auto* train_vae = app.add_subcommand("train-vae", "fit the emotion sampler on a trained model");
    add_train_opts(train_vae, va, "--run", "run directory holding checkpoint.ckpt");

    GenerateArgs ga;
    auto* generate = app.add_subcommand("generate", "generate pose clips from corpus audio");
    generate->add_option("--config", ga.config_path, "JSON run config");
    generate->add_option("--corpus", ga.corpus, "corpus directory");
    generate->add_option("--checkpoint", ga.checkpoint, "trained model checkpoint");
    generate->add_option("--out", ga.out, "output directory for pose clips");
    generate->add_option("--split", ga.split, "corpus split to generate for")->capture_default_str();
    generate->add_option("--mode", ga.mode, "emotion source: encoded | sampled | onehot")
        ->capture_default_str()
        ->check(CLI::IsMember({"encoded", "sampled", "onehot"}));
    generate->add_option("--label", ga.label, "emotion name override for sampled/onehot");
    generate->add_option("--samples", ga.samples, "sequences per clip")->capture_default_str();
    generate->add_option("--seed", ga.seed, "sampling seed")->capture_default_str();
    generate->add_option("--clip", ga.clip, "generate for one clip id only");
    generate->add_flag("--svg", ga.svg, "also write stick-figure keyframes");

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "score generated clips against the corpus");
    evaluate->add_option("--config", ea.config_path, "JSON run config");
    evaluate->add_option("--corpus", ea.corpus, "corpus directory");
    evaluate->add_option("--generated", ea.generated, "directory of generated pose clips");
    evaluate->add_option("--out", ea.out, "metrics JSON path (default: <generated>/metrics.json)");
    evaluate->add_option("--split", ea.split, "reference split")->capture_default_str();
    evaluate->add_option("--sigma", ea.sigma, "beat alignment kernel width in seconds");
    evaluate->add_option("--seed", ea.seed, "diversity bootstrap seed")->capture_default_str();

    PlotArgs pla;
    auto* plotc = app.add_subcommand("plot", "render loss curves and pose keyframes as SVG");
    plotc->add_option("--run", pla.run, "run directory with losses.csv");
    plotc->add_option("--poses", pla.poses, "pose clip stem (path without extension)");
    plotc->add_option("--out", pla.out, "output directory (default: alongside the input)");
    plotc->add_option("--frames", pla.frames, "keyframes per figure")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*prepare) cmd_prepare(pa);
    if (*train) cmd_train(ta, train);
    if (*train_vae) cmd_train_vae(va, train_vae);
    if (*generate) cmd_generate(ga, generate);
    if (*evaluate) cmd_evaluate(ea, evaluate);
    if (*plotc) cmd_plot(pla);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "error[validation]: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error[validation]: %s\n", e.what());
        return 2;
    } catch (const StateError& e) {
        std::fprintf(stderr, "error[state]: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error[io]: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 1;
    }
}

#include "cogest/pipeline.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "cogest/errors.hpp"
#include "json.hpp"

namespace cogest::pipeline {

EmotionMode emotion_mode_from_string(const std::string& s) {
    if (s == "encoded") return EmotionMode::encoded;
    if (s == "sampled") return EmotionMode::sampled;
    if (s == "onehot") return EmotionMode::onehot;
    throw ValidationError("unknown emotion mode: " + s);
}

std::string to_string(EmotionMode m) {
    switch (m) {
        case EmotionMode::encoded: return "encoded";
        case EmotionMode::sampled: return "sampled";
        default: return "onehot";
    }
}

Tensor onehot_feature(int label, int n_classes, int d) {
    if (n_classes < 1 || d < n_classes)
        throw ValidationError("onehot feature: width must cover the class count");
    if (label < 0 || label >= n_classes) throw ValidationError("onehot feature: label out of range");
    Tensor f(1, d);
    const int reps = d / n_classes;
    const double amp = 1.0 / std::sqrt(static_cast<double>(reps));
    for (int k = 0; k < reps; ++k) f(0, k * n_classes + label) = amp;
    return f;
}

GestureModel::GestureModel(const ModelConfig& cfg, const audio::Vocabulary& vocab, uint64_t seed)
    : GestureModel(cfg, vocab, seed, Rng(Rng::derive(seed, 0x6E01)), Rng(Rng::derive(seed, 0x6E02)),
                   Rng(Rng::derive(seed, 0x6E03))) {}

GestureModel::GestureModel(const ModelConfig& cfg, const audio::Vocabulary& vocab, uint64_t seed,
                           Rng grng, Rng drng, Rng vrng)
    : cfg_(cfg),
      vocab_(vocab),
      seed_(seed),
      audio_(gen_ps_, "ebm",
             ebm::EncoderConfig{cfg.d_model, cfg.n_classes, cfg.ebm_channels}, grng),
      words_(gen_ps_, "wemb", vocab.size(), cfg.d_model, grng),
      prompter_(gen_ps_, "stp",
                stp::PrompterConfig{cfg.d_model, cfg.pose_dim(), cfg.n_frames, cfg.m_initial,
                                    cfg.l_transition, cfg.prompt_mode},
                grng),
      decoder_(gen_ps_, "dec",
               gen::DecoderConfig{cfg.d_model, cfg.depth, cfg.heads, cfg.ff_width, cfg.n_frames,
                                  cfg.pose_dim()},
               grng),
      disc_(disc_ps_, "disc",
            gen::DiscriminatorConfig{cfg.pose_dim(), cfg.disc_channels, cfg.disc_use_offsets}, drng),
      vae_(vae_ps_, "vae",
           vae::CVAEConfig{cfg.d_model, cfg.vae_latent, cfg.vae_hidden, cfg.n_classes, cfg.vae_beta},
           vrng) {}

GestureModel::Forward GestureModel::forward(ad::Tape& t, const Tensor& mel,
                                            const std::vector<int>& token_ids,
                                            const Tensor& initial_poses,
                                            const Tensor* emotion_override) const {
    Forward out;
    const auto enc = audio_.forward(t, mel, cfg_.n_frames);
    out.beat = enc.beat;
    out.logits = enc.logits;
    out.emotion = enc.emotion;
    if (emotion_override) {
        emotion_override->require_shape(1, cfg_.d_model, "emotion override");
        out.emotion = t.input(*emotion_override);
    }
    if (!token_ids.empty()) {
        if (static_cast<int>(token_ids.size()) != cfg_.n_frames)
            throw ShapeError("forward: " + std::to_string(token_ids.size()) +
                             " transcript tokens for " + std::to_string(cfg_.n_frames) + " frames");
        out.transcript = words_(t, token_ids);
    }
    out.prompt = prompter_.forward(t, initial_poses);
    const ad::Var cond = gen::build_conditioning(t, out.beat, out.emotion);
    out.poses = decoder_.decode(t, out.prompt.prompt, cond);
    return out;
}

Tensor GestureModel::generate(const Tensor& mel, const Tensor& initial_poses, EmotionMode mode,
                              int label, Rng* rng) const {
    if (!ready_) throw StateError("generate: no trained parameters loaded");
    Tensor replacement;
    const Tensor* override_ptr = nullptr;
    if (mode == EmotionMode::sampled) {
        if (label < 0 || label >= cfg_.n_classes)
            throw ValidationError("generate: sampled mode needs a class label");
        if (!rng) throw ValidationError("generate: sampled mode needs an rng");
        replacement = vae_.sample(label, *rng);
        override_ptr = &replacement;
    } else if (mode == EmotionMode::onehot) {
        if (label < 0 || label >= cfg_.n_classes)
            throw ValidationError("generate: onehot mode needs a class label");
        replacement = onehot_feature(label, cfg_.n_classes, cfg_.d_model);
        override_ptr = &replacement;
    }
    ad::Tape t;
    return forward(t, mel, {}, initial_poses, override_ptr).poses.val();
}

namespace {

constexpr char kMagic[8] = {'C', 'G', 'C', 'K', 'P', 'T', '1', '\n'};

nlohmann::json params_json(const nn::ParamStore& ps) {
    nlohmann::json list = nlohmann::json::array();
    for (const ad::Parameter* p : ps.all())
        list.push_back({p->name, p->value.rows, p->value.cols});
    return list;
}

void write_store(std::ofstream& out, const nn::ParamStore& ps) {
    for (const ad::Parameter* p : ps.all())
        out.write(reinterpret_cast<const char*>(p->value.v.data()),
                  static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
}

void read_store(std::ifstream& in, const nlohmann::json& listed, nn::ParamStore& ps,
                const std::string& section, const std::string& path) {
    const auto& params = ps.all();
    if (listed.size() != params.size())
        throw IoError("load_checkpoint: section " + section + " in " + path + " lists " +
                      std::to_string(listed.size()) + " parameters, model has " +
                      std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        ad::Parameter* p = params[i];
        const std::string name = listed[i][0].get<std::string>();
        const int rows = listed[i][1].get<int>(), cols = listed[i][2].get<int>();
        if (name != p->name || rows != p->value.rows || cols != p->value.cols)
            throw IoError("load_checkpoint: parameter mismatch in section " + section + ": stored " +
                          name + " " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", model expects " + p->name + " " + std::to_string(p->value.rows) + "x" +
                          std::to_string(p->value.cols));
        in.read(reinterpret_cast<char*>(p->value.v.data()),
                static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
        if (!in) throw IoError("load_checkpoint: truncated data in " + path);
    }
}

}  // namespace

void GestureModel::save_checkpoint(const std::string& path) const {
    nlohmann::json header;
    header["model"] = {{"d_model", cfg_.d_model},
                       {"n_frames", cfg_.n_frames},
                       {"m_initial", cfg_.m_initial},
                       {"l_transition", cfg_.l_transition},
                       {"n_joints", cfg_.n_joints},
                       {"heads", cfg_.heads},
                       {"depth", cfg_.depth},
                       {"ff_width", cfg_.ff_width},
                       {"n_classes", cfg_.n_classes},
                       {"ebm_channels", cfg_.ebm_channels},
                       {"prompt_mode", stp::to_string(cfg_.prompt_mode)},
                       {"disc_use_offsets", cfg_.disc_use_offsets},
                       {"disc_channels", cfg_.disc_channels},
                       {"vae_latent", cfg_.vae_latent},
                       {"vae_hidden", cfg_.vae_hidden},
                       {"vae_beta", cfg_.vae_beta}};
    header["seed"] = seed_;
    header["vocab"] = vocab_.words();
    header["vae_trained"] = vae_.is_trained();
    header["sections"] = {{{"name", "generator"}, {"params", params_json(gen_ps_)}},
                          {{"name", "discriminator"}, {"params", params_json(disc_ps_)}},
                          {{"name", "vae"}, {"params", params_json(vae_ps_)}}};
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof kMagic);
    const uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    write_store(out, gen_ps_);
    write_store(out, disc_ps_);
    write_store(out, vae_ps_);
    if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

std::unique_ptr<GestureModel> GestureModel::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw IoError("load_checkpoint: " + path + " is not a checkpoint file");
    uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    if (!in || hlen == 0 || hlen > (1u << 26))
        throw IoError("load_checkpoint: corrupt header length in " + path);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("load_checkpoint: truncated header in " + path);

    ModelConfig cfg;
    audio::Vocabulary vocab;
    uint64_t seed = 0;
    bool vae_trained = false;
    nlohmann::json sections;
    try {
        const nlohmann::json header = nlohmann::json::parse(htext);
        const nlohmann::json& mc = header.at("model");
        cfg.d_model = mc.at("d_model").get<int>();
        cfg.n_frames = mc.at("n_frames").get<int>();
        cfg.m_initial = mc.at("m_initial").get<int>();
        cfg.l_transition = mc.at("l_transition").get<int>();
        cfg.n_joints = mc.at("n_joints").get<int>();
        cfg.heads = mc.at("heads").get<int>();
        cfg.depth = mc.at("depth").get<int>();
        cfg.ff_width = mc.at("ff_width").get<int>();
        cfg.n_classes = mc.at("n_classes").get<int>();
        cfg.ebm_channels = mc.at("ebm_channels").get<std::array<int, 3>>();
        cfg.prompt_mode = stp::prompt_mode_from_string(mc.at("prompt_mode").get<std::string>());
        cfg.disc_use_offsets = mc.at("disc_use_offsets").get<bool>();
        cfg.disc_channels = mc.at("disc_channels").get<int>();
        cfg.vae_latent = mc.at("vae_latent").get<int>();
        cfg.vae_hidden = mc.at("vae_hidden").get<int>();
        cfg.vae_beta = mc.at("vae_beta").get<double>();
        seed = header.at("seed").get<uint64_t>();
        vocab = audio::Vocabulary::from_words(header.at("vocab").get<std::vector<std::string>>());
        vae_trained = header.at("vae_trained").get<bool>();
        sections = header.at("sections");
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_checkpoint: bad header in " + path + ": " + e.what());
    }

    auto model = std::make_unique<GestureModel>(cfg, vocab, seed);
    for (const nlohmann::json& sec : sections) {
        const std::string name = sec.at("name").get<std::string>();
        nn::ParamStore* ps = nullptr;
        if (name == "generator") ps = &model->gen_ps_;
        else if (name == "discriminator") ps = &model->disc_ps_;
        else if (name == "vae") ps = &model->vae_ps_;
        else throw IoError("load_checkpoint: unknown section " + name + " in " + path);
        read_store(in, sec.at("params"), *ps, name, path);
    }
    if (vae_trained) model->vae_.mark_trained();
    model->ready_ = true;
    return model;
}

}  // namespace cogest::pipeline

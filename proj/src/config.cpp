#include "cogest/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "cogest/errors.hpp"
#include "json.hpp"

namespace cogest::config {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ValidationError(std::string("config: ") + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void fetch(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_model(const json& j, pipeline::ModelConfig& m) {
    expect_keys(j, "model", {"d_model", "n_frames", "m_initial", "l_transition", "n_joints",
                             "heads", "depth", "ff_width", "n_classes", "ebm_channels",
                             "prompt_mode", "disc_use_offsets", "disc_channels", "vae_latent",
                             "vae_hidden", "vae_beta"});
    fetch(j, "d_model", m.d_model);
    fetch(j, "n_frames", m.n_frames);
    fetch(j, "m_initial", m.m_initial);
    fetch(j, "l_transition", m.l_transition);
    fetch(j, "n_joints", m.n_joints);
    fetch(j, "heads", m.heads);
    fetch(j, "depth", m.depth);
    fetch(j, "ff_width", m.ff_width);
    fetch(j, "n_classes", m.n_classes);
    if (j.contains("ebm_channels")) {
        const auto ch = j.at("ebm_channels").get<std::vector<int>>();
        if (ch.size() != 3)
            throw ValidationError("config: ebm_channels must list exactly 3 widths");
        m.ebm_channels = {ch[0], ch[1], ch[2]};
    }
    if (j.contains("prompt_mode"))
        m.prompt_mode = stp::prompt_mode_from_string(j.at("prompt_mode").get<std::string>());
    fetch(j, "disc_use_offsets", m.disc_use_offsets);
    fetch(j, "disc_channels", m.disc_channels);
    fetch(j, "vae_latent", m.vae_latent);
    fetch(j, "vae_hidden", m.vae_hidden);
    fetch(j, "vae_beta", m.vae_beta);
}

void parse_train(const json& j, training::TrainConfig& t) {
    expect_keys(j, "train",
                {"epochs", "batch_size", "lr", "seed", "weights", "adversarial", "beat", "emotion",
                 "smooth", "contrastive_include_positive", "onehot_emotion",
                 "generator_literal_loss", "grad_clip", "d_steps"});
    fetch(j, "epochs", t.epochs);
    fetch(j, "batch_size", t.batch_size);
    fetch(j, "lr", t.lr);
    fetch(j, "seed", t.seed);
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        expect_keys(w, "train.weights", {"lambda_r", "lambda_b", "lambda_e", "lambda_s", "gamma", "tau"});
        fetch(w, "lambda_r", t.weights.lambda_r);
        fetch(w, "lambda_b", t.weights.lambda_b);
        fetch(w, "lambda_e", t.weights.lambda_e);
        fetch(w, "lambda_s", t.weights.lambda_s);
        fetch(w, "gamma", t.weights.gamma);
        fetch(w, "tau", t.weights.tau);
    }
    fetch(j, "adversarial", t.enable_adversarial);
    fetch(j, "beat", t.enable_beat);
    fetch(j, "emotion", t.enable_emotion);
    fetch(j, "smooth", t.enable_smooth);
    fetch(j, "contrastive_include_positive", t.contrastive_include_positive);
    fetch(j, "onehot_emotion", t.onehot_emotion);
    fetch(j, "generator_literal_loss", t.generator_literal_loss);
    fetch(j, "grad_clip", t.grad_clip);
    fetch(j, "d_steps", t.d_steps);
}

}  // namespace

void RunConfig::validate() const {
    pipeline::emotion_mode_from_string(mode);  // throws on unknown names
    if (split != "train" && split != "val" && split != "test")
        throw ValidationError("config: unknown split '" + split + "'");
    if (samples < 1) throw ValidationError("config: samples must be at least 1");
    if (sigma <= 0.0) throw ValidationError("config: sigma must be positive");
    if (model.d_model < 1 || model.n_frames < 2 || model.n_joints < 1 || model.heads < 1 ||
        model.depth < 1 || model.ff_width < 1 || model.n_classes < 2)
        throw ValidationError("config: model dimensions must be positive");
    train.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        expect_keys(j, "the top level",
                    {"model", "train", "corpus", "out", "mode", "split", "label", "samples", "svg",
                     "sigma"});
        if (j.contains("model")) parse_model(j.at("model"), cfg.model);
        if (j.contains("train")) parse_train(j.at("train"), cfg.train);
        fetch(j, "corpus", cfg.corpus);
        fetch(j, "out", cfg.out);
        fetch(j, "mode", cfg.mode);
        fetch(j, "split", cfg.split);
        fetch(j, "label", cfg.label);
        fetch(j, "samples", cfg.samples);
        fetch(j, "svg", cfg.svg);
        fetch(j, "sigma", cfg.sigma);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: wrong value type: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace cogest::config

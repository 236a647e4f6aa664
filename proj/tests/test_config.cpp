#include <filesystem>
#include <fstream>
#include <string>

#include "cogest/config.hpp"
#include "cogest/errors.hpp"
#include "support.hpp"

using namespace cogest;
namespace fs = std::filesystem;

TEST_SUITE("config") {

TEST_CASE("empty document yields the defaults") {
    config::RunConfig rc = config::parse_run_config("{}");
    CHECK(rc.model.d_model == 64);
    CHECK(rc.model.n_frames == 60);
    CHECK(rc.model.prompt_mode == stp::PromptMode::enhanced);
    CHECK(rc.train.epochs == 100);
    CHECK(rc.train.batch_size == 128);
    CHECK(rc.train.weights.lambda_r == doctest::Approx(100.0));
    CHECK(rc.mode == "encoded");
    CHECK(rc.split == "test");
    CHECK(rc.samples == 1);
    CHECK_NOTHROW(rc.validate());
}

TEST_CASE("partial documents override only what they mention") {
    config::RunConfig rc = config::parse_run_config(R"({
        "model": {"d_model": 16, "prompt_mode": "zero", "ebm_channels": [2, 2, 4]},
        "train": {"epochs": 3, "weights": {"gamma": 5.0}, "adversarial": false},
        "corpus": "data", "mode": "sampled", "label": "happy", "samples": 7})");
    CHECK(rc.model.d_model == 16);
    CHECK(rc.model.n_frames == 60);  // untouched
    CHECK(rc.model.prompt_mode == stp::PromptMode::zero_pad);
    CHECK(rc.model.ebm_channels[0] == 2);
    CHECK(rc.model.ebm_channels[2] == 4);
    CHECK(rc.train.epochs == 3);
    CHECK(rc.train.lr == doctest::Approx(2e-4));  // untouched
    CHECK(rc.train.weights.gamma == doctest::Approx(5.0));
    CHECK(rc.train.weights.lambda_r == doctest::Approx(100.0));  // untouched
    CHECK_FALSE(rc.train.enable_adversarial);
    CHECK(rc.train.enable_beat);  // untouched
    CHECK(rc.corpus == "data");
    CHECK(rc.mode == "sampled");
    CHECK(rc.label == "happy");
    CHECK(rc.samples == 7);
}

TEST_CASE("unknown keys are rejected and named at every level") {
    auto message_of = [](const std::string& text) {
        try {
            config::parse_run_config(text);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    std::string m = message_of(R"({"modle": {}})");
    CHECK(m.find("modle") != std::string::npos);
    CHECK(m.find("top level") != std::string::npos);
    m = message_of(R"({"model": {"dmodel": 8}})");
    CHECK(m.find("dmodel") != std::string::npos);
    CHECK(m.find("model") != std::string::npos);
    m = message_of(R"({"train": {"epoch": 2}})");
    CHECK(m.find("epoch") != std::string::npos);
    m = message_of(R"({"train": {"weights": {"lambda_x": 1.0}}})");
    CHECK(m.find("lambda_x") != std::string::npos);
    CHECK(m.find("weights") != std::string::npos);
}

TEST_CASE("malformed documents raise ValidationError") {
    CHECK_THROWS_AS(config::parse_run_config("not json"), ValidationError);
    CHECK_THROWS_AS(config::parse_run_config(R"({"train": {"epochs": "three"}})"),
                    ValidationError);
    CHECK_THROWS_AS(config::parse_run_config(R"({"samples": []})"), ValidationError);
    CHECK_THROWS_AS(config::parse_run_config(R"({"model": {"ebm_channels": [2, 2]}})"),
                    ValidationError);  // needs exactly three stages
    CHECK_THROWS_AS(config::parse_run_config(R"({"model": {"prompt_mode": "mirror"}})"),
                    ValidationError);
}

TEST_CASE("validate rejects structurally bad settings") {
    config::RunConfig rc;
    rc.mode = "psychic";
    CHECK_THROWS_AS(rc.validate(), ValidationError);
    rc = {};
    rc.split = "holdout";
    CHECK_THROWS_AS(rc.validate(), ValidationError);
    rc = {};
    rc.samples = 0;
    CHECK_THROWS_AS(rc.validate(), ValidationError);
    rc = {};
    rc.sigma = 0.0;
    CHECK_THROWS_AS(rc.validate(), ValidationError);
    rc = {};
    rc.model.n_frames = 1;
    CHECK_THROWS_AS(rc.validate(), ValidationError);
    rc = {};
    rc.train.epochs = 0;
    CHECK_THROWS_AS(rc.validate(), ValidationError);
}

TEST_CASE("load_run_config reads files and reports missing ones") {
    fs::path dir = fs::temp_directory_path() / "cogest_config_test";
    fs::create_directories(dir);
    fs::path p = dir / "run.json";
    {
        std::ofstream out(p);
        out << R"({"train": {"seed": 42}, "out": "artifacts"})";
    }
    config::RunConfig rc = config::load_run_config(p.string());
    CHECK(rc.train.seed == 42);
    CHECK(rc.out == "artifacts");
    CHECK_THROWS_AS(config::load_run_config((dir / "absent.json").string()), IoError);
    fs::remove_all(dir);
}

}  // TEST_SUITE

#include <filesystem>
#include <fstream>
#include <string>

#include "cogest/errors.hpp"
#include "cogest/plot.hpp"
#include "support.hpp"

using namespace cogest;
namespace fs = std::filesystem;

namespace {

int count_of(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
}

motion::PoseSequence identity_pose(int n_frames, int n_joints, double fps = 15.0) {
    motion::PoseSequence seq;
    seq.fps = fps;
    seq.frames = Tensor(n_frames, n_joints * 6);
    for (int f = 0; f < n_frames; ++f)
        for (int j = 0; j < n_joints; ++j) {
            seq.frames(f, j * 6 + 0) = 1.0;  // first rotation column (1,0,0)
            seq.frames(f, j * 6 + 4) = 1.0;  // second column (0,1,0)
        }
    return seq;
}

}  // namespace

TEST_SUITE("plot") {

TEST_CASE("loss CSV round trips exactly") {
    fs::path dir = fs::temp_directory_path() / "cogest_plot_test";
    fs::create_directories(dir);
    fs::path p = dir / "losses.csv";

    std::vector<training::LossRecord> history = {
        {0, "total", 31.75},    {0, "rec", 1.0 / 3.0},   {1, "total", 0.0},
        {1, "rec", 1e-300},     {2, "total", 123456.75}, {2, "rec", 0.1 + 0.2},
    };
    training::write_loss_csv(p.string(), history);
    std::vector<training::LossRecord> back = plot::read_loss_csv(p.string());
    REQUIRE(back.size() == history.size());
    for (size_t i = 0; i < history.size(); ++i) {
        CHECK(back[i].step == history[i].step);
        CHECK(back[i].name == history[i].name);
        CHECK(back[i].value == history[i].value);  // 17 significant digits round trip doubles
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(plot::read_loss_csv((dir / "absent.csv").string()), IoError);
    }
    SUBCASE("wrong header") {
        std::ofstream(dir / "bad.csv") << "step,name,value\n0,total,1.0\n";
        CHECK_THROWS_AS(plot::read_loss_csv((dir / "bad.csv").string()), ValidationError);
    }
    SUBCASE("row missing a field") {
        std::ofstream(dir / "bad.csv") << "step,loss_name,value\n0,total\n";
        CHECK_THROWS_AS(plot::read_loss_csv((dir / "bad.csv").string()), ValidationError);
    }
    SUBCASE("non-numeric step") {
        std::ofstream(dir / "bad.csv") << "step,loss_name,value\nzero,total,1.0\n";
        CHECK_THROWS_AS(plot::read_loss_csv((dir / "bad.csv").string()), ValidationError);
    }
    fs::remove_all(dir);
}

TEST_CASE("loss curves render one polyline per loss name") {
    std::vector<training::LossRecord> history;
    for (int s = 0; s < 5; ++s) {
        history.push_back({s, "total", 10.0 / (s + 1)});
        history.push_back({s, "rec", 1.0 / (s + 1)});
        history.push_back({s, "d", 1.4});
    }
    std::string svg = plot::loss_curves_svg(history, "demo run");
    CHECK(count_of(svg, "<polyline") == 3);
    CHECK(svg.find("demo run") != std::string::npos);
    CHECK(svg.find(">total<") != std::string::npos);
    CHECK(svg.find(">rec<") != std::string::npos);
    CHECK(svg.find(">d<") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

    CHECK_THROWS_AS(plot::loss_curves_svg({}, "empty"), ValidationError);
}

TEST_CASE("keyframe strips draw every joint of every selected frame") {
    motion::SkeletonSpec skel = motion::SkeletonSpec::upper_body_16();
    motion::PoseSequence pose = identity_pose(30, skel.joint_count);

    std::string svg = plot::keyframes_svg(pose, skel, 6);
    CHECK(count_of(svg, "<circle") == 6 * skel.joint_count);
    // Every non-root joint contributes one bone segment per frame.
    CHECK(count_of(svg, "<line") == 6 * (skel.joint_count - 1));
    CHECK(count_of(svg, "frame ") == 6);
    CHECK(svg.find("frame 0<") != std::string::npos);
    CHECK(svg.find("frame 29<") != std::string::npos);

    SUBCASE("more keyframes than frames clamps to the clip length") {
        motion::PoseSequence tiny = identity_pose(3, skel.joint_count);
        std::string s = plot::keyframes_svg(tiny, skel, 10);
        CHECK(count_of(s, "frame ") == 3);
    }
    SUBCASE("joint mismatch and bad counts throw") {
        motion::PoseSequence two = identity_pose(4, 2);
        CHECK_THROWS_AS(plot::keyframes_svg(two, skel), ValidationError);
        CHECK_THROWS_AS(plot::keyframes_svg(pose, skel, 0), ValidationError);
    }
}

}  // TEST_SUITE

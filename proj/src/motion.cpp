#include "cogest/motion.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cogest/errors.hpp"
#include "json.hpp"

namespace cogest::motion {

namespace {

constexpr double kDegenerateNorm = 1e-8;
constexpr double kDegenerateCos = 1.0 - 1e-8;

double dot3(const double* a, const double* b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const double* a) { return std::sqrt(dot3(a, a)); }

}  // namespace

void SkeletonSpec::validate() const {
    if (joint_count < 2) throw ValidationError("skeleton: need at least two joints");
    if (static_cast<int>(parent.size()) != joint_count || static_cast<int>(bone_offsets.size()) != joint_count)
        throw ValidationError("skeleton: field sizes disagree with joint_count");
    int roots = 0;
    for (int j = 0; j < joint_count; ++j) {
        if (parent[j] == -1) {
            ++roots;
            continue;
        }
        // Parents must precede children so one forward sweep resolves the tree.
        if (parent[j] < 0 || parent[j] >= j) throw ValidationError("skeleton: parent indices must be topologically ordered");
        for (double c : bone_offsets[j])
            if (!std::isfinite(c)) throw ValidationError("skeleton: non-finite bone offset");
    }
    if (roots != 1) throw ValidationError("skeleton: expected exactly one root");
}

SkeletonSpec SkeletonSpec::upper_body_16() {
    SkeletonSpec s;
    s.joint_count = 16;
    s.parent = {-1, 0, 1, 2, 1, 4, 5, 6, 7, 7, 1, 10, 11, 12, 13, 13};
    s.bone_offsets = {
        {0.0, 0.0, 0.0},      // spine base (root)
        {0.0, 0.25, 0.0},     // spine mid
        {0.0, 0.25, 0.0},     // neck
        {0.0, 0.15, 0.0},     // head
        {0.09, 0.20, 0.0},    // left clavicle
        {0.10, 0.0, 0.0},     // left shoulder
        {0.28, 0.0, 0.0},     // left elbow
        {0.25, 0.0, 0.0},     // left wrist
        {0.09, 0.0, 0.02},    // left finger a
        {0.09, 0.0, -0.02},   // left finger b
        {-0.09, 0.20, 0.0},   // right clavicle
        {-0.10, 0.0, 0.0},    // right shoulder
        {-0.28, 0.0, 0.0},    // right elbow
        {-0.25, 0.0, 0.0},    // right wrist
        {-0.09, 0.0, 0.02},   // right finger a
        {-0.09, 0.0, -0.02},  // right finger b
    };
    s.validate();
    return s;
}

Mat3 rot6d_to_matrix(const Rot6D& r) {
    for (double c : r)
        if (!std::isfinite(c)) throw DegenerateInputError("rot6d: non-finite coefficient");
    const double* a1 = r.data();
    const double* a2 = r.data() + 3;
    const double n1 = norm3(a1), n2 = norm3(a2);
    if (n1 < kDegenerateNorm || n2 < kDegenerateNorm) throw DegenerateInputError("rot6d: near-zero column triple");
    if (std::fabs(dot3(a1, a2) / (n1 * n2)) > kDegenerateCos)
        throw DegenerateInputError("rot6d: column triples nearly parallel");

    double b1[3] = {a1[0] / n1, a1[1] / n1, a1[2] / n1};
    const double proj = dot3(a2, b1);
    double b2[3] = {a2[0] - proj * b1[0], a2[1] - proj * b1[1], a2[2] - proj * b1[2]};
    const double nb2 = norm3(b2);
    for (double& c : b2) c /= nb2;
    const double b3[3] = {b1[1] * b2[2] - b1[2] * b2[1], b1[2] * b2[0] - b1[0] * b2[2],
                          b1[0] * b2[1] - b1[1] * b2[0]};
    // Columns are b1, b2, b3.
    return {b1[0], b2[0], b3[0], b1[1], b2[1], b3[1], b1[2], b2[2], b3[2]};
}

Rot6D matrix_to_rot6d(const Mat3& m) {
    // R^T R must be the identity within 1e-5.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += m[static_cast<size_t>(k) * 3 + i] * m[static_cast<size_t>(k) * 3 + j];
            const double want = i == j ? 1.0 : 0.0;
            if (std::fabs(dot - want) > 1e-5) throw ValidationError("matrix_to_rot6d: input is not orthonormal");
        }
    return {m[0], m[3], m[6], m[1], m[4], m[7]};
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
    // trace(aᵀ b)
    double tr = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) tr += a[static_cast<size_t>(k) * 3 + i] * b[static_cast<size_t>(k) * 3 + i];
    const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

Tensor motion_offsets(const Tensor& frames) {
    if (frames.rows < 2) throw ShapeError("motion_offsets: need at least two frames");
    Tensor out(frames.rows - 1, frames.cols);
    for (int i = 0; i + 1 < frames.rows; ++i)
        for (int j = 0; j < frames.cols; ++j) out(i, j) = frames(i + 1, j) - frames(i, j);
    return out;
}

Tensor forward_kinematics(const PoseSequence& pose, const SkeletonSpec& skeleton) {
    skeleton.validate();
    const int J = skeleton.joint_count;
    if (pose.frames.cols != J * 6) throw ShapeError("forward_kinematics: pose width disagrees with skeleton");
    Tensor out(pose.n_frames(), J * 3);
    std::vector<Mat3> global(static_cast<size_t>(J));
    std::vector<std::array<double, 3>> position(static_cast<size_t>(J));
    for (int f = 0; f < pose.n_frames(); ++f) {
        for (int j = 0; j < J; ++j) {
            Rot6D r;
            for (int c = 0; c < 6; ++c) r[static_cast<size_t>(c)] = pose.frames(f, j * 6 + c);
            const Mat3 local = rot6d_to_matrix(r);
            const int p = skeleton.parent[j];
            if (p == -1) {
                global[static_cast<size_t>(j)] = local;
                position[static_cast<size_t>(j)] = {0.0, 0.0, 0.0};
            } else {
                const Mat3& pg = global[static_cast<size_t>(p)];
                Mat3& g = global[static_cast<size_t>(j)];
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 3; ++k) {
                        double s = 0.0;
                        for (int t = 0; t < 3; ++t)
                            s += pg[static_cast<size_t>(i) * 3 + t] * local[static_cast<size_t>(t) * 3 + k];
                        g[static_cast<size_t>(i) * 3 + k] = s;
                    }
                const auto& off = skeleton.bone_offsets[j];
                for (int i = 0; i < 3; ++i) {
                    double s = 0.0;
                    for (int t = 0; t < 3; ++t) s += pg[static_cast<size_t>(i) * 3 + t] * off[static_cast<size_t>(t)];
                    position[static_cast<size_t>(j)][static_cast<size_t>(i)] =
                        position[static_cast<size_t>(p)][static_cast<size_t>(i)] + s;
                }
            }
            for (int i = 0; i < 3; ++i) out(f, j * 3 + i) = position[static_cast<size_t>(j)][static_cast<size_t>(i)];
        }
    }
    return out;
}

Tensor moving_average(const Tensor& frames, int window) {
    if (window < 1 || window % 2 == 0) throw ValidationError("moving_average: window must be odd and positive");
    const int half = window / 2;
    Tensor out(frames.rows, frames.cols);
    for (int i = 0; i < frames.rows; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(frames.rows - 1, i + half);
        const double inv = 1.0 / static_cast<double>(hi - lo + 1);
        for (int j = 0; j < frames.cols; ++j) {
            double s = 0.0;
            for (int t = lo; t <= hi; ++t) s += frames(t, j);
            out(i, j) = s * inv;
        }
    }
    return out;
}

double mean_jerk(const Tensor& frames) {
    if (frames.rows < 4) throw ShapeError("mean_jerk: need at least four frames");
    double acc = 0.0;
    const int n = frames.rows - 3;
    for (int i = 0; i < n; ++i) {
        double ss = 0.0;
        for (int j = 0; j < frames.cols; ++j) {
            const double d = frames(i + 3, j) - 3.0 * frames(i + 2, j) + 3.0 * frames(i + 1, j) - frames(i, j);
            ss += d * d;
        }
        acc += std::sqrt(ss);
    }
    return acc / static_cast<double>(n);
}

void save_pose_clip(const std::string& stem, const PoseSequence& pose) {
    if (!pose.frames.all_finite()) throw ValidationError("save_pose_clip: non-finite frame data");
    std::vector<float> raw(pose.frames.v.size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<float>(pose.frames.v[i]);
    {
        std::ofstream f(stem + ".f32", std::ios::binary);
        if (!f) throw IoError("save_pose_clip: cannot open " + stem + ".f32");
        f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
        if (!f) throw IoError("save_pose_clip: short write to " + stem + ".f32");
    }
    nlohmann::json header = {{"n_frames", pose.n_frames()},
                             {"n_joints", pose.joint_count()},
                             {"fps", pose.fps},
                             {"dtype", "f32le"}};
    std::ofstream j(stem + ".json");
    if (!j) throw IoError("save_pose_clip: cannot open " + stem + ".json");
    j << header.dump(2) << "\n";
}

PoseSequence load_pose_clip(const std::string& stem) {
    std::ifstream j(stem + ".json");
    if (!j) throw IoError("load_pose_clip: missing sidecar " + stem + ".json");
    nlohmann::json header;
    try {
        j >> header;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_pose_clip: bad sidecar " + stem + ".json: " + e.what());
    }
    if (header.value("dtype", "") != "f32le") throw IoError("load_pose_clip: unsupported dtype in " + stem + ".json");
    const int n = header.at("n_frames").get<int>();
    const int joints = header.at("n_joints").get<int>();
    PoseSequence pose;
    pose.fps = header.at("fps").get<double>();

    std::ifstream f(stem + ".f32", std::ios::binary);
    if (!f) throw IoError("load_pose_clip: missing data file " + stem + ".f32");
    const auto bytes = std::filesystem::file_size(stem + ".f32");
    const size_t want = static_cast<size_t>(n) * static_cast<size_t>(joints) * 6 * sizeof(float);
    if (bytes != want)
        throw IoError("load_pose_clip: " + stem + ".f32 holds " + std::to_string(bytes) + " bytes, header implies " +
                      std::to_string(want));
    std::vector<float> raw(static_cast<size_t>(n) * static_cast<size_t>(joints) * 6);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(want));
    if (!f) throw IoError("load_pose_clip: short read from " + stem + ".f32");
    pose.frames = Tensor(n, joints * 6);
    for (size_t i = 0; i < raw.size(); ++i) pose.frames.v[i] = static_cast<double>(raw[i]);
    return pose;
}

}  // namespace cogest::motion

#pragma once

#include <array>
#include <string>
#include <vector>

#include "cogest/tensor.hpp"

// Pose data model: 6D rotation representation, first-difference motion
// offsets, the skeleton tree, forward kinematics, and the pose clip file
// format (raw f32le array + JSON sidecar).

namespace cogest::motion {

using Rot6D = std::array<double, 6>;  // first two columns of a rotation matrix
using Mat3 = std::array<double, 9>;   // row-major 3×3

struct SkeletonSpec {
    int joint_count = 0;
    std::vector<int> parent;                          // -1 marks the root
    std::vector<std::array<double, 3>> bone_offsets;  // meters, in parent frame

    // Throws if the parent graph is not a tree with one root or sizes disagree.
    void validate() const;
    // 16-joint upper body used by the synthetic corpus: spine, neck, head,
    // clavicles, shoulders, elbows, wrists, two finger stubs per hand.
    static SkeletonSpec upper_body_16();
};

struct PoseSequence {
    Tensor frames;      // N×(J·6)
    double fps = 15.0;

    int joint_count() const { return frames.cols / 6; }
    int n_frames() const { return frames.rows; }
};

// Gram–Schmidt map from the 6D representation to a proper rotation matrix.
// Throws DegenerateInputError for near-zero or near-parallel column triples.
Mat3 rot6d_to_matrix(const Rot6D& r);

// Inverse map: first two columns of R.  Throws ValidationError if R is not
// orthonormal within 1e-5.
Rot6D matrix_to_rot6d(const Mat3& m);

// Geodesic distance between two rotations, radians in [0, π].
double geodesic_angle(const Mat3& a, const Mat3& b);

// First differences along time: row i = frames[i+1] − frames[i].
Tensor motion_offsets(const Tensor& frames);

// Joint positions, N×(J·3), root pinned to the origin.
Tensor forward_kinematics(const PoseSequence& pose, const SkeletonSpec& skeleton);

// Centered moving average along time with edge clamping; window must be odd.
Tensor moving_average(const Tensor& frames, int window);

// Mean Euclidean norm of the third difference along time (N ≥ 4).
double mean_jerk(const Tensor& frames);

// Clip files: <stem>.f32 holds the little-endian float32 frame matrix,
// <stem>.json the header {"n_frames","n_joints","fps","dtype":"f32le"}.
void save_pose_clip(const std::string& stem, const PoseSequence& pose);
PoseSequence load_pose_clip(const std::string& stem);

}  // namespace cogest::motion

#pragma once

#include <string>
#include <vector>

#include "cogest/motion.hpp"
#include "cogest/training.hpp"

// SVG rendering for run artifacts: loss curves from a history CSV and
// stick-figure keyframes from a pose clip.  Pure string builders so the
// output is easy to test and the CLI only does file plumbing.

namespace cogest::plot {

// Inverse of training::write_loss_csv.  Throws IoError for an unreadable
// file and ValidationError for a malformed row.
std::vector<training::LossRecord> read_loss_csv(const std::string& path);

// One polyline per loss name on a log-scaled value axis.
std::string loss_curves_svg(const std::vector<training::LossRecord>& history,
                            const std::string& title);

// A row of stick figures at evenly spaced frames, joints placed by forward
// kinematics and projected onto the x/y plane.
std::string keyframes_svg(const motion::PoseSequence& pose, const motion::SkeletonSpec& skeleton,
                          int n_keyframes = 6);

}  // namespace cogest::plot

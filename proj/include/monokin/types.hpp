#pragma once

#include <Eigen/Core>
#include <vector>

namespace monokin {

// Body shape coefficients (beta). Fixed dimensionality of 10.
struct BodyShape {
    static constexpr int kDim = 10;
    Eigen::Matrix<double, kDim, 1> coeffs = Eigen::Matrix<double, kDim, 1>::Zero();

    void validate() const;  // throws ValidationError on non-finite entries
};

// One frame of global pose: per-joint local rotations (theta), root
// translation (tau) and root orientation (Gamma), all axis-angle / meters.
// joint_rotations holds one entry per non-root segment of the template.
struct PoseFrame {
    Eigen::Vector3d root_orientation = Eigen::Vector3d::Zero();
    Eigen::Vector3d root_translation = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> joint_rotations;

    static PoseFrame identity(int joint_count);
    void canonicalize();          // wrap all axis-angle magnitudes below 2*pi
    void validate() const;        // finite + canonical magnitudes
};

struct PoseSequence {
    std::vector<PoseFrame> frames;
    double frame_rate = 0.0;  // Hz

    void validate() const;  // >= 2 frames, frame_rate > 0, uniform joint counts
};

}  // namespace monokin

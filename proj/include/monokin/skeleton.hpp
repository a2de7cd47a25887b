#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "monokin/types.hpp"

namespace monokin {

struct SkeletonSegment {
    std::string name;
    int parent = -1;                 // -1 only for the root (index 0)
    Eigen::Vector3d rest_offset = Eigen::Vector3d::Zero();  // in parent frame, m
    // Row d is d(offset)/d(beta_d); offsets are affine in beta.
    Eigen::Matrix<double, BodyShape::kDim, 3> shape_basis =
        Eigen::Matrix<double, BodyShape::kDim, 3>::Zero();
};

struct AnchorDef {
    int segment = 0;
    std::string name;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // in segment frame, m
};

// Parametric articulated skeleton: segments with shape-blended offsets,
// keypoint anchors matching the 2D observation format, and 38 surface
// marker anchors. Immutable once built; FK is a pure function of it.
class SkeletonTemplate {
  public:
    static constexpr int kMarkerCount = 38;

    int format_version = 1;
    std::vector<SkeletonSegment> segments;
    std::vector<AnchorDef> keypoint_anchors;
    std::vector<AnchorDef> marker_anchors;
    PoseFrame standing_pose;
    std::string headtop_keypoint;               // stature reference, top
    std::vector<std::string> sole_keypoints;    // stature reference, floor level

    void validate() const;  // tree structure, marker count, anchor ranges
    int joint_count() const { return static_cast<int>(segments.size()) - 1; }
    int segment_index(const std::string& name) const;   // -1 if absent
    int keypoint_index(const std::string& name) const;  // -1 if absent
    int marker_index(const std::string& name) const;    // -1 if absent
    Eigen::Vector3d segment_offset(int segment, const BodyShape& shape) const;
};

struct SegmentFrame {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& local) const {
        return origin + rotation * local;
    }
};

// World transforms for every segment. The root transform composes
// (Gamma, tau) with the shape-adjusted rest offset of the pelvis.
std::vector<SegmentFrame> forward_kinematics(const BodyShape& shape,
                                             const PoseFrame& frame,
                                             const SkeletonTemplate& tmpl);

// The 38 virtual surface markers for the given pose.
std::vector<Eigen::Vector3d> extract_markers(const BodyShape& shape,
                                             const PoseFrame& frame,
                                             const SkeletonTemplate& tmpl);

// Markers at the template's default standing pose.
std::vector<Eigen::Vector3d> static_markers(const BodyShape& shape,
                                            const SkeletonTemplate& tmpl);

// Stature in the standing pose: head-top anchor height above the sole
// plane (mean height of the designated sole anchors).
double model_height(const BodyShape& shape, const SkeletonTemplate& tmpl);

// FK with reverse-mode accumulation: evaluate world points, feed back
// dL/d(point) contributions, then read gradients w.r.t. the frame's
// design variables (Gamma, tau, theta) and the shape coefficients.
class FrameKinematics {
  public:
    FrameKinematics(const SkeletonTemplate& tmpl, const BodyShape& shape,
                    const PoseFrame& frame);

    const std::vector<SegmentFrame>& segment_frames() const { return frames_; }
    Eigen::Vector3d point(int segment, const Eigen::Vector3d& local) const {
        return frames_[static_cast<size_t>(segment)].apply(local);
    }
    Eigen::Vector3d point(const AnchorDef& a) const { return point(a.segment, a.offset); }

    void add_point_gradient(int segment, const Eigen::Vector3d& local,
                            const Eigen::Vector3d& grad);

    // Accumulated chain-rule gradients. g_joints has joint_count() entries.
    void backprop(Eigen::Vector3d& g_gamma, Eigen::Vector3d& g_tau,
                  std::vector<Eigen::Vector3d>& g_joints,
                  Eigen::Matrix<double, BodyShape::kDim, 1>* g_beta = nullptr) const;

  private:
    const SkeletonTemplate& tmpl_;
    PoseFrame pose_;
    std::vector<SegmentFrame> frames_;
    std::vector<Eigen::Vector3d> grad_sum_;          // per segment: sum of g
    std::vector<Eigen::Matrix3d> grad_outer_;        // per segment: sum of g * p^T
    std::vector<Eigen::Matrix<double, 3, BodyShape::kDim>> beta_jac_;  // d(origin)/d(beta)
};

}  // namespace monokin

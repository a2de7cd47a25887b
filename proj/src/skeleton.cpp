#include "monokin/skeleton.hpp"

#include <algorithm>

#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

void SkeletonTemplate::validate() const {
    if (segments.empty()) throw ValidationError("skeleton template has no segments");
    if (segments[0].parent != -1)
        throw ValidationError("segment 0 must be the root (parent = none)");
    const int n = static_cast<int>(segments.size());
    for (int i = 1; i < n; ++i) {
        const int p = segments[static_cast<size_t>(i)].parent;
        // Parents must precede children: rules out cycles and forward refs.
        if (p < 0 || p >= i)
            throw ValidationError("segment '" + segments[static_cast<size_t>(i)].name +
                                  "' has invalid parent index " + std::to_string(p));
    }
    if (static_cast<int>(marker_anchors.size()) != kMarkerCount)
        throw ValidationError("template must define exactly " +
                              std::to_string(kMarkerCount) + " marker anchors, got " +
                              std::to_string(marker_anchors.size()));
    auto check_anchor = [&](const AnchorDef& a, const char* kind) {
        if (a.segment < 0 || a.segment >= n)
            throw ValidationError(std::string(kind) + " anchor '" + a.name +
                                  "' references invalid segment");
        if (!a.offset.allFinite())
            throw ValidationError(std::string(kind) + " anchor '" + a.name +
                                  "' has non-finite offset");
    };
    for (const auto& a : keypoint_anchors) check_anchor(a, "keypoint");
    for (const auto& a : marker_anchors) check_anchor(a, "marker");
    if (keypoint_index(headtop_keypoint) < 0)
        throw ValidationError("head-top keypoint '" + headtop_keypoint + "' not defined");
    for (const auto& s : sole_keypoints)
        if (keypoint_index(s) < 0)
            throw ValidationError("sole keypoint '" + s + "' not defined");
    if (sole_keypoints.empty()) throw ValidationError("no sole keypoints designated");
    if (static_cast<int>(standing_pose.joint_rotations.size()) != joint_count())
        throw ValidationError("standing pose joint count does not match template");
}

int SkeletonTemplate::segment_index(const std::string& name) const {
    for (size_t i = 0; i < segments.size(); ++i)
        if (segments[i].name == name) return static_cast<int>(i);
    return -1;
}

int SkeletonTemplate::keypoint_index(const std::string& name) const {
    for (size_t i = 0; i < keypoint_anchors.size(); ++i)
        if (keypoint_anchors[i].name == name) return static_cast<int>(i);
    return -1;
}

int SkeletonTemplate::marker_index(const std::string& name) const {
    for (size_t i = 0; i < marker_anchors.size(); ++i)
        if (marker_anchors[i].name == name) return static_cast<int>(i);
    return -1;
}

Eigen::Vector3d SkeletonTemplate::segment_offset(int segment, const BodyShape& shape) const {
    const auto& s = segments[static_cast<size_t>(segment)];
    return s.rest_offset + s.shape_basis.transpose() * shape.coeffs;
}

std::vector<SegmentFrame> forward_kinematics(const BodyShape& shape,
                                             const PoseFrame& frame,
                                             const SkeletonTemplate& tmpl) {
    shape.validate();
    if (static_cast<int>(frame.joint_rotations.size()) != tmpl.joint_count())
        throw ValidationError("pose frame joint count does not match template");
    const size_t n = tmpl.segments.size();
    std::vector<SegmentFrame> out(n);
    out[0].rotation = axis_angle_to_matrix(frame.root_orientation);
    out[0].origin = frame.root_translation + tmpl.segment_offset(0, shape);
    for (size_t i = 1; i < n; ++i) {
        const auto& parent = out[static_cast<size_t>(tmpl.segments[i].parent)];
        out[i].rotation = parent.rotation *
                          axis_angle_to_matrix(frame.joint_rotations[i - 1]);
        out[i].origin = parent.origin +
                        parent.rotation * tmpl.segment_offset(static_cast<int>(i), shape);
    }
    return out;
}

std::vector<Eigen::Vector3d> extract_markers(const BodyShape& shape,
                                             const PoseFrame& frame,
                                             const SkeletonTemplate& tmpl) {
    const auto frames = forward_kinematics(shape, frame, tmpl);
    std::vector<Eigen::Vector3d> out;
    out.reserve(tmpl.marker_anchors.size());
    for (const auto& a : tmpl.marker_anchors)
        out.push_back(frames[static_cast<size_t>(a.segment)].apply(a.offset));
    return out;
}

std::vector<Eigen::Vector3d> static_markers(const BodyShape& shape,
                                            const SkeletonTemplate& tmpl) {
    return extract_markers(shape, tmpl.standing_pose, tmpl);
}

double model_height(const BodyShape& shape, const SkeletonTemplate& tmpl) {
    const auto frames = forward_kinematics(shape, tmpl.standing_pose, tmpl);
    const auto& top = tmpl.keypoint_anchors[static_cast<size_t>(
        tmpl.keypoint_index(tmpl.headtop_keypoint))];
    const double top_y = frames[static_cast<size_t>(top.segment)].apply(top.offset).y();
    double sole_y = 0.0;
    for (const auto& name : tmpl.sole_keypoints) {
        const auto& a =
            tmpl.keypoint_anchors[static_cast<size_t>(tmpl.keypoint_index(name))];
        sole_y += frames[static_cast<size_t>(a.segment)].apply(a.offset).y();
    }
    sole_y /= static_cast<double>(tmpl.sole_keypoints.size());
    return top_y - sole_y;
}

FrameKinematics::FrameKinematics(const SkeletonTemplate& tmpl, const BodyShape& shape,
                                 const PoseFrame& frame)
    : tmpl_(tmpl), pose_(frame), frames_(forward_kinematics(shape, frame, tmpl)) {
    const size_t n = tmpl.segments.size();
    grad_sum_.assign(n, Eigen::Vector3d::Zero());
    grad_outer_.assign(n, Eigen::Matrix3d::Zero());
    beta_jac_.resize(n);
    beta_jac_[0] = tmpl.segments[0].shape_basis.transpose();
    for (size_t i = 1; i < n; ++i) {
        const int p = tmpl.segments[i].parent;
        beta_jac_[i] = beta_jac_[static_cast<size_t>(p)] +
                       frames_[static_cast<size_t>(p)].rotation *
                           tmpl.segments[i].shape_basis.transpose();
    }
}

void FrameKinematics::add_point_gradient(int segment, const Eigen::Vector3d& local,
                                         const Eigen::Vector3d& grad) {
    const Eigen::Vector3d p = point(segment, local);
    grad_sum_[static_cast<size_t>(segment)] += grad;
    grad_outer_[static_cast<size_t>(segment)] += grad * p.transpose();
}

void FrameKinematics::backprop(Eigen::Vector3d& g_gamma, Eigen::Vector3d& g_tau,
                               std::vector<Eigen::Vector3d>& g_joints,
                               Eigen::Matrix<double, BodyShape::kDim, 1>* g_beta) const {
    const size_t n = tmpl_.segments.size();
    // Subtree totals, accumulated leaf-to-root (parents precede children).
    std::vector<Eigen::Vector3d> sum_tot(grad_sum_);
    std::vector<Eigen::Matrix3d> outer_tot(grad_outer_);
    for (size_t i = n; i-- > 1;) {
        const size_t p = static_cast<size_t>(tmpl_.segments[i].parent);
        sum_tot[p] += sum_tot[i];
        outer_tot[p] += outer_tot[i];
    }

    // A world point on a descendant of joint j is p = o_j + R_j * q with q
    // fixed, so dL/d(theta_j,a) = tr(R_par * dA_a * R_j^T * K_j) with
    // K_j = sum (p - o_j) g^T over the subtree.
    auto joint_gradient = [&](size_t seg, const Eigen::Matrix3d& parent_rot,
                              const Eigen::Vector3d& aa) {
        const Eigen::Matrix3d k = outer_tot[seg].transpose() -
                                  frames_[seg].origin * sum_tot[seg].transpose();
        const Eigen::Matrix3d m =
            frames_[seg].rotation.transpose() * k * parent_rot;
        const auto jac = axis_angle_jacobian(aa);
        Eigen::Vector3d g;
        for (int a = 0; a < 3; ++a) g[a] = m.cwiseProduct(jac[a].transpose()).sum();
        return g;
    };

    g_tau = sum_tot[0];
    g_gamma = joint_gradient(0, Eigen::Matrix3d::Identity(), pose_.root_orientation);
    g_joints.assign(static_cast<size_t>(tmpl_.joint_count()), Eigen::Vector3d::Zero());
    for (size_t i = 1; i < n; ++i) {
        const size_t p = static_cast<size_t>(tmpl_.segments[i].parent);
        g_joints[i - 1] =
            joint_gradient(i, frames_[p].rotation, pose_.joint_rotations[i - 1]);
    }
    if (g_beta) {
        g_beta->setZero();
        for (size_t i = 0; i < n; ++i)
            *g_beta += beta_jac_[i].transpose() * grad_sum_[i];
    }
}

}  // namespace monokin

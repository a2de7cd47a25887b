#include "monokin/objective.hpp"

#include <cmath>

#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

namespace {

// Population variance anchored at the first sample: exact zero for
// bitwise-constant input and better conditioned for large offsets.
double shifted_variance(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double anchor = values[0];
    double mean = 0.0;
    for (double v : values) mean += v - anchor;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) {
        const double d = (v - anchor) - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(values.size());
}

// dv_f/dx_g factors of the finite-difference velocity scheme: central in
// the interior, one-sided at the ends.
struct VelocityStencil {
    int prev, next;     // frame indices the velocity reads
    double coeff;       // v = coeff * (x[next] - x[prev])
};

VelocityStencil velocity_stencil(int f, int frame_count, double rate) {
    if (f == 0) return {0, 1, rate};
    if (f == frame_count - 1) return {frame_count - 2, frame_count - 1, rate};
    return {f - 1, f + 1, 0.5 * rate};
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const Eigen::Vector3d& cam,
                                                const CameraIntrinsics& intr) {
    Eigen::Matrix<double, 2, 3> j;
    const double iz = 1.0 / cam.z();
    j << intr.fx * iz, 0.0, -intr.fx * cam.x() * iz * iz,
        0.0, intr.fy * iz, -intr.fy * cam.y() * iz * iz;
    return j;
}

}  // namespace

std::vector<ContactBout> segment_bouts(const ObservationSet& obs,
                                       const BoutOptions& opts) {
    std::vector<ContactBout> bouts;
    const int frames = obs.frame_count();
    for (int c = 0; c < kContactChannelCount; ++c) {
        int start = -1;
        for (int f = 0; f <= frames; ++f) {
            const bool in_contact =
                f < frames &&
                obs.frames[static_cast<size_t>(f)].contact_probability[static_cast<size_t>(c)] >=
                    opts.threshold;
            if (in_contact && start < 0) start = f;
            if (!in_contact && start >= 0) {
                if (f - start >= opts.min_bout_frames)
                    bouts.push_back({static_cast<ContactChannel>(c), start, f - 1});
                start = -1;
            }
        }
    }
    return bouts;
}

std::array<int, kContactChannelCount> contact_keypoint_indices(
    const SkeletonTemplate& tmpl) {
    std::array<int, kContactChannelCount> out{};
    for (int c = 0; c < kContactChannelCount; ++c) {
        const int idx =
            tmpl.keypoint_index(contact_channel_name(static_cast<ContactChannel>(c)));
        if (idx < 0)
            throw ValidationError(std::string("template lacks contact keypoint '") +
                                  contact_channel_name(static_cast<ContactChannel>(c)) + "'");
        out[static_cast<size_t>(c)] = idx;
    }
    return out;
}

double l_repr(const std::vector<std::vector<ProjectedPoint>>& projected,
              const ObservationSet& obs, int frame_begin, int frame_end) {
    if (frame_begin < 0 || frame_end > obs.frame_count() || frame_begin >= frame_end)
        throw ValidationError("invalid frame range for reprojection loss");
    const int n = obs.keypoint_count();
    double acc = 0.0;
    for (int f = frame_begin; f < frame_end; ++f) {
        const auto& proj = projected[static_cast<size_t>(f)];
        const auto& seen = obs.frames[static_cast<size_t>(f)].keypoints;
        if (static_cast<int>(proj.size()) != n)
            throw ValidationError("projected keypoint count does not match observations");
        for (int i = 0; i < n; ++i) {
            const auto& p = proj[static_cast<size_t>(i)];
            const double w = seen[static_cast<size_t>(i)].confidence;
            acc += w * (p.behind ? kBehindCameraPenalty
                                 : (p.pixel - seen[static_cast<size_t>(i)].pixel).squaredNorm());
        }
    }
    return acc / (static_cast<double>(frame_end - frame_begin) * n);
}

double l_height(const BodyShape& shape, double subject_height,
                const SkeletonTemplate& tmpl) {
    const double d = subject_height - model_height(shape, tmpl);
    return d * d;
}

double l_beta(const BodyShape& shape, const BodyShape& reference) {
    return (shape.coeffs - reference.coeffs).squaredNorm();
}

double l_cam(const CameraExtrinsics& extr, const CameraExtrinsics& stage1) {
    return (extr.rotation - stage1.rotation).squaredNorm() +
           (extr.translation - stage1.translation).squaredNorm();
}

double l_foot_vel(const FootPoints& foot_points, const ObservationSet& obs,
                  double frame_rate) {
    const int frames = static_cast<int>(foot_points.size());
    if (frames < 2) throw ValidationError("foot velocity loss needs >= 2 frames");
    double acc = 0.0;
    for (int c = 0; c < kContactChannelCount; ++c) {
        for (int f = 0; f < frames; ++f) {
            const auto st = velocity_stencil(f, frames, frame_rate);
            const Eigen::Vector3d v =
                st.coeff * (foot_points[static_cast<size_t>(st.next)][static_cast<size_t>(c)] -
                            foot_points[static_cast<size_t>(st.prev)][static_cast<size_t>(c)]);
            acc += obs.frames[static_cast<size_t>(f)].contact_probability[static_cast<size_t>(c)] *
                   v.squaredNorm();
        }
    }
    return acc / static_cast<double>(frames);
}

double l_foot_slide(const FootPoints& foot_points, const std::vector<ContactBout>& bouts) {
    if (bouts.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& bout : bouts) {
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<double> xs;
            xs.reserve(static_cast<size_t>(bout.length()));
            for (int f = bout.start; f <= bout.end; ++f)
                xs.push_back(foot_points[static_cast<size_t>(f)]
                                        [static_cast<size_t>(bout.channel)][axis]);
            acc += shifted_variance(xs);
        }
    }
    return acc / static_cast<double>(bouts.size());
}

double l_flat(const FootPoints& foot_points, const std::vector<ContactBout>& bouts) {
    std::vector<double> heights;
    for (const auto& bout : bouts)
        for (int f = bout.start; f <= bout.end; ++f)
            heights.push_back(
                foot_points[static_cast<size_t>(f)][static_cast<size_t>(bout.channel)].y());
    if (heights.size() < 2) return 0.0;
    return shifted_variance(heights);
}

double l_smooth(const std::vector<std::vector<Eigen::Vector3d>>& joint_points,
                double frame_rate) {
    const int frames = static_cast<int>(joint_points.size());
    if (frames < 2) throw ValidationError("smoothness loss needs >= 2 frames");
    const int joints = static_cast<int>(joint_points[0].size());
    double acc = 0.0;
    for (int j = 0; j < joints; ++j) {
        for (int f = 0; f < frames; ++f) {
            const auto st = velocity_stencil(f, frames, frame_rate);
            const Eigen::Vector3d v =
                st.coeff * (joint_points[static_cast<size_t>(st.next)][static_cast<size_t>(j)] -
                            joint_points[static_cast<size_t>(st.prev)][static_cast<size_t>(j)]);
            acc += v.squaredNorm();
        }
    }
    return acc / (static_cast<double>(frames) * joints);
}

Eigen::VectorXd ObjectiveFunction::gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(dim());
    value_and_gradient(x, g);
    for (int i = 0; i < g.size(); ++i)
        if (!std::isfinite(g[i]))
            throw NumericalError("non-finite gradient component at index " +
                                 std::to_string(i));
    return g;
}

// ---------------------------------------------------------------- stage 1

Stage1Objective::Stage1Objective(const SkeletonTemplate& tmpl, const PoseSequence& pose,
                                 const ObservationSet& obs, const CameraIntrinsics& intr,
                                 const RefinementPreset& weights,
                                 const BodyShape& reference_shape)
    : tmpl_(tmpl), pose_(pose), obs_(obs), intr_(intr), weights_(weights),
      reference_shape_(reference_shape) {
    if (static_cast<int>(tmpl.keypoint_anchors.size()) != obs.keypoint_count())
        throw ValidationError("observation keypoint count does not match template");
    if (static_cast<int>(pose.frames.size()) != obs.frame_count())
        throw ValidationError("pose sequence and observations have different frame counts");
}

Eigen::VectorXd Stage1Objective::pack(const BodyShape& shape,
                                      const CameraExtrinsics& extr) const {
    Eigen::VectorXd x(dim());
    x.head<BodyShape::kDim>() = shape.coeffs;
    x.segment<3>(BodyShape::kDim) = extr.rotation;
    x.segment<3>(BodyShape::kDim + 3) = extr.translation;
    return x;
}

void Stage1Objective::unpack(const Eigen::VectorXd& x, BodyShape& shape,
                             CameraExtrinsics& extr) const {
    shape.coeffs = x.head<BodyShape::kDim>();
    extr.rotation = x.segment<3>(BodyShape::kDim);
    extr.translation = x.segment<3>(BodyShape::kDim + 3);
}

double Stage1Objective::value(const Eigen::VectorXd& x) const {
    return evaluate(x, nullptr, nullptr);
}

double Stage1Objective::value_and_gradient(const Eigen::VectorXd& x,
                                           Eigen::VectorXd& grad) const {
    grad.resize(dim());
    return evaluate(x, &grad, nullptr);
}

LossBreakdown Stage1Objective::breakdown(const Eigen::VectorXd& x) const {
    LossBreakdown terms;
    evaluate(x, nullptr, &terms);
    return terms;
}

double Stage1Objective::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                                 LossBreakdown* terms) const {
    BodyShape shape;
    CameraExtrinsics extr;
    unpack(x, shape, extr);

    const int frames = obs_.frame_count();
    const int n = obs_.keypoint_count();
    const double denom = static_cast<double>(frames) * n;
    const Eigen::Matrix3d cam_rot = axis_angle_to_matrix(extr.rotation);
    const auto cam_rot_jac = axis_angle_jacobian(extr.rotation);

    if (grad) grad->setZero();
    Eigen::Matrix<double, BodyShape::kDim, 1> g_beta_repr;
    g_beta_repr.setZero();

    double repr = 0.0;
    for (int f = 0; f < frames; ++f) {
        const auto& pose_frame = pose_.frames[static_cast<size_t>(f)];
        FrameKinematics fk(tmpl_, shape, pose_frame);
        bool touched = false;
        for (int i = 0; i < n; ++i) {
            const auto& anchor = tmpl_.keypoint_anchors[static_cast<size_t>(i)];
            const Eigen::Vector3d world = fk.point(anchor);
            const Eigen::Vector3d cam = cam_rot * world + extr.translation;
            const double w =
                obs_.frames[static_cast<size_t>(f)].keypoints[static_cast<size_t>(i)].confidence;
            if (cam.z() <= kMinDepth) {
                repr += w * kBehindCameraPenalty;
                continue;
            }
            const Eigen::Vector2d pixel(intr_.fx * cam.x() / cam.z() + intr_.cx,
                                        intr_.fy * cam.y() / cam.z() + intr_.cy);
            const Eigen::Vector2d resid =
                pixel -
                obs_.frames[static_cast<size_t>(f)].keypoints[static_cast<size_t>(i)].pixel;
            repr += w * resid.squaredNorm();
            if (grad && w > 0.0) {
                const Eigen::Vector3d g_cam =
                    (2.0 * w / denom) * (projection_jacobian(cam, intr_).transpose() * resid);
                fk.add_point_gradient(anchor.segment, anchor.offset,
                                      cam_rot.transpose() * g_cam);
                grad->segment<3>(BodyShape::kDim + 3) += weights_.w_reprojection * g_cam;
                for (int a = 0; a < 3; ++a)
                    (*grad)[BodyShape::kDim + a] +=
                        weights_.w_reprojection * g_cam.dot(cam_rot_jac[static_cast<size_t>(a)] * world);
                touched = true;
            }
        }
        if (grad && touched) {
            Eigen::Vector3d g_gamma, g_tau;
            std::vector<Eigen::Vector3d> g_joints;
            Eigen::Matrix<double, BodyShape::kDim, 1> g_beta;
            fk.backprop(g_gamma, g_tau, g_joints, &g_beta);
            g_beta_repr += g_beta;
        }
    }
    repr /= denom;

    const double height_val = l_height(shape, obs_.subject_height, tmpl_);
    const double beta_val = l_beta(shape, reference_shape_);

    if (grad) {
        grad->head<BodyShape::kDim>() += weights_.w_reprojection * g_beta_repr;

        // d(stature)/d(beta) via the standing pose: +1 on the head-top
        // anchor, -1/k on each sole anchor.
        FrameKinematics standing(tmpl_, shape, tmpl_.standing_pose);
        const auto& top = tmpl_.keypoint_anchors[static_cast<size_t>(
            tmpl_.keypoint_index(tmpl_.headtop_keypoint))];
        standing.add_point_gradient(top.segment, top.offset, Eigen::Vector3d(0, 1, 0));
        const double inv = 1.0 / static_cast<double>(tmpl_.sole_keypoints.size());
        for (const auto& name : tmpl_.sole_keypoints) {
            const auto& a =
                tmpl_.keypoint_anchors[static_cast<size_t>(tmpl_.keypoint_index(name))];
            standing.add_point_gradient(a.segment, a.offset, Eigen::Vector3d(0, -inv, 0));
        }
        Eigen::Vector3d g_gamma, g_tau;
        std::vector<Eigen::Vector3d> g_joints;
        Eigen::Matrix<double, BodyShape::kDim, 1> dh_dbeta;
        standing.backprop(g_gamma, g_tau, g_joints, &dh_dbeta);
        const double h = model_height(shape, tmpl_);
        grad->head<BodyShape::kDim>() +=
            weights_.w_height * (-2.0 * (obs_.subject_height - h)) * dh_dbeta;

        grad->head<BodyShape::kDim>() +=
            weights_.w_shape * 2.0 * (shape.coeffs - reference_shape_.coeffs);
    }
    if (terms) {
        terms->reprojection = repr;
        terms->height = height_val;
        terms->shape = beta_val;
    }
    return weights_.w_reprojection * repr + weights_.w_height * height_val +
           weights_.w_shape * beta_val;
}

// ---------------------------------------------------------------- stage 2

Stage2Objective::Stage2Objective(const SkeletonTemplate& tmpl, const ObservationSet& obs,
                                 const CameraIntrinsics& intr, const BodyShape& shape,
                                 const CameraExtrinsics& stage1_extrinsics,
                                 std::vector<ContactBout> bouts,
                                 const RefinementPreset& weights)
    : tmpl_(tmpl), obs_(obs), intr_(intr), shape_(shape),
      stage1_extrinsics_(stage1_extrinsics), bouts_(std::move(bouts)), weights_(weights),
      contact_keypoint_(contact_keypoint_indices(tmpl)) {
    if (static_cast<int>(tmpl.keypoint_anchors.size()) != obs.keypoint_count())
        throw ValidationError("observation keypoint count does not match template");
    for (const auto& b : bouts_)
        if (b.start < 0 || b.end >= obs.frame_count() || b.start > b.end)
            throw ValidationError("contact bout outside the observed frame range");
}

Eigen::VectorXd Stage2Objective::pack(const PoseSequence& pose,
                                      const CameraExtrinsics& extr) const {
    if (static_cast<int>(pose.frames.size()) != frame_count())
        throw ValidationError("pose frame count does not match observations");
    Eigen::VectorXd x(dim());
    x.segment<3>(0) = extr.rotation;
    x.segment<3>(3) = extr.translation;
    const int jc = tmpl_.joint_count();
    for (int f = 0; f < frame_count(); ++f) {
        const auto& frame = pose.frames[static_cast<size_t>(f)];
        if (static_cast<int>(frame.joint_rotations.size()) != jc)
            throw ValidationError("pose frame joint count does not match template");
        int base = 6 + f * per_frame_dim();
        x.segment<3>(base) = frame.root_orientation;
        x.segment<3>(base + 3) = frame.root_translation;
        for (int j = 0; j < jc; ++j)
            x.segment<3>(base + 6 + 3 * j) = frame.joint_rotations[static_cast<size_t>(j)];
    }
    return x;
}

void Stage2Objective::unpack(const Eigen::VectorXd& x, PoseSequence& pose,
                             CameraExtrinsics& extr) const {
    extr.rotation = x.segment<3>(0);
    extr.translation = x.segment<3>(3);
    const int jc = tmpl_.joint_count();
    pose.frame_rate = obs_.frame_rate;
    pose.frames.assign(static_cast<size_t>(frame_count()), PoseFrame::identity(jc));
    for (int f = 0; f < frame_count(); ++f) {
        auto& frame = pose.frames[static_cast<size_t>(f)];
        int base = 6 + f * per_frame_dim();
        frame.root_orientation = x.segment<3>(base);
        frame.root_translation = x.segment<3>(base + 3);
        for (int j = 0; j < jc; ++j)
            frame.joint_rotations[static_cast<size_t>(j)] = x.segment<3>(base + 6 + 3 * j);
    }
}

double Stage2Objective::value(const Eigen::VectorXd& x) const {
    return evaluate(x, nullptr, nullptr);
}

double Stage2Objective::value_and_gradient(const Eigen::VectorXd& x,
                                           Eigen::VectorXd& grad) const {
    grad.resize(dim());
    return evaluate(x, &grad, nullptr);
}

LossBreakdown Stage2Objective::breakdown(const Eigen::VectorXd& x) const {
    LossBreakdown terms;
    evaluate(x, nullptr, &terms);
    return terms;
}

double Stage2Objective::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                                 LossBreakdown* terms) const {
    PoseSequence pose;
    CameraExtrinsics extr;
    unpack(x, pose, extr);

    const int frames = frame_count();
    const int n = obs_.keypoint_count();
    const int segs = static_cast<int>(tmpl_.segments.size());
    const double rate = obs_.frame_rate;
    const double repr_denom = static_cast<double>(frames) * n;
    const Eigen::Matrix3d cam_rot = axis_angle_to_matrix(extr.rotation);
    const auto cam_rot_jac = axis_angle_jacobian(extr.rotation);

    // Forward pass: world keypoints and segment origins per frame.
    std::vector<FrameKinematics> fks;
    fks.reserve(static_cast<size_t>(frames));
    std::vector<std::vector<Eigen::Vector3d>> kp(static_cast<size_t>(frames));
    std::vector<std::vector<Eigen::Vector3d>> joints(static_cast<size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        fks.emplace_back(tmpl_, shape_, pose.frames[static_cast<size_t>(f)]);
        auto& fk = fks.back();
        auto& k = kp[static_cast<size_t>(f)];
        k.reserve(static_cast<size_t>(n));
        for (const auto& anchor : tmpl_.keypoint_anchors) k.push_back(fk.point(anchor));
        auto& jo = joints[static_cast<size_t>(f)];
        jo.reserve(static_cast<size_t>(segs));
        for (int s = 0; s < segs; ++s)
            jo.push_back(fk.segment_frames()[static_cast<size_t>(s)].origin);
    }
    FootPoints foot(static_cast<size_t>(frames));
    for (int f = 0; f < frames; ++f)
        for (int c = 0; c < kContactChannelCount; ++c)
            foot[static_cast<size_t>(f)][static_cast<size_t>(c)] =
                kp[static_cast<size_t>(f)]
                  [static_cast<size_t>(contact_keypoint_[static_cast<size_t>(c)])];

    // Per-point gradient accumulators (world space).
    std::vector<std::vector<Eigen::Vector3d>> g_kp, g_joint;
    if (grad) {
        grad->setZero();
        g_kp.assign(static_cast<size_t>(frames),
                    std::vector<Eigen::Vector3d>(static_cast<size_t>(n),
                                                 Eigen::Vector3d::Zero()));
        g_joint.assign(static_cast<size_t>(frames),
                       std::vector<Eigen::Vector3d>(static_cast<size_t>(segs),
                                                    Eigen::Vector3d::Zero()));
    }

    // Reprojection.
    double repr = 0.0;
    for (int f = 0; f < frames; ++f) {
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d& world = kp[static_cast<size_t>(f)][static_cast<size_t>(i)];
            const Eigen::Vector3d cam = cam_rot * world + extr.translation;
            const double w =
                obs_.frames[static_cast<size_t>(f)].keypoints[static_cast<size_t>(i)].confidence;
            if (cam.z() <= kMinDepth) {
                repr += w * kBehindCameraPenalty;
                continue;
            }
            const Eigen::Vector2d pixel(intr_.fx * cam.x() / cam.z() + intr_.cx,
                                        intr_.fy * cam.y() / cam.z() + intr_.cy);
            const Eigen::Vector2d resid =
                pixel -
                obs_.frames[static_cast<size_t>(f)].keypoints[static_cast<size_t>(i)].pixel;
            repr += w * resid.squaredNorm();
            if (grad && w > 0.0) {
                const Eigen::Vector3d g_cam =
                    (2.0 * w / repr_denom) *
                    (projection_jacobian(cam, intr_).transpose() * resid);
                g_kp[static_cast<size_t>(f)][static_cast<size_t>(i)] +=
                    weights_.w_reprojection * (cam_rot.transpose() * g_cam);
                grad->segment<3>(3) += weights_.w_reprojection * g_cam;
                for (int a = 0; a < 3; ++a)
                    (*grad)[a] += weights_.w_reprojection *
                                  g_cam.dot(cam_rot_jac[static_cast<size_t>(a)] * world);
            }
        }
    }
    repr /= repr_denom;

    // Camera regularization toward the stage-1 extrinsics.
    const double cam_val = l_cam(extr, stage1_extrinsics_);
    if (grad) {
        grad->segment<3>(0) +=
            weights_.w_camera * 2.0 * (extr.rotation - stage1_extrinsics_.rotation);
        grad->segment<3>(3) +=
            weights_.w_camera * 2.0 * (extr.translation - stage1_extrinsics_.translation);
    }

    // Contact-point velocity, probability weighted.
    double foot_vel = 0.0;
    for (int c = 0; c < kContactChannelCount; ++c) {
        const int key = contact_keypoint_[static_cast<size_t>(c)];
        for (int f = 0; f < frames; ++f) {
            const auto st = velocity_stencil(f, frames, rate);
            const Eigen::Vector3d v =
                st.coeff * (foot[static_cast<size_t>(st.next)][static_cast<size_t>(c)] -
                            foot[static_cast<size_t>(st.prev)][static_cast<size_t>(c)]);
            const double p =
                obs_.frames[static_cast<size_t>(f)].contact_probability[static_cast<size_t>(c)];
            foot_vel += p * v.squaredNorm();
            if (grad && p > 0.0) {
                const Eigen::Vector3d g =
                    weights_.w_contact_velocity * (2.0 * p / frames) * st.coeff * v;
                g_kp[static_cast<size_t>(st.next)][static_cast<size_t>(key)] += g;
                g_kp[static_cast<size_t>(st.prev)][static_cast<size_t>(key)] -= g;
            }
        }
    }
    foot_vel /= static_cast<double>(frames);

    // In-bout positional variance (slide) per bout.
    double slide = 0.0;
    if (!bouts_.empty()) {
        const double bout_norm = 1.0 / static_cast<double>(bouts_.size());
        for (const auto& bout : bouts_) {
            const int key = contact_keypoint_[static_cast<size_t>(bout.channel)];
            const int len = bout.length();
            const Eigen::Vector3d anchor =
                foot[static_cast<size_t>(bout.start)][static_cast<size_t>(bout.channel)];
            Eigen::Vector3d mean = Eigen::Vector3d::Zero();
            for (int f = bout.start; f <= bout.end; ++f)
                mean += foot[static_cast<size_t>(f)][static_cast<size_t>(bout.channel)] - anchor;
            mean /= static_cast<double>(len);
            for (int f = bout.start; f <= bout.end; ++f) {
                const Eigen::Vector3d d =
                    (foot[static_cast<size_t>(f)][static_cast<size_t>(bout.channel)] - anchor) -
                    mean;
                slide += bout_norm * d.squaredNorm() / len;
                if (grad)
                    g_kp[static_cast<size_t>(f)][static_cast<size_t>(key)] +=
                        weights_.w_contact_position * bout_norm * (2.0 / len) * d;
            }
        }
    }

    // Pooled vertical variance over all in-bout frames (flat floor).
    double flat = 0.0;
    const bool use_flat = weights_.w_flat_floor.has_value();
    if (use_flat) {
        int m = 0;
        for (const auto& b : bouts_) m += b.length();
        if (m >= 2) {
            const double anchor =
                foot[static_cast<size_t>(bouts_[0].start)][static_cast<size_t>(bouts_[0].channel)]
                    .y();
            double mean = 0.0;
            for (const auto& b : bouts_)
                for (int f = b.start; f <= b.end; ++f)
                    mean +=
                        foot[static_cast<size_t>(f)][static_cast<size_t>(b.channel)].y() - anchor;
            mean /= static_cast<double>(m);
            for (const auto& b : bouts_) {
                const int key = contact_keypoint_[static_cast<size_t>(b.channel)];
                for (int f = b.start; f <= b.end; ++f) {
                    const double d =
                        (foot[static_cast<size_t>(f)][static_cast<size_t>(b.channel)].y() -
                         anchor) -
                        mean;
                    flat += d * d / m;
                    if (grad)
                        g_kp[static_cast<size_t>(f)][static_cast<size_t>(key)].y() +=
                            *weights_.w_flat_floor * (2.0 / m) * d;
                }
            }
        }
    }

    // Joint linear velocity (smoothness).
    double smooth = 0.0;
    const double smooth_denom = static_cast<double>(frames) * segs;
    for (int s = 0; s < segs; ++s) {
        for (int f = 0; f < frames; ++f) {
            const auto st = velocity_stencil(f, frames, rate);
            const Eigen::Vector3d v =
                st.coeff * (joints[static_cast<size_t>(st.next)][static_cast<size_t>(s)] -
                            joints[static_cast<size_t>(st.prev)][static_cast<size_t>(s)]);
            smooth += v.squaredNorm();
            if (grad) {
                const Eigen::Vector3d g =
                    weights_.w_smoothness * (2.0 / smooth_denom) * st.coeff * v;
                g_joint[static_cast<size_t>(st.next)][static_cast<size_t>(s)] += g;
                g_joint[static_cast<size_t>(st.prev)][static_cast<size_t>(s)] -= g;
            }
        }
    }
    smooth /= smooth_denom;

    // Backprop accumulated point gradients into each frame's design block.
    if (grad) {
        for (int f = 0; f < frames; ++f) {
            auto& fk = fks[static_cast<size_t>(f)];
            for (int i = 0; i < n; ++i) {
                const Eigen::Vector3d& g = g_kp[static_cast<size_t>(f)][static_cast<size_t>(i)];
                if (g.isZero(0.0)) continue;
                const auto& anchor = tmpl_.keypoint_anchors[static_cast<size_t>(i)];
                fk.add_point_gradient(anchor.segment, anchor.offset, g);
            }
            for (int s = 0; s < segs; ++s) {
                const Eigen::Vector3d& g =
                    g_joint[static_cast<size_t>(f)][static_cast<size_t>(s)];
                if (g.isZero(0.0)) continue;
                fk.add_point_gradient(s, Eigen::Vector3d::Zero(), g);
            }
            Eigen::Vector3d g_gamma, g_tau;
            std::vector<Eigen::Vector3d> g_joints_aa;
            fk.backprop(g_gamma, g_tau, g_joints_aa, nullptr);
            const int base = 6 + f * per_frame_dim();
            grad->segment<3>(base) += g_gamma;
            grad->segment<3>(base + 3) += g_tau;
            for (size_t j = 0; j < g_joints_aa.size(); ++j)
                grad->segment<3>(base + 6 + 3 * static_cast<int>(j)) += g_joints_aa[j];
        }
    }

    if (terms) {
        terms->reprojection = repr;
        terms->camera = cam_val;
        terms->foot_velocity = foot_vel;
        terms->foot_slide = slide;
        terms->flat_floor = flat;
        terms->smoothness = smooth;
    }
    double total = weights_.w_reprojection * repr + weights_.w_camera * cam_val +
                   weights_.w_contact_velocity * foot_vel +
                   weights_.w_contact_position * slide + weights_.w_smoothness * smooth;
    if (use_flat) total += *weights_.w_flat_floor * flat;
    return total;
}

}  // namespace monokin

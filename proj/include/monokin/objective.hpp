#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "monokin/camera.hpp"
#include "monokin/observations.hpp"
#include "monokin/presets.hpp"
#include "monokin/skeleton.hpp"

namespace monokin {

// Finite penalty (px^2) replacing the reprojection residual of a point
// that falls behind the camera; constant, so it clamps the gradient.
inline constexpr double kBehindCameraPenalty = 1e6;

struct BoutOptions {
    double threshold = 0.5;
    int min_bout_frames = 3;
};

// Maximal runs of frames with contact probability >= threshold, per
// channel; runs shorter than min_bout_frames are discarded.
std::vector<ContactBout> segment_bouts(const ObservationSet& obs,
                                       const BoutOptions& opts = {});

// Per-frame positions of the four contact points (heel_l, heel_r, toe_l,
// toe_r) in channel order.
using FootPoints = std::vector<std::array<Eigen::Vector3d, kContactChannelCount>>;

// ---- Loss terms (pure, value only) ----

// Confidence-weighted squared reprojection error over [frame_begin,
// frame_end), normalized by frame count x keypoint count.
double l_repr(const std::vector<std::vector<ProjectedPoint>>& projected,
              const ObservationSet& obs, int frame_begin, int frame_end);

// (subject_height - model stature)^2, m^2.
double l_height(const BodyShape& shape, double subject_height,
                const SkeletonTemplate& tmpl);

// Squared deviation from the reference shape coefficients.
double l_beta(const BodyShape& shape, const BodyShape& reference);

// Squared deviation of extrinsics from the stage-1 solution (axis-angle
// and meter components summed).
double l_cam(const CameraExtrinsics& extr, const CameraExtrinsics& stage1);

// Probability-weighted squared contact-point velocity (central
// differences, one-sided at the ends), normalized by frame count.
double l_foot_vel(const FootPoints& foot_points, const ObservationSet& obs,
                  double frame_rate);

// Per-bout positional variance of the contact point (3 axes summed,
// population variance), normalized by bout count.
double l_foot_slide(const FootPoints& foot_points,
                    const std::vector<ContactBout>& bouts);

// Pooled variance of the vertical coordinate over all in-bout frames of
// all channels: one pooled variance, forcing a common floor height.
double l_flat(const FootPoints& foot_points, const std::vector<ContactBout>& bouts);

// Mean squared joint linear velocity over joints and frames.
double l_smooth(const std::vector<std::vector<Eigen::Vector3d>>& joint_points,
                double frame_rate);

// Per-term values of the most recent objective evaluation (unweighted).
struct LossBreakdown {
    double reprojection = 0;
    double height = 0;
    double shape = 0;
    double camera = 0;
    double foot_velocity = 0;
    double foot_slide = 0;
    double flat_floor = 0;
    double smoothness = 0;
};

// Differentiation contract shared by both stages: exact analytic
// gradient of the implemented objective.
class ObjectiveFunction {
  public:
    virtual ~ObjectiveFunction() = default;
    virtual int dim() const = 0;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual double value_and_gradient(const Eigen::VectorXd& x,
                                      Eigen::VectorXd& grad) const = 0;

    // Gradient with finiteness checking; NumericalError names the first
    // offending component.
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

// Stage 1 (Eq-1 style): design vector [beta(10), cam_rot(3), cam_trans(3)],
// pose sequence held fixed.
class Stage1Objective final : public ObjectiveFunction {
  public:
    Stage1Objective(const SkeletonTemplate& tmpl, const PoseSequence& pose,
                    const ObservationSet& obs, const CameraIntrinsics& intr,
                    const RefinementPreset& weights, const BodyShape& reference_shape);

    int dim() const override { return BodyShape::kDim + 6; }
    double value(const Eigen::VectorXd& x) const override;
    double value_and_gradient(const Eigen::VectorXd& x,
                              Eigen::VectorXd& grad) const override;
    LossBreakdown breakdown(const Eigen::VectorXd& x) const;

    Eigen::VectorXd pack(const BodyShape& shape, const CameraExtrinsics& extr) const;
    void unpack(const Eigen::VectorXd& x, BodyShape& shape,
                CameraExtrinsics& extr) const;

  private:
    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                    LossBreakdown* terms) const;

    const SkeletonTemplate& tmpl_;
    const PoseSequence& pose_;
    const ObservationSet& obs_;
    const CameraIntrinsics& intr_;
    RefinementPreset weights_;
    BodyShape reference_shape_;
};

// Stage 2 (Eq-4 style): design vector [cam_rot(3), cam_trans(3), then per
// frame Gamma(3), tau(3), theta(3 x joint_count)], shape held fixed,
// contact bouts precomputed and fixed.
class Stage2Objective final : public ObjectiveFunction {
  public:
    Stage2Objective(const SkeletonTemplate& tmpl, const ObservationSet& obs,
                    const CameraIntrinsics& intr, const BodyShape& shape,
                    const CameraExtrinsics& stage1_extrinsics,
                    std::vector<ContactBout> bouts, const RefinementPreset& weights);

    int frame_count() const { return obs_.frame_count(); }
    int per_frame_dim() const { return 6 + 3 * tmpl_.joint_count(); }
    int dim() const override { return 6 + frame_count() * per_frame_dim(); }

    double value(const Eigen::VectorXd& x) const override;
    double value_and_gradient(const Eigen::VectorXd& x,
                              Eigen::VectorXd& grad) const override;
    LossBreakdown breakdown(const Eigen::VectorXd& x) const;

    Eigen::VectorXd pack(const PoseSequence& pose, const CameraExtrinsics& extr) const;
    void unpack(const Eigen::VectorXd& x, PoseSequence& pose,
                CameraExtrinsics& extr) const;

    const std::vector<ContactBout>& bouts() const { return bouts_; }

  private:
    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                    LossBreakdown* terms) const;

    const SkeletonTemplate& tmpl_;
    const ObservationSet& obs_;
    const CameraIntrinsics& intr_;
    BodyShape shape_;
    CameraExtrinsics stage1_extrinsics_;
    std::vector<ContactBout> bouts_;
    RefinementPreset weights_;
    std::array<int, kContactChannelCount> contact_keypoint_;  // channel -> keypoint id
};

// Channel -> keypoint-anchor index mapping used for the contact losses.
std::array<int, kContactChannelCount> contact_keypoint_indices(
    const SkeletonTemplate& tmpl);

}  // namespace monokin

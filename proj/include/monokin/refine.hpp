#pragma once

#include <vector>

#include "monokin/camera.hpp"
#include "monokin/objective.hpp"
#include "monokin/observations.hpp"
#include "monokin/optimizer.hpp"
#include "monokin/presets.hpp"
#include "monokin/skeleton.hpp"
#include "monokin/types.hpp"

namespace monokin {

struct RefinementInput {
    PoseSequence initial_pose;        // theta0, tau0, Gamma0
    BodyShape initial_shape;          // beta0
    CameraExtrinsics initial_extrinsics;
    ObservationSet observations;
    CameraIntrinsics intrinsics;
    RefinementPreset preset;

    void validate(const SkeletonTemplate& tmpl) const;
};

struct StageTrace {
    std::vector<double> objective;  // initial value + per accepted step
    SolveStatus status = SolveStatus::kConverged;
    int iterations = 0;
};

struct Stage1Result {
    BodyShape shape;
    CameraExtrinsics extrinsics;
    StageTrace trace;
};

struct RefinementResult {
    PoseSequence refined_pose;            // theta_opt2, tau_opt2, Gamma_opt2
    BodyShape refined_shape;              // beta_opt1
    CameraExtrinsics refined_extrinsics;  // xi_opt2
    CameraExtrinsics stage1_extrinsics;
    StageTrace stage1;
    StageTrace stage2;
    std::vector<ContactBout> bouts;
    bool converged = false;
    // Refined marker trajectories, low-pass filtered at the preset cutoff;
    // this is what inverse kinematics consumes.
    std::vector<std::vector<Eigen::Vector3d>> filtered_markers;
};

// Stage 1: solve shape + extrinsics with the pose sequence held fixed.
Stage1Result run_stage1(const SkeletonTemplate& tmpl, const RefinementInput& input,
                        const OptimizerConfig& cfg = {});

// Stage 2: refine pose sequence + extrinsics over the whole sequence
// simultaneously with the shape held fixed. Bouts come from the input
// contact probabilities and stay fixed during optimization.
RefinementResult run_stage2(const SkeletonTemplate& tmpl, const RefinementInput& input,
                            const Stage1Result& stage1,
                            const OptimizerConfig& cfg = {});

// Full pipeline: stage 1, stage 2, marker extraction, low-pass filtering.
RefinementResult refine(const SkeletonTemplate& tmpl, const RefinementInput& input,
                        const OptimizerConfig& cfg = {});

// Unfiltered marker trajectories for a pose sequence.
std::vector<std::vector<Eigen::Vector3d>> marker_trajectories(
    const SkeletonTemplate& tmpl, const BodyShape& shape, const PoseSequence& pose);

}  // namespace monokin

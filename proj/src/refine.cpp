#include "monokin/refine.hpp"

#include <cstdio>

#include "monokin/error.hpp"
#include "monokin/filters.hpp"

namespace monokin {

void RefinementInput::validate(const SkeletonTemplate& tmpl) const {
    initial_pose.validate();
    initial_shape.validate();
    initial_extrinsics.validate();
    observations.validate();
    intrinsics.validate();
    preset.validate();
    if (initial_pose.frames.size() != observations.frames.size())
        throw ValidationError("pose sequence and observations have different frame counts");
    if (static_cast<int>(initial_pose.frames[0].joint_rotations.size()) !=
        tmpl.joint_count())
        throw ValidationError("pose joint count does not match template");
    if (static_cast<int>(tmpl.keypoint_anchors.size()) != observations.keypoint_count())
        throw ValidationError("observation keypoint count does not match template");
}

namespace {

bool all_confidence_zero(const ObservationSet& obs) {
    for (const auto& f : obs.frames)
        for (const auto& k : f.keypoints)
            if (k.confidence > 0.0) return false;
    return true;
}

StageTrace trace_of(const SolveResult& solved) {
    StageTrace t;
    t.objective = solved.trace;
    t.status = solved.status;
    t.iterations = solved.iterations;
    return t;
}

}  // namespace

Stage1Result run_stage1(const SkeletonTemplate& tmpl, const RefinementInput& input,
                        const OptimizerConfig& cfg) {
    input.validate(tmpl);
    if (all_confidence_zero(input.observations))
        std::fprintf(stderr,
                     "monokin: warning: all keypoint confidences are zero; stage 1 "
                     "reduces to the height and shape priors\n");
    Stage1Objective objective(tmpl, input.initial_pose, input.observations,
                              input.intrinsics, input.preset, input.initial_shape);
    const SolveResult solved =
        minimize(objective, objective.pack(input.initial_shape, input.initial_extrinsics),
                 cfg);
    Stage1Result result;
    objective.unpack(solved.x, result.shape, result.extrinsics);
    result.trace = trace_of(solved);
    return result;
}

RefinementResult run_stage2(const SkeletonTemplate& tmpl, const RefinementInput& input,
                            const Stage1Result& stage1, const OptimizerConfig& cfg) {
    input.validate(tmpl);
    RefinementResult result;
    result.refined_shape = stage1.shape;  // beta held constant in stage 2
    result.stage1_extrinsics = stage1.extrinsics;
    result.stage1 = stage1.trace;
    result.bouts = segment_bouts(input.observations);

    Stage2Objective objective(tmpl, input.observations, input.intrinsics, stage1.shape,
                              stage1.extrinsics, result.bouts, input.preset);
    const SolveResult solved =
        minimize(objective, objective.pack(input.initial_pose, stage1.extrinsics), cfg);
    objective.unpack(solved.x, result.refined_pose, result.refined_extrinsics);
    result.stage2 = trace_of(solved);
    result.converged = stage1.trace.status != SolveStatus::kMaxIterations &&
                       solved.status != SolveStatus::kMaxIterations;
    return result;
}

std::vector<std::vector<Eigen::Vector3d>> marker_trajectories(
    const SkeletonTemplate& tmpl, const BodyShape& shape, const PoseSequence& pose) {
    std::vector<std::vector<Eigen::Vector3d>> out;
    out.reserve(pose.frames.size());
    for (const auto& frame : pose.frames)
        out.push_back(extract_markers(shape, frame, tmpl));
    return out;
}

RefinementResult refine(const SkeletonTemplate& tmpl, const RefinementInput& input,
                        const OptimizerConfig& cfg) {
    const Stage1Result stage1 = run_stage1(tmpl, input, cfg);
    RefinementResult result = run_stage2(tmpl, input, stage1, cfg);
    const auto markers =
        marker_trajectories(tmpl, result.refined_shape, result.refined_pose);
    result.filtered_markers =
        lowpass_points(markers, input.preset.filter_cutoff_hz, input.observations.frame_rate);
    return result;
}

}  // namespace monokin

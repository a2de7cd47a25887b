#include <doctest.h>

#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/harness.hpp"
#include "monokin/refine.hpp"

using namespace monokin;

namespace {

SyntheticBundle make_bundle(const std::string& activity, int cycles,
                            CorruptionSpec corruption = {}, std::uint64_t seed = 0) {
    SyntheticScenario sc;
    sc.activity = activity;
    sc.cycles = cycles;
    sc.corruption = corruption;
    sc.seed = seed;
    return synth_generate(sc, defaults::skeleton_template(), defaults::biomech_model());
}

double pixel_rms(const SkeletonTemplate& tmpl, const RefinementInput& input,
                 const BodyShape& shape, const PoseSequence& pose,
                 const CameraExtrinsics& extr) {
    double acc = 0.0;
    int count = 0;
    for (size_t f = 0; f < pose.frames.size(); ++f) {
        const auto fk = forward_kinematics(shape, pose.frames[f], tmpl);
        for (size_t i = 0; i < tmpl.keypoint_anchors.size(); ++i) {
            const auto& a = tmpl.keypoint_anchors[i];
            const auto p = project_checked(fk[static_cast<size_t>(a.segment)].apply(a.offset),
                                           input.intrinsics, extr);
            REQUIRE(!p.behind);
            acc += (p.pixel - input.observations.frames[f].keypoints[i].pixel).squaredNorm();
            ++count;
        }
    }
    return std::sqrt(acc / count);
}

}  // namespace

TEST_CASE("stage 1 on consistent synthetic data terminates immediately") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const auto bundle = make_bundle("squats", 1);
    const Stage1Result res = run_stage1(tmpl, bundle.input);
    CHECK(res.trace.status == SolveStatus::kConverged);
    CHECK(res.trace.iterations <= 2);
    CHECK((res.shape.coeffs - bundle.truth.shape.coeffs).norm() < 1e-9);
}

TEST_CASE("stage 1 recovers stature from a perturbed shape") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CorruptionSpec corruption;
    corruption.shape_offset[1] = 0.5;
    const auto bundle = make_bundle("squats", 1, corruption);
    const Stage1Result res = run_stage1(tmpl, bundle.input);
    const double h = model_height(res.shape, tmpl);
    CHECK(std::abs(h - bundle.input.observations.subject_height) < 0.005);
}

TEST_CASE("stage 1 recovers extrinsics perturbed by 2 degrees") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CorruptionSpec corruption;
    corruption.camera_rotation_offset_deg = 2.0;
    const auto bundle = make_bundle("squats", 1, corruption);
    const Stage1Result res = run_stage1(tmpl, bundle.input);
    const double rms = pixel_rms(tmpl, bundle.input, res.shape, bundle.input.initial_pose,
                                 res.extrinsics);
    CHECK(rms < 1.0);
}

TEST_CASE("stage 2 leaves the shape bitwise untouched") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CorruptionSpec corruption;
    corruption.pelvis_drift = 0.1;
    const auto bundle = make_bundle("squats", 1, corruption);
    OptimizerConfig cfg;
    cfg.max_iterations = 30;
    const Stage1Result s1 = run_stage1(tmpl, bundle.input, cfg);
    const RefinementResult res = run_stage2(tmpl, bundle.input, s1, cfg);
    CHECK(res.refined_shape.coeffs == s1.shape.coeffs);
}

TEST_CASE("refinement on ground truth changes nothing") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const auto bundle = make_bundle("sts", 1);
    const RefinementResult res = refine(tmpl, bundle.input);
    for (size_t f = 0; f < res.refined_pose.frames.size(); ++f) {
        CHECK((res.refined_pose.frames[f].root_translation -
               bundle.truth.pose.frames[f].root_translation)
                  .norm() < 1e-3);
        CHECK((res.refined_pose.frames[f].root_orientation -
               bundle.truth.pose.frames[f].root_orientation)
                  .norm() < 2e-3);
    }
    CHECK(res.converged);
}

TEST_CASE("objective traces are non-increasing after the first accepted step") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CorruptionSpec corruption;
    corruption.pelvis_drift = 0.2;
    corruption.foot_penetration = 0.01;
    const auto bundle = make_bundle("squats", 1, corruption);
    OptimizerConfig cfg;
    cfg.max_iterations = 40;
    const RefinementResult res =
        run_stage2(tmpl, bundle.input, run_stage1(tmpl, bundle.input, cfg), cfg);
    for (size_t i = 1; i < res.stage2.objective.size(); ++i)
        CHECK(res.stage2.objective[i] <= res.stage2.objective[i - 1]);
}

TEST_CASE("whole-sequence coupling: a single-frame observation change moves other frames") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const auto bundle = make_bundle("squats", 1);
    OptimizerConfig cfg;
    cfg.max_iterations = 60;

    RefinementInput perturbed = bundle.input;
    const int mid = static_cast<int>(perturbed.observations.frames.size()) / 2;
    perturbed.observations.frames[static_cast<size_t>(mid)].keypoints[0].pixel +=
        Eigen::Vector2d(8.0, -5.0);

    const RefinementResult base = refine(tmpl, bundle.input, cfg);
    const RefinementResult moved = refine(tmpl, perturbed, cfg);
    double other_frame_change = 0.0;
    for (size_t f = 0; f < base.refined_pose.frames.size(); ++f) {
        if (static_cast<int>(f) == mid) continue;
        other_frame_change +=
            (moved.refined_pose.frames[f].root_translation -
             base.refined_pose.frames[f].root_translation)
                .norm();
        for (size_t j = 0; j < base.refined_pose.frames[f].joint_rotations.size(); ++j)
            other_frame_change += (moved.refined_pose.frames[f].joint_rotations[j] -
                                   base.refined_pose.frames[f].joint_rotations[j])
                                      .norm();
    }
    CHECK(other_frame_change > 1e-9);
}

TEST_CASE("refine is deterministic") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CorruptionSpec corruption;
    corruption.keypoint_noise_px = 1.0;
    const auto bundle = make_bundle("squats", 1, corruption, 42);
    OptimizerConfig cfg;
    cfg.max_iterations = 25;
    const RefinementResult a = refine(tmpl, bundle.input, cfg);
    const RefinementResult b = refine(tmpl, bundle.input, cfg);
    REQUIRE(a.refined_pose.frames.size() == b.refined_pose.frames.size());
    for (size_t f = 0; f < a.refined_pose.frames.size(); ++f) {
        CHECK(a.refined_pose.frames[f].root_translation ==
              b.refined_pose.frames[f].root_translation);
        for (size_t j = 0; j < a.refined_pose.frames[f].joint_rotations.size(); ++j)
            CHECK(a.refined_pose.frames[f].joint_rotations[j] ==
                  b.refined_pose.frames[f].joint_rotations[j]);
    }
    CHECK(a.refined_shape.coeffs == b.refined_shape.coeffs);
}

TEST_CASE("sts preset selects the Table S1 reprojection weight") {
    CHECK(defaults::preset_table().get("sts").w_reprojection == 250.0);
}

TEST_CASE("degenerate input with all-zero confidences proceeds with a warning") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    auto bundle = make_bundle("squats", 1);
    for (auto& f : bundle.input.observations.frames)
        for (auto& k : f.keypoints) k.confidence = 0.0;
    OptimizerConfig cfg;
    cfg.max_iterations = 10;
    CHECK_NOTHROW(refine(tmpl, bundle.input, cfg));
}

TEST_CASE("frame-count mismatch rejected") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    auto bundle = make_bundle("squats", 1);
    bundle.input.initial_pose.frames.pop_back();
    CHECK_THROWS_AS(bundle.input.validate(tmpl), ValidationError);
}

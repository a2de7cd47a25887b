#include <doctest.h>

#include <random>

#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/harness.hpp"
#include "monokin/objective.hpp"

using namespace monokin;

namespace {

SyntheticScenario small_scenario(const std::string& activity, int cycles = 1) {
    SyntheticScenario sc;
    sc.activity = activity;
    sc.cycles = cycles;
    sc.frame_rate = 30.0;
    return sc;
}

CoordinateSequence to_sequence(const BiomechModel& model,
                               const std::vector<Eigen::VectorXd>& frames, double rate) {
    CoordinateSequence seq;
    for (const auto& c : model.coordinates) seq.names.push_back(c.name);
    seq.frames = frames;
    seq.frame_rate = rate;
    return seq;
}

}  // namespace

TEST_CASE("zero-corruption scenario: input equals ground truth") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    const auto bundle = synth_generate(small_scenario("walking"), tmpl, model);

    REQUIRE(bundle.input.initial_pose.frames.size() == bundle.truth.pose.frames.size());
    for (size_t f = 0; f < bundle.truth.pose.frames.size(); ++f) {
        const auto& a = bundle.input.initial_pose.frames[f];
        const auto& b = bundle.truth.pose.frames[f];
        CHECK((a.root_translation - b.root_translation).norm() == 0.0);
        CHECK((a.root_orientation - b.root_orientation).norm() == 0.0);
        for (size_t j = 0; j < a.joint_rotations.size(); ++j)
            CHECK((a.joint_rotations[j] - b.joint_rotations[j]).norm() == 0.0);
    }
    CHECK(bundle.input.initial_shape.coeffs == bundle.truth.shape.coeffs);
}

TEST_CASE("template pose reproduces the biomech marker positions") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    for (const char* activity : {"walking", "squats", "sts"}) {
        const auto bundle = synth_generate(small_scenario(activity), tmpl, model);
        const auto& truth = bundle.truth;
        for (size_t f = 0; f < truth.pose.frames.size(); f += 7) {
            const auto from_template =
                extract_markers(truth.shape, truth.pose.frames[f], tmpl);
            const auto from_coords = model_fk(truth.subject_model, truth.coordinates[f]);
            for (size_t i = 0; i < from_template.size(); ++i)
                CHECK((from_template[i] - from_coords[i]).norm() < 1e-9);
        }
    }
}

TEST_CASE("ground-truth feet: in-bout contact points stationary and on-floor") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    const auto bundle = synth_generate(small_scenario("walking", 2), tmpl, model);
    const auto& truth = bundle.truth;
    const auto keys = contact_keypoint_indices(tmpl);
    const auto bouts = segment_bouts(bundle.input.observations);
    REQUIRE(!bouts.empty());

    std::vector<std::vector<Eigen::Vector3d>> keypoints;
    for (const auto& frame : truth.pose.frames) {
        const auto fk = forward_kinematics(truth.shape, frame, tmpl);
        std::vector<Eigen::Vector3d> pts;
        for (const auto& a : tmpl.keypoint_anchors)
            pts.push_back(fk[static_cast<size_t>(a.segment)].apply(a.offset));
        keypoints.push_back(pts);
    }
    for (const auto& bout : bouts) {
        const int key = keys[static_cast<size_t>(bout.channel)];
        const Eigen::Vector3d anchor = keypoints[static_cast<size_t>(bout.start)]
                                                [static_cast<size_t>(key)];
        for (int f = bout.start; f <= bout.end; ++f) {
            const Eigen::Vector3d p =
                keypoints[static_cast<size_t>(f)][static_cast<size_t>(key)];
            CHECK((p - anchor).norm() < 1e-9);                 // stationary
            CHECK(std::abs(p.y() - truth.floor_height) < 1e-9);  // on-floor
        }
    }
}

TEST_CASE("oracle consistency: physical stage-2 terms vanish on ground truth") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    for (const char* activity : {"walking", "sts"}) {
        const auto bundle = synth_generate(small_scenario(activity), tmpl, model);
        const auto& input = bundle.input;
        const auto bouts = segment_bouts(input.observations);
        Stage2Objective objective(tmpl, input.observations, input.intrinsics,
                                  bundle.truth.shape, bundle.truth.extrinsics, bouts,
                                  input.preset);
        const Eigen::VectorXd x =
            objective.pack(bundle.truth.pose, bundle.truth.extrinsics);
        const LossBreakdown terms = objective.breakdown(x);
        INFO(activity);
        CHECK(terms.reprojection < 1e-8);
        CHECK(terms.camera < 1e-8);
        CHECK(terms.foot_velocity < 1e-8);
        CHECK(terms.foot_slide < 1e-8);
        CHECK(terms.flat_floor < 1e-8);
    }
}

TEST_CASE("drift corruption: final-frame offset equals the requested drift") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    SyntheticScenario sc = small_scenario("sts", 2);
    sc.corruption.pelvis_drift = 0.5;
    sc.corruption.drift_direction = {1.0, 0.0, 0.0};
    const auto bundle = synth_generate(sc, tmpl, model);
    const size_t last = bundle.truth.pose.frames.size() - 1;
    const Eigen::Vector3d offset =
        bundle.input.initial_pose.frames[last].root_translation -
        bundle.truth.pose.frames[last].root_translation;
    CHECK(std::abs(offset.norm() - 0.5) < 1e-9);
    // First frame uncorrupted.
    CHECK((bundle.input.initial_pose.frames[0].root_translation -
           bundle.truth.pose.frames[0].root_translation)
              .norm() < 1e-12);
}

TEST_CASE("synthetic generation is deterministic for a fixed seed") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    SyntheticScenario sc = small_scenario("walking");
    sc.corruption.keypoint_noise_px = 2.0;
    sc.corruption.contact_noise = 0.1;
    sc.seed = 1234;
    const auto a = synth_generate(sc, tmpl, model);
    const auto b = synth_generate(sc, tmpl, model);
    for (size_t f = 0; f < a.input.observations.frames.size(); ++f) {
        for (size_t k = 0; k < a.input.observations.frames[f].keypoints.size(); ++k)
            CHECK(a.input.observations.frames[f].keypoints[k].pixel ==
                  b.input.observations.frames[f].keypoints[k].pixel);
        CHECK(a.input.observations.frames[f].contact_probability ==
              b.input.observations.frames[f].contact_probability);
    }
}

TEST_CASE("requested subject height is honored") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BiomechModel model = defaults::biomech_model();
    SyntheticScenario sc = small_scenario("squats");
    sc.subject_height = 1.83;
    const auto bundle = synth_generate(sc, tmpl, model);
    CHECK(model_height(bundle.truth.shape, tmpl) == doctest::Approx(1.83).epsilon(1e-9));
}

TEST_CASE("rotational MAE: zero, constant offset, brute-force oracle") {
    const BiomechModel model = defaults::biomech_model();
    std::mt19937_64 rng(97);
    std::normal_distribution<double> gauss(0.0, 0.3);
    std::vector<Eigen::VectorXd> truth_frames(20, model.neutral_coordinates());
    const CoordinateSequence truth = to_sequence(model, truth_frames, 30.0);

    CHECK(mae_rotational(truth, truth).mean_deg == 0.0);

    auto est_frames = truth_frames;
    const int dof = model.coordinate_index("hip_flexion_r");
    for (auto& q : est_frames) q[dof] += 2.0 * M_PI / 180.0;
    const auto mae = mae_rotational(to_sequence(model, est_frames, 30.0), truth);
    CHECK(mae.per_dof_deg.at("hip_flexion_r") == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(mae.mean_deg == doctest::Approx(2.0 / 18.0).epsilon(1e-10));

    // Brute-force scalar-loop oracle on random sequences.
    for (auto& q : est_frames)
        for (int i = 0; i < q.size(); ++i) q[i] += 0.05 * gauss(rng);
    const CoordinateSequence est = to_sequence(model, est_frames, 30.0);
    const auto fast = mae_rotational(est, truth);
    double acc = 0.0;
    for (const auto& name : evaluated_rotational_dofs()) {
        int col = -1;
        for (size_t i = 0; i < est.names.size(); ++i)
            if (est.names[i] == name) col = static_cast<int>(i);
        double dof_acc = 0.0;
        for (size_t f = 0; f < est.frames.size(); ++f)
            dof_acc += std::abs(est.frames[f][col] - truth.frames[f][col]);
        acc += (dof_acc / est.frames.size()) * 180.0 / M_PI;
    }
    CHECK(fast.mean_deg == doctest::Approx(acc / 18.0).epsilon(1e-12));
    // Metric symmetry.
    CHECK(mae_rotational(truth, est).mean_deg == doctest::Approx(fast.mean_deg).epsilon(1e-12));
}

TEST_CASE("translational MAE: zero, 1 cm offset, symmetry") {
    const BiomechModel model = defaults::biomech_model();
    std::vector<Eigen::VectorXd> truth_frames(10, model.neutral_coordinates());
    const CoordinateSequence truth = to_sequence(model, truth_frames, 30.0);
    CHECK(mae_translational(truth, truth) == 0.0);

    auto est_frames = truth_frames;
    for (auto& q : est_frames) q[model.coordinate_index("pelvis_tx")] += 0.01;
    const CoordinateSequence est = to_sequence(model, est_frames, 30.0);
    CHECK(mae_translational(est, truth) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(mae_translational(truth, est) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("drift curve: zeros, constructed linear drift, range check") {
    const BiomechModel model = defaults::biomech_model();
    const int frames = 50;
    std::vector<Eigen::VectorXd> truth_frames(static_cast<size_t>(frames),
                                              model.neutral_coordinates());
    const CoordinateSequence truth = to_sequence(model, truth_frames, 30.0);
    const std::vector<int> reps = {9, 19, 29, 39, 49};

    const auto zero = drift_curve(truth, truth, reps);
    for (double d : zero) CHECK(d == 0.0);

    auto est_frames = truth_frames;
    const int tx = model.coordinate_index("pelvis_tx");
    for (int f = 0; f < frames; ++f)
        est_frames[static_cast<size_t>(f)][tx] += 0.10 * (f - 0.0) / 10.0 * (10.0 / 9.0);
    // Linear drift reaching 10 cm at frame 9, 20 cm at frame 19, ...
    for (int f = 0; f < frames; ++f)
        est_frames[static_cast<size_t>(f)][tx] =
            truth_frames[static_cast<size_t>(f)][tx] + 0.10 * f / 9.0;
    const auto curve = drift_curve(to_sequence(model, est_frames, 30.0), truth, reps);
    REQUIRE(curve.size() == 5);
    for (size_t i = 0; i < curve.size(); ++i)
        CHECK(curve[i] == doctest::Approx(10.0 * (i + 1)).epsilon(1e-6));

    CHECK_THROWS_AS(drift_curve(truth, truth, {100}), ValidationError);
}

TEST_CASE("GRF MAE: zero, constant vertical error in percent body weight") {
    std::vector<GrfFrame> truth(30);
    for (auto& g : truth) g.force[0].y() = 700.0;
    const auto stance = detect_stance(truth);
    CHECK(mae_grf(truth, truth, stance, 71.38).at(1) == 0.0);

    auto est = truth;
    for (auto& g : est) g.force[0].y() += 70.0;
    // 70 N / (71.38 kg * g) ~ 10% BW.
    const auto mae = mae_grf(est, truth, stance, 71.38);
    CHECK(mae.at(1) == doctest::Approx(10.0).epsilon(1e-3));
    CHECK(mae.at(0) == 0.0);

    // Empty stance -> null metric.
    std::vector<GrfFrame> quiet(10);
    CHECK(mae_grf(quiet, quiet, detect_stance(quiet), 70.0).empty());
}

TEST_CASE("scenario validation") {
    SyntheticScenario sc;
    sc.activity = "jumping";
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc = SyntheticScenario{};
    sc.cycles = 0;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc = SyntheticScenario{};
    sc.corruption.keypoint_noise_px = -1.0;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
}

#include <doctest.h>

#include <random>

#include "monokin/biomech.hpp"
#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

using namespace monokin;

namespace {

Eigen::VectorXd random_in_range(const BiomechModel& model, std::mt19937_64& rng,
                                double span = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd q(model.coordinate_count());
    for (int i = 0; i < model.coordinate_count(); ++i) {
        const auto& c = model.coordinates[static_cast<size_t>(i)];
        double lo = c.min_value, hi = c.max_value;
        if (c.kind == CoordKind::kTranslation) {
            // Keep the pelvis near the capture volume.
            lo = std::max(lo, c.neutral - 0.5);
            hi = std::min(hi, c.neutral + 0.5);
        }
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * span;
        q[i] = mid + (2.0 * u(rng) - 1.0) * half;
    }
    return q;
}

}  // namespace

TEST_CASE("default biomech model: 33 coordinates with the stated layout") {
    const BiomechModel model = defaults::biomech_model();
    CHECK(model.coordinate_count() == 33);
    CHECK(model.markers.size() == 38);
    // 6 pelvis, 3 lumbar, 3+3 hips, 1+1 knees, 2+2 ankles, 3+3 shoulders,
    // 2+2 elbows, 1+1 MTP.
    int translations = 0;
    for (const auto& c : model.coordinates)
        if (c.kind == CoordKind::kTranslation) ++translations;
    CHECK(translations == 3);
    for (const char* name :
         {"pelvis_tilt", "lumbar_extension", "hip_flexion_r", "hip_flexion_l",
          "knee_angle_r", "knee_angle_l", "ankle_angle_r", "subtalar_angle_l",
          "arm_flex_r", "elbow_flex_l", "pro_sup_r", "mtp_angle_l"})
        CHECK(model.coordinate_index(name) >= 0);
    CHECK(model.contact_spheres.size() == 12);
}

TEST_CASE("coupled knee axes follow their splines exactly") {
    const BiomechModel model = defaults::biomech_model();
    const int knee = model.coordinate_index("knee_angle_r");
    const int shank = model.segment_index("shank_r");
    const int thigh = model.segment_index("thigh_r");
    Eigen::VectorXd q = model.neutral_coordinates();
    q[knee] = -60.0 * M_PI / 180.0;
    const auto frames = biomech_fk(model, q);
    const Eigen::Matrix3d rel =
        frames[static_cast<size_t>(thigh)].rotation.transpose() *
        frames[static_cast<size_t>(shank)].rotation;

    // Direct spline evaluation oracle.
    const auto& motions = model.segments[static_cast<size_t>(shank)].motions;
    Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
    for (const auto& mo : motions) {
        const double v = mo.coupled() ? mo.spline.value(q[knee]) : q[knee];
        expected = expected * axis_rotation(mo.axis, v);
    }
    CHECK((rel - expected).norm() < 1e-12);
}

TEST_CASE("model_fk: neutral layout, rigid pelvis translation, range check") {
    const BiomechModel model = defaults::biomech_model();
    const Eigen::VectorXd q0 = model.neutral_coordinates();
    const auto base = model_fk(model, q0);
    REQUIRE(base.size() == 38);

    Eigen::VectorXd q = q0;
    q[model.coordinate_index("pelvis_tx")] += 0.7;
    q[model.coordinate_index("pelvis_ty")] += 0.2;
    q[model.coordinate_index("pelvis_tz")] -= 0.4;
    const auto moved = model_fk(model, q);
    for (size_t i = 0; i < base.size(); ++i)
        CHECK((moved[i] - base[i] - Eigen::Vector3d(0.7, 0.2, -0.4)).norm() < 1e-14);

    q = q0;
    q[model.coordinate_index("knee_angle_r")] = 0.5;  // above the 1 degree limit
    CHECK_THROWS_AS(model_fk(model, q), ValidationError);
}

TEST_CASE("neutral biomech markers coincide with the template standing markers") {
    const BiomechModel model = defaults::biomech_model();
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const auto bio = model_fk(model, model.neutral_coordinates());
    const auto templ = static_markers(BodyShape{}, tmpl);
    REQUIRE(bio.size() == templ.size());
    for (size_t i = 0; i < bio.size(); ++i) {
        CHECK(model.markers[i].name == tmpl.marker_anchors[i].name);
        CHECK((bio[i] - templ[i]).norm() < 1e-12);
    }
}

TEST_CASE("scaling: identity, uniform, single-segment") {
    const BiomechModel model = defaults::biomech_model();
    const auto neutral_markers = model_fk(model, model.neutral_coordinates());

    SUBCASE("markers from the generic model give unit factors") {
        const auto factors = scale_factors(neutral_markers, model);
        for (const auto& [seg, k] : factors) {
            INFO(seg);
            CHECK(std::abs(k - 1.0) < 1e-9);
        }
    }
    SUBCASE("uniformly scaled markers give uniform factors") {
        std::vector<Eigen::Vector3d> scaled;
        for (const auto& m : neutral_markers) scaled.push_back(1.1 * m);
        const auto factors = scale_factors(scaled, model);
        for (const auto& [seg, k] : factors) {
            INFO(seg);
            CHECK(std::abs(k - 1.1) < 1e-6);
        }
        const BiomechModel subject = scale_model(scaled, model);
        // A scaled model reproduces the scaled marker cloud at neutral
        // up to the unscaled pelvis-ground offset.
        const auto remade = model_fk(subject, subject.neutral_coordinates());
        const Eigen::Vector3d shift = remade[0] - scaled[0];
        for (size_t i = 0; i < remade.size(); ++i)
            CHECK((remade[i] - scaled[i] - shift).norm() < 1e-9);
    }
    SUBCASE("thigh lengthened 5 percent is recovered") {
        // Build the synthetic subject by scaling the right-thigh marker
        // cluster about the hip joint center.
        const auto frames = biomech_fk(model, model.neutral_coordinates());
        const int thigh = model.segment_index("thigh_r");
        const Eigen::Vector3d hip = frames[static_cast<size_t>(thigh)].origin;
        std::vector<Eigen::Vector3d> subject = neutral_markers;
        for (size_t i = 0; i < model.markers.size(); ++i)
            if (model.markers[i].segment == thigh)
                subject[i] = hip + 1.05 * (subject[i] - hip);
        const auto factors = scale_factors(subject, model);
        CHECK(factors.at("thigh_r") == doctest::Approx(1.05).epsilon(0.01));
        for (const auto& [seg, k] : factors)
            if (seg != "thigh_r") CHECK(std::abs(k - 1.0) < 0.01);
    }
    SUBCASE("degenerate pair reported by name") {
        std::vector<Eigen::Vector3d> collapsed = neutral_markers;
        const int a = model.marker_index("RASI");
        const int b = model.marker_index("LASI");
        collapsed[static_cast<size_t>(b)] = collapsed[static_cast<size_t>(a)];
        try {
            scale_factors(collapsed, model);
            CHECK(false);
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("RASI") != std::string::npos);
        }
    }
}

TEST_CASE("ik_frame: neutral fixed point and FK round trip") {
    const BiomechModel model = defaults::biomech_model();
    const Eigen::VectorXd neutral = model.neutral_coordinates();

    SUBCASE("neutral targets, neutral init") {
        const auto targets = model_fk(model, neutral);
        const IkResult res = ik_frame(model, targets, neutral);
        CHECK(res.residual_rms < 1e-9);
        CHECK((res.coordinates - neutral).lpNorm<Eigen::Infinity>() < 1e-6);
    }
    SUBCASE("random in-range poses recovered from neutral init") {
        std::mt19937_64 rng(67);
        for (int trial = 0; trial < 12; ++trial) {
            const Eigen::VectorXd q_true = random_in_range(model, rng, 0.8);
            const auto targets = model_fk(model, q_true, 1e-6);
            const IkResult res = ik_frame(model, targets, neutral);
            INFO("trial ", trial, " residual ", res.residual_rms);
            for (int i = 0; i < model.coordinate_count(); ++i) {
                const bool rotational =
                    model.coordinates[static_cast<size_t>(i)].kind == CoordKind::kRotation;
                const double tol = rotational ? 0.1 * M_PI / 180.0 : 5e-4;
                CHECK(std::abs(res.coordinates[i] - q_true[i]) < tol);
            }
        }
    }
}

TEST_CASE("ik residual at solution never exceeds residual at init") {
    const BiomechModel model = defaults::biomech_model();
    std::mt19937_64 rng(71);
    const Eigen::VectorXd q_true = random_in_range(model, rng, 0.6);
    auto targets = model_fk(model, q_true, 1e-6);
    // Perturb targets so the LSQ optimum is nonzero.
    std::normal_distribution<double> gauss(0.0, 0.004);
    for (auto& t : targets) t += Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));

    const Eigen::VectorXd q_init = model.neutral_coordinates();
    auto rms_at = [&](const Eigen::VectorXd& q) {
        const auto markers = model_fk(model, q, 1e-6);
        double acc = 0.0;
        for (size_t i = 0; i < markers.size(); ++i)
            acc += (markers[i] - targets[i]).squaredNorm();
        return std::sqrt(acc / static_cast<double>(markers.size()));
    };
    const IkResult res = ik_frame(model, targets, q_init);
    CHECK(res.residual_rms <= rms_at(q_init) + 1e-12);
}

TEST_CASE("ik under marker noise: residual near noise level, angles close") {
    const BiomechModel model = defaults::biomech_model();
    std::mt19937_64 rng(73);
    std::normal_distribution<double> gauss(0.0, 0.005);
    const Eigen::VectorXd neutral = model.neutral_coordinates();

    int within = 0;
    const int draws = 100;
    for (int draw = 0; draw < draws; ++draw) {
        const Eigen::VectorXd q_true = random_in_range(model, rng, 0.5);
        auto targets = model_fk(model, q_true, 1e-6);
        for (auto& t : targets) t += Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
        const IkResult res = ik_frame(model, targets, neutral);
        // Residual should sit near the injected 5 mm noise (within 2x).
        CHECK(res.residual_rms < 2.0 * 0.005 * std::sqrt(3.0));
        bool ok = true;
        for (int i = 0; i < model.coordinate_count(); ++i) {
            if (model.coordinates[static_cast<size_t>(i)].kind != CoordKind::kRotation)
                continue;
            if (std::abs(res.coordinates[i] - q_true[i]) > 3.0 * M_PI / 180.0) ok = false;
        }
        within += ok ? 1 : 0;
    }
    CHECK(within >= 95);  // allow a few noisy arm-spin misses
}

TEST_CASE("ik_sequence: constant trajectory, warm start, determinism") {
    const BiomechModel model = defaults::biomech_model();
    std::mt19937_64 rng(79);
    const Eigen::VectorXd q_true = random_in_range(model, rng, 0.4);
    const auto markers = model_fk(model, q_true, 1e-6);
    const std::vector<std::vector<Eigen::Vector3d>> traj(5, markers);
    const IkSequenceResult a = ik_sequence(model, traj);
    CHECK(a.all_converged);
    for (const auto& q : a.coordinates)
        CHECK((q - a.coordinates[0]).lpNorm<Eigen::Infinity>() < 1e-8);
    const IkSequenceResult b = ik_sequence(model, traj);
    for (size_t f = 0; f < a.coordinates.size(); ++f)
        CHECK(a.coordinates[f] == b.coordinates[f]);
}

TEST_CASE("ik scale invariance: uniform scaling preserves rotations") {
    const BiomechModel model = defaults::biomech_model();
    std::mt19937_64 rng(83);
    const Eigen::VectorXd q_true = random_in_range(model, rng, 0.5);
    const auto targets = model_fk(model, q_true, 1e-6);

    std::vector<Eigen::Vector3d> neutral_markers = model_fk(model, model.neutral_coordinates());
    std::vector<Eigen::Vector3d> scaled_static, scaled_targets;
    for (const auto& m : neutral_markers) scaled_static.push_back(1.1 * m);
    for (const auto& t : targets) scaled_targets.push_back(1.1 * t);

    const BiomechModel subject = scale_model(scaled_static, model);
    const IkResult res = ik_frame(subject, scaled_targets, subject.neutral_coordinates());
    CHECK(res.residual_rms < 5e-3);
    for (int i = 0; i < model.coordinate_count(); ++i) {
        const auto& c = model.coordinates[static_cast<size_t>(i)];
        if (c.kind == CoordKind::kRotation)
            CHECK(std::abs(res.coordinates[i] - q_true[i]) < 0.01);
    }
}

TEST_CASE("coordinate clamping is reported") {
    const BiomechModel model = defaults::biomech_model();
    Eigen::VectorXd q = model.neutral_coordinates();
    q[model.coordinate_index("elbow_flex_r")] = -1.0;  // below range
    std::vector<int> clamped;
    const Eigen::VectorXd out = model.clamp_to_range(q, &clamped);
    CHECK(out[model.coordinate_index("elbow_flex_r")] == 0.0);
    CHECK(clamped.size() == 1);
}

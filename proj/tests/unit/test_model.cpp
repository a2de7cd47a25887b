#include <doctest.h>

#include <random>

#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/rotation.hpp"
#include "monokin/skeleton.hpp"

using namespace monokin;

namespace {

PoseFrame random_pose(const SkeletonTemplate& tmpl, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    PoseFrame f = PoseFrame::identity(tmpl.joint_count());
    f.root_orientation = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    f.root_translation = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    for (auto& r : f.joint_rotations)
        r = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    return f;
}

BodyShape random_shape(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    BodyShape s;
    for (int i = 0; i < BodyShape::kDim; ++i) s.coeffs[i] = gauss(rng);
    return s;
}

}  // namespace

TEST_CASE("default template is valid") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    CHECK(tmpl.marker_anchors.size() == 38);
    CHECK(tmpl.keypoint_anchors.size() == 18);
    // One keypoint anchor per observation keypoint id; names unique.
    for (size_t i = 0; i < tmpl.keypoint_anchors.size(); ++i)
        for (size_t j = i + 1; j < tmpl.keypoint_anchors.size(); ++j)
            CHECK(tmpl.keypoint_anchors[i].name != tmpl.keypoint_anchors[j].name);
}

TEST_CASE("identity pose accumulates rest offsets") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BodyShape shape;
    const auto frames =
        forward_kinematics(shape, PoseFrame::identity(tmpl.joint_count()), tmpl);
    for (size_t i = 0; i < tmpl.segments.size(); ++i) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (int s = static_cast<int>(i); s >= 0; s = tmpl.segments[static_cast<size_t>(s)].parent)
            acc += tmpl.segments[static_cast<size_t>(s)].rest_offset;
        CHECK((frames[i].origin - acc).norm() < 1e-14);
        CHECK((frames[i].rotation - Eigen::Matrix3d::Identity()).norm() == 0.0);
    }
}

TEST_CASE("rigid translation equivariance") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BodyShape shape;
    PoseFrame base = PoseFrame::identity(tmpl.joint_count());
    PoseFrame moved = base;
    moved.root_translation += Eigen::Vector3d(1.0, 0.0, 0.0);
    const auto f0 = forward_kinematics(shape, base, tmpl);
    const auto f1 = forward_kinematics(shape, moved, tmpl);
    for (size_t i = 0; i < f0.size(); ++i)
        CHECK((f1[i].origin - f0[i].origin - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);
}

TEST_CASE("root rotation equivariance against per-point oracle") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(3);
    const BodyShape shape = random_shape(rng, 0.5);
    const PoseFrame pose = random_pose(tmpl, rng, 0.4);
    const Eigen::Vector3d raxis(0.2, 0.9, -0.4);
    const Eigen::Matrix3d rot = axis_angle_to_matrix(raxis);

    PoseFrame rotated = pose;
    rotated.root_orientation =
        matrix_to_axis_angle(rot * axis_angle_to_matrix(pose.root_orientation));

    const auto base = forward_kinematics(shape, pose, tmpl);
    const auto turned = forward_kinematics(shape, rotated, tmpl);
    const Eigen::Vector3d root = base[0].origin;
    for (size_t i = 0; i < base.size(); ++i) {
        // Independent oracle: rotate each world point about the root origin.
        for (const auto& local :
             {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.1, -0.2, 0.05)}) {
            const Eigen::Vector3d p = base[i].apply(local);
            const Eigen::Vector3d expected = root + rot * (p - root);
            CHECK((turned[i].apply(local) - expected).norm() < 1e-10);
        }
    }
}

TEST_CASE("FK equivariance for markers and keypoints under rigid transform") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(5);
    const BodyShape shape = random_shape(rng, 0.4);
    const PoseFrame pose = random_pose(tmpl, rng, 0.5);
    const Eigen::Vector3d raxis(-0.3, 0.5, 0.8);
    const Eigen::Matrix3d rot = axis_angle_to_matrix(raxis);
    const Eigen::Vector3d shift(0.4, -0.1, 0.25);

    PoseFrame moved = pose;
    moved.root_orientation =
        matrix_to_axis_angle(rot * axis_angle_to_matrix(pose.root_orientation));
    const auto base_frames = forward_kinematics(shape, pose, tmpl);
    const Eigen::Vector3d root = base_frames[0].origin;
    // Move the root so the whole transform is p -> rot*(p - root) + root + shift.
    moved.root_translation = pose.root_translation + shift;

    const auto m0 = extract_markers(shape, pose, tmpl);
    const auto m1 = extract_markers(shape, moved, tmpl);
    for (size_t i = 0; i < m0.size(); ++i) {
        const Eigen::Vector3d expected = root + shift + rot * (m0[i] - root);
        CHECK((m1[i] - expected).norm() < 1e-10);
    }
}

TEST_CASE("model height: template value, bisection oracle, monotonicity") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    BodyShape zero;
    const double h0 = model_height(zero, tmpl);
    CHECK(h0 == doctest::Approx(1.70).epsilon(1e-12));

    // Bisection oracle on the first coefficient.
    double lo = -5.0, hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        BodyShape s;
        s.coeffs[0] = 0.5 * (lo + hi);
        (model_height(s, tmpl) < 1.80 ? lo : hi) = s.coeffs[0];
    }
    BodyShape solved;
    solved.coeffs[0] = 0.5 * (lo + hi);
    CHECK(model_height(solved, tmpl) == doctest::Approx(1.80).epsilon(1e-9));

    BodyShape bigger = solved;
    bigger.coeffs[0] += 0.3;
    CHECK(model_height(bigger, tmpl) > model_height(solved, tmpl));
}

TEST_CASE("markers: identity anchors, rigid shift, random-pose oracle") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const BodyShape shape;
    const PoseFrame identity = PoseFrame::identity(tmpl.joint_count());
    const auto frames = forward_kinematics(shape, identity, tmpl);
    const auto markers = extract_markers(shape, identity, tmpl);
    for (size_t i = 0; i < markers.size(); ++i) {
        const auto& a = tmpl.marker_anchors[i];
        CHECK((markers[i] -
               (frames[static_cast<size_t>(a.segment)].origin + a.offset))
                  .norm() < 1e-14);
    }

    PoseFrame shifted = identity;
    shifted.root_translation = Eigen::Vector3d(0.3, 1.0, -0.2);
    const auto moved = extract_markers(shape, shifted, tmpl);
    for (size_t i = 0; i < markers.size(); ++i)
        CHECK((moved[i] - markers[i] - shifted.root_translation).norm() == 0.0);

    // Independent transform-composition oracle for a random pose.
    std::mt19937_64 rng(17);
    const PoseFrame pose = random_pose(tmpl, rng, 0.6);
    const BodyShape rshape = random_shape(rng, 0.5);
    const auto rmarkers = extract_markers(rshape, pose, tmpl);
    for (size_t i = 0; i < tmpl.marker_anchors.size(); ++i) {
        const auto& a = tmpl.marker_anchors[i];
        // Recompose the chain transform manually, child to root.
        Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
        Eigen::Vector3d pos = a.offset;
        int s = a.segment;
        while (s > 0) {
            const Eigen::Matrix3d local =
                axis_angle_to_matrix(pose.joint_rotations[static_cast<size_t>(s - 1)]);
            pos = local * pos + tmpl.segment_offset(s, rshape);
            rot = local * rot;
            s = tmpl.segments[static_cast<size_t>(s)].parent;
        }
        const Eigen::Matrix3d root = axis_angle_to_matrix(pose.root_orientation);
        pos = root * pos + pose.root_translation + tmpl.segment_offset(0, rshape);
        CHECK((rmarkers[i] - pos).norm() < 1e-12);
    }
}

TEST_CASE("static markers equal extract_markers at the standing pose") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(23);
    const BodyShape shape = random_shape(rng, 0.7);
    const auto a = static_markers(shape, tmpl);
    const auto b = extract_markers(shape, tmpl.standing_pose, tmpl);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
}

TEST_CASE("vertical marker extent scales with the shape basis") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    auto extent = [&](const BodyShape& s) {
        const auto markers = static_markers(s, tmpl);
        double lo = 1e300, hi = -1e300;
        for (const auto& m : markers) {
            lo = std::min(lo, m.y());
            hi = std::max(hi, m.y());
        }
        return hi - lo;
    };
    const BodyShape zero;
    BodyShape unit;
    unit.coeffs[0] = 1.0;
    const double dh = model_height(unit, tmpl) - model_height(zero, tmpl);
    const double de = extent(unit) - extent(zero);

    // Solve for height 2.0 via the affine relation, then predict the
    // extent from the basis sensitivities (oracle: model_height ratio).
    BodyShape tall;
    tall.coeffs[0] = (2.0 - model_height(zero, tmpl)) / dh;
    CHECK(model_height(tall, tmpl) == doctest::Approx(2.0).epsilon(1e-12));
    const double predicted = extent(zero) + (2.0 - model_height(zero, tmpl)) * de / dh;
    CHECK(extent(tall) == doctest::Approx(predicted).epsilon(1e-10));
}

TEST_CASE("shape linearity: marker derivative constant across beta") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(29);
    const PoseFrame pose = random_pose(tmpl, rng, 0.5);
    const double h = 1e-4;
    for (int coeff : {0, 1, 7}) {
        auto derivative_at = [&](const BodyShape& base) {
            BodyShape p = base, m = base;
            p.coeffs[coeff] += h;
            m.coeffs[coeff] -= h;
            const auto mp = extract_markers(p, pose, tmpl);
            const auto mm = extract_markers(m, pose, tmpl);
            std::vector<Eigen::Vector3d> d(mp.size());
            for (size_t i = 0; i < mp.size(); ++i) d[i] = (mp[i] - mm[i]) / (2.0 * h);
            return d;
        };
        const auto d0 = derivative_at(BodyShape{});
        const auto d1 = derivative_at(random_shape(rng, 1.0));
        for (size_t i = 0; i < d0.size(); ++i) CHECK((d0[i] - d1[i]).norm() < 1e-8);
    }
}

TEST_CASE("tree consistency: child origin from parent transform") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(31);
    const BodyShape shape = random_shape(rng, 0.5);
    const PoseFrame pose = random_pose(tmpl, rng, 0.5);
    const auto frames = forward_kinematics(shape, pose, tmpl);
    for (size_t i = 1; i < tmpl.segments.size(); ++i) {
        const auto& parent = frames[static_cast<size_t>(tmpl.segments[i].parent)];
        const Eigen::Vector3d expected =
            parent.apply(tmpl.segment_offset(static_cast<int>(i), shape));
        CHECK((frames[i].origin - expected).norm() < 1e-13);
    }
}

TEST_CASE("malformed tree rejected") {
    SkeletonTemplate tmpl = defaults::skeleton_template();
    tmpl.segments[2].parent = 5;  // forward reference = not topologically ordered
    CHECK_THROWS_AS(tmpl.validate(), ValidationError);
    SkeletonTemplate tmpl2 = defaults::skeleton_template();
    tmpl2.marker_anchors.pop_back();
    CHECK_THROWS_AS(tmpl2.validate(), ValidationError);
}

TEST_CASE("frame kinematics backprop matches finite differences") {
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    std::mt19937_64 rng(37);
    const BodyShape shape = random_shape(rng, 0.4);
    const PoseFrame pose = random_pose(tmpl, rng, 0.5);

    // Scalar probe: weighted sum of a few point coordinates.
    const std::vector<std::pair<int, Eigen::Vector3d>> probes = {
        {3, {0.02, -0.1, 0.04}}, {9, {0.0, 0.0, 0.0}}, {12, {0.17, -0.08, 0.0}}};
    const std::vector<Eigen::Vector3d> weights = {
        {0.3, -1.1, 0.7}, {0.9, 0.2, -0.4}, {-0.5, 0.6, 1.3}};

    auto scalar = [&](const BodyShape& s, const PoseFrame& f) {
        const auto frames = forward_kinematics(s, f, tmpl);
        double acc = 0.0;
        for (size_t i = 0; i < probes.size(); ++i)
            acc += weights[i].dot(
                frames[static_cast<size_t>(probes[i].first)].apply(probes[i].second));
        return acc;
    };

    FrameKinematics fk(tmpl, shape, pose);
    for (size_t i = 0; i < probes.size(); ++i)
        fk.add_point_gradient(probes[i].first, probes[i].second, weights[i]);
    Eigen::Vector3d g_gamma, g_tau;
    std::vector<Eigen::Vector3d> g_joints;
    Eigen::Matrix<double, BodyShape::kDim, 1> g_beta;
    fk.backprop(g_gamma, g_tau, g_joints, &g_beta);

    const double h = 1e-6;
    for (int a = 0; a < 3; ++a) {
        PoseFrame p = pose, m = pose;
        p.root_orientation[a] += h;
        m.root_orientation[a] -= h;
        CHECK(g_gamma[a] ==
              doctest::Approx((scalar(shape, p) - scalar(shape, m)) / (2 * h)).epsilon(1e-5));
        p = pose;
        m = pose;
        p.root_translation[a] += h;
        m.root_translation[a] -= h;
        CHECK(g_tau[a] ==
              doctest::Approx((scalar(shape, p) - scalar(shape, m)) / (2 * h)).epsilon(1e-5));
    }
    for (int j = 0; j < tmpl.joint_count(); ++j) {
        for (int a = 0; a < 3; ++a) {
            PoseFrame p = pose, m = pose;
            p.joint_rotations[static_cast<size_t>(j)][a] += h;
            m.joint_rotations[static_cast<size_t>(j)][a] -= h;
            const double fd = (scalar(shape, p) - scalar(shape, m)) / (2 * h);
            CHECK(g_joints[static_cast<size_t>(j)][a] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
    for (int d = 0; d < BodyShape::kDim; ++d) {
        BodyShape p = shape, m = shape;
        p.coeffs[d] += h;
        m.coeffs[d] -= h;
        const double fd = (scalar(p, pose) - scalar(m, pose)) / (2 * h);
        CHECK(g_beta[d] == doctest::Approx(fd).epsilon(1e-5));
    }
}

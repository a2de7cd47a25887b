#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "monokin/rotation.hpp"

using namespace monokin;

TEST_CASE("axis-angle round trip") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d aa(gauss(rng), gauss(rng), gauss(rng));
        aa *= 0.9;  // keep below pi for a unique log
        const Eigen::Matrix3d rot = axis_angle_to_matrix(aa);
        CHECK((rot * rot.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
        CHECK(rot.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((matrix_to_axis_angle(rot) - aa).norm() < 1e-10);
    }
}

TEST_CASE("axis-angle matches Eigen::AngleAxis") {
    const Eigen::Vector3d aa(0.3, -1.2, 0.7);
    const Eigen::Matrix3d ours = axis_angle_to_matrix(aa);
    const Eigen::Matrix3d ref =
        Eigen::AngleAxisd(aa.norm(), aa.normalized()).toRotationMatrix();
    CHECK((ours - ref).norm() < 1e-13);
}

TEST_CASE("rotation near pi recovered") {
    const Eigen::Vector3d axis = Eigen::Vector3d(1.0, 2.0, -0.5).normalized();
    const Eigen::Vector3d aa = axis * (M_PI - 1e-9);
    const Eigen::Matrix3d rot = axis_angle_to_matrix(aa);
    const Eigen::Vector3d back = matrix_to_axis_angle(rot);
    CHECK((axis_angle_to_matrix(back) - rot).norm() < 1e-7);
}

TEST_CASE("rotation jacobian matches finite differences") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 0.8);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Vector3d aa(gauss(rng), gauss(rng), gauss(rng));
        if (trial == 0) aa.setZero();  // derivative at identity
        const auto jac = axis_angle_jacobian(aa);
        for (int a = 0; a < 3; ++a) {
            Eigen::Vector3d p = aa, m = aa;
            p[a] += h;
            m[a] -= h;
            const Eigen::Matrix3d fd =
                (axis_angle_to_matrix(p) - axis_angle_to_matrix(m)) / (2.0 * h);
            CHECK((jac[static_cast<size_t>(a)] - fd).norm() < 1e-7);
        }
    }
}

TEST_CASE("wrap reduces large magnitudes") {
    const Eigen::Vector3d aa = Eigen::Vector3d(0.0, 0.0, 1.0) * (2.0 * M_PI + 0.5);
    const Eigen::Vector3d wrapped = wrap_axis_angle(aa);
    CHECK(wrapped.norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((axis_angle_to_matrix(aa) - axis_angle_to_matrix(wrapped)).norm() < 1e-12);
    const Eigen::Vector3d small(0.1, 0.2, 0.3);
    CHECK((wrap_axis_angle(small) - small).norm() == 0.0);
}

TEST_CASE("principal axis rotations") {
    const Eigen::Matrix3d rz = axis_rotation(2, M_PI_2);
    CHECK((rz * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm() < 1e-14);
    const Eigen::Matrix3d rx = axis_rotation(0, M_PI_2);
    CHECK((rx * Eigen::Vector3d::UnitY() - Eigen::Vector3d::UnitZ()).norm() < 1e-14);
}

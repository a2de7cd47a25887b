#include "monokin/rotation.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace monokin {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& aa) {
    const double angle = aa.norm();
    if (angle < 1e-12) {
        // Second-order series keeps the map smooth through zero.
        const Eigen::Matrix3d k = skew(aa);
        return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
    }
    const Eigen::Vector3d axis = aa / angle;
    const Eigen::Matrix3d k = skew(axis);
    return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
           (1.0 - std::cos(angle)) * k * k;
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rot) {
    const double tr = rot.trace();
    const double cos_angle = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
    const double angle = std::acos(cos_angle);
    if (angle < 1e-12) {
        // log(R) ~ vee(R - R^T)/2 near identity
        Eigen::Vector3d v;
        v << rot(2, 1) - rot(1, 2), rot(0, 2) - rot(2, 0), rot(1, 0) - rot(0, 1);
        return 0.5 * v;
    }
    if (angle > M_PI - 1e-6) {
        // Near pi the antisymmetric part vanishes; recover the axis from
        // the symmetric part R = I + (1-cos)K^2 approach.
        Eigen::Matrix3d b = 0.5 * (rot + Eigen::Matrix3d::Identity());
        Eigen::Vector3d axis(std::sqrt(std::max(0.0, b(0, 0))),
                             std::sqrt(std::max(0.0, b(1, 1))),
                             std::sqrt(std::max(0.0, b(2, 2))));
        // Fix signs using the largest component.
        int k = 0;
        axis.cwiseAbs().maxCoeff(&k);
        if (axis[k] < 1e-12) return Eigen::Vector3d::Zero();
        for (int i = 0; i < 3; ++i) {
            if (i == k) continue;
            const double off = b(k, i);
            axis[i] = (off < 0 ? -std::abs(axis[i]) : std::abs(axis[i]));
        }
        axis.normalize();
        return angle * axis;
    }
    Eigen::Vector3d v;
    v << rot(2, 1) - rot(1, 2), rot(0, 2) - rot(2, 0), rot(1, 0) - rot(0, 1);
    return v * (angle / (2.0 * std::sin(angle)));
}

std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& aa) {
    std::array<Eigen::Matrix3d, 3> jac;
    const double sq = aa.squaredNorm();
    const Eigen::Matrix3d rot = axis_angle_to_matrix(aa);
    if (sq < 1e-16) {
        for (int a = 0; a < 3; ++a) jac[a] = skew(Eigen::Vector3d::Unit(a));
        return jac;
    }
    for (int a = 0; a < 3; ++a) {
        const Eigen::Vector3d e = Eigen::Vector3d::Unit(a);
        const Eigen::Vector3d u = aa.cross((Eigen::Matrix3d::Identity() - rot) * e);
        jac[a] = ((aa[a] * skew(aa) + skew(u)) / sq) * rot;
    }
    return jac;
}

Eigen::Matrix3d axis_rotation(int axis, double angle) {
    return axis_angle_to_matrix(angle * Eigen::Vector3d::Unit(axis));
}

Eigen::Vector3d wrap_axis_angle(const Eigen::Vector3d& aa) {
    const double angle = aa.norm();
    constexpr double two_pi = 2.0 * M_PI;
    if (angle < two_pi) return aa;
    double wrapped = std::fmod(angle, two_pi);
    return aa * (wrapped / angle);
}

}  // namespace monokin

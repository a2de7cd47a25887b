#pragma once

#include <Eigen/Core>
#include <array>

namespace monokin {

// Axis-angle (rotation vector) to rotation matrix.
Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& aa);

// Rotation matrix to axis-angle with angle in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rot);

// Partial derivatives dR/d(aa_k) of the rotation matrix w.r.t. each
// component of the rotation vector (Gallego & Yezzi closed form).
std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& aa);

// Rotation about a principal axis (0 = x, 1 = y, 2 = z).
Eigen::Matrix3d axis_rotation(int axis, double angle);

// Skew-symmetric cross-product matrix.
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// Wrap a rotation vector so its magnitude lies in [0, 2*pi).
Eigen::Vector3d wrap_axis_angle(const Eigen::Vector3d& aa);

}  // namespace monokin

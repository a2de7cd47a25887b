#pragma once

#include <Eigen/Core>
#include <vector>

namespace monokin {

// Zero-phase 4th-order low-pass: a 2nd-order Butterworth section run
// forward then backward. Unit DC gain; cutoff must be below Nyquist.
std::vector<double> lowpass(const std::vector<double>& signal, double cutoff_hz,
                            double frame_rate);

// Filter each component of a per-frame vector trajectory independently.
std::vector<Eigen::VectorXd> lowpass_trajectory(
    const std::vector<Eigen::VectorXd>& trajectory, double cutoff_hz,
    double frame_rate);

std::vector<std::vector<Eigen::Vector3d>> lowpass_points(
    const std::vector<std::vector<Eigen::Vector3d>>& frames, double cutoff_hz,
    double frame_rate);

}  // namespace monokin

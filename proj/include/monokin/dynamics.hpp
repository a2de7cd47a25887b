#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "monokin/biomech.hpp"

namespace monokin {

// Hunt-Crossley normal force with a softplus-smoothed activation plus
// regularized Coulomb-style friction:
//   F_n = k * d_s^(3/2) * (1 + 1.5 * c * ddot), clamped >= 0,
//   d_s = smoothing * log(1 + exp(depth / smoothing)),
//   F_t = -mu(|v_t|) * F_n * v_t / |v_t|,
//   mu(v) = tanh(v/vt) * (mu_d + 2(mu_s - mu_d)/(1 + (v/vt)^2)
//                         + mu_v * vt * (v/vt)/(1 + (v/vt)^2)).
// Returned as (tangential_x, normal, tangential_z) in floor coordinates.
Eigen::Vector3d sphere_force(double penetration_depth, double penetration_rate,
                             const Eigen::Vector2d& tangential_velocity,
                             const ContactSphere& sphere);

// Upper bound of the friction coefficient ramp for the given sphere.
double max_friction_coefficient(const ContactSphere& sphere);

enum class FootSide { kLeft, kRight };

struct GrfFrame {
    double time = 0.0;  // s
    // Indexed by FootSide: force (N), free vertical moment (N*m), and
    // center of pressure (m, null when the vertical force is below 1 N).
    std::array<Eigen::Vector3d, 2> force{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
    std::array<double, 2> vertical_moment{0.0, 0.0};
    std::array<std::optional<Eigen::Vector3d>, 2> center_of_pressure;

    const Eigen::Vector3d& foot_force(FootSide side) const {
        return force[static_cast<size_t>(side)];
    }
};

// Contact-based GRF from a coordinate trajectory: per frame, per foot, sum
// of sphere forces; sphere velocities by central differences across
// frames. Kinematic evaluation only (no dynamic consistency).
std::vector<GrfFrame> grf_sequence(const BiomechModel& model,
                                   const std::vector<Eigen::VectorXd>& coordinates,
                                   double frame_rate, double floor_height);

struct StanceSpan {
    int start = 0;  // inclusive
    int end = 0;    // inclusive
};

// Maximal spans with vertical force >= threshold, per foot.
std::array<std::vector<StanceSpan>, 2> detect_stance(const std::vector<GrfFrame>& grf,
                                                     double threshold_newtons = 20.0);

// Floor height estimate: 5th percentile of in-bout contact-point heights.
double estimate_floor_height(const std::vector<double>& in_bout_heights);

// Which foot a model segment belongs to, by name suffix.
FootSide foot_side_of_segment(const BiomechModel& model, int segment);

}  // namespace monokin

#include "monokin/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "monokin/error.hpp"

namespace monokin {

namespace {

// Softplus with width w; tends to max(d, 0) as w -> 0.
double smooth_depth(double depth, double width) {
    const double t = depth / width;
    if (t > 30.0) return depth;      // exp overflow guard; softplus(t) ~ t
    if (t < -30.0) return width * std::exp(t);
    return width * std::log1p(std::exp(t));
}

}  // namespace

double max_friction_coefficient(const ContactSphere& sphere) {
    return std::max(sphere.mu_static, sphere.mu_dynamic) +
           0.5 * sphere.mu_viscous * sphere.transition_velocity;
}

Eigen::Vector3d sphere_force(double penetration_depth, double penetration_rate,
                             const Eigen::Vector2d& tangential_velocity,
                             const ContactSphere& sphere) {
    const double ds = smooth_depth(penetration_depth, sphere.smoothing);
    double fn = sphere.stiffness * ds * std::sqrt(ds) *
                (1.0 + 1.5 * sphere.dissipation * penetration_rate);
    fn = std::max(fn, 0.0);

    Eigen::Vector3d force(0.0, fn, 0.0);
    const double speed = tangential_velocity.norm();
    if (speed > 0.0 && fn > 0.0) {
        const double s = speed / sphere.transition_velocity;
        const double mu =
            std::tanh(s) * (sphere.mu_dynamic +
                            2.0 * (sphere.mu_static - sphere.mu_dynamic) / (1.0 + s * s) +
                            sphere.mu_viscous * sphere.transition_velocity * s /
                                (1.0 + s * s));
        const Eigen::Vector2d ft = -(mu * fn / speed) * tangential_velocity;
        force.x() = ft.x();
        force.z() = ft.y();
    }
    return force;
}

FootSide foot_side_of_segment(const BiomechModel& model, int segment) {
    const std::string& name = model.segments[static_cast<size_t>(segment)].name;
    if (name.size() >= 2 && name.substr(name.size() - 2) == "_l") return FootSide::kLeft;
    return FootSide::kRight;
}

std::vector<GrfFrame> grf_sequence(const BiomechModel& model,
                                   const std::vector<Eigen::VectorXd>& coordinates,
                                   double frame_rate, double floor_height) {
    if (coordinates.size() < 2)
        throw ValidationError("GRF evaluation needs >= 2 frames for velocities");
    if (!(frame_rate > 0)) throw ValidationError("frame rate must be positive");
    const int frames = static_cast<int>(coordinates.size());
    const int ns = static_cast<int>(model.contact_spheres.size());

    // Sphere centers per frame.
    std::vector<std::vector<Eigen::Vector3d>> centers(
        static_cast<size_t>(frames), std::vector<Eigen::Vector3d>(static_cast<size_t>(ns)));
    for (int f = 0; f < frames; ++f) {
        const auto seg_frames = biomech_fk(model, coordinates[static_cast<size_t>(f)]);
        for (int s = 0; s < ns; ++s) {
            const auto& sphere = model.contact_spheres[static_cast<size_t>(s)];
            centers[static_cast<size_t>(f)][static_cast<size_t>(s)] =
                seg_frames[static_cast<size_t>(sphere.segment)].apply(
                    model.segment_scale(sphere.segment) * sphere.offset);
        }
    }

    std::vector<GrfFrame> out(static_cast<size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        GrfFrame& g = out[static_cast<size_t>(f)];
        g.time = f / frame_rate;
        std::array<Eigen::Vector3d, 2> weighted_cop{Eigen::Vector3d::Zero(),
                                                    Eigen::Vector3d::Zero()};
        std::array<std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>, 2>
            contributions;  // (contact point, force) per foot
        for (int s = 0; s < ns; ++s) {
            const auto& sphere = model.contact_spheres[static_cast<size_t>(s)];
            const Eigen::Vector3d& c = centers[static_cast<size_t>(f)][static_cast<size_t>(s)];
            const int prev = std::max(0, f - 1);
            const int next = std::min(frames - 1, f + 1);
            const Eigen::Vector3d v =
                (centers[static_cast<size_t>(next)][static_cast<size_t>(s)] -
                 centers[static_cast<size_t>(prev)][static_cast<size_t>(s)]) *
                (frame_rate / static_cast<double>(next - prev));
            const double depth = floor_height + sphere.radius - c.y();
            const Eigen::Vector3d force =
                sphere_force(depth, -v.y(), Eigen::Vector2d(v.x(), v.z()), sphere);
            if (force.isZero(0.0)) continue;
            const size_t side = static_cast<size_t>(foot_side_of_segment(model, sphere.segment));
            const Eigen::Vector3d contact_point(c.x(), floor_height, c.z());
            g.force[side] += force;
            weighted_cop[side] += force.y() * contact_point;
            contributions[side].emplace_back(contact_point, force);
        }
        for (size_t side = 0; side < 2; ++side) {
            if (g.force[side].y() > 1.0) {
                const Eigen::Vector3d cop = weighted_cop[side] / g.force[side].y();
                g.center_of_pressure[side] = cop;
                double ty = 0.0;
                for (const auto& [point, force] : contributions[side]) {
                    const Eigen::Vector3d r = point - cop;
                    ty += r.z() * force.x() - r.x() * force.z();
                }
                g.vertical_moment[side] = ty;
            }
        }
    }
    return out;
}

std::array<std::vector<StanceSpan>, 2> detect_stance(const std::vector<GrfFrame>& grf,
                                                     double threshold_newtons) {
    std::array<std::vector<StanceSpan>, 2> out;
    const int frames = static_cast<int>(grf.size());
    for (size_t side = 0; side < 2; ++side) {
        int start = -1;
        for (int f = 0; f <= frames; ++f) {
            const bool on =
                f < frames && grf[static_cast<size_t>(f)].force[side].y() >= threshold_newtons;
            if (on && start < 0) start = f;
            if (!on && start >= 0) {
                out[side].push_back({start, f - 1});
                start = -1;
            }
        }
    }
    return out;
}

double estimate_floor_height(const std::vector<double>& in_bout_heights) {
    if (in_bout_heights.empty())
        throw ValidationError("cannot estimate floor height without contact frames");
    std::vector<double> sorted(in_bout_heights);
    std::sort(sorted.begin(), sorted.end());
    const size_t idx = static_cast<size_t>(0.05 * (sorted.size() - 1));
    return sorted[idx];
}

}  // namespace monokin

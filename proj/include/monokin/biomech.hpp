#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "monokin/cubic_spline.hpp"
#include "monokin/skeleton.hpp"

namespace monokin {

enum class CoordKind { kRotation, kTranslation };

// An independent degree of freedom, with range limits.
struct BiomechCoordinate {
    std::string name;
    CoordKind kind = CoordKind::kRotation;
    double min_value = 0.0;  // rad or m
    double max_value = 0.0;
    double neutral = 0.0;
};

// One elementary motion in a segment's joint decomposition. Translations
// displace the joint origin along a parent-frame axis; rotations compose
// in listed order. A motion is driven either by a free coordinate or by a
// spline of a master coordinate (coupled).
struct SegmentMotion {
    CoordKind kind = CoordKind::kRotation;
    int axis = 2;            // 0 = x, 1 = y, 2 = z (local/parent axis)
    int coordinate = -1;     // free coordinate index, or -1 when coupled
    int master = -1;         // master coordinate index when coupled, else -1
    std::string name;        // coupled motions carry their own name
    CubicSpline spline;      // coupled value = spline(master value)

    bool coupled() const { return master >= 0; }
};

struct BiomechSegment {
    std::string name;
    int parent = -1;  // -1 = ground
    Eigen::Vector3d rest_offset = Eigen::Vector3d::Zero();  // parent frame, m
    std::vector<SegmentMotion> motions;
    double scale = 1.0;        // applied to child offsets + attached geometry
    std::string scale_group;   // inherit the named segment's factor when set
};

struct BiomechMarker {
    std::string name;
    int segment = 0;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // segment frame, m
};

struct ScalePair {
    std::string marker_a, marker_b;
};

// Foot-floor contact sphere (Hunt-Crossley with smoothed activation).
struct ContactSphere {
    std::string name;
    int segment = 0;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // segment frame, m
    double radius = 0.032;            // m
    double stiffness = 1e6;           // N/m^(3/2)
    double dissipation = 2.0;         // s/m
    double mu_static = 0.8;
    double mu_dynamic = 0.8;
    double mu_viscous = 0.5;
    double transition_velocity = 0.2;  // m/s
    double smoothing = 5e-4;           // activation width scale, m

    void validate() const;
};

// Kinematic skeleton with 33 independent coordinates, spline-coupled knee
// axes, the 38-marker set, per-segment scale factors and contact spheres.
class BiomechModel {
  public:
    int format_version = 1;
    std::vector<BiomechSegment> segments;
    std::vector<BiomechCoordinate> coordinates;
    std::vector<BiomechMarker> markers;
    std::map<std::string, std::vector<ScalePair>> scaling_pairs;  // by segment name
    std::vector<ContactSphere> contact_spheres;

    void validate() const;
    int coordinate_count() const { return static_cast<int>(coordinates.size()); }
    int coordinate_index(const std::string& name) const;  // -1 if absent
    int segment_index(const std::string& name) const;     // -1 if absent
    int marker_index(const std::string& name) const;      // -1 if absent
    Eigen::VectorXd neutral_coordinates() const;
    Eigen::VectorXd clamp_to_range(const Eigen::VectorXd& q,
                                   std::vector<int>* clamped = nullptr) const;
    double segment_scale(int segment) const;  // resolves scale groups
};

// World transforms for all segments at coordinate values q.
std::vector<SegmentFrame> biomech_fk(const BiomechModel& model, const Eigen::VectorXd& q);

// Marker positions at q. Throws ValidationError when q is out of range
// beyond `range_tolerance`.
std::vector<Eigen::Vector3d> model_fk(const BiomechModel& model, const Eigen::VectorXd& q,
                                      double range_tolerance = 1e-9);

// Scale the generic model so its designated inter-marker distances match
// the measured static markers (ratio averaged per segment).
BiomechModel scale_model(const std::vector<Eigen::Vector3d>& static_markers,
                         const BiomechModel& generic);

// Per-segment factors only (diagnostic / test hook).
std::map<std::string, double> scale_factors(
    const std::vector<Eigen::Vector3d>& static_markers, const BiomechModel& generic);

struct IkOptions {
    int max_iterations = 50;
    double step_tolerance = 1e-8;     // rad / m
    double damping = 1e-4;            // Levenberg-Marquardt lambda floor
    double restart_residual_rms = 5e-3;  // retry with alternate seeds above this
};

struct IkResult {
    Eigen::VectorXd coordinates;
    double residual_rms = 0.0;     // m
    bool converged = false;
    std::vector<int> clamped;      // coordinate indices clamped at range
    int iterations = 0;
};

// Single-frame IK: weighted least squares over the independent coordinates
// (damped Gauss-Newton with cascade initialization), coupled axes always
// satisfied exactly, coordinates clamped to their ranges.
IkResult ik_frame(const BiomechModel& model,
                  const std::vector<Eigen::Vector3d>& target_markers,
                  const Eigen::VectorXd& q_init, const IkOptions& opts = {});

struct IkSequenceResult {
    std::vector<Eigen::VectorXd> coordinates;  // per frame
    std::vector<double> residual_rms;
    bool all_converged = true;
};

// Sequential warm-started IK: previous solution seeds the next frame,
// neutral pose seeds frame 0.
IkSequenceResult ik_sequence(const BiomechModel& model,
                             const std::vector<std::vector<Eigen::Vector3d>>& trajectories,
                             const IkOptions& opts = {});

}  // namespace monokin

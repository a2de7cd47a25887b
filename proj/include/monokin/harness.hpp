#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "monokin/biomech.hpp"
#include "monokin/dynamics.hpp"
#include "monokin/refine.hpp"

namespace monokin {

// Corruption knobs emulating monocular CV failure modes.
struct CorruptionSpec {
    double pelvis_drift = 0.0;                       // m over the sequence
    Eigen::Vector3d drift_direction{1.0, 0.0, 0.0};  // normalized on use
    double keypoint_noise_px = 0.0;                  // isotropic sigma
    double foot_penetration = 0.0;                   // m, during stance
    double foot_slide = 0.0;                         // m, in-bout amplitude
    double contact_noise = 0.0;                      // probability jitter
    Eigen::Matrix<double, BodyShape::kDim, 1> shape_offset =
        Eigen::Matrix<double, BodyShape::kDim, 1>::Zero();
    double camera_rotation_offset_deg = 0.0;

    void validate() const;
};

struct SyntheticScenario {
    std::string activity = "walking";  // walking | squats | sts
    int cycles = 3;
    double frame_rate = 30.0;      // Hz
    double subject_height = 1.70;  // m
    double subject_mass = 72.0;    // kg
    double camera_azimuth_deg = 45.0;  // anterolateral
    double camera_distance = 3.0;      // m
    double camera_height = 1.2;        // m
    CorruptionSpec corruption;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticTruth {
    BodyShape shape;
    PoseSequence pose;             // template-side ground truth
    CameraExtrinsics extrinsics;
    CameraIntrinsics intrinsics;
    std::vector<Eigen::VectorXd> coordinates;  // biomech ground truth per frame
    std::vector<GrfFrame> grf;
    std::vector<int> repetition_boundaries;    // frame at the end of each rep
    double floor_height = 0.0;
    double subject_mass = 0.0;
    // Geometry-matched copy of the generic model (subject anthropometry).
    BiomechModel subject_model;
};

struct SyntheticBundle {
    SyntheticTruth truth;
    RefinementInput input;  // corrupted per the scenario spec
};

// Build ground truth from parameterized periodic joint-angle templates
// with exact foot contact (in-bout contact points stationary and
// on-floor), then derive the corrupted refinement input.
SyntheticBundle synth_generate(const SyntheticScenario& scenario,
                               const SkeletonTemplate& tmpl,
                               const BiomechModel& generic_model);

// Coordinate trajectories with names, as read from / written to files.
struct CoordinateSequence {
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> frames;
    double frame_rate = 0.0;

    void validate() const;
};

// The 18 rotational degrees of freedom entering the accuracy metric.
std::vector<std::string> evaluated_rotational_dofs();

struct RotationalMae {
    std::map<std::string, double> per_dof_deg;
    double mean_deg = 0.0;
};

// Mean absolute error over the evaluated rotational DOFs, in degrees.
// Columns are aligned by name; missing names raise a schema error.
RotationalMae mae_rotational(const CoordinateSequence& est,
                             const CoordinateSequence& truth);

// Mean of the three pelvis-translation MAEs, in cm.
double mae_translational(const CoordinateSequence& est, const CoordinateSequence& truth);

// Euclidean pelvis-position error (cm) at the end of each repetition,
// after aligning pelvis origins at frame 0.
std::vector<double> drift_curve(const CoordinateSequence& est,
                                const CoordinateSequence& truth,
                                const std::vector<int>& repetition_boundaries);

// Stance-only GRF MAE per axis in percent body weight (axes x, y, z).
// Null (empty) when there are no stance frames.
std::vector<double> mae_grf(const std::vector<GrfFrame>& est,
                            const std::vector<GrfFrame>& truth,
                            const std::array<std::vector<StanceSpan>, 2>& stance,
                            double subject_mass);

struct EvalReport {
    RotationalMae rotational;
    double translational_cm = 0.0;
    std::vector<double> drift_cm;
    std::vector<double> grf_pct_bw;  // x, y, z; empty when no stance
    std::vector<std::string> warnings;
};

}  // namespace monokin

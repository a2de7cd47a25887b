#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "monokin/biomech.hpp"
#include "monokin/camera.hpp"
#include "monokin/dynamics.hpp"
#include "monokin/harness.hpp"
#include "monokin/presets.hpp"
#include "monokin/refine.hpp"
#include "monokin/skeleton.hpp"

namespace monokin::io {

namespace fs = std::filesystem;

// ---- model / preset assets (JSON) ----
SkeletonTemplate load_template(const fs::path& path);
void save_template(const SkeletonTemplate& tmpl, const fs::path& path);

BiomechModel load_biomech_model(const fs::path& path);
void save_biomech_model(const BiomechModel& model, const fs::path& path);

PresetTable load_presets(const fs::path& path);
void save_presets(const PresetTable& table, const fs::path& path);

IntrinsicsDatabase load_intrinsics_database(const fs::path& path);
void save_intrinsics_database(const IntrinsicsDatabase& db, const fs::path& path);

SyntheticScenario load_scenario(const fs::path& path);
void save_scenario(const SyntheticScenario& scenario, const fs::path& path);

// ---- refinement input/output bundle ----

// pose_initial.json / pose_refined.json content.
struct PoseBundle {
    PoseSequence pose;
    BodyShape shape;
    CameraExtrinsics extrinsics;
};

PoseBundle load_pose_bundle(const fs::path& path);
void save_pose_bundle(const PoseBundle& bundle, const fs::path& path);

// An input directory: pose_initial.json, keypoints2d.csv, contacts.csv,
// camera.json, meta.json.
struct InputBundle {
    PoseBundle initial;
    ObservationSet observations;
    CameraIntrinsics intrinsics;
    std::string device;    // optional
    std::string activity;  // from meta.json
    double subject_mass = 0.0;  // optional, kg
};

InputBundle load_input_bundle(const fs::path& dir);
void save_input_bundle(const InputBundle& bundle, const fs::path& dir);

// ---- marker trajectories (TRC-style) ----
struct MarkerTrajectories {
    std::vector<std::string> names;
    std::vector<std::vector<Eigen::Vector3d>> frames;
    double frame_rate = 0.0;
};

void save_markers_trc(const MarkerTrajectories& markers, const fs::path& path);
MarkerTrajectories load_markers_trc(const fs::path& path);

// ---- coordinates (tab-separated, time first column) ----
void save_coordinates(const CoordinateSequence& coords, const fs::path& path);
CoordinateSequence load_coordinates(const fs::path& path);

// ---- ground reaction forces (tab-separated) ----
void save_grf(const std::vector<GrfFrame>& grf, const fs::path& path);
std::vector<GrfFrame> load_grf(const fs::path& path);

// ---- reports ----
void save_refinement_report(const RefinementResult& result, const fs::path& path);
void save_eval_report(const EvalReport& report, const fs::path& path);

// Synthetic truth directory (written next to the input bundle by synth).
struct TruthBundle {
    CoordinateSequence coordinates;
    std::vector<GrfFrame> grf;
    std::vector<int> repetition_boundaries;
    double subject_mass = 0.0;
    double floor_height = 0.0;
};

void save_truth_bundle(const TruthBundle& truth, const fs::path& dir);
TruthBundle load_truth_bundle(const fs::path& dir);

}  // namespace monokin::io

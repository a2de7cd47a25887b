#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/io.hpp"

namespace fs = std::filesystem;
using namespace monokin;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::fprintf(stderr, "monokin: %s\n", msg.c_str());
}

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string config_file;
    int threads = 1;
    std::string log_level = "info";
};

struct Overrides {
    PresetTable presets = defaults::preset_table();
    OptimizerConfig optimizer;
    BiomechModel model = defaults::biomech_model();
};

// --config overrides shipped defaults: optimizer settings, preset entries
// (matched by name) and uniform contact-sphere parameters.
Overrides apply_config(const GlobalOptions& global) {
    Overrides ov;
    if (global.config_file.empty()) return ov;
    const auto j = [&] {
        std::ifstream in(global.config_file);
        if (!in) throw IoError("cannot open config " + global.config_file);
        nlohmann::json parsed;
        try {
            in >> parsed;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("malformed config JSON: ") + e.what());
        }
        return parsed;
    }();
    if (j.contains("optimizer")) {
        const auto& jo = j.at("optimizer");
        ov.optimizer.max_iterations = jo.value("max_iterations", ov.optimizer.max_iterations);
        ov.optimizer.gradient_tolerance =
            jo.value("gradient_tolerance", ov.optimizer.gradient_tolerance);
        ov.optimizer.step_tolerance = jo.value("step_tolerance", ov.optimizer.step_tolerance);
        ov.optimizer.initial_step = jo.value("initial_step", ov.optimizer.initial_step);
        ov.optimizer.history = jo.value("history", ov.optimizer.history);
        const std::string method = jo.value("method", std::string("lbfgs"));
        ov.optimizer.method = method == "gradient_descent"
                                  ? OptimizerConfig::Method::kGradientDescent
                                  : OptimizerConfig::Method::kLbfgs;
    }
    if (j.contains("presets")) {
        PresetTable merged;
        const PresetTable& file_table = [&] {
            PresetTable t;
            for (const auto& jp : j.at("presets")) {
                RefinementPreset p;
                p.name = jp.at("name").get<std::string>();
                p.filter_cutoff_hz = jp.at("filter_cutoff_hz").get<double>();
                p.w_reprojection = jp.at("reprojection").get<double>();
                p.w_contact_velocity = jp.at("contact_velocity").get<double>();
                p.w_contact_position = jp.at("contact_position").get<double>();
                p.w_smoothness = jp.at("smoothness").get<double>();
                if (jp.contains("flat_floor") && !jp.at("flat_floor").is_null())
                    p.w_flat_floor = jp.at("flat_floor").get<double>();
                p.w_camera = jp.value("camera", 1000.0);
                p.w_height = jp.value("height", 100.0);
                p.w_shape = jp.value("shape", 1.0);
                t.insert(p);
            }
            return t;
        }();
        for (const auto& p : ov.presets.all())
            merged.insert(file_table.contains(p.name) ? file_table.get(p.name) : p);
        for (const auto& p : file_table.all())
            if (!merged.contains(p.name)) merged.insert(p);
        ov.presets = merged;
    }
    if (j.contains("contact")) {
        const auto& jc = j.at("contact");
        for (auto& s : ov.model.contact_spheres) {
            s.radius = jc.value("radius", s.radius);
            s.stiffness = jc.value("stiffness", s.stiffness);
            s.dissipation = jc.value("dissipation", s.dissipation);
            s.mu_static = jc.value("mu_static", s.mu_static);
            s.mu_dynamic = jc.value("mu_dynamic", s.mu_dynamic);
            s.mu_viscous = jc.value("mu_viscous", s.mu_viscous);
            s.transition_velocity = jc.value("transition_velocity", s.transition_velocity);
            s.smoothing = jc.value("smoothing", s.smoothing);
        }
    }
    return ov;
}

int run_refine(const GlobalOptions& global, const std::string& input_dir,
               const std::string& preset_name, const std::string& activity_flag,
               const std::string& out_dir) {
    const Overrides ov = apply_config(global);
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const io::InputBundle bundle = io::load_input_bundle(input_dir);

    std::string activity = activity_flag.empty() ? bundle.activity : activity_flag;
    std::string chosen = preset_name;
    if (chosen == "auto") {
        if (activity.empty())
            throw ValidationError("--preset auto needs --activity or meta.json activity");
        chosen = ov.presets.contains(activity) ? activity : "other";
    }

    RefinementInput input;
    input.initial_pose = bundle.initial.pose;
    input.initial_shape = bundle.initial.shape;
    input.initial_extrinsics = bundle.initial.extrinsics;
    input.observations = bundle.observations;
    input.intrinsics = bundle.intrinsics;
    input.preset = ov.presets.get(chosen);

    OptimizerConfig cfg = ov.optimizer;
    if (global.seed_set) cfg.seed = global.seed;
    log_info("refining " + std::to_string(input.observations.frame_count()) +
             " frames with preset '" + chosen + "'");
    const RefinementResult result = refine(tmpl, input, cfg);

    fs::create_directories(out_dir);
    io::PoseBundle refined;
    refined.pose = result.refined_pose;
    refined.shape = result.refined_shape;
    refined.extrinsics = result.refined_extrinsics;
    io::save_pose_bundle(refined, fs::path(out_dir) / "pose_refined.json");

    io::MarkerTrajectories markers;
    for (const auto& a : tmpl.marker_anchors) markers.names.push_back(a.name);
    markers.frames = result.filtered_markers;
    markers.frame_rate = input.observations.frame_rate;
    io::save_markers_trc(markers, fs::path(out_dir) / "markers.trc");

    io::save_refinement_report(result, fs::path(out_dir) / "report.json");
    log_info(std::string("stage1 ") + solve_status_name(result.stage1.status) +
             ", stage2 " + solve_status_name(result.stage2.status));
    return result.converged ? 0 : 3;
}

int run_ik(const GlobalOptions& global, const std::string& model_file,
           const std::string& markers_file, const std::string& static_file,
           const std::string& out_file) {
    const Overrides ov = apply_config(global);
    BiomechModel model =
        model_file.empty() ? ov.model : io::load_biomech_model(model_file);
    const io::MarkerTrajectories markers = io::load_markers_trc(markers_file);
    if (markers.names.size() != model.markers.size())
        throw ValidationError("marker file does not match the model marker set");
    // Columns may arrive in any order; align to the model's marker order.
    std::vector<int> order;
    for (const auto& mk : model.markers) {
        int found = -1;
        for (size_t i = 0; i < markers.names.size(); ++i)
            if (markers.names[i] == mk.name) found = static_cast<int>(i);
        if (found < 0) throw ValidationError("marker '" + mk.name + "' missing from file");
        order.push_back(found);
    }
    if (!static_file.empty()) {
        const io::MarkerTrajectories st = io::load_markers_trc(static_file);
        std::vector<Eigen::Vector3d> static_markers;
        for (int idx : order) static_markers.push_back(st.frames[0][static_cast<size_t>(idx)]);
        model = scale_model(static_markers, model);
        log_info("scaled model from static markers");
    }
    std::vector<std::vector<Eigen::Vector3d>> traj;
    for (const auto& frame : markers.frames) {
        std::vector<Eigen::Vector3d> t;
        for (int idx : order) t.push_back(frame[static_cast<size_t>(idx)]);
        traj.push_back(std::move(t));
    }
    const IkSequenceResult ik = ik_sequence(model, traj);
    CoordinateSequence coords;
    for (const auto& c : model.coordinates) coords.names.push_back(c.name);
    coords.frames = ik.coordinates;
    coords.frame_rate = markers.frame_rate;
    io::save_coordinates(coords, out_file);
    log_info("ik solved " + std::to_string(traj.size()) + " frames");
    return ik.all_converged ? 0 : 3;
}

int run_grf(const GlobalOptions& global, const std::string& model_file,
            const std::string& coords_file, const std::string& out_file,
            double floor_height) {
    const Overrides ov = apply_config(global);
    const BiomechModel model =
        model_file.empty() ? ov.model : io::load_biomech_model(model_file);
    const CoordinateSequence coords = io::load_coordinates(coords_file);
    if (coords.names != [&] {
            std::vector<std::string> names;
            for (const auto& c : model.coordinates) names.push_back(c.name);
            return names;
        }())
        throw ValidationError("coordinate columns do not match the model");
    const auto grf = grf_sequence(model, coords.frames, coords.frame_rate, floor_height);
    io::save_grf(grf, out_file);
    return 0;
}

int run_synth(const GlobalOptions& global, const std::string& scenario_file,
              const std::string& out_dir) {
    SyntheticScenario scenario = io::load_scenario(scenario_file);
    if (global.seed_set) scenario.seed = global.seed;
    const SkeletonTemplate tmpl = defaults::skeleton_template();
    const Overrides ov = apply_config(global);
    const SyntheticBundle bundle = synth_generate(scenario, tmpl, ov.model);

    io::InputBundle files;
    files.initial.pose = bundle.input.initial_pose;
    files.initial.shape = bundle.input.initial_shape;
    files.initial.extrinsics = bundle.input.initial_extrinsics;
    files.observations = bundle.input.observations;
    files.intrinsics = bundle.input.intrinsics;
    files.device = "synthcam";
    files.activity = scenario.activity;
    files.subject_mass = scenario.subject_mass;
    io::save_input_bundle(files, out_dir);

    io::TruthBundle truth;
    for (const auto& c : bundle.truth.subject_model.coordinates)
        truth.coordinates.names.push_back(c.name);
    truth.coordinates.frames = bundle.truth.coordinates;
    truth.coordinates.frame_rate = scenario.frame_rate;
    truth.grf = bundle.truth.grf;
    truth.repetition_boundaries = bundle.truth.repetition_boundaries;
    truth.subject_mass = bundle.truth.subject_mass;
    truth.floor_height = bundle.truth.floor_height;
    io::save_truth_bundle(truth, fs::path(out_dir) / "truth");

    io::PoseBundle pose_truth;
    pose_truth.pose = bundle.truth.pose;
    pose_truth.shape = bundle.truth.shape;
    pose_truth.extrinsics = bundle.truth.extrinsics;
    io::save_pose_bundle(pose_truth, fs::path(out_dir) / "truth" / "pose_truth.json");
    log_info("synthesized " + std::to_string(bundle.truth.coordinates.size()) +
             " frames of " + scenario.activity);
    return 0;
}

int run_eval(const GlobalOptions&, const std::string& est_dir,
             const std::string& truth_dir, const std::string& report_file) {
    const CoordinateSequence est =
        io::load_coordinates(fs::path(est_dir) / "coordinates.tsv");
    const io::TruthBundle truth = io::load_truth_bundle(truth_dir);

    EvalReport report;
    report.rotational = mae_rotational(est, truth.coordinates);
    report.translational_cm = mae_translational(est, truth.coordinates);
    report.drift_cm = drift_curve(est, truth.coordinates, truth.repetition_boundaries);
    const fs::path est_grf_path = fs::path(est_dir) / "grf.tsv";
    if (fs::exists(est_grf_path)) {
        const auto est_grf = io::load_grf(est_grf_path);
        const auto stance = detect_stance(truth.grf);
        report.grf_pct_bw = mae_grf(est_grf, truth.grf, stance, truth.subject_mass);
        if (report.grf_pct_bw.empty())
            report.warnings.push_back("no stance frames; GRF MAE omitted");
    } else {
        report.warnings.push_back("estimate has no grf.tsv; GRF MAE omitted");
    }
    io::save_eval_report(report, report_file);
    std::printf("rotational MAE: %.3f deg\n", report.rotational.mean_deg);
    std::printf("translational MAE: %.3f cm\n", report.translational_cm);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monocular pose refinement, inverse kinematics and contact forces"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "override scenario/optimizer seed")
        ->each([&](const std::string&) { global.seed_set = true; });
    app.add_option("--config", global.config_file, "JSON config overriding defaults");
    app.add_option("--threads", global.threads,
                   "worker thread cap (evaluation is single-threaded for "
                   "reproducibility; accepted for interface stability)");
    app.add_option("--log-level", global.log_level, "quiet | info | debug");

    std::string input_dir, preset = "auto", activity, out_dir;
    auto* refine_cmd = app.add_subcommand("refine", "two-stage pose refinement");
    refine_cmd->add_option("--input", input_dir, "input bundle directory")->required();
    refine_cmd->add_option("--preset", preset, "walking | squats | sts | other | auto");
    refine_cmd->add_option("--activity", activity, "activity override for preset=auto");
    refine_cmd->add_option("--out", out_dir, "output directory")->required();

    std::string model_file, markers_file, static_file, out_file, coords_file;
    auto* ik_cmd = app.add_subcommand("ik", "inverse kinematics on marker trajectories");
    ik_cmd->add_option("--model", model_file, "biomech model JSON (default: built-in)");
    ik_cmd->add_option("--markers", markers_file, "marker trajectories (.trc)")->required();
    ik_cmd->add_option("--static", static_file, "static markers (.trc) for model scaling");
    ik_cmd->add_option("--out", out_file, "output coordinates file")->required();

    std::string grf_model, grf_out;
    double floor_height = 0.0;
    auto* grf_cmd = app.add_subcommand("grf", "contact-sphere ground reaction forces");
    grf_cmd->add_option("--model", grf_model, "biomech model JSON (default: built-in)");
    grf_cmd->add_option("--coords", coords_file, "coordinates file")->required();
    grf_cmd->add_option("--out", grf_out, "output GRF file")->required();
    grf_cmd->add_option("--floor", floor_height, "floor height, m (default 0)");

    std::string scenario_file, synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
    synth_cmd->add_option("--scenario", scenario_file, "scenario JSON")->required();
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    std::string est_dir, truth_dir, report_file;
    auto* eval_cmd = app.add_subcommand("eval", "accuracy metrics against ground truth");
    eval_cmd->add_option("--est", est_dir, "estimate directory")->required();
    eval_cmd->add_option("--truth", truth_dir, "truth directory")->required();
    eval_cmd->add_option("--report", report_file, "output report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    g_log_level = global.log_level == "quiet" ? 0 : (global.log_level == "debug" ? 2 : 1);

    try {
        if (*refine_cmd) return run_refine(global, input_dir, preset, activity, out_dir);
        if (*ik_cmd) return run_ik(global, model_file, markers_file, static_file, out_file);
        if (*grf_cmd) return run_grf(global, grf_model, coords_file, grf_out, floor_height);
        if (*synth_cmd) return run_synth(global, scenario_file, synth_out);
        if (*eval_cmd) return run_eval(global, est_dir, truth_dir, report_file);
    } catch (const IoError& e) {
        std::fprintf(stderr, "monokin: io error: %s\n", e.what());
        return 4;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "monokin: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "monokin: %s\n", e.what());
        return 2;
    }
    return 0;
}

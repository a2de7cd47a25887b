#include "monokin/defaults.hpp"

#include <cmath>

namespace monokin::defaults {

namespace {

constexpr double deg = M_PI / 180.0;

// Joint-center layout shared by the skeleton template and the biomech
// model (1.70 m reference stature, ground frame: x forward, y up,
// z toward the subject's right).
struct Geometry {
    Eigen::Vector3d pelvis{0.0, 0.95, 0.0};       // from ground
    Eigen::Vector3d torso{0.0, 0.10, 0.0};        // from pelvis
    Eigen::Vector3d head{0.0, 0.40, 0.0};         // from torso
    Eigen::Vector3d upperarm{0.0, 0.37, 0.18};    // from torso (right side)
    Eigen::Vector3d forearm{0.0, -0.28, 0.0};     // from upperarm
    Eigen::Vector3d thigh{0.0, -0.03, 0.09};      // from pelvis (right side)
    Eigen::Vector3d shank{0.0, -0.42, 0.0};       // from thigh
    Eigen::Vector3d foot{0.0, -0.42, 0.0};        // from shank
    Eigen::Vector3d toes{0.12, -0.06, 0.0};       // from foot
};

Eigen::Vector3d mirror(const Eigen::Vector3d& v) {
    return {v.x(), v.y(), -v.z()};
}

struct MarkerSpec {
    const char* right_name;
    const char* left_name;
    const char* segment;  // right-side segment name; left derived
    Eigen::Vector3d offset;
    bool bilateral;
};

// 38 markers: 6 torso, 4 pelvis, 2x2 upper arm, 2x2 forearm, 2x3 thigh,
// 2x3 shank, 2x4 foot. The set is anatomically motivated but not the
// canonical one of any published model.
const std::vector<MarkerSpec>& marker_specs() {
    static const std::vector<MarkerSpec> specs = {
        {"C7", nullptr, "torso", {-0.05, 0.38, 0.0}, false},
        {"CLAV", nullptr, "torso", {0.06, 0.35, 0.0}, false},
        {"STRN", nullptr, "torso", {0.09, 0.22, 0.0}, false},
        {"T10", nullptr, "torso", {-0.09, 0.18, 0.0}, false},
        {"RSHO", "LSHO", "torso", {0.0, 0.38, 0.17}, true},
        {"RASI", "LASI", "pelvis", {0.08, 0.02, 0.12}, true},
        {"RPSI", "LPSI", "pelvis", {-0.09, 0.03, 0.05}, true},
        {"RUPA", "LUPA", "upperarm_r", {0.0, -0.15, 0.045}, true},
        {"RELB", "LELB", "upperarm_r", {0.0, -0.27, 0.045}, true},
        {"RFRA", "LFRA", "forearm_r", {0.01, -0.12, 0.035}, true},
        {"RWRI", "LWRI", "forearm_r", {0.0, -0.25, 0.035}, true},
        {"RTHI", "LTHI", "thigh_r", {0.02, -0.20, 0.07}, true},
        {"RKNL", "LKNL", "thigh_r", {0.0, -0.40, 0.06}, true},
        {"RKNM", "LKNM", "thigh_r", {0.0, -0.40, -0.06}, true},
        {"RSHA", "LSHA", "shank_r", {0.01, -0.18, 0.055}, true},
        {"RANL", "LANL", "shank_r", {0.0, -0.40, 0.05}, true},
        {"RANM", "LANM", "shank_r", {0.0, -0.40, -0.05}, true},
        {"RHEE", "LHEE", "foot_r", {-0.05, -0.06, 0.0}, true},
        {"RMT1", "LMT1", "foot_r", {0.11, -0.065, -0.035}, true},
        {"RMT5", "LMT5", "foot_r", {0.10, -0.065, 0.045}, true},
        {"RTOE", "LTOE", "foot_r", {0.17, -0.07, 0.0}, true},
    };
    return specs;
}

std::string left_segment(const std::string& right) {
    if (right.size() > 2 && right.substr(right.size() - 2) == "_r")
        return right.substr(0, right.size() - 2) + "_l";
    return right;
}

}  // namespace

SkeletonTemplate skeleton_template() {
    const Geometry g;
    SkeletonTemplate t;
    t.format_version = 1;

    auto add_segment = [&](const std::string& name, int parent,
                           const Eigen::Vector3d& offset) {
        SkeletonSegment s;
        s.name = name;
        s.parent = parent;
        s.rest_offset = offset;
        // Coefficient 0 scales the whole skeleton: stature is strictly
        // increasing in it by construction.
        s.shape_basis.row(0) = (0.06 * offset).transpose();
        t.segments.push_back(s);
        return static_cast<int>(t.segments.size()) - 1;
    };

    const int pelvis = add_segment("pelvis", -1, g.pelvis);
    const int torso = add_segment("torso", pelvis, g.torso);
    const int head = add_segment("head", torso, g.head);
    const int upperarm_r = add_segment("upperarm_r", torso, g.upperarm);
    const int forearm_r = add_segment("forearm_r", upperarm_r, g.forearm);
    const int upperarm_l = add_segment("upperarm_l", torso, mirror(g.upperarm));
    const int forearm_l = add_segment("forearm_l", upperarm_l, g.forearm);
    const int thigh_r = add_segment("thigh_r", pelvis, g.thigh);
    const int shank_r = add_segment("shank_r", thigh_r, g.shank);
    const int foot_r = add_segment("foot_r", shank_r, g.foot);
    const int thigh_l = add_segment("thigh_l", pelvis, mirror(g.thigh));
    const int shank_l = add_segment("shank_l", thigh_l, g.shank);
    const int foot_l = add_segment("foot_l", shank_l, g.foot);

    auto row = [&](int segment, int coeff, const Eigen::Vector3d& delta) {
        t.segments[static_cast<size_t>(segment)].shape_basis.row(coeff) =
            delta.transpose();
    };
    // Remaining coefficients: localized, left/right symmetric in y so the
    // sole plane stays level for any shape.
    row(thigh_r, 1, {0.0, -0.030, 0.0});
    row(thigh_l, 1, {0.0, -0.030, 0.0});
    row(shank_r, 1, {0.0, -0.030, 0.0});
    row(shank_l, 1, {0.0, -0.030, 0.0});
    row(upperarm_r, 2, {0.0, 0.0, 0.020});
    row(upperarm_l, 2, {0.0, 0.0, -0.020});
    row(thigh_r, 3, {0.0, 0.0, 0.012});
    row(thigh_l, 3, {0.0, 0.0, -0.012});
    row(forearm_r, 4, {0.0, -0.020, 0.0});
    row(forearm_l, 4, {0.0, -0.020, 0.0});
    row(torso, 5, {0.0, 0.030, 0.0});
    row(head, 6, {0.0, 0.015, 0.0});
    // Coefficient 7 trades thigh for shank length at constant stature.
    row(thigh_r, 7, {0.0, -0.015, 0.0});
    row(thigh_l, 7, {0.0, -0.015, 0.0});
    row(shank_r, 7, {0.0, 0.015, 0.0});
    row(shank_l, 7, {0.0, 0.015, 0.0});
    row(upperarm_r, 8, {0.0, 0.010, 0.0});
    row(upperarm_l, 8, {0.0, 0.010, 0.0});
    row(pelvis, 9, {0.0, 0.010, 0.0});

    auto keypoint = [&](const std::string& name, int segment,
                        const Eigen::Vector3d& offset) {
        t.keypoint_anchors.push_back({segment, name, offset});
    };
    keypoint("nose", head, {0.09, 0.12, 0.0});
    keypoint("head_top", head, {0.0, 0.25, 0.0});
    keypoint("shoulder_r", upperarm_r, {0.0, 0.0, 0.0});
    keypoint("shoulder_l", upperarm_l, {0.0, 0.0, 0.0});
    keypoint("elbow_r", forearm_r, {0.0, 0.0, 0.0});
    keypoint("elbow_l", forearm_l, {0.0, 0.0, 0.0});
    keypoint("wrist_r", forearm_r, {0.0, -0.26, 0.0});
    keypoint("wrist_l", forearm_l, {0.0, -0.26, 0.0});
    keypoint("hip_r", thigh_r, {0.0, 0.0, 0.0});
    keypoint("hip_l", thigh_l, {0.0, 0.0, 0.0});
    keypoint("knee_r", shank_r, {0.0, 0.0, 0.0});
    keypoint("knee_l", shank_l, {0.0, 0.0, 0.0});
    keypoint("ankle_r", foot_r, {0.0, 0.0, 0.0});
    keypoint("ankle_l", foot_l, {0.0, 0.0, 0.0});
    keypoint("heel_r", foot_r, {-0.05, -0.08, 0.0});
    keypoint("heel_l", foot_l, {-0.05, -0.08, 0.0});
    keypoint("toe_r", foot_r, {0.17, -0.08, 0.0});
    keypoint("toe_l", foot_l, {0.17, -0.08, 0.0});

    for (const auto& spec : marker_specs()) {
        const int seg = t.segment_index(spec.segment);
        t.marker_anchors.push_back({seg, spec.right_name, spec.offset});
        if (spec.bilateral) {
            const int lseg = t.segment_index(left_segment(spec.segment));
            t.marker_anchors.push_back({lseg, spec.left_name, mirror(spec.offset)});
        }
    }

    t.standing_pose = PoseFrame::identity(t.joint_count());
    t.headtop_keypoint = "head_top";
    t.sole_keypoints = {"heel_l", "heel_r", "toe_l", "toe_r"};
    t.validate();
    return t;
}

IntrinsicsDatabase intrinsics_database() {
    IntrinsicsDatabase db;
    auto add = [&](const std::string& device, int w, int h, double fx, double fy) {
        IntrinsicsRecord r;
        r.device = device;
        r.intrinsics.fx = fx;
        r.intrinsics.fy = fy;
        r.intrinsics.cx = w / 2.0;
        r.intrinsics.cy = h / 2.0;
        r.intrinsics.image_width = w;
        r.intrinsics.image_height = h;
        db.insert(r);
    };
    add("synthcam", 1920, 1080, 1450.0, 1450.0);
    add("phone-a14", 1920, 1080, 1468.0, 1468.0);
    add("phone-a15", 1920, 1080, 1512.0, 1512.0);
    add("phone-a16", 1920, 1080, 1495.0, 1495.0);
    add("phone-a16", 3840, 2160, 2990.0, 2990.0);
    add("tablet-m2", 1920, 1080, 1433.0, 1433.0);
    return db;
}

PresetTable preset_table() {
    PresetTable table;
    auto add = [&](const std::string& name, double cutoff, double w_r, double w_v,
                   double w_s, double w_sm, std::optional<double> w_f) {
        RefinementPreset p;
        p.name = name;
        p.filter_cutoff_hz = cutoff;
        p.w_reprojection = w_r;
        p.w_contact_velocity = w_v;
        p.w_contact_position = w_s;
        p.w_smoothness = w_sm;
        p.w_flat_floor = w_f;
        p.w_camera = 1000.0;
        p.w_height = 100.0;
        p.w_shape = 1.0;
        table.insert(p);
    };
    add("walking", 6.0, 50.0, 1.0, 100.0, 10.0, 100.0);
    add("squats", 4.0, 50.0, 1.0, 100.0, 10.0, 10.0);
    add("sts", 4.0, 250.0, 1.0, 100.0, 10.0, 50.0);
    add("other", 8.0, 50.0, 1.0, 100.0, 10.0, std::nullopt);
    return table;
}

BiomechModel biomech_model() {
    const Geometry g;
    BiomechModel m;
    m.format_version = 1;

    auto add_coordinate = [&](const std::string& name, CoordKind kind, double lo,
                              double hi) {
        BiomechCoordinate c;
        c.name = name;
        c.kind = kind;
        c.min_value = lo;
        c.max_value = hi;
        m.coordinates.push_back(c);
        return static_cast<int>(m.coordinates.size()) - 1;
    };
    auto add_segment = [&](const std::string& name, int parent,
                           const Eigen::Vector3d& offset) {
        BiomechSegment s;
        s.name = name;
        s.parent = parent;
        s.rest_offset = offset;
        m.segments.push_back(s);
        return static_cast<int>(m.segments.size()) - 1;
    };
    auto free_motion = [&](int segment, CoordKind kind, int axis, int coordinate) {
        SegmentMotion mo;
        mo.kind = kind;
        mo.axis = axis;
        mo.coordinate = coordinate;
        m.segments[static_cast<size_t>(segment)].motions.push_back(mo);
    };
    auto coupled_motion = [&](int segment, int axis, const std::string& name,
                              int master, std::vector<double> kx,
                              std::vector<double> ky) {
        SegmentMotion mo;
        mo.kind = CoordKind::kRotation;
        mo.axis = axis;
        mo.master = master;
        mo.name = name;
        mo.spline = CubicSpline(std::move(kx), std::move(ky));
        m.segments[static_cast<size_t>(segment)].motions.push_back(mo);
    };

    // Coordinate order is the canonical layout of coordinate files.
    const int pelvis_tx = add_coordinate("pelvis_tx", CoordKind::kTranslation, -10, 10);
    const int pelvis_ty = add_coordinate("pelvis_ty", CoordKind::kTranslation, -2, 3);
    const int pelvis_tz = add_coordinate("pelvis_tz", CoordKind::kTranslation, -10, 10);
    const int pelvis_tilt = add_coordinate("pelvis_tilt", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int pelvis_list = add_coordinate("pelvis_list", CoordKind::kRotation, -60 * deg, 60 * deg);
    const int pelvis_rotation =
        add_coordinate("pelvis_rotation", CoordKind::kRotation, -180 * deg, 180 * deg);
    const int lumbar_extension =
        add_coordinate("lumbar_extension", CoordKind::kRotation, -90 * deg, 45 * deg);
    const int lumbar_bending =
        add_coordinate("lumbar_bending", CoordKind::kRotation, -45 * deg, 45 * deg);
    const int lumbar_rotation =
        add_coordinate("lumbar_rotation", CoordKind::kRotation, -45 * deg, 45 * deg);
    const int hip_flexion_r = add_coordinate("hip_flexion_r", CoordKind::kRotation, -40 * deg, 130 * deg);
    const int hip_adduction_r =
        add_coordinate("hip_adduction_r", CoordKind::kRotation, -50 * deg, 50 * deg);
    const int hip_rotation_r =
        add_coordinate("hip_rotation_r", CoordKind::kRotation, -45 * deg, 45 * deg);
    const int knee_angle_r = add_coordinate("knee_angle_r", CoordKind::kRotation, -140 * deg, 1 * deg);
    const int ankle_angle_r =
        add_coordinate("ankle_angle_r", CoordKind::kRotation, -50 * deg, 40 * deg);
    const int subtalar_angle_r =
        add_coordinate("subtalar_angle_r", CoordKind::kRotation, -35 * deg, 35 * deg);
    const int mtp_angle_r = add_coordinate("mtp_angle_r", CoordKind::kRotation, -30 * deg, 60 * deg);
    const int hip_flexion_l = add_coordinate("hip_flexion_l", CoordKind::kRotation, -40 * deg, 130 * deg);
    const int hip_adduction_l =
        add_coordinate("hip_adduction_l", CoordKind::kRotation, -50 * deg, 50 * deg);
    const int hip_rotation_l =
        add_coordinate("hip_rotation_l", CoordKind::kRotation, -45 * deg, 45 * deg);
    const int knee_angle_l = add_coordinate("knee_angle_l", CoordKind::kRotation, -140 * deg, 1 * deg);
    const int ankle_angle_l =
        add_coordinate("ankle_angle_l", CoordKind::kRotation, -50 * deg, 40 * deg);
    const int subtalar_angle_l =
        add_coordinate("subtalar_angle_l", CoordKind::kRotation, -35 * deg, 35 * deg);
    const int mtp_angle_l = add_coordinate("mtp_angle_l", CoordKind::kRotation, -30 * deg, 60 * deg);
    const int arm_flex_r = add_coordinate("arm_flex_r", CoordKind::kRotation, -60 * deg, 150 * deg);
    const int arm_add_r = add_coordinate("arm_add_r", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int arm_rot_r = add_coordinate("arm_rot_r", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int elbow_flex_r = add_coordinate("elbow_flex_r", CoordKind::kRotation, 0.0, 150 * deg);
    const int pro_sup_r = add_coordinate("pro_sup_r", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int arm_flex_l = add_coordinate("arm_flex_l", CoordKind::kRotation, -60 * deg, 150 * deg);
    const int arm_add_l = add_coordinate("arm_add_l", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int arm_rot_l = add_coordinate("arm_rot_l", CoordKind::kRotation, -90 * deg, 90 * deg);
    const int elbow_flex_l = add_coordinate("elbow_flex_l", CoordKind::kRotation, 0.0, 150 * deg);
    const int pro_sup_l = add_coordinate("pro_sup_l", CoordKind::kRotation, -90 * deg, 90 * deg);

    const int pelvis = add_segment("pelvis", -1, g.pelvis);
    free_motion(pelvis, CoordKind::kTranslation, 0, pelvis_tx);
    free_motion(pelvis, CoordKind::kTranslation, 1, pelvis_ty);
    free_motion(pelvis, CoordKind::kTranslation, 2, pelvis_tz);
    free_motion(pelvis, CoordKind::kRotation, 2, pelvis_tilt);
    free_motion(pelvis, CoordKind::kRotation, 0, pelvis_list);
    free_motion(pelvis, CoordKind::kRotation, 1, pelvis_rotation);

    const int torso = add_segment("torso", pelvis, g.torso);
    free_motion(torso, CoordKind::kRotation, 2, lumbar_extension);
    free_motion(torso, CoordKind::kRotation, 0, lumbar_bending);
    free_motion(torso, CoordKind::kRotation, 1, lumbar_rotation);

    // Knee coupling: abduction and internal rotation follow the flexion
    // angle. Values are plausible for a generic adult knee but are not the
    // canonical curves of any published model (those are not reproduced
    // here); the file-based model makes them swappable.
    const std::vector<double> knee_knots = {-140 * deg, -120 * deg, -90 * deg,
                                            -60 * deg,  -30 * deg,  1 * deg};
    const std::vector<double> knee_add = {-0.009, -0.017, -0.035, -0.044, -0.026, 0.0};
    const std::vector<double> knee_rot = {0.157, 0.157, 0.157, 0.140, 0.087, 0.0};
    auto negate = [](std::vector<double> v) {
        for (auto& x : v) x = -x;
        return v;
    };

    auto add_leg = [&](const char* suffix, bool right, int hip_flexion,
                       int hip_adduction, int hip_rotation, int knee_angle,
                       int ankle_angle, int subtalar_angle, int mtp_angle) {
        const Eigen::Vector3d side = right ? Eigen::Vector3d(1, 1, 1)
                                           : Eigen::Vector3d(1, 1, -1);
        const int thigh = add_segment(std::string("thigh") + suffix, pelvis,
                                      g.thigh.cwiseProduct(side));
        free_motion(thigh, CoordKind::kRotation, 2, hip_flexion);
        free_motion(thigh, CoordKind::kRotation, 0, hip_adduction);
        free_motion(thigh, CoordKind::kRotation, 1, hip_rotation);
        const int shank = add_segment(std::string("shank") + suffix, thigh, g.shank);
        free_motion(shank, CoordKind::kRotation, 2, knee_angle);
        coupled_motion(shank, 0, std::string("knee_adduction") + suffix, knee_angle,
                       knee_knots, right ? knee_add : negate(knee_add));
        coupled_motion(shank, 1, std::string("knee_rotation") + suffix, knee_angle,
                       knee_knots, right ? knee_rot : negate(knee_rot));
        const int foot = add_segment(std::string("foot") + suffix, shank, g.foot);
        free_motion(foot, CoordKind::kRotation, 2, ankle_angle);
        free_motion(foot, CoordKind::kRotation, 0, subtalar_angle);
        const int toes = add_segment(std::string("toes") + suffix, foot, g.toes);
        free_motion(toes, CoordKind::kRotation, 2, mtp_angle);
        m.segments[static_cast<size_t>(toes)].scale_group = std::string("foot") + suffix;
        return std::array<int, 4>{thigh, shank, foot, toes};
    };
    add_leg("_r", true, hip_flexion_r, hip_adduction_r, hip_rotation_r, knee_angle_r,
            ankle_angle_r, subtalar_angle_r, mtp_angle_r);
    add_leg("_l", false, hip_flexion_l, hip_adduction_l, hip_rotation_l, knee_angle_l,
            ankle_angle_l, subtalar_angle_l, mtp_angle_l);

    auto add_arm = [&](const char* suffix, bool right, int arm_flex, int arm_add,
                       int arm_rot, int elbow_flex, int pro_sup) {
        const Eigen::Vector3d up = right ? g.upperarm : mirror(g.upperarm);
        const int upperarm = add_segment(std::string("upperarm") + suffix, torso, up);
        free_motion(upperarm, CoordKind::kRotation, 2, arm_flex);
        free_motion(upperarm, CoordKind::kRotation, 0, arm_add);
        free_motion(upperarm, CoordKind::kRotation, 1, arm_rot);
        const int forearm = add_segment(std::string("forearm") + suffix, upperarm, g.forearm);
        free_motion(forearm, CoordKind::kRotation, 2, elbow_flex);
        free_motion(forearm, CoordKind::kRotation, 1, pro_sup);
    };
    add_arm("_r", true, arm_flex_r, arm_add_r, arm_rot_r, elbow_flex_r, pro_sup_r);
    add_arm("_l", false, arm_flex_l, arm_add_l, arm_rot_l, elbow_flex_l, pro_sup_l);

    for (const auto& spec : marker_specs()) {
        std::string right_seg = spec.segment;
        Eigen::Vector3d offset = spec.offset;
        // Toe markers ride the toes segment here (the template keeps them
        // on the rigid foot); world positions agree at neutral MTP.
        if (std::string(spec.right_name) == "RTOE") {
            right_seg = "toes_r";
            offset -= g.toes;
        }
        const int seg = m.segment_index(right_seg);
        m.markers.push_back({spec.right_name, seg, offset});
        if (spec.bilateral) {
            const int lseg = m.segment_index(left_segment(right_seg));
            m.markers.push_back({spec.left_name, lseg, mirror(offset)});
        }
    }

    auto pairs = [&](const std::string& segment, std::vector<ScalePair> list) {
        m.scaling_pairs[segment] = std::move(list);
    };
    pairs("pelvis", {{"RASI", "LASI"}, {"RPSI", "LPSI"}});
    pairs("torso", {{"C7", "T10"}, {"CLAV", "STRN"}});
    pairs("upperarm_r", {{"RUPA", "RELB"}});
    pairs("upperarm_l", {{"LUPA", "LELB"}});
    pairs("forearm_r", {{"RFRA", "RWRI"}});
    pairs("forearm_l", {{"LFRA", "LWRI"}});
    pairs("thigh_r", {{"RTHI", "RKNL"}, {"RKNL", "RKNM"}});
    pairs("thigh_l", {{"LTHI", "LKNL"}, {"LKNL", "LKNM"}});
    pairs("shank_r", {{"RSHA", "RANL"}, {"RANL", "RANM"}});
    pairs("shank_l", {{"LSHA", "LANL"}, {"LANL", "LANM"}});
    pairs("foot_r", {{"RHEE", "RMT1"}, {"RHEE", "RMT5"}});
    pairs("foot_l", {{"LHEE", "LMT1"}, {"LHEE", "LMT5"}});

    // Six spheres per foot, bottoms grazing the floor in the neutral pose
    // (foot sole plane y = 0). Placement and parameters are generic
    // defaults, overridable through the model file.
    auto add_spheres = [&](const char* suffix, bool right) {
        const double zs = right ? 1.0 : -1.0;
        const int foot = m.segment_index(std::string("foot") + suffix);
        const int toes = m.segment_index(std::string("toes") + suffix);
        auto sphere = [&](const std::string& name, int seg, double x, double y,
                          double z) {
            ContactSphere s;
            s.name = name + suffix;
            s.segment = seg;
            s.offset = {x, y, zs * z};
            m.contact_spheres.push_back(s);
        };
        sphere("heel", foot, -0.032, -0.048, 0.006);
        sphere("midfoot_med", foot, 0.060, -0.048, -0.020);
        sphere("midfoot_lat", foot, 0.045, -0.048, 0.040);
        sphere("mt1", foot, 0.120, -0.048, -0.030);
        sphere("mt5", foot, 0.110, -0.048, 0.045);
        sphere("toe", toes, 0.040, 0.012, 0.005);
    };
    add_spheres("_r", true);
    add_spheres("_l", false);

    m.validate();
    return m;
}

}  // namespace monokin::defaults

#include "monokin/harness.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <random>

#include "monokin/defaults.hpp"
#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

void CorruptionSpec::validate() const {
    auto nonneg = [](double v, const char* what) {
        if (!(v >= 0) || !std::isfinite(v))
            throw ValidationError(std::string(what) + " must be >= 0");
    };
    nonneg(pelvis_drift, "pelvis drift");
    nonneg(keypoint_noise_px, "keypoint noise");
    nonneg(foot_penetration, "foot penetration");
    nonneg(foot_slide, "foot slide");
    nonneg(contact_noise, "contact noise");
    if (!drift_direction.allFinite() || drift_direction.norm() < 1e-12)
        throw ValidationError("drift direction must be a nonzero finite vector");
    if (!shape_offset.allFinite()) throw ValidationError("shape offset must be finite");
}

void SyntheticScenario::validate() const {
    if (activity != "walking" && activity != "squats" && activity != "sts")
        throw ValidationError("activity must be walking, squats or sts");
    if (cycles < 1) throw ValidationError("cycles must be >= 1");
    if (!(frame_rate > 0)) throw ValidationError("frame rate must be positive");
    if (!(subject_height > 0.5) || !(subject_height < 2.5))
        throw ValidationError("subject height must lie in (0.5, 2.5) m");
    if (!(subject_mass > 0)) throw ValidationError("subject mass must be positive");
    if (!(camera_distance > 0.5)) throw ValidationError("camera distance must be > 0.5 m");
    corruption.validate();
}

namespace {

constexpr double kGravity = 9.80665;
constexpr double kAnkleHeight = 0.08;  // flat-foot ankle height above the sole

double smoothstep5(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

// 0 -> 1 -> 0 over one period, C1 periodic.
double bump(double phase) { return 0.5 * (1.0 - std::cos(2.0 * M_PI * phase)); }

// ------------------------------------------------------------ leg solver

struct LegChain {
    int thigh, shank, foot, toes;
    Eigen::Vector3d d_thigh, d_shank, d_foot;
    const CubicSpline* knee_coupling_x = nullptr;
    const CubicSpline* knee_coupling_y = nullptr;
    int hip_z, hip_x, hip_y, knee, ankle_z, ankle_x, mtp;
    double knee_min, knee_max;
};

LegChain resolve_leg(const BiomechModel& m, const char* suffix) {
    LegChain leg;
    auto seg = [&](const std::string& base) {
        const int i = m.segment_index(base + suffix);
        if (i < 0) throw ValidationError("model lacks segment " + base + suffix);
        return i;
    };
    leg.thigh = seg("thigh");
    leg.shank = seg("shank");
    leg.foot = seg("foot");
    leg.toes = seg("toes");
    leg.d_thigh = m.segments[static_cast<size_t>(leg.thigh)].rest_offset;
    leg.d_shank = m.segments[static_cast<size_t>(leg.shank)].rest_offset;
    leg.d_foot = m.segments[static_cast<size_t>(leg.foot)].rest_offset;
    auto coord = [&](const std::string& base) {
        const int i = m.coordinate_index(base + suffix);
        if (i < 0) throw ValidationError("model lacks coordinate " + base + suffix);
        return i;
    };
    leg.hip_z = coord("hip_flexion");
    leg.hip_x = coord("hip_adduction");
    leg.hip_y = coord("hip_rotation");
    leg.knee = coord("knee_angle");
    leg.ankle_z = coord("ankle_angle");
    leg.ankle_x = coord("subtalar_angle");
    leg.mtp = coord("mtp_angle");
    leg.knee_min = m.coordinates[static_cast<size_t>(leg.knee)].min_value;
    leg.knee_max = m.coordinates[static_cast<size_t>(leg.knee)].max_value;
    for (const auto& mo : m.segments[static_cast<size_t>(leg.shank)].motions) {
        if (!mo.coupled()) continue;
        if (mo.axis == 0) leg.knee_coupling_x = &mo.spline;
        if (mo.axis == 1) leg.knee_coupling_y = &mo.spline;
    }
    return leg;
}

Eigen::Matrix3d knee_rotation(const LegChain& leg, double q) {
    Eigen::Matrix3d r = axis_rotation(2, q);
    if (leg.knee_coupling_x) r = r * axis_rotation(0, leg.knee_coupling_x->value(q));
    if (leg.knee_coupling_y) r = r * axis_rotation(1, leg.knee_coupling_y->value(q));
    return r;
}

// Exact closed-chain leg solve: pelvis pose and desired foot pose in,
// hip (zxy), knee flexion and ankle (zx) coordinates out. The free hip
// spin is chosen so the residual ankle rotation is exactly realizable by
// the 2-DOF ankle; of the two roots, the knee is kept pointing forward.
void solve_leg(const BiomechModel& model, const LegChain& leg,
               const SegmentFrame& pelvis, const SegmentFrame& foot_des,
               Eigen::VectorXd& q) {
    const Eigen::Vector3d hip_origin = pelvis.origin + pelvis.rotation * leg.d_thigh;
    const Eigen::Vector3d u = pelvis.rotation.transpose() * (foot_des.origin - hip_origin);
    const double target = u.norm();

    auto ankle_in_thigh = [&](double qk) {
        return (leg.d_shank + knee_rotation(leg, qk) * leg.d_foot).eval();
    };
    double lo = leg.knee_min, hi = leg.knee_max;
    double f_lo = ankle_in_thigh(lo).norm() - target;
    double f_hi = ankle_in_thigh(hi).norm() - target;
    if (f_hi < 0)
        throw ValidationError("synthetic plan exceeds leg reach (distance " +
                              std::to_string(target) + " m)");
    if (f_lo > 0)
        throw ValidationError("synthetic plan closer than maximal knee flexion allows");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ankle_in_thigh(mid).norm() - target > 0)
            hi = mid;
        else
            lo = mid;
    }
    const double qk = 0.5 * (lo + hi);
    const Eigen::Vector3d p = ankle_in_thigh(qk);
    const Eigen::Matrix3d r_knee = knee_rotation(leg, qk);

    // Minimal rotation p -> u, then a spin about u.
    const Eigen::Vector3d pn = p / p.norm(), un = u / target;
    Eigen::Vector3d axis = pn.cross(un);
    const double sin_a = axis.norm(), cos_a = pn.dot(un);
    Eigen::Matrix3d r_pu = Eigen::Matrix3d::Identity();
    if (sin_a > 1e-14) {
        r_pu = axis_angle_to_matrix(axis / sin_a * std::atan2(sin_a, cos_a));
    } else if (cos_a < 0) {
        // Antiparallel: rotate pi about any axis orthogonal to p.
        const Eigen::Vector3d ortho = pn.unitOrthogonal();
        r_pu = axis_angle_to_matrix(M_PI * ortho);
    }
    auto hip_rotation = [&](double phi) {
        return (axis_angle_to_matrix(phi * un) * r_pu).eval();
    };
    // Ankle feasibility requires zero (2,0) entry in the residual rotation
    // (the z-x factorization manifold). That entry is sinusoidal in the
    // spin angle, so solve a*cos(phi) + b*sin(phi) = -c in closed form.
    auto residual_entry = [&](double phi) {
        const Eigen::Matrix3d shank_world = pelvis.rotation * hip_rotation(phi) * r_knee;
        return (shank_world.transpose() * foot_des.rotation)(2, 0);
    };
    const double g0 = residual_entry(0.0);
    const double g90 = residual_entry(M_PI_2);
    const double g180 = residual_entry(M_PI);
    const double c = 0.5 * (g0 + g180);
    const double a = 0.5 * (g0 - g180);
    const double b = g90 - c;
    const double r = std::hypot(a, b);
    if (r < 1e-14 && std::abs(c) > 1e-12)
        throw ValidationError("degenerate hip spin equation in synthetic plan");
    const double delta = std::atan2(b, a);
    const double base = std::acos(std::clamp(-c / std::max(r, 1e-300), -1.0, 1.0));
    const double cand[2] = {delta + base, delta - base};

    // Keep the knee bowing forward (pelvis x axis).
    const Eigen::Vector3d fwd = pelvis.rotation * Eigen::Vector3d::UnitX();
    const Eigen::Vector3d chord_mid = 0.5 * (hip_origin + foot_des.origin);
    double best_phi = cand[0], best_score = -1e300;
    for (double phi : cand) {
        const Eigen::Vector3d knee_pos =
            hip_origin + pelvis.rotation * hip_rotation(phi) * leg.d_shank;
        const double score = (knee_pos - chord_mid).dot(fwd);
        if (score > best_score) {
            best_score = score;
            best_phi = phi;
        }
    }
    const Eigen::Matrix3d r_hip = hip_rotation(best_phi);

    // Hip z-x-y factorization.
    q[leg.hip_x] = std::asin(std::clamp(r_hip(2, 1), -1.0, 1.0));
    q[leg.hip_z] = std::atan2(-r_hip(0, 1), r_hip(1, 1));
    q[leg.hip_y] = std::atan2(-r_hip(2, 0), r_hip(2, 2));
    q[leg.knee] = qk;
    const Eigen::Matrix3d ankle =
        (pelvis.rotation * r_hip * r_knee).transpose() * foot_des.rotation;
    q[leg.ankle_z] = std::atan2(ankle(1, 0), ankle(0, 0));
    q[leg.ankle_x] = std::atan2(ankle(2, 1), ankle(2, 2));
    q[leg.mtp] = 0.0;
}

// ------------------------------------------------------------ motion plans

struct MotionPlan {
    int frames = 0;
    double rate = 0.0;
    std::vector<Eigen::Vector3d> pelvis_pos;     // world pelvis origin
    std::vector<Eigen::Vector3d> pelvis_angles;  // tilt, list, rotation
    std::vector<double> lumbar_ext, lumbar_bend, lumbar_rot;
    std::vector<double> arm_flex_r, arm_flex_l, elbow_r, elbow_l;
    std::array<std::vector<SegmentFrame>, 2> foot_pose;        // [left, right]
    std::array<std::vector<double>, kContactChannelCount> contact;  // channel order
    std::vector<int> repetition_boundaries;

    void resize(int n) {
        frames = n;
        pelvis_pos.assign(static_cast<size_t>(n), Eigen::Vector3d::Zero());
        pelvis_angles.assign(static_cast<size_t>(n), Eigen::Vector3d::Zero());
        lumbar_ext.assign(static_cast<size_t>(n), 0.0);
        lumbar_bend.assign(static_cast<size_t>(n), 0.0);
        lumbar_rot.assign(static_cast<size_t>(n), 0.0);
        arm_flex_r.assign(static_cast<size_t>(n), 0.0);
        arm_flex_l.assign(static_cast<size_t>(n), 0.0);
        elbow_r.assign(static_cast<size_t>(n), 0.3);
        elbow_l.assign(static_cast<size_t>(n), 0.3);
        for (auto& fp : foot_pose)
            fp.assign(static_cast<size_t>(n), SegmentFrame{});
        for (auto& ch : contact) ch.assign(static_cast<size_t>(n), 0.0);
    }
};

struct StanceWindow {
    int first = 0, last = -1;  // frame span, inclusive; empty when last < first
    SegmentFrame pose;
};

// Freeze the foot during stance windows, interpolate smoothly in between.
void apply_foot_schedule(MotionPlan& plan, FootSide side,
                         const std::vector<StanceWindow>& windows) {
    auto& poses = plan.foot_pose[static_cast<size_t>(side)];
    const int n = plan.frames;
    for (const auto& w : windows)
        for (int f = std::max(0, w.first); f <= std::min(n - 1, w.last); ++f)
            poses[static_cast<size_t>(f)] = w.pose;
    // Swing segments between consecutive windows.
    for (size_t k = 0; k + 1 < windows.size(); ++k) {
        const auto& w0 = windows[k];
        const auto& w1 = windows[k + 1];
        const int f0 = w0.last, f1 = w1.first;
        for (int f = std::max(0, f0 + 1); f <= std::min(n - 1, f1 - 1); ++f) {
            const double s = static_cast<double>(f - f0) / (f1 - f0);
            const double e = smoothstep5(s);
            SegmentFrame pose;
            pose.origin = (1.0 - e) * w0.pose.origin + e * w1.pose.origin;
            const double sp = std::sin(M_PI * s);
            pose.origin.y() += 0.05 * sp * sp;  // swing clearance
            pose.rotation = Eigen::Matrix3d::Identity();
            poses[static_cast<size_t>(f)] = pose;
        }
    }
}

void set_contact_window(std::vector<double>& channel, int first, int last, int n) {
    first = std::max(first, 0);
    last = std::min(last, n - 1);
    for (int f = first; f <= last; ++f) channel[static_cast<size_t>(f)] = 1.0;
}

MotionPlan plan_walking(const SyntheticScenario& sc, double floor) {
    const double cycle = 1.1, step = 0.45, stance_frac = 0.6;
    const double stride = 2.0 * step;
    const double total = sc.cycles * cycle;
    const int n = static_cast<int>(std::floor(total * sc.frame_rate + 1e-9)) + 1;
    MotionPlan plan;
    plan.rate = sc.frame_rate;
    plan.resize(n);

    auto window_frames = [&](double t0, double t1) {
        const int f0 = static_cast<int>(std::ceil(t0 * sc.frame_rate - 1e-9));
        const int f1 = static_cast<int>(std::floor(t1 * sc.frame_rate + 1e-9));
        return std::pair<int, int>(f0, f1);
    };
    auto build_foot = [&](FootSide side) {
        const bool left = side == FootSide::kLeft;
        const double z = left ? -0.10 : 0.10;
        const double phase0 = left ? 0.0 : 0.5;
        std::vector<StanceWindow> windows;
        for (int k = -1; k <= sc.cycles + 1; ++k) {
            const double strike = (k + phase0) * cycle;
            StanceWindow w;
            const auto [f0, f1] = window_frames(strike, strike + stance_frac * cycle);
            if (f1 < 0 || f0 > n - 1 || f1 < f0) continue;
            w.first = f0;
            w.last = f1;
            w.pose.rotation = Eigen::Matrix3d::Identity();
            w.pose.origin =
                Eigen::Vector3d((k + phase0) * stride, floor + kAnkleHeight, z);
            windows.push_back(w);
        }
        apply_foot_schedule(plan, side, windows);
        // Contact probabilities: heel releases early, toe engages late;
        // both shrunk one frame inside the stance so in-bout velocities
        // vanish identically.
        const int heel_ch = static_cast<int>(left ? ContactChannel::kHeelLeft
                                                  : ContactChannel::kHeelRight);
        const int toe_ch =
            static_cast<int>(left ? ContactChannel::kToeLeft : ContactChannel::kToeRight);
        for (const auto& w : windows) {
            const int len = w.last - w.first;
            set_contact_window(plan.contact[static_cast<size_t>(heel_ch)], w.first + 1,
                               w.first + static_cast<int>(0.8 * len), n);
            set_contact_window(plan.contact[static_cast<size_t>(toe_ch)],
                               w.first + std::max(1, static_cast<int>(0.1 * len)),
                               w.last - 1, n);
        }
    };
    build_foot(FootSide::kLeft);
    build_foot(FootSide::kRight);

    for (int f = 0; f < n; ++f) {
        const double t = f / sc.frame_rate;
        const double xl = plan.foot_pose[0][static_cast<size_t>(f)].origin.x();
        const double xr = plan.foot_pose[1][static_cast<size_t>(f)].origin.x();
        plan.pelvis_pos[static_cast<size_t>(f)] =
            Eigen::Vector3d(0.5 * (xl + xr),
                            floor + 0.885 + 0.02 * std::cos(4.0 * M_PI * t / cycle),
                            -0.012 * std::sin(2.0 * M_PI * (t - 0.05 * cycle) / cycle));
        plan.pelvis_angles[static_cast<size_t>(f)] =
            Eigen::Vector3d(0.0, 0.025 * std::sin(2.0 * M_PI * t / cycle),
                            0.06 * std::sin(2.0 * M_PI * t / cycle));
        plan.lumbar_ext[static_cast<size_t>(f)] = -0.06;
        plan.lumbar_bend[static_cast<size_t>(f)] = 0.02 * std::sin(2.0 * M_PI * t / cycle);
        plan.lumbar_rot[static_cast<size_t>(f)] = -0.05 * std::sin(2.0 * M_PI * t / cycle);
        plan.arm_flex_r[static_cast<size_t>(f)] = 0.25 * std::cos(2.0 * M_PI * t / cycle);
        plan.arm_flex_l[static_cast<size_t>(f)] = -0.25 * std::cos(2.0 * M_PI * t / cycle);
        plan.elbow_r[static_cast<size_t>(f)] =
            0.35 + 0.08 * std::cos(2.0 * M_PI * t / cycle);
        plan.elbow_l[static_cast<size_t>(f)] =
            0.35 - 0.08 * std::cos(2.0 * M_PI * t / cycle);
    }
    for (int k = 1; k <= sc.cycles; ++k)
        plan.repetition_boundaries.push_back(
            std::min(n - 1, static_cast<int>(std::floor(k * cycle * sc.frame_rate + 1e-9))));
    return plan;
}

// Feet planted for the whole sequence; pelvis height and trunk curves
// carry the repetition.
MotionPlan plan_seated_cycles(const SyntheticScenario& sc, double floor, bool sts) {
    const double period = 3.0;
    const double total = sc.cycles * period;
    const int n = static_cast<int>(std::floor(total * sc.frame_rate + 1e-9)) + 1;
    MotionPlan plan;
    plan.rate = sc.frame_rate;
    plan.resize(n);

    for (int side = 0; side < 2; ++side) {
        StanceWindow w;
        w.first = 0;
        w.last = n - 1;
        w.pose.rotation = Eigen::Matrix3d::Identity();
        w.pose.origin = Eigen::Vector3d(sts ? 0.02 : 0.0, floor + kAnkleHeight,
                                        side == 0 ? -0.10 : 0.10);
        apply_foot_schedule(plan, static_cast<FootSide>(side), {w});
    }
    for (auto& ch : plan.contact) std::fill(ch.begin(), ch.end(), 1.0);

    for (int f = 0; f < n; ++f) {
        const double t = f / sc.frame_rate;
        const double phase = std::fmod(t / period, 1.0);
        if (sts) {
            // Seated at phase 0, standing at phase 0.5, seated again at 1.
            const double up = bump(phase);
            plan.pelvis_pos[static_cast<size_t>(f)] =
                Eigen::Vector3d(-0.18 + 0.18 * up, floor + 0.62 + 0.31 * up, 0.0);
            plan.lumbar_ext[static_cast<size_t>(f)] = -0.45 + 0.40 * up;
            plan.arm_flex_r[static_cast<size_t>(f)] = 0.75 - 0.60 * up;
            plan.arm_flex_l[static_cast<size_t>(f)] = 0.75 - 0.60 * up;
            plan.pelvis_angles[static_cast<size_t>(f)].x() = -0.15 + 0.15 * up;
        } else {
            const double down = bump(phase);
            plan.pelvis_pos[static_cast<size_t>(f)] =
                Eigen::Vector3d(-0.05 * down, floor + 0.93 - 0.33 * down, 0.0);
            plan.lumbar_ext[static_cast<size_t>(f)] = -0.35 * down;
            plan.arm_flex_r[static_cast<size_t>(f)] = 0.9 * down;
            plan.arm_flex_l[static_cast<size_t>(f)] = 0.9 * down;
        }
    }
    for (int k = 1; k <= sc.cycles; ++k)
        plan.repetition_boundaries.push_back(std::min(
            n - 1, static_cast<int>(std::floor(k * period * sc.frame_rate + 1e-9))));
    return plan;
}

// ------------------------------------------------- assembly and conversion

Eigen::VectorXd assemble_frame(const BiomechModel& model, const MotionPlan& plan,
                               const LegChain& right, const LegChain& left, int f) {
    Eigen::VectorXd q = model.neutral_coordinates();
    auto set = [&](const char* name, double v) {
        q[model.coordinate_index(name)] = v;
    };
    const Eigen::Vector3d& pp = plan.pelvis_pos[static_cast<size_t>(f)];
    const Eigen::Vector3d& pa = plan.pelvis_angles[static_cast<size_t>(f)];
    const Eigen::Vector3d rest = model.segments[0].rest_offset;
    set("pelvis_tx", pp.x() - rest.x());
    set("pelvis_ty", pp.y() - rest.y());
    set("pelvis_tz", pp.z() - rest.z());
    set("pelvis_tilt", pa.x());
    set("pelvis_list", pa.y());
    set("pelvis_rotation", pa.z());
    set("lumbar_extension", plan.lumbar_ext[static_cast<size_t>(f)]);
    set("lumbar_bending", plan.lumbar_bend[static_cast<size_t>(f)]);
    set("lumbar_rotation", plan.lumbar_rot[static_cast<size_t>(f)]);
    set("arm_flex_r", plan.arm_flex_r[static_cast<size_t>(f)]);
    set("arm_flex_l", plan.arm_flex_l[static_cast<size_t>(f)]);
    set("elbow_flex_r", plan.elbow_r[static_cast<size_t>(f)]);
    set("elbow_flex_l", plan.elbow_l[static_cast<size_t>(f)]);

    SegmentFrame pelvis;
    pelvis.rotation = axis_rotation(2, pa.x()) * axis_rotation(0, pa.y()) *
                      axis_rotation(1, pa.z());
    pelvis.origin = pp;
    solve_leg(model, left, pelvis, plan.foot_pose[0][static_cast<size_t>(f)], q);
    solve_leg(model, right, pelvis, plan.foot_pose[1][static_cast<size_t>(f)], q);
    return q;
}

// Biomech coordinates -> template pose frame. Segments correspond by
// name; the template head (absent from the biomech model) stays neutral.
PoseFrame coords_to_pose(const BiomechModel& model, const SkeletonTemplate& tmpl,
                         const Eigen::VectorXd& q) {
    const auto frames = biomech_fk(model, q);
    PoseFrame pose = PoseFrame::identity(tmpl.joint_count());
    pose.root_orientation = matrix_to_axis_angle(frames[0].rotation);
    pose.root_translation = frames[0].origin - model.segments[0].rest_offset;
    for (size_t i = 1; i < tmpl.segments.size(); ++i) {
        const int bio = model.segment_index(tmpl.segments[i].name);
        if (bio < 0) continue;
        const int bio_parent = model.segments[static_cast<size_t>(bio)].parent;
        const Eigen::Matrix3d local =
            frames[static_cast<size_t>(bio_parent)].rotation.transpose() *
            frames[static_cast<size_t>(bio)].rotation;
        pose.joint_rotations[i - 1] = matrix_to_axis_angle(local);
    }
    return pose;
}

CameraExtrinsics make_camera(const SyntheticScenario& sc,
                             const std::vector<Eigen::Vector3d>& pelvis_positions) {
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
    for (const auto& p : pelvis_positions) target += p;
    target /= static_cast<double>(pelvis_positions.size());
    target.y() = 1.0;
    const double az = sc.camera_azimuth_deg * M_PI / 180.0;
    Eigen::Vector3d pos = target + sc.camera_distance * Eigen::Vector3d(std::cos(az), 0.0,
                                                                        std::sin(az));
    pos.y() = sc.camera_height;
    const Eigen::Vector3d z = (target - pos).normalized();
    const Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitY()).normalized();
    const Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d rot;
    rot.row(0) = x;
    rot.row(1) = y;
    rot.row(2) = z;
    CameraExtrinsics extr;
    extr.rotation = matrix_to_axis_angle(rot);
    extr.translation = -rot * pos;
    return extr;
}

}  // namespace

SyntheticBundle synth_generate(const SyntheticScenario& scenario,
                               const SkeletonTemplate& tmpl,
                               const BiomechModel& generic_model) {
    scenario.validate();
    tmpl.validate();
    generic_model.validate();

    // Shape from the requested stature (stature is affine in beta).
    BodyShape shape;
    const double h0 = model_height(shape, tmpl);
    BodyShape probe;
    probe.coeffs[0] = 1.0;
    const double slope = model_height(probe, tmpl) - h0;
    shape.coeffs[0] = (scenario.subject_height - h0) / slope;

    // Subject-matched model: generic topology with the template's
    // shape-adjusted joint offsets.
    BiomechModel subject = generic_model;
    for (auto& seg : subject.segments) {
        const int t = tmpl.segment_index(seg.name);
        if (t >= 0) seg.rest_offset = tmpl.segment_offset(t, shape);
    }

    const double floor = 0.0;
    MotionPlan plan;
    if (scenario.activity == "walking")
        plan = plan_walking(scenario, floor);
    else
        plan = plan_seated_cycles(scenario, floor, scenario.activity == "sts");

    const LegChain right = resolve_leg(subject, "_r");
    const LegChain left = resolve_leg(subject, "_l");

    SyntheticBundle bundle;
    SyntheticTruth& truth = bundle.truth;
    truth.shape = shape;
    truth.subject_model = subject;
    truth.floor_height = floor;
    truth.subject_mass = scenario.subject_mass;
    truth.repetition_boundaries = plan.repetition_boundaries;
    truth.pose.frame_rate = scenario.frame_rate;
    for (int f = 0; f < plan.frames; ++f) {
        truth.coordinates.push_back(assemble_frame(subject, plan, right, left, f));
        truth.pose.frames.push_back(coords_to_pose(subject, tmpl, truth.coordinates.back()));
    }
    truth.grf = grf_sequence(subject, truth.coordinates, scenario.frame_rate, floor);
    truth.extrinsics = make_camera(scenario, plan.pelvis_pos);
    truth.intrinsics =
        defaults::intrinsics_database().lookup("synthcam", 1920, 1080);

    // ---- Corrupted refinement input ----
    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const CorruptionSpec& cs = scenario.corruption;

    RefinementInput& input = bundle.input;
    input.intrinsics = truth.intrinsics;
    input.preset = defaults::preset_table().get(
        scenario.activity == "walking" ? "walking"
                                       : (scenario.activity == "sts" ? "sts" : "squats"));
    input.initial_shape = shape;
    input.initial_shape.coeffs += cs.shape_offset;
    input.initial_extrinsics = truth.extrinsics;
    if (cs.camera_rotation_offset_deg != 0.0) {
        const Eigen::Vector3d axis = Eigen::Vector3d(0.3, 0.8, 0.5).normalized();
        const Eigen::Matrix3d perturbed =
            axis_angle_to_matrix(axis * cs.camera_rotation_offset_deg * M_PI / 180.0) *
            axis_angle_to_matrix(truth.extrinsics.rotation);
        input.initial_extrinsics.rotation = matrix_to_axis_angle(perturbed);
    }

    input.observations.frame_rate = scenario.frame_rate;
    input.observations.subject_height = scenario.subject_height;
    input.initial_pose.frame_rate = scenario.frame_rate;
    const Eigen::Vector3d drift_dir = cs.drift_direction.normalized();
    const double rep_period = plan.repetition_boundaries.empty()
                                  ? plan.frames / scenario.frame_rate
                                  : plan.repetition_boundaries[0] / scenario.frame_rate;
    for (int f = 0; f < plan.frames; ++f) {
        // Observations: exact projections of the truth plus optional noise.
        ObservationFrame of;
        const auto fk = forward_kinematics(shape, truth.pose.frames[static_cast<size_t>(f)],
                                           tmpl);
        for (const auto& anchor : tmpl.keypoint_anchors) {
            Keypoint2d kp;
            kp.pixel = project(fk[static_cast<size_t>(anchor.segment)].apply(anchor.offset),
                               truth.intrinsics, truth.extrinsics);
            if (cs.keypoint_noise_px > 0.0) {
                kp.pixel.x() += cs.keypoint_noise_px * gauss(rng);
                kp.pixel.y() += cs.keypoint_noise_px * gauss(rng);
            }
            kp.confidence = 1.0;
            of.keypoints.push_back(kp);
        }
        for (int c = 0; c < kContactChannelCount; ++c) {
            double p = plan.contact[static_cast<size_t>(c)][static_cast<size_t>(f)];
            if (cs.contact_noise > 0.0)
                p = std::clamp(p + cs.contact_noise * uniform(rng), 0.0, 1.0);
            of.contact_probability[static_cast<size_t>(c)] = p;
        }
        input.observations.frames.push_back(of);

        // Initial pose: truth corrupted by drift, sink and wobble.
        PoseFrame frame = truth.pose.frames[static_cast<size_t>(f)];
        const double t = f / scenario.frame_rate;
        const double progress = plan.frames > 1 ? static_cast<double>(f) / (plan.frames - 1)
                                                : 0.0;
        frame.root_translation += drift_dir * (cs.pelvis_drift * progress);
        frame.root_translation.y() -= cs.foot_penetration;
        frame.root_translation.x() +=
            0.5 * cs.foot_slide * std::sin(2.0 * M_PI * t / rep_period);
        input.initial_pose.frames.push_back(frame);
    }
    return bundle;
}

// -------------------------------------------------------------- metrics

void CoordinateSequence::validate() const {
    if (frames.size() < 1) throw ValidationError("coordinate sequence is empty");
    for (const auto& f : frames)
        if (f.size() != static_cast<int>(names.size()))
            throw ValidationError("coordinate frame width does not match names");
}

std::vector<std::string> evaluated_rotational_dofs() {
    return {"pelvis_tilt",     "pelvis_list",      "pelvis_rotation",
            "lumbar_extension", "lumbar_bending",   "lumbar_rotation",
            "hip_flexion_r",   "hip_adduction_r",  "hip_rotation_r",
            "hip_flexion_l",   "hip_adduction_l",  "hip_rotation_l",
            "knee_angle_r",    "knee_angle_l",     "ankle_angle_r",
            "ankle_angle_l",   "subtalar_angle_r", "subtalar_angle_l"};
}

namespace {

int column_of(const CoordinateSequence& seq, const std::string& name) {
    for (size_t i = 0; i < seq.names.size(); ++i)
        if (seq.names[i] == name) return static_cast<int>(i);
    throw ValidationError("coordinate column '" + name + "' missing from sequence");
}

double column_mae(const CoordinateSequence& est, const CoordinateSequence& truth,
                  const std::string& name) {
    if (est.frames.size() != truth.frames.size())
        throw ValidationError("sequences have different frame counts");
    const int ce = column_of(est, name);
    const int ct = column_of(truth, name);
    double acc = 0.0;
    for (size_t f = 0; f < est.frames.size(); ++f)
        acc += std::abs(est.frames[f][ce] - truth.frames[f][ct]);
    return acc / static_cast<double>(est.frames.size());
}

}  // namespace

RotationalMae mae_rotational(const CoordinateSequence& est,
                             const CoordinateSequence& truth) {
    est.validate();
    truth.validate();
    RotationalMae out;
    double acc = 0.0;
    for (const auto& name : evaluated_rotational_dofs()) {
        const double deg = column_mae(est, truth, name) * 180.0 / M_PI;
        out.per_dof_deg[name] = deg;
        acc += deg;
    }
    out.mean_deg = acc / static_cast<double>(evaluated_rotational_dofs().size());
    return out;
}

double mae_translational(const CoordinateSequence& est, const CoordinateSequence& truth) {
    est.validate();
    truth.validate();
    double acc = 0.0;
    for (const char* name : {"pelvis_tx", "pelvis_ty", "pelvis_tz"})
        acc += column_mae(est, truth, name) * 100.0;
    return acc / 3.0;
}

std::vector<double> drift_curve(const CoordinateSequence& est,
                                const CoordinateSequence& truth,
                                const std::vector<int>& repetition_boundaries) {
    est.validate();
    truth.validate();
    if (est.frames.size() != truth.frames.size())
        throw ValidationError("sequences have different frame counts");
    const int ex = column_of(est, "pelvis_tx"), ey = column_of(est, "pelvis_ty"),
              ez = column_of(est, "pelvis_tz");
    const int tx = column_of(truth, "pelvis_tx"), ty = column_of(truth, "pelvis_ty"),
              tz = column_of(truth, "pelvis_tz");
    auto pelvis = [&](const CoordinateSequence& s, int cx, int cy, int cz, size_t f) {
        return Eigen::Vector3d(s.frames[f][cx], s.frames[f][cy], s.frames[f][cz]);
    };
    const Eigen::Vector3d align = pelvis(est, ex, ey, ez, 0) - pelvis(truth, tx, ty, tz, 0);
    std::vector<double> out;
    for (int b : repetition_boundaries) {
        if (b < 0 || b >= static_cast<int>(est.frames.size()))
            throw ValidationError("repetition boundary out of range: " + std::to_string(b));
        const Eigen::Vector3d err = pelvis(est, ex, ey, ez, static_cast<size_t>(b)) -
                                    pelvis(truth, tx, ty, tz, static_cast<size_t>(b)) - align;
        out.push_back(err.norm() * 100.0);
    }
    return out;
}

std::vector<double> mae_grf(const std::vector<GrfFrame>& est,
                            const std::vector<GrfFrame>& truth,
                            const std::array<std::vector<StanceSpan>, 2>& stance,
                            double subject_mass) {
    if (est.size() != truth.size())
        throw ValidationError("GRF sequences have different frame counts");
    const double weight = subject_mass * kGravity;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    int count = 0;
    for (size_t side = 0; side < 2; ++side) {
        for (const auto& span : stance[side]) {
            for (int f = span.start; f <= span.end; ++f) {
                const Eigen::Vector3d d = est[static_cast<size_t>(f)].force[side] -
                                          truth[static_cast<size_t>(f)].force[side];
                acc += d.cwiseAbs();
                ++count;
            }
        }
    }
    if (count == 0) return {};
    return {100.0 * acc.x() / (count * weight), 100.0 * acc.y() / (count * weight),
            100.0 * acc.z() / (count * weight)};
}

}  // namespace monokin

#include "monokin/biomech.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

void ContactSphere::validate() const {
    if (!(radius > 0)) throw ValidationError("contact sphere radius must be positive");
    if (!(stiffness > 0)) throw ValidationError("contact sphere stiffness must be positive");
    if (!(transition_velocity > 0))
        throw ValidationError("contact sphere transition velocity must be positive");
    if (!(smoothing > 0)) throw ValidationError("contact sphere smoothing must be positive");
}

void BiomechModel::validate() const {
    if (segments.empty()) throw ValidationError("biomech model has no segments");
    if (segments[0].parent != -1) throw ValidationError("segment 0 must be the root");
    const int n = static_cast<int>(segments.size());
    for (int i = 1; i < n; ++i)
        if (segments[static_cast<size_t>(i)].parent < 0 ||
            segments[static_cast<size_t>(i)].parent >= i)
            throw ValidationError("segment '" + segments[static_cast<size_t>(i)].name +
                                  "' has invalid parent");

    const int nc = coordinate_count();
    std::vector<int> used(static_cast<size_t>(nc), 0);
    for (const auto& s : segments) {
        for (const auto& mo : s.motions) {
            if (mo.axis < 0 || mo.axis > 2)
                throw ValidationError("motion axis out of range in segment " + s.name);
            if (mo.coupled()) {
                if (mo.master < 0 || mo.master >= nc)
                    throw ValidationError("coupled motion '" + mo.name +
                                          "' has invalid master coordinate");
                if (mo.spline.empty())
                    throw ValidationError("coupled motion '" + mo.name + "' lacks a spline");
            } else {
                if (mo.coordinate < 0 || mo.coordinate >= nc)
                    throw ValidationError("motion in segment " + s.name +
                                          " references invalid coordinate");
                ++used[static_cast<size_t>(mo.coordinate)];
            }
        }
        if (!s.scale_group.empty() && segment_index(s.scale_group) < 0)
            throw ValidationError("segment '" + s.name + "' has unknown scale group '" +
                                  s.scale_group + "'");
    }
    for (int c = 0; c < nc; ++c)
        if (used[static_cast<size_t>(c)] != 1)
            throw ValidationError("coordinate '" + coordinates[static_cast<size_t>(c)].name +
                                  "' must drive exactly one motion");
    for (const auto& c : coordinates)
        if (!(c.min_value < c.max_value))
            throw ValidationError("coordinate '" + c.name + "' has empty range");
    for (const auto& mk : markers)
        if (mk.segment < 0 || mk.segment >= n)
            throw ValidationError("marker '" + mk.name + "' references invalid segment");
    for (const auto& [seg, pairs] : scaling_pairs) {
        if (segment_index(seg) < 0)
            throw ValidationError("scaling pairs reference unknown segment '" + seg + "'");
        for (const auto& p : pairs)
            if (marker_index(p.marker_a) < 0 || marker_index(p.marker_b) < 0)
                throw ValidationError("scaling pair (" + p.marker_a + ", " + p.marker_b +
                                      ") references unknown markers");
    }
    for (const auto& s : contact_spheres) {
        s.validate();
        if (s.segment < 0 || s.segment >= n)
            throw ValidationError("contact sphere '" + s.name + "' references invalid segment");
    }
}

int BiomechModel::coordinate_index(const std::string& name) const {
    for (size_t i = 0; i < coordinates.size(); ++i)
        if (coordinates[i].name == name) return static_cast<int>(i);
    return -1;
}

int BiomechModel::segment_index(const std::string& name) const {
    for (size_t i = 0; i < segments.size(); ++i)
        if (segments[i].name == name) return static_cast<int>(i);
    return -1;
}

int BiomechModel::marker_index(const std::string& name) const {
    for (size_t i = 0; i < markers.size(); ++i)
        if (markers[i].name == name) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd BiomechModel::neutral_coordinates() const {
    Eigen::VectorXd q(coordinate_count());
    for (int i = 0; i < coordinate_count(); ++i)
        q[i] = coordinates[static_cast<size_t>(i)].neutral;
    return q;
}

Eigen::VectorXd BiomechModel::clamp_to_range(const Eigen::VectorXd& q,
                                             std::vector<int>* clamped) const {
    Eigen::VectorXd out = q;
    for (int i = 0; i < coordinate_count(); ++i) {
        const auto& c = coordinates[static_cast<size_t>(i)];
        const double v = std::clamp(out[i], c.min_value, c.max_value);
        if (v != out[i] && clamped) clamped->push_back(i);
        out[i] = v;
    }
    return out;
}

double BiomechModel::segment_scale(int segment) const {
    const auto& s = segments[static_cast<size_t>(segment)];
    if (!s.scale_group.empty())
        return segments[static_cast<size_t>(segment_index(s.scale_group))].scale;
    return s.scale;
}

std::vector<SegmentFrame> biomech_fk(const BiomechModel& model, const Eigen::VectorXd& q) {
    if (q.size() != model.coordinate_count())
        throw ValidationError("coordinate vector size does not match model");
    const size_t n = model.segments.size();
    std::vector<SegmentFrame> out(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& s = model.segments[i];
        const double parent_scale = s.parent < 0 ? 1.0 : model.segment_scale(s.parent);
        Eigen::Vector3d local_origin = parent_scale * s.rest_offset;
        Eigen::Matrix3d local_rot = Eigen::Matrix3d::Identity();
        for (const auto& mo : s.motions) {
            const double v = mo.coupled() ? mo.spline.value(q[mo.master]) : q[mo.coordinate];
            if (mo.kind == CoordKind::kTranslation)
                local_origin += v * Eigen::Vector3d::Unit(mo.axis);
            else
                local_rot = local_rot * axis_rotation(mo.axis, v);
        }
        if (s.parent < 0) {
            out[i].rotation = local_rot;
            out[i].origin = local_origin;
        } else {
            const auto& p = out[static_cast<size_t>(s.parent)];
            out[i].rotation = p.rotation * local_rot;
            out[i].origin = p.origin + p.rotation * local_origin;
        }
    }
    return out;
}

static std::vector<Eigen::Vector3d> markers_from_frames(
    const BiomechModel& model, const std::vector<SegmentFrame>& frames) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(model.markers.size());
    for (const auto& mk : model.markers)
        out.push_back(frames[static_cast<size_t>(mk.segment)].apply(
            model.segment_scale(mk.segment) * mk.offset));
    return out;
}

std::vector<Eigen::Vector3d> model_fk(const BiomechModel& model, const Eigen::VectorXd& q,
                                      double range_tolerance) {
    if (q.size() != model.coordinate_count())
        throw ValidationError("coordinate vector size does not match model");
    for (int i = 0; i < model.coordinate_count(); ++i) {
        const auto& c = model.coordinates[static_cast<size_t>(i)];
        if (q[i] < c.min_value - range_tolerance || q[i] > c.max_value + range_tolerance)
            throw ValidationError("coordinate '" + c.name + "' out of range: " +
                                  std::to_string(q[i]));
    }
    return markers_from_frames(model, biomech_fk(model, q));
}

std::map<std::string, double> scale_factors(
    const std::vector<Eigen::Vector3d>& static_markers, const BiomechModel& generic) {
    if (static_markers.size() != generic.markers.size())
        throw ValidationError("static marker count does not match model marker count");
    const auto generic_markers =
        markers_from_frames(generic, biomech_fk(generic, generic.neutral_coordinates()));
    std::map<std::string, double> out;
    for (const auto& [segment, pairs] : generic.scaling_pairs) {
        double acc = 0.0;
        for (const auto& p : pairs) {
            const int a = generic.marker_index(p.marker_a);
            const int b = generic.marker_index(p.marker_b);
            const double ref =
                (generic_markers[static_cast<size_t>(a)] - generic_markers[static_cast<size_t>(b)])
                    .norm();
            const double meas =
                (static_markers[static_cast<size_t>(a)] - static_markers[static_cast<size_t>(b)])
                    .norm();
            if (ref < 1e-3 || meas < 1e-3)
                throw ValidationError("degenerate scaling pair (" + p.marker_a + ", " +
                                      p.marker_b + "): inter-marker distance below 1 mm");
            acc += meas / ref;
        }
        out[segment] = acc / static_cast<double>(pairs.size());
    }
    return out;
}

BiomechModel scale_model(const std::vector<Eigen::Vector3d>& static_markers,
                         const BiomechModel& generic) {
    const auto factors = scale_factors(static_markers, generic);
    BiomechModel scaled = generic;
    for (auto& s : scaled.segments) {
        const auto it = factors.find(s.name);
        if (it != factors.end()) s.scale = it->second;
    }
    return scaled;
}

namespace {

// Residuals stacked as 3 components per marker.
Eigen::VectorXd ik_residual(const BiomechModel& model, const Eigen::VectorXd& q,
                            const std::vector<Eigen::Vector3d>& targets) {
    const auto markers = markers_from_frames(model, biomech_fk(model, q));
    Eigen::VectorXd r(3 * static_cast<int>(targets.size()));
    for (size_t i = 0; i < targets.size(); ++i)
        r.segment<3>(3 * static_cast<int>(i)) = markers[i] - targets[i];
    return r;
}

double rms_from_residual(const Eigen::VectorXd& r) {
    const int m = static_cast<int>(r.size()) / 3;
    return std::sqrt(r.squaredNorm() / std::max(1, m));
}

// Damped Gauss-Newton descent from a single start. Monotone in cost.
IkResult lm_descent(const BiomechModel& model,
                    const std::vector<Eigen::Vector3d>& targets, Eigen::VectorXd q,
                    const IkOptions& opts) {
    const int nc = model.coordinate_count();
    q = model.clamp_to_range(q);
    Eigen::VectorXd r = ik_residual(model, q, targets);
    double cost = r.squaredNorm();
    double lambda = opts.damping;
    IkResult res;
    res.converged = false;

    const double fd_step = 1e-6;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;
        Eigen::MatrixXd jac(r.size(), nc);
        for (int c = 0; c < nc; ++c) {
            Eigen::VectorXd qp = q, qm = q;
            qp[c] += fd_step;
            qm[c] -= fd_step;
            jac.col(c) = (ik_residual(model, qp, targets) -
                          ik_residual(model, qm, targets)) /
                         (2.0 * fd_step);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool stepped = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd h = jtj;
            h.diagonal().array() += lambda;
            const Eigen::VectorXd delta = h.ldlt().solve(-jtr);
            const Eigen::VectorXd q_new = model.clamp_to_range(q + delta);
            const Eigen::VectorXd r_new = ik_residual(model, q_new, targets);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                const double step = (q_new - q).norm();
                q = q_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(opts.damping, lambda * 0.3);
                stepped = true;
                if (step < opts.step_tolerance) {
                    res.converged = true;
                    iter = opts.max_iterations;  // done
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            res.converged = true;  // no descent direction left
            break;
        }
    }
    res.clamped.clear();
    res.coordinates = model.clamp_to_range(q, &res.clamped);
    res.residual_rms = rms_from_residual(r);
    return res;
}

struct Pose {
    Eigen::Matrix3d rot;
    Eigen::Vector3d origin;
    bool valid = false;
};

// Rigid fit of a segment's (scaled) marker cloud to targets; needs >= 3
// reasonably non-collinear markers.
Pose kabsch_segment(const BiomechModel& model, int segment,
                    const std::vector<Eigen::Vector3d>& targets) {
    Pose pose;
    std::vector<Eigen::Vector3d> local, world;
    const double k = model.segment_scale(segment);
    for (size_t i = 0; i < model.markers.size(); ++i) {
        if (model.markers[i].segment != segment) continue;
        local.push_back(k * model.markers[i].offset);
        world.push_back(targets[i]);
    }
    if (local.size() < 3) return pose;
    Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cb = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < local.size(); ++i) {
        ca += local[i];
        cb += world[i];
    }
    ca /= static_cast<double>(local.size());
    cb /= static_cast<double>(local.size());
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < local.size(); ++i)
        h += (local[i] - ca) * (world[i] - cb).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    pose.rot = svd.matrixV() * d * svd.matrixU().transpose();
    pose.origin = cb - pose.rot * ca;
    pose.valid = true;
    return pose;
}

// Factor R into the segment's listed rotation axes. Supports the z / zx /
// zy / zxy patterns used by the default model; others keep the seed.
bool factor_rotations(const Eigen::Matrix3d& r, const std::vector<int>& axes,
                      std::vector<double>& angles) {
    angles.assign(axes.size(), 0.0);
    if (axes == std::vector<int>{2}) {
        angles[0] = std::atan2(r(1, 0), r(0, 0));
        return true;
    }
    if (axes == std::vector<int>{2, 0}) {
        angles[0] = std::atan2(r(1, 0), r(0, 0));
        angles[1] = std::atan2(r(2, 1), r(2, 2));
        return true;
    }
    if (axes == std::vector<int>{2, 1}) {
        angles[0] = std::atan2(-r(0, 1), r(1, 1));
        angles[1] = std::atan2(-r(2, 0), r(2, 2));
        return true;
    }
    if (axes == std::vector<int>{2, 0, 1}) {
        angles[1] = std::asin(std::clamp(r(2, 1), -1.0, 1.0));
        angles[0] = std::atan2(-r(0, 1), r(1, 1));
        angles[2] = std::atan2(-r(2, 0), r(2, 2));
        return true;
    }
    return false;
}

// Minimal rotation taking direction a to direction b.
Eigen::Matrix3d rotation_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const Eigen::Vector3d an = a.normalized(), bn = b.normalized();
    const Eigen::Vector3d axis = an.cross(bn);
    const double s = axis.norm(), c = an.dot(bn);
    if (s < 1e-14) {
        if (c > 0) return Eigen::Matrix3d::Identity();
        return axis_angle_to_matrix(M_PI * an.unitOrthogonal());
    }
    return axis_angle_to_matrix(axis / s * std::atan2(s, c));
}

// Closed-form chain initialization: rigid fits for marker-rich segments,
// aim alignment for two-marker segments (the arms), seed values elsewhere.
Eigen::VectorXd cascade_init(const BiomechModel& model,
                             const std::vector<Eigen::Vector3d>& targets,
                             const Eigen::VectorXd& seed) {
    Eigen::VectorXd q = seed;
    const size_t n = model.segments.size();
    std::vector<Pose> world(n);

    auto rotation_axes = [&](int segment) {
        std::vector<int> axes;
        for (const auto& mo : model.segments[static_cast<size_t>(segment)].motions)
            if (mo.kind == CoordKind::kRotation && !mo.coupled()) axes.push_back(mo.axis);
        return axes;
    };
    auto assign_rotations = [&](int segment, const std::vector<double>& angles) {
        size_t k = 0;
        for (const auto& mo : model.segments[static_cast<size_t>(segment)].motions)
            if (mo.kind == CoordKind::kRotation && !mo.coupled())
                q[mo.coordinate] = angles[k++];
    };
    auto local_from_seed = [&](size_t i) {
        Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
        for (const auto& mo : model.segments[i].motions) {
            if (mo.kind != CoordKind::kRotation) continue;
            const double v = mo.coupled() ? mo.spline.value(q[mo.master]) : q[mo.coordinate];
            r = r * axis_rotation(mo.axis, v);
        }
        return r;
    };
    // Two-marker segments: align the inter-marker direction.
    auto aim_fit = [&](size_t i, const Eigen::Matrix3d& parent_rot) {
        Pose pose;
        std::vector<Eigen::Vector3d> local, tgt;
        const double k = model.segment_scale(static_cast<int>(i));
        for (size_t m = 0; m < model.markers.size(); ++m) {
            if (model.markers[m].segment != static_cast<int>(i)) continue;
            local.push_back(k * model.markers[m].offset);
            tgt.push_back(targets[m]);
        }
        if (local.size() != 2) return pose;
        const Eigen::Vector3d d_local = local[1] - local[0];
        const Eigen::Vector3d d_world = tgt[1] - tgt[0];
        if (d_local.norm() < 1e-6 || d_world.norm() < 1e-6) return pose;
        const Eigen::Matrix3d guess = parent_rot * local_from_seed(i);
        pose.rot = rotation_between(guess * d_local, d_world) * guess;
        pose.origin = 0.5 * ((tgt[0] - pose.rot * local[0]) + (tgt[1] - pose.rot * local[1]));
        pose.valid = true;
        return pose;
    };

    for (size_t i = 0; i < n; ++i) {
        const auto& s = model.segments[i];
        const Eigen::Matrix3d parent_rot =
            s.parent < 0 ? Eigen::Matrix3d::Identity()
                         : world[static_cast<size_t>(s.parent)].rot;
        const bool parent_known = s.parent < 0 || world[static_cast<size_t>(s.parent)].valid;

        Pose fit = kabsch_segment(model, static_cast<int>(i), targets);
        if (!fit.valid && parent_known) fit = aim_fit(i, parent_rot);
        if (!fit.valid || !parent_known) {
            // Keep the seed; expose the composed rotation to children.
            Pose pose;
            pose.rot = parent_rot * local_from_seed(i);
            pose.valid = parent_known;
            world[i] = pose;
            continue;
        }
        const Eigen::Matrix3d rel = parent_rot.transpose() * fit.rot;
        std::vector<double> angles;
        if (factor_rotations(rel, rotation_axes(static_cast<int>(i)), angles)) {
            assign_rotations(static_cast<int>(i), angles);
            if (s.parent < 0) {
                const Eigen::Vector3d t = fit.origin - s.rest_offset;
                for (const auto& mo : s.motions)
                    if (mo.kind == CoordKind::kTranslation) q[mo.coordinate] = t[mo.axis];
            }
        }
        world[i] = fit;
        // Re-express with clamped coordinates so children stay consistent.
        q = model.clamp_to_range(q);
        world[i].rot = parent_rot * local_from_seed(i);
    }
    return model.clamp_to_range(q);
}

}  // namespace

IkResult ik_frame(const BiomechModel& model,
                  const std::vector<Eigen::Vector3d>& target_markers,
                  const Eigen::VectorXd& q_init, const IkOptions& opts) {
    if (target_markers.size() != model.markers.size())
        throw ValidationError("target marker count does not match model");
    if (q_init.size() != model.coordinate_count())
        throw ValidationError("q_init size does not match model");

    IkResult best = lm_descent(model, target_markers, q_init, opts);
    auto consider = [&](const Eigen::VectorXd& start) {
        IkResult r = lm_descent(model, target_markers, start, opts);
        if (r.residual_rms < best.residual_rms) best = r;
    };
    if (best.residual_rms > opts.restart_residual_rms)
        consider(cascade_init(model, target_markers, q_init));
    if (best.residual_rms > opts.restart_residual_rms)
        consider(model.neutral_coordinates());
    if (best.residual_rms > opts.restart_residual_rms) {
        // Flexed seed helps when limbs start folded the wrong way.
        Eigen::VectorXd flexed = model.neutral_coordinates();
        for (const char* name : {"hip_flexion_r", "hip_flexion_l"}) {
            const int c = model.coordinate_index(name);
            if (c >= 0) flexed[c] = 0.7;
        }
        for (const char* name : {"knee_angle_r", "knee_angle_l"}) {
            const int c = model.coordinate_index(name);
            if (c >= 0) flexed[c] = -1.2;
        }
        for (const char* name : {"elbow_flex_r", "elbow_flex_l"}) {
            const int c = model.coordinate_index(name);
            if (c >= 0) flexed[c] = 1.0;
        }
        consider(cascade_init(model, target_markers, flexed));
    }
    return best;
}

IkSequenceResult ik_sequence(const BiomechModel& model,
                             const std::vector<std::vector<Eigen::Vector3d>>& trajectories,
                             const IkOptions& opts) {
    IkSequenceResult out;
    Eigen::VectorXd q = model.neutral_coordinates();
    for (size_t f = 0; f < trajectories.size(); ++f) {
        IkResult r;
        try {
            r = ik_frame(model, trajectories[f], q, opts);
        } catch (const Error& e) {
            throw ValidationError("IK failed at frame " + std::to_string(f) + ": " +
                                  e.what());
        }
        out.coordinates.push_back(r.coordinates);
        out.residual_rms.push_back(r.residual_rms);
        out.all_converged = out.all_converged && r.converged;
        q = r.coordinates;
    }
    return out;
}

}  // namespace monokin

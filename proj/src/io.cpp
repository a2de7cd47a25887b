#include "monokin/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "monokin/error.hpp"

namespace monokin::io {

using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path.string());
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError(std::string(what) + " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const fs::path& path) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        return v;
    } catch (...) {
        throw ValidationError("bad number '" + s + "' in " + path.string());
    }
}

constexpr int kAxisX = 0;
const char* axis_name(int axis) { return axis == 0 ? "x" : (axis == 1 ? "y" : "z"); }
int axis_from_name(const std::string& s) {
    if (s == "x") return kAxisX;
    if (s == "y") return 1;
    if (s == "z") return 2;
    throw ValidationError("axis must be x, y or z, got '" + s + "'");
}

}  // namespace

// ------------------------------------------------------------ template

SkeletonTemplate load_template(const fs::path& path) {
    const json j = read_json(path);
    SkeletonTemplate t;
    t.format_version = j.value("format_version", 1);
    for (const auto& js : j.at("segments")) {
        SkeletonSegment s;
        s.name = js.at("name").get<std::string>();
        const std::string parent = js.value("parent", std::string{});
        s.parent = parent.empty() ? -1 : t.segment_index(parent);
        if (!parent.empty() && s.parent < 0)
            throw ValidationError("segment '" + s.name + "' references unknown parent '" +
                                  parent + "' (parents must precede children)");
        s.rest_offset = vec3_from_json(js.at("offset"), "segment offset");
        if (js.contains("shape_basis")) {
            const auto& rows = js.at("shape_basis");
            if (rows.size() != BodyShape::kDim)
                throw ValidationError("shape basis of '" + s.name + "' must have 10 rows");
            for (int d = 0; d < BodyShape::kDim; ++d)
                s.shape_basis.row(d) = vec3_from_json(rows[static_cast<size_t>(d)],
                                                      "shape basis row")
                                           .transpose();
        }
        t.segments.push_back(s);
    }
    auto read_anchors = [&](const char* key, std::vector<AnchorDef>& out) {
        for (const auto& ja : j.at(key)) {
            AnchorDef a;
            a.name = ja.at("name").get<std::string>();
            const std::string seg = ja.at("segment").get<std::string>();
            a.segment = t.segment_index(seg);
            if (a.segment < 0)
                throw ValidationError("anchor '" + a.name + "' references unknown segment '" +
                                      seg + "'");
            a.offset = vec3_from_json(ja.at("offset"), "anchor offset");
            out.push_back(a);
        }
    };
    read_anchors("keypoint_anchors", t.keypoint_anchors);
    read_anchors("marker_anchors", t.marker_anchors);

    const json& jp = j.at("standing_pose");
    t.standing_pose.root_orientation = vec3_from_json(jp.at("gamma"), "standing gamma");
    t.standing_pose.root_translation = vec3_from_json(jp.at("tau"), "standing tau");
    for (const auto& jr : jp.at("theta"))
        t.standing_pose.joint_rotations.push_back(vec3_from_json(jr, "standing theta"));
    t.headtop_keypoint = j.at("headtop_keypoint").get<std::string>();
    for (const auto& s : j.at("sole_keypoints"))
        t.sole_keypoints.push_back(s.get<std::string>());
    t.validate();
    return t;
}

void save_template(const SkeletonTemplate& tmpl, const fs::path& path) {
    json j;
    j["format_version"] = tmpl.format_version;
    for (const auto& s : tmpl.segments) {
        json js;
        js["name"] = s.name;
        js["parent"] = s.parent < 0 ? "" : tmpl.segments[static_cast<size_t>(s.parent)].name;
        js["offset"] = vec3_to_json(s.rest_offset);
        json rows = json::array();
        for (int d = 0; d < BodyShape::kDim; ++d)
            rows.push_back(vec3_to_json(s.shape_basis.row(d).transpose()));
        js["shape_basis"] = rows;
        j["segments"].push_back(js);
    }
    auto write_anchors = [&](const std::vector<AnchorDef>& anchors) {
        json out = json::array();
        for (const auto& a : anchors) {
            json ja;
            ja["name"] = a.name;
            ja["segment"] = tmpl.segments[static_cast<size_t>(a.segment)].name;
            ja["offset"] = vec3_to_json(a.offset);
            out.push_back(ja);
        }
        return out;
    };
    j["keypoint_anchors"] = write_anchors(tmpl.keypoint_anchors);
    j["marker_anchors"] = write_anchors(tmpl.marker_anchors);
    json jp;
    jp["gamma"] = vec3_to_json(tmpl.standing_pose.root_orientation);
    jp["tau"] = vec3_to_json(tmpl.standing_pose.root_translation);
    jp["theta"] = json::array();
    for (const auto& r : tmpl.standing_pose.joint_rotations)
        jp["theta"].push_back(vec3_to_json(r));
    j["standing_pose"] = jp;
    j["headtop_keypoint"] = tmpl.headtop_keypoint;
    j["sole_keypoints"] = tmpl.sole_keypoints;
    write_json(j, path);
}

// ------------------------------------------------------------ biomech

BiomechModel load_biomech_model(const fs::path& path) {
    const json j = read_json(path);
    BiomechModel m;
    m.format_version = j.value("format_version", 1);
    for (const auto& jc : j.at("coordinates")) {
        BiomechCoordinate c;
        c.name = jc.at("name").get<std::string>();
        c.kind = jc.at("kind").get<std::string>() == "translation"
                     ? CoordKind::kTranslation
                     : CoordKind::kRotation;
        c.min_value = jc.at("min").get<double>();
        c.max_value = jc.at("max").get<double>();
        c.neutral = jc.value("neutral", 0.0);
        m.coordinates.push_back(c);
    }
    for (const auto& js : j.at("segments")) {
        BiomechSegment s;
        s.name = js.at("name").get<std::string>();
        const std::string parent = js.value("parent", std::string{});
        s.parent = parent.empty() ? -1 : m.segment_index(parent);
        if (!parent.empty() && s.parent < 0)
            throw ValidationError("segment '" + s.name + "' references unknown parent '" +
                                  parent + "'");
        s.rest_offset = vec3_from_json(js.at("offset"), "segment offset");
        s.scale = js.value("scale", 1.0);
        s.scale_group = js.value("scale_group", std::string{});
        const json jmotions = js.value("motions", json::array());
        for (const auto& jm : jmotions) {
            SegmentMotion mo;
            mo.kind = jm.at("kind").get<std::string>() == "translation"
                          ? CoordKind::kTranslation
                          : CoordKind::kRotation;
            mo.axis = axis_from_name(jm.at("axis").get<std::string>());
            if (jm.contains("master")) {
                mo.master = m.coordinate_index(jm.at("master").get<std::string>());
                if (mo.master < 0)
                    throw ValidationError("coupled motion references unknown master '" +
                                          jm.at("master").get<std::string>() + "'");
                mo.name = jm.value("name", std::string{});
                std::vector<double> kx = jm.at("spline").at("x").get<std::vector<double>>();
                std::vector<double> ky = jm.at("spline").at("y").get<std::vector<double>>();
                mo.spline = CubicSpline(std::move(kx), std::move(ky));
            } else {
                mo.coordinate = m.coordinate_index(jm.at("coordinate").get<std::string>());
                if (mo.coordinate < 0)
                    throw ValidationError("motion references unknown coordinate '" +
                                          jm.at("coordinate").get<std::string>() + "'");
            }
            s.motions.push_back(std::move(mo));
        }
        m.segments.push_back(std::move(s));
    }
    for (const auto& jm : j.at("markers")) {
        BiomechMarker mk;
        mk.name = jm.at("name").get<std::string>();
        const std::string seg = jm.at("segment").get<std::string>();
        mk.segment = m.segment_index(seg);
        if (mk.segment < 0)
            throw ValidationError("marker '" + mk.name + "' references unknown segment '" +
                                  seg + "'");
        mk.offset = vec3_from_json(jm.at("offset"), "marker offset");
        m.markers.push_back(mk);
    }
    const json jpairs_all = j.value("scaling_pairs", json::object());
    for (const auto& [seg, jpairs] : jpairs_all.items()) {
        std::vector<ScalePair> pairs;
        for (const auto& jp : jpairs)
            pairs.push_back({jp[0].get<std::string>(), jp[1].get<std::string>()});
        m.scaling_pairs[seg] = std::move(pairs);
    }
    const json jspheres = j.value("contact_spheres", json::array());
    for (const auto& js : jspheres) {
        ContactSphere s;
        s.name = js.at("name").get<std::string>();
        const std::string seg = js.at("segment").get<std::string>();
        s.segment = m.segment_index(seg);
        if (s.segment < 0)
            throw ValidationError("contact sphere '" + s.name +
                                  "' references unknown segment '" + seg + "'");
        s.offset = vec3_from_json(js.at("offset"), "sphere offset");
        s.radius = js.value("radius", s.radius);
        s.stiffness = js.value("stiffness", s.stiffness);
        s.dissipation = js.value("dissipation", s.dissipation);
        s.mu_static = js.value("mu_static", s.mu_static);
        s.mu_dynamic = js.value("mu_dynamic", s.mu_dynamic);
        s.mu_viscous = js.value("mu_viscous", s.mu_viscous);
        s.transition_velocity = js.value("transition_velocity", s.transition_velocity);
        s.smoothing = js.value("smoothing", s.smoothing);
        m.contact_spheres.push_back(s);
    }
    m.validate();
    return m;
}

void save_biomech_model(const BiomechModel& m, const fs::path& path) {
    json j;
    j["format_version"] = m.format_version;
    for (const auto& c : m.coordinates) {
        json jc;
        jc["name"] = c.name;
        jc["kind"] = c.kind == CoordKind::kTranslation ? "translation" : "rotation";
        jc["min"] = c.min_value;
        jc["max"] = c.max_value;
        jc["neutral"] = c.neutral;
        j["coordinates"].push_back(jc);
    }
    for (const auto& s : m.segments) {
        json js;
        js["name"] = s.name;
        js["parent"] = s.parent < 0 ? "" : m.segments[static_cast<size_t>(s.parent)].name;
        js["offset"] = vec3_to_json(s.rest_offset);
        if (s.scale != 1.0) js["scale"] = s.scale;
        if (!s.scale_group.empty()) js["scale_group"] = s.scale_group;
        js["motions"] = json::array();
        for (const auto& mo : s.motions) {
            json jm;
            jm["kind"] = mo.kind == CoordKind::kTranslation ? "translation" : "rotation";
            jm["axis"] = axis_name(mo.axis);
            if (mo.coupled()) {
                jm["name"] = mo.name;
                jm["master"] = m.coordinates[static_cast<size_t>(mo.master)].name;
                jm["spline"] = {{"x", mo.spline.knots_x()}, {"y", mo.spline.knots_y()}};
            } else {
                jm["coordinate"] = m.coordinates[static_cast<size_t>(mo.coordinate)].name;
            }
            js["motions"].push_back(jm);
        }
        j["segments"].push_back(js);
    }
    for (const auto& mk : m.markers) {
        json jm;
        jm["name"] = mk.name;
        jm["segment"] = m.segments[static_cast<size_t>(mk.segment)].name;
        jm["offset"] = vec3_to_json(mk.offset);
        j["markers"].push_back(jm);
    }
    json jp = json::object();
    for (const auto& [seg, pairs] : m.scaling_pairs) {
        json arr = json::array();
        for (const auto& p : pairs) arr.push_back(json::array({p.marker_a, p.marker_b}));
        jp[seg] = arr;
    }
    j["scaling_pairs"] = jp;
    for (const auto& s : m.contact_spheres) {
        json js;
        js["name"] = s.name;
        js["segment"] = m.segments[static_cast<size_t>(s.segment)].name;
        js["offset"] = vec3_to_json(s.offset);
        js["radius"] = s.radius;
        js["stiffness"] = s.stiffness;
        js["dissipation"] = s.dissipation;
        js["mu_static"] = s.mu_static;
        js["mu_dynamic"] = s.mu_dynamic;
        js["mu_viscous"] = s.mu_viscous;
        js["transition_velocity"] = s.transition_velocity;
        js["smoothing"] = s.smoothing;
        j["contact_spheres"].push_back(js);
    }
    write_json(j, path);
}

// ------------------------------------------------------------ presets

PresetTable load_presets(const fs::path& path) {
    const json j = read_json(path);
    PresetTable table;
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
        p.w_camera = jp.at("camera").get<double>();
        p.w_height = jp.at("height").get<double>();
        p.w_shape = jp.at("shape").get<double>();
        table.insert(p);
    }
    return table;
}

void save_presets(const PresetTable& table, const fs::path& path) {
    json j;
    j["presets"] = json::array();
    for (const auto& p : table.all()) {
        json jp;
        jp["name"] = p.name;
        jp["filter_cutoff_hz"] = p.filter_cutoff_hz;
        jp["reprojection"] = p.w_reprojection;
        jp["contact_velocity"] = p.w_contact_velocity;
        jp["contact_position"] = p.w_contact_position;
        jp["smoothness"] = p.w_smoothness;
        if (p.w_flat_floor)
            jp["flat_floor"] = *p.w_flat_floor;
        else
            jp["flat_floor"] = nullptr;
        jp["camera"] = p.w_camera;
        jp["height"] = p.w_height;
        jp["shape"] = p.w_shape;
        j["presets"].push_back(jp);
    }
    write_json(j, path);
}

// ------------------------------------------------------------ intrinsics

IntrinsicsDatabase load_intrinsics_database(const fs::path& path) {
    const json j = read_json(path);
    IntrinsicsDatabase db;
    for (const auto& je : j.at("entries")) {
        IntrinsicsRecord r;
        r.device = je.at("device").get<std::string>();
        r.intrinsics.fx = je.at("fx").get<double>();
        r.intrinsics.fy = je.at("fy").get<double>();
        r.intrinsics.cx = je.at("cx").get<double>();
        r.intrinsics.cy = je.at("cy").get<double>();
        r.intrinsics.image_width = je.at("width").get<int>();
        r.intrinsics.image_height = je.at("height").get<int>();
        db.insert(r);
    }
    return db;
}

void save_intrinsics_database(const IntrinsicsDatabase& db, const fs::path& path) {
    json j;
    j["entries"] = json::array();
    for (const auto& r : db.records()) {
        json je;
        je["device"] = r.device;
        je["fx"] = r.intrinsics.fx;
        je["fy"] = r.intrinsics.fy;
        je["cx"] = r.intrinsics.cx;
        je["cy"] = r.intrinsics.cy;
        je["width"] = r.intrinsics.image_width;
        je["height"] = r.intrinsics.image_height;
        j["entries"].push_back(je);
    }
    write_json(j, path);
}

// ------------------------------------------------------------ scenario

SyntheticScenario load_scenario(const fs::path& path) {
    const json j = read_json(path);
    SyntheticScenario s;
    s.activity = j.value("activity", s.activity);
    s.cycles = j.value("cycles", s.cycles);
    s.frame_rate = j.value("frame_rate", s.frame_rate);
    s.subject_height = j.value("subject_height", s.subject_height);
    s.subject_mass = j.value("subject_mass", s.subject_mass);
    s.camera_azimuth_deg = j.value("camera_azimuth_deg", s.camera_azimuth_deg);
    s.camera_distance = j.value("camera_distance", s.camera_distance);
    s.camera_height = j.value("camera_height", s.camera_height);
    s.seed = j.value("seed", s.seed);
    if (j.contains("corruption")) {
        const json& jc = j.at("corruption");
        s.corruption.pelvis_drift = jc.value("pelvis_drift", 0.0);
        if (jc.contains("drift_direction"))
            s.corruption.drift_direction =
                vec3_from_json(jc.at("drift_direction"), "drift direction");
        s.corruption.keypoint_noise_px = jc.value("keypoint_noise_px", 0.0);
        s.corruption.foot_penetration = jc.value("foot_penetration", 0.0);
        s.corruption.foot_slide = jc.value("foot_slide", 0.0);
        s.corruption.contact_noise = jc.value("contact_noise", 0.0);
        s.corruption.camera_rotation_offset_deg =
            jc.value("camera_rotation_offset_deg", 0.0);
        if (jc.contains("shape_offset")) {
            const auto v = jc.at("shape_offset").get<std::vector<double>>();
            if (v.size() != BodyShape::kDim)
                throw ValidationError("shape_offset must have 10 entries");
            for (int i = 0; i < BodyShape::kDim; ++i) s.corruption.shape_offset[i] = v[static_cast<size_t>(i)];
        }
    }
    s.validate();
    return s;
}

void save_scenario(const SyntheticScenario& s, const fs::path& path) {
    json j;
    j["activity"] = s.activity;
    j["cycles"] = s.cycles;
    j["frame_rate"] = s.frame_rate;
    j["subject_height"] = s.subject_height;
    j["subject_mass"] = s.subject_mass;
    j["camera_azimuth_deg"] = s.camera_azimuth_deg;
    j["camera_distance"] = s.camera_distance;
    j["camera_height"] = s.camera_height;
    j["seed"] = s.seed;
    json jc;
    jc["pelvis_drift"] = s.corruption.pelvis_drift;
    jc["drift_direction"] = vec3_to_json(s.corruption.drift_direction);
    jc["keypoint_noise_px"] = s.corruption.keypoint_noise_px;
    jc["foot_penetration"] = s.corruption.foot_penetration;
    jc["foot_slide"] = s.corruption.foot_slide;
    jc["contact_noise"] = s.corruption.contact_noise;
    jc["camera_rotation_offset_deg"] = s.corruption.camera_rotation_offset_deg;
    std::vector<double> so(BodyShape::kDim);
    for (int i = 0; i < BodyShape::kDim; ++i) so[static_cast<size_t>(i)] = s.corruption.shape_offset[i];
    jc["shape_offset"] = so;
    j["corruption"] = jc;
    write_json(j, path);
}

// ------------------------------------------------------------ pose bundle

PoseBundle load_pose_bundle(const fs::path& path) {
    const json j = read_json(path);
    PoseBundle b;
    const auto beta = j.at("beta").get<std::vector<double>>();
    if (beta.size() != BodyShape::kDim)
        throw ValidationError("beta must have 10 entries in " + path.string());
    for (int i = 0; i < BodyShape::kDim; ++i) b.shape.coeffs[i] = beta[static_cast<size_t>(i)];
    b.extrinsics.rotation = vec3_from_json(j.at("xi").at("rotation"), "xi rotation");
    b.extrinsics.translation = vec3_from_json(j.at("xi").at("translation"), "xi translation");
    b.pose.frame_rate = j.at("frame_rate").get<double>();
    for (const auto& jf : j.at("frames")) {
        PoseFrame f;
        f.root_orientation = vec3_from_json(jf.at("gamma"), "gamma");
        f.root_translation = vec3_from_json(jf.at("tau"), "tau");
        for (const auto& jr : jf.at("theta"))
            f.joint_rotations.push_back(vec3_from_json(jr, "theta"));
        b.pose.frames.push_back(std::move(f));
    }
    return b;
}

void save_pose_bundle(const PoseBundle& b, const fs::path& path) {
    json j;
    std::vector<double> beta(BodyShape::kDim);
    for (int i = 0; i < BodyShape::kDim; ++i) beta[static_cast<size_t>(i)] = b.shape.coeffs[i];
    j["beta"] = beta;
    j["xi"] = {{"rotation", vec3_to_json(b.extrinsics.rotation)},
               {"translation", vec3_to_json(b.extrinsics.translation)}};
    j["frame_rate"] = b.pose.frame_rate;
    j["frames"] = json::array();
    for (const auto& f : b.pose.frames) {
        json jf;
        jf["gamma"] = vec3_to_json(f.root_orientation);
        jf["tau"] = vec3_to_json(f.root_translation);
        jf["theta"] = json::array();
        for (const auto& r : f.joint_rotations) jf["theta"].push_back(vec3_to_json(r));
        j["frames"].push_back(jf);
    }
    write_json(j, path);
}

// ------------------------------------------------------------ input bundle

InputBundle load_input_bundle(const fs::path& dir) {
    InputBundle b;
    b.initial = load_pose_bundle(dir / "pose_initial.json");

    const json jm = read_json(dir / "meta.json");
    b.observations.subject_height = jm.at("height").get<double>();
    b.observations.frame_rate = jm.at("frame_rate").get<double>();
    b.activity = jm.value("activity", std::string{});
    b.subject_mass = jm.value("mass", 0.0);

    const json jc = read_json(dir / "camera.json");
    b.intrinsics.fx = jc.at("fx").get<double>();
    b.intrinsics.fy = jc.at("fy").get<double>();
    b.intrinsics.cx = jc.at("cx").get<double>();
    b.intrinsics.cy = jc.at("cy").get<double>();
    b.intrinsics.image_width = jc.at("width").get<int>();
    b.intrinsics.image_height = jc.at("height").get<int>();
    b.device = jc.value("device", std::string{});

    const size_t frames = b.initial.pose.frames.size();
    b.observations.frames.assign(frames, ObservationFrame{});

    // keypoints2d.csv: frame, keypoint id, u, v, confidence
    {
        const fs::path path = dir / "keypoints2d.csv";
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        std::string line;
        std::getline(in, line);  // header
        int max_kp = -1;
        std::vector<std::tuple<int, int, Keypoint2d>> rows;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cols = split(line, ',');
            if (cols.size() != 5)
                throw ValidationError("expected 5 columns in " + path.string());
            const int frame = static_cast<int>(parse_double(cols[0], path));
            const int kp = static_cast<int>(parse_double(cols[1], path));
            Keypoint2d k;
            k.pixel.x() = parse_double(cols[2], path);
            k.pixel.y() = parse_double(cols[3], path);
            k.confidence = parse_double(cols[4], path);
            if (frame < 0 || frame >= static_cast<int>(frames))
                throw ValidationError("keypoint frame out of range in " + path.string());
            rows.emplace_back(frame, kp, k);
            max_kp = std::max(max_kp, kp);
        }
        if (max_kp < 0) throw ValidationError("no keypoints in " + path.string());
        for (auto& f : b.observations.frames)
            f.keypoints.assign(static_cast<size_t>(max_kp + 1), Keypoint2d{});
        for (const auto& [frame, kp, k] : rows)
            b.observations.frames[static_cast<size_t>(frame)]
                .keypoints[static_cast<size_t>(kp)] = k;
    }

    // contacts.csv: frame, channel, probability
    {
        const fs::path path = dir / "contacts.csv";
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cols = split(line, ',');
            if (cols.size() != 3)
                throw ValidationError("expected 3 columns in " + path.string());
            const int frame = static_cast<int>(parse_double(cols[0], path));
            if (frame < 0 || frame >= static_cast<int>(frames))
                throw ValidationError("contact frame out of range in " + path.string());
            const ContactChannel ch = contact_channel_from_name(cols[1]);
            b.observations.frames[static_cast<size_t>(frame)]
                .contact_probability[static_cast<size_t>(ch)] =
                parse_double(cols[2], path);
        }
    }
    return b;
}

void save_input_bundle(const InputBundle& b, const fs::path& dir) {
    fs::create_directories(dir);
    save_pose_bundle(b.initial, dir / "pose_initial.json");

    json jm;
    jm["height"] = b.observations.subject_height;
    jm["frame_rate"] = b.observations.frame_rate;
    jm["activity"] = b.activity;
    jm["mass"] = b.subject_mass;
    write_json(jm, dir / "meta.json");

    json jc;
    jc["fx"] = b.intrinsics.fx;
    jc["fy"] = b.intrinsics.fy;
    jc["cx"] = b.intrinsics.cx;
    jc["cy"] = b.intrinsics.cy;
    jc["width"] = b.intrinsics.image_width;
    jc["height"] = b.intrinsics.image_height;
    jc["device"] = b.device;
    write_json(jc, dir / "camera.json");

    {
        std::ofstream out(dir / "keypoints2d.csv");
        if (!out) throw IoError("cannot write keypoints2d.csv");
        out << "frame,keypoint,u,v,confidence\n";
        for (size_t f = 0; f < b.observations.frames.size(); ++f) {
            const auto& kps = b.observations.frames[f].keypoints;
            for (size_t i = 0; i < kps.size(); ++i)
                out << f << "," << i << "," << format_double(kps[i].pixel.x()) << ","
                    << format_double(kps[i].pixel.y()) << ","
                    << format_double(kps[i].confidence) << "\n";
        }
    }
    {
        std::ofstream out(dir / "contacts.csv");
        if (!out) throw IoError("cannot write contacts.csv");
        out << "frame,channel,probability\n";
        for (size_t f = 0; f < b.observations.frames.size(); ++f)
            for (int c = 0; c < kContactChannelCount; ++c)
                out << f << "," << contact_channel_name(static_cast<ContactChannel>(c))
                    << ","
                    << format_double(
                           b.observations.frames[f].contact_probability[static_cast<size_t>(c)])
                    << "\n";
    }
}

// ------------------------------------------------------------ TRC markers

void save_markers_trc(const MarkerTrajectories& markers, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const size_t frames = markers.frames.size();
    out << "PathFileType\t4\t(X/Y/Z)\t" << path.filename().string() << "\n";
    out << "DataRate\tCameraRate\tNumFrames\tNumMarkers\tUnits\tOrigDataRate\t"
           "OrigDataStartFrame\tOrigNumFrames\n";
    out << format_double(markers.frame_rate) << "\t" << format_double(markers.frame_rate)
        << "\t" << frames << "\t" << markers.names.size() << "\tm\t"
        << format_double(markers.frame_rate) << "\t1\t" << frames << "\n";
    out << "Frame#\tTime";
    for (const auto& n : markers.names) out << "\t" << n << "\t\t";
    out << "\n\t";
    for (size_t i = 1; i <= markers.names.size(); ++i)
        out << "\tX" << i << "\tY" << i << "\tZ" << i;
    out << "\n";
    for (size_t f = 0; f < frames; ++f) {
        out << (f + 1) << "\t" << format_double(f / markers.frame_rate);
        for (const auto& p : markers.frames[f])
            out << "\t" << format_double(p.x()) << "\t" << format_double(p.y()) << "\t"
                << format_double(p.z());
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

MarkerTrajectories load_markers_trc(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    MarkerTrajectories m;
    std::string line;
    std::getline(in, line);  // PathFileType
    std::getline(in, line);  // header names
    std::getline(in, line);  // header values
    {
        const auto cols = split(line, '\t');
        if (cols.size() < 4) throw ValidationError("malformed TRC header in " + path.string());
        m.frame_rate = parse_double(cols[0], path);
    }
    std::getline(in, line);  // marker names
    {
        const auto cols = split(line, '\t');
        for (size_t i = 2; i < cols.size(); ++i)
            if (!cols[i].empty()) m.names.push_back(cols[i]);
    }
    std::getline(in, line);  // X1 Y1 Z1 ...
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() < 2 + 3 * m.names.size())
            throw ValidationError("short TRC data row in " + path.string());
        std::vector<Eigen::Vector3d> frame;
        for (size_t i = 0; i < m.names.size(); ++i)
            frame.emplace_back(parse_double(cols[2 + 3 * i], path),
                               parse_double(cols[3 + 3 * i], path),
                               parse_double(cols[4 + 3 * i], path));
        m.frames.push_back(std::move(frame));
    }
    if (m.frames.empty()) throw ValidationError("TRC file has no frames: " + path.string());
    return m;
}

// ------------------------------------------------------------ coordinates

void save_coordinates(const CoordinateSequence& coords, const fs::path& path) {
    coords.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "time";
    for (const auto& n : coords.names) out << "\t" << n;
    out << "\n";
    for (size_t f = 0; f < coords.frames.size(); ++f) {
        out << format_double(f / coords.frame_rate);
        for (int c = 0; c < coords.frames[f].size(); ++c)
            out << "\t" << format_double(coords.frames[f][c]);
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

CoordinateSequence load_coordinates(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CoordinateSequence coords;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty coordinates file " + path.string());
    const auto header = split(line, '\t');
    if (header.size() < 2 || header[0] != "time")
        throw ValidationError("coordinates file must start with a 'time' column");
    coords.names.assign(header.begin() + 1, header.end());
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != header.size())
            throw ValidationError("row width mismatch in " + path.string());
        times.push_back(parse_double(cols[0], path));
        Eigen::VectorXd q(static_cast<int>(coords.names.size()));
        for (size_t c = 1; c < cols.size(); ++c)
            q[static_cast<int>(c) - 1] = parse_double(cols[c], path);
        coords.frames.push_back(q);
    }
    if (times.size() < 2)
        coords.frame_rate = 1.0;
    else
        coords.frame_rate = 1.0 / (times[1] - times[0]);
    coords.validate();
    return coords;
}

// ------------------------------------------------------------ GRF

void save_grf(const std::vector<GrfFrame>& grf, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "time";
    for (const char* side : {"R", "L"})
        for (const char* col : {"Fx", "Fy", "Fz", "COPx", "COPz", "Ty"})
            out << "\t" << side << "_" << col;
    out << "\n";
    for (const auto& g : grf) {
        out << format_double(g.time);
        for (FootSide side : {FootSide::kRight, FootSide::kLeft}) {
            const size_t s = static_cast<size_t>(side);
            out << "\t" << format_double(g.force[s].x()) << "\t"
                << format_double(g.force[s].y()) << "\t" << format_double(g.force[s].z());
            if (g.center_of_pressure[s]) {
                out << "\t" << format_double(g.center_of_pressure[s]->x()) << "\t"
                    << format_double(g.center_of_pressure[s]->z());
            } else {
                out << "\tnan\tnan";
            }
            out << "\t" << format_double(g.vertical_moment[s]);
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<GrfFrame> load_grf(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<GrfFrame> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 13) throw ValidationError("expected 13 columns in " + path.string());
        GrfFrame g;
        g.time = parse_double(cols[0], path);
        int idx = 1;
        for (FootSide side : {FootSide::kRight, FootSide::kLeft}) {
            const size_t s = static_cast<size_t>(side);
            g.force[s].x() = parse_double(cols[static_cast<size_t>(idx++)], path);
            g.force[s].y() = parse_double(cols[static_cast<size_t>(idx++)], path);
            g.force[s].z() = parse_double(cols[static_cast<size_t>(idx++)], path);
            const double copx = parse_double(cols[static_cast<size_t>(idx++)], path);
            const double copz = parse_double(cols[static_cast<size_t>(idx++)], path);
            if (std::isfinite(copx) && std::isfinite(copz))
                g.center_of_pressure[s] = Eigen::Vector3d(copx, 0.0, copz);
            g.vertical_moment[s] = parse_double(cols[static_cast<size_t>(idx++)], path);
        }
        out.push_back(g);
    }
    return out;
}

// ------------------------------------------------------------ reports

void save_refinement_report(const RefinementResult& result, const fs::path& path) {
    json j;
    auto stage = [](const StageTrace& t) {
        json js;
        js["iterations"] = t.iterations;
        js["status"] = solve_status_name(t.status);
        js["objective_trace"] = t.objective;
        return js;
    };
    j["stage1"] = stage(result.stage1);
    j["stage2"] = stage(result.stage2);
    j["converged"] = result.converged;
    j["bouts"] = json::array();
    for (const auto& b : result.bouts)
        j["bouts"].push_back({{"channel", contact_channel_name(b.channel)},
                              {"start", b.start},
                              {"end", b.end}});
    write_json(j, path);
}

void save_eval_report(const EvalReport& report, const fs::path& path) {
    json j;
    j["rotational_mae_deg"] = {{"mean", report.rotational.mean_deg}};
    for (const auto& [name, val] : report.rotational.per_dof_deg)
        j["rotational_mae_deg"]["per_dof"][name] = val;
    j["translational_mae_cm"] = report.translational_cm;
    j["drift_cm"] = report.drift_cm;
    if (report.grf_pct_bw.empty())
        j["grf_mae_pct_bw"] = nullptr;
    else
        j["grf_mae_pct_bw"] = {{"x", report.grf_pct_bw[0]},
                               {"y", report.grf_pct_bw[1]},
                               {"z", report.grf_pct_bw[2]}};
    j["warnings"] = report.warnings;
    write_json(j, path);
}

// ------------------------------------------------------------ truth bundle

void save_truth_bundle(const TruthBundle& truth, const fs::path& dir) {
    fs::create_directories(dir);
    save_coordinates(truth.coordinates, dir / "coordinates.tsv");
    save_grf(truth.grf, dir / "grf.tsv");
    json j;
    j["repetition_boundaries"] = truth.repetition_boundaries;
    j["subject_mass"] = truth.subject_mass;
    j["floor_height"] = truth.floor_height;
    write_json(j, dir / "truth_meta.json");
}

TruthBundle load_truth_bundle(const fs::path& dir) {
    TruthBundle t;
    t.coordinates = load_coordinates(dir / "coordinates.tsv");
    t.grf = load_grf(dir / "grf.tsv");
    const json j = read_json(dir / "truth_meta.json");
    t.repetition_boundaries = j.at("repetition_boundaries").get<std::vector<int>>();
    t.subject_mass = j.at("subject_mass").get<double>();
    t.floor_height = j.at("floor_height").get<double>();
    return t;
}

}  // namespace monokin::io

#include "monokin/camera.hpp"

#include <algorithm>
#include <cmath>

#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

void CameraIntrinsics::validate() const {
    if (!(fx > 0) || !(fy > 0)) throw ValidationError("focal lengths must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw ValidationError("image size must be positive");
    if (cx < 0 || cx >= image_width || cy < 0 || cy >= image_height)
        throw ValidationError("principal point must lie inside the image");
}

void CameraExtrinsics::validate() const {
    if (!rotation.allFinite() || !translation.allFinite())
        throw ValidationError("camera extrinsics must be finite");
}

ProjectedPoint project_checked(const Eigen::Vector3d& point,
                               const CameraIntrinsics& intr,
                               const CameraExtrinsics& extr) {
    const Eigen::Vector3d cam =
        axis_angle_to_matrix(extr.rotation) * point + extr.translation;
    ProjectedPoint out;
    if (cam.z() <= kMinDepth) {
        out.behind = true;
        return out;
    }
    out.pixel.x() = intr.fx * cam.x() / cam.z() + intr.cx;
    out.pixel.y() = intr.fy * cam.y() / cam.z() + intr.cy;
    return out;
}

Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& intr,
                        const CameraExtrinsics& extr) {
    const ProjectedPoint p = project_checked(point, intr, extr);
    if (p.behind) throw ValidationError("point is behind the camera");
    return p.pixel;
}

std::string IntrinsicsDatabase::key(const std::string& device, int width, int height) {
    return device + "@" + std::to_string(width) + "x" + std::to_string(height);
}

void IntrinsicsDatabase::insert(const IntrinsicsRecord& record) {
    record.intrinsics.validate();
    const std::string k =
        key(record.device, record.intrinsics.image_width, record.intrinsics.image_height);
    if (index_.count(k))
        throw ValidationError("duplicate intrinsics entry for " + k);
    index_[k] = entries_.size();
    entries_.push_back(record);
}

const CameraIntrinsics& IntrinsicsDatabase::lookup(const std::string& device, int width,
                                                   int height) const {
    const auto it = index_.find(key(device, width, height));
    if (it != index_.end()) return entries_[it->second].intrinsics;

    // Rank known devices by a crude edit-ish distance for the error message.
    auto score = [&](const std::string& a) {
        const size_t n = std::min(a.size(), device.size());
        size_t common = 0;
        while (common < n && a[common] == device[common]) ++common;
        return a.size() + device.size() - 2 * common;
    };
    std::vector<std::string> names;
    for (const auto& e : entries_) names.push_back(key(e.device, e.intrinsics.image_width,
                                                       e.intrinsics.image_height));
    std::sort(names.begin(), names.end(),
              [&](const std::string& a, const std::string& b) { return score(a) < score(b); });
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::string msg = "no intrinsics for " + key(device, width, height);
    if (!names.empty()) {
        msg += "; nearest known:";
        for (size_t i = 0; i < names.size() && i < 3; ++i) msg += " " + names[i];
    }
    throw NotFoundError(msg);
}

}  // namespace monokin

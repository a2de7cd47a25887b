#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

namespace monokin {

struct CameraIntrinsics {
    double fx = 0, fy = 0;  // focal lengths, px
    double cx = 0, cy = 0;  // principal point, px
    int image_width = 0, image_height = 0;

    void validate() const;
};

// Camera pose: p_cam = R(rotation) * p_world + translation.
struct CameraExtrinsics {
    Eigen::Vector3d rotation = Eigen::Vector3d::Zero();     // axis-angle, rad
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // m

    void validate() const;
};

// Minimum camera-frame depth; closer points count as behind the camera.
inline constexpr double kMinDepth = 1e-6;

struct ProjectedPoint {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    bool behind = false;  // depth <= kMinDepth; pixel undefined
};

// Pinhole projection. Throws BehindCameraError-free: callers that need the
// loss-penalty behaviour use project_checked and test `behind`.
Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& intr,
                        const CameraExtrinsics& extr);

ProjectedPoint project_checked(const Eigen::Vector3d& point,
                               const CameraIntrinsics& intr,
                               const CameraExtrinsics& extr);

struct IntrinsicsRecord {
    std::string device;
    CameraIntrinsics intrinsics;
};

// Device/resolution keyed intrinsics lookup. Exact-key matches only.
class IntrinsicsDatabase {
  public:
    void insert(const IntrinsicsRecord& record);  // throws on duplicate key
    const CameraIntrinsics& lookup(const std::string& device, int width,
                                   int height) const;  // throws NotFoundError
    size_t size() const { return entries_.size(); }
    const std::vector<IntrinsicsRecord>& records() const { return entries_; }

  private:
    std::vector<IntrinsicsRecord> entries_;
    std::map<std::string, size_t> index_;
    static std::string key(const std::string& device, int width, int height);
};

}  // namespace monokin

#include "monokin/types.hpp"

#include <cmath>

#include "monokin/error.hpp"
#include "monokin/rotation.hpp"

namespace monokin {

void BodyShape::validate() const {
    if (!coeffs.allFinite())
        throw ValidationError("body shape coefficients must be finite");
}

PoseFrame PoseFrame::identity(int joint_count) {
    PoseFrame frame;
    frame.joint_rotations.assign(static_cast<size_t>(joint_count),
                                 Eigen::Vector3d::Zero());
    return frame;
}

void PoseFrame::canonicalize() {
    root_orientation = wrap_axis_angle(root_orientation);
    for (auto& r : joint_rotations) r = wrap_axis_angle(r);
}

void PoseFrame::validate() const {
    constexpr double two_pi = 2.0 * M_PI;
    auto check = [](const Eigen::Vector3d& v, const char* what) {
        if (!v.allFinite()) throw ValidationError(std::string(what) + " is not finite");
    };
    check(root_orientation, "root orientation");
    check(root_translation, "root translation");
    if (root_orientation.norm() >= two_pi)
        throw ValidationError("root orientation magnitude must be < 2*pi (canonicalize first)");
    for (const auto& r : joint_rotations) {
        check(r, "joint rotation");
        if (r.norm() >= two_pi)
            throw ValidationError("joint rotation magnitude must be < 2*pi (canonicalize first)");
    }
}

void PoseSequence::validate() const {
    if (frames.size() < 2) throw ValidationError("pose sequence needs at least 2 frames");
    if (!(frame_rate > 0.0)) throw ValidationError("frame rate must be positive");
    const size_t joints = frames.front().joint_rotations.size();
    for (const auto& f : frames) {
        if (f.joint_rotations.size() != joints)
            throw ValidationError("inconsistent joint count across frames");
        f.validate();
    }
}

}  // namespace monokin

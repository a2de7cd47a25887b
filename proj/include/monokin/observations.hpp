#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace monokin {

// Foot contact channels, fixed order used across files and losses.
enum class ContactChannel { kHeelLeft = 0, kHeelRight = 1, kToeLeft = 2, kToeRight = 3 };
inline constexpr int kContactChannelCount = 4;
const char* contact_channel_name(ContactChannel channel);
ContactChannel contact_channel_from_name(const std::string& name);  // NotFoundError

struct Keypoint2d {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    double confidence = 0.0;  // in [0, 1]
};

struct ObservationFrame {
    std::vector<Keypoint2d> keypoints;
    std::array<double, kContactChannelCount> contact_probability{};  // in [0, 1]
};

// Per-frame 2D keypoints with confidences, heel/toe contact probabilities,
// plus recording metadata the objectives need.
struct ObservationSet {
    std::vector<ObservationFrame> frames;
    double frame_rate = 0.0;     // Hz
    double subject_height = 0.0;  // m

    int keypoint_count() const {
        return frames.empty() ? 0 : static_cast<int>(frames[0].keypoints.size());
    }
    int frame_count() const { return static_cast<int>(frames.size()); }
    void validate() const;
};

// A maximal run of frames a channel spends in contact.
struct ContactBout {
    ContactChannel channel = ContactChannel::kHeelLeft;
    int start = 0;  // inclusive
    int end = 0;    // inclusive

    int length() const { return end - start + 1; }
};

}  // namespace monokin

#include "monokin/observations.hpp"

#include <cmath>

#include "monokin/error.hpp"

namespace monokin {

namespace {
constexpr std::array<const char*, kContactChannelCount> kChannelNames = {
    "heel_l", "heel_r", "toe_l", "toe_r"};
}

const char* contact_channel_name(ContactChannel channel) {
    return kChannelNames[static_cast<size_t>(channel)];
}

ContactChannel contact_channel_from_name(const std::string& name) {
    for (int i = 0; i < kContactChannelCount; ++i)
        if (name == kChannelNames[static_cast<size_t>(i)])
            return static_cast<ContactChannel>(i);
    throw NotFoundError("unknown contact channel '" + name +
                        "' (expected heel_l, heel_r, toe_l, toe_r)");
}

void ObservationSet::validate() const {
    if (frames.size() < 2) throw ValidationError("observations need at least 2 frames");
    if (!(frame_rate > 0)) throw ValidationError("observation frame rate must be positive");
    if (!(subject_height > 0.5) || !(subject_height < 2.5))
        throw ValidationError("subject height must lie in (0.5, 2.5) m");
    const size_t n = frames[0].keypoints.size();
    if (n == 0) throw ValidationError("observations have no keypoints");
    for (const auto& f : frames) {
        if (f.keypoints.size() != n)
            throw ValidationError("keypoint count varies across frames");
        for (const auto& k : f.keypoints) {
            if (!k.pixel.allFinite())
                throw ValidationError("keypoint pixel coordinates must be finite");
            if (!(k.confidence >= 0.0) || !(k.confidence <= 1.0))
                throw ValidationError("keypoint confidence must lie in [0, 1]");
        }
        for (double p : f.contact_probability)
            if (!(p >= 0.0) || !(p <= 1.0))
                throw ValidationError("contact probability must lie in [0, 1]");
    }
}

}  // namespace monokin

#include "monokin/presets.hpp"

#include <cmath>

#include "monokin/error.hpp"

namespace monokin {

void RefinementPreset::validate() const {
    if (name.empty()) throw ValidationError("preset needs a name");
    if (!(filter_cutoff_hz > 0)) throw ValidationError("filter cutoff must be positive");
    auto nonneg = [&](double v, const char* what) {
        if (!(v >= 0) || !std::isfinite(v))
            throw ValidationError("preset '" + name + "': " + what +
                                  " weight must be >= 0");
    };
    nonneg(w_reprojection, "reprojection");
    nonneg(w_contact_velocity, "contact velocity");
    nonneg(w_contact_position, "contact position");
    nonneg(w_smoothness, "smoothness");
    nonneg(w_camera, "camera");
    nonneg(w_height, "height");
    nonneg(w_shape, "shape");
    if (w_flat_floor) nonneg(*w_flat_floor, "flat floor");
}

void PresetTable::insert(const RefinementPreset& preset) {
    preset.validate();
    for (const auto& p : presets_)
        if (p.name == preset.name)
            throw ValidationError("duplicate preset '" + preset.name + "'");
    presets_.push_back(preset);
}

const RefinementPreset& PresetTable::get(const std::string& name) const {
    for (const auto& p : presets_)
        if (p.name == name) return p;
    std::string msg = "unknown preset '" + name + "'; available:";
    for (const auto& p : presets_) msg += " " + p.name;
    throw NotFoundError(msg);
}

bool PresetTable::contains(const std::string& name) const {
    for (const auto& p : presets_)
        if (p.name == name) return true;
    return false;
}

std::vector<std::string> PresetTable::names() const {
    std::vector<std::string> out;
    for (const auto& p : presets_) out.push_back(p.name);
    return out;
}

}  // namespace monokin

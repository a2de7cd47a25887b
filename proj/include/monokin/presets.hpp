#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace monokin {

// Activity-specific objective weights and the marker-trajectory filter
// cutoff. A preset without a flat-floor weight omits that term entirely.
struct RefinementPreset {
    std::string name;
    double filter_cutoff_hz = 0;
    double w_reprojection = 0;       // w_r
    double w_contact_velocity = 0;   // w_v
    double w_contact_position = 0;   // w_s, foot slide
    double w_smoothness = 0;         // w_sm
    std::optional<double> w_flat_floor;  // w_f
    double w_camera = 0;             // w_c, stage-2 extrinsics regularizer
    double w_height = 0;             // w_h, stage-1
    double w_shape = 0;              // w_beta, stage-1

    void validate() const;
};

class PresetTable {
  public:
    void insert(const RefinementPreset& preset);  // throws on duplicate name
    const RefinementPreset& get(const std::string& name) const;  // NotFoundError
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const;
    const std::vector<RefinementPreset>& all() const { return presets_; }

  private:
    std::vector<RefinementPreset> presets_;
};

}  // namespace monokin

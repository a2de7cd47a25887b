#pragma once

#include "monokin/biomech.hpp"
#include "monokin/camera.hpp"
#include "monokin/presets.hpp"
#include "monokin/skeleton.hpp"

namespace monokin::defaults {

// Shipped default assets. The data/ files are generated from these
// builders (tools/make_assets) and tests assert they stay in sync.
SkeletonTemplate skeleton_template();
IntrinsicsDatabase intrinsics_database();
PresetTable preset_table();
BiomechModel biomech_model();

}  // namespace monokin::defaults

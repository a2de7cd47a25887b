// Regenerates the shipped data/ files from the built-in defaults.
#include <cstdio>
#include <filesystem>

#include "monokin/defaults.hpp"
#include "monokin/io.hpp"

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(out);
    monokin::io::save_template(monokin::defaults::skeleton_template(),
                               out / "skeleton_template.json");
    monokin::io::save_biomech_model(monokin::defaults::biomech_model(),
                                    out / "biomech_model.json");
    monokin::io::save_presets(monokin::defaults::preset_table(), out / "presets.json");
    monokin::io::save_intrinsics_database(monokin::defaults::intrinsics_database(),
                                          out / "intrinsics_db.json");
    std::printf("wrote default assets to %s\n", out.string().c_str());
    return 0;
}

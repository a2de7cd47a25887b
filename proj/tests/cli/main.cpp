// End-to-end checks of the monokin CLI: subcommands, file outputs and
// exit codes. argv[1] is the path to the monokin binary.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_binary;

void expect(bool ok, const std::string& what) {
    if (ok) {
        std::printf("ok    %s\n", what.c_str());
    } else {
        ++g_failures;
        std::printf("FAIL  %s\n", what.c_str());
    }
}

int run(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <path-to-monokin>\n");
        return 2;
    }
    g_binary = argv[1];
    const fs::path base =
        fs::temp_directory_path() / ("monokin_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(base);

    // Small squats scenario with mild corruption.
    const fs::path scenario = base / "scenario.json";
    {
        std::ofstream out(scenario);
        out << R"({"activity":"squats","cycles":1,"frame_rate":30,"subject_height":1.7,
                   "seed":11,
                   "corruption":{"pelvis_drift":0.08,"keypoint_noise_px":1.0}})";
    }

    expect(run("synth --scenario " + scenario.string() + " --out " +
               (base / "trial").string()) == 0,
           "synth exits 0");
    expect(fs::exists(base / "trial" / "pose_initial.json") &&
               fs::exists(base / "trial" / "keypoints2d.csv") &&
               fs::exists(base / "trial" / "contacts.csv") &&
               fs::exists(base / "trial" / "camera.json") &&
               fs::exists(base / "trial" / "meta.json"),
           "synth writes the input bundle files");
    expect(fs::exists(base / "trial" / "truth" / "coordinates.tsv"),
           "synth writes ground-truth coordinates");

    expect(run("synth --scenario " + scenario.string() + " --out " +
               (base / "trial_b").string()) == 0,
           "second synth run exits 0");
    expect(read_file(base / "trial" / "keypoints2d.csv") ==
               read_file(base / "trial_b" / "keypoints2d.csv"),
           "synth is bitwise deterministic for a fixed seed");

    expect(run("refine --input " + (base / "trial").string() + " --preset squats --out " +
               (base / "refined").string()) == 0,
           "refine exits 0");
    expect(fs::exists(base / "refined" / "pose_refined.json") &&
               fs::exists(base / "refined" / "markers.trc") &&
               fs::exists(base / "refined" / "report.json"),
           "refine writes pose_refined.json, markers.trc and report.json");

    expect(run("refine --input " + (base / "trial").string() + " --preset auto --out " +
               (base / "refined_auto").string()) == 0,
           "refine with preset=auto uses the meta.json activity");

    expect(run("ik --markers " + (base / "refined" / "markers.trc").string() + " --out " +
               (base / "coords.tsv").string()) == 0,
           "ik exits 0 with the built-in model");
    expect(fs::exists(base / "coords.tsv"), "ik writes the coordinates file");

    expect(run("grf --coords " + (base / "coords.tsv").string() + " --out " +
               (base / "grf.tsv").string()) == 0,
           "grf exits 0");
    expect(fs::exists(base / "grf.tsv"), "grf writes the force file");

    // Assemble an estimate directory for eval.
    fs::create_directories(base / "est");
    fs::copy_file(base / "coords.tsv", base / "est" / "coordinates.tsv");
    fs::copy_file(base / "grf.tsv", base / "est" / "grf.tsv");
    expect(run("eval --est " + (base / "est").string() + " --truth " +
               (base / "trial" / "truth").string() + " --report " +
               (base / "report.json").string()) == 0,
           "eval exits 0");
    expect(fs::exists(base / "report.json"), "eval writes the report");

    // Error paths.
    expect(run("refine --input /nonexistent --preset squats --out " +
               (base / "x").string()) == 4,
           "missing input directory exits 4");
    expect(run("refine --input " + (base / "trial").string() + " --preset bogus --out " +
               (base / "x").string()) == 2,
           "unknown preset exits 2");
    {
        std::ofstream out(base / "bad_scenario.json");
        out << R"({"activity":"flying"})";
    }
    expect(run("synth --scenario " + (base / "bad_scenario.json").string() + " --out " +
               (base / "y").string()) == 2,
           "invalid scenario exits 2");
    expect(run("bogus-subcommand") != 0, "unknown subcommand fails");

    fs::remove_all(base);
    if (g_failures) {
        std::printf("%d CLI check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all CLI checks passed\n");
    return 0;
}

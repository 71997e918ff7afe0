#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const char* kCli = QPACK_CLI_PATH;
const std::string kData = QPACK_DATA_DIR;

int run(const std::string& args) {
    const std::string cmd = std::string(kCli) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qpack_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit 2; version exits 0") {
    CHECK(run("--version") == 0);
    CHECK(run("definitely-not-a-subcommand") == 2);
    CHECK(run("modes") == 2);                     // missing required flags
    CHECK(run("thermal --out /tmp --bogus 1") == 2);  // unknown flag
    CHECK(run("") == 2);                          // no subcommand
}

TEST_CASE("domain errors exit 1") {
    const auto dir = scratch("domain");
    CHECK(run("--seed 3 thermal --payload /nonexistent.txt --out " + dir.string()) == 1);
    // Geometry with an illegal pillar layout.
    const auto bad = dir / "bad_geometry.txt";
    {
        std::ofstream out(bad);
        out << "radius = 40 mm\nheight = 4 mm\npillar = 39 0 3 mm\n";
    }
    CHECK(run("--seed 3 modes --geometry " + bad.string() + " --spacing 1mm --out " +
              dir.string()) == 1);
}

TEST_CASE("modes then loss: exported grids feed the budget") {
    const auto dir = scratch("modes_loss");
    const int rc = run("--seed 5 modes --geometry " + kData +
                       "/demo/geometry_small.txt --n-modes 4 --spacing 1.2mm --bands "
                       "4GHz:6GHz:qubits --out " + (dir / "modes").string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(dir / "modes" / "spectrum.csv"));
    CHECK(fs::exists(dir / "modes" / "mode00.fgrid"));
    const std::string spectrum = slurp(dir / "modes" / "spectrum.csv");
    CHECK(spectrum.find("index,label,frequency_hz") != std::string::npos);
    CHECK(spectrum.find("qubits") != std::string::npos);  // bare cavity collides

    const int rc2 = run("--seed 5 loss --field " + (dir / "modes" / "mode00.fgrid").string() +
                        " --channels " + kData + "/demo/channels_demo.txt --report json --out " +
                        (dir / "loss").string());
    REQUIRE(rc2 == 0);
    const std::string budget = slurp(dir / "loss" / "budget.json");
    CHECK(budget.find("total_q") != std::string::npos);
    CHECK(budget.find("unbudgeted") == std::string::npos);  // json uses budgeted flags
    CHECK(budget.find("\"budgeted\": false") != std::string::npos);  // AgOx channel
}

TEST_CASE("readout synth writes shots and a report") {
    const auto dir = scratch("readout");
    const int rc = run("--seed 9 readout --synth " + kData + "/demo/readout_truth.txt --out " +
                       dir.string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(dir / "demo_q0_shots.csv"));
    CHECK(fs::exists(dir / "demo_q0_shots.meta"));
    const std::string report = slurp(dir / "readout.csv");
    CHECK(report.find("measured_error") != std::string::npos);
    CHECK(report.find("demo_q0") != std::string::npos);
}

TEST_CASE("coherence emits the four plot-ready CSVs") {
    const auto dir = scratch("coherence");
    const int rc = run("--seed 13 coherence --wafer " + kData + "/demo/wafer.csv --decays " +
                       kData + "/demo/decays/manifest.csv --r2 0.75 --bootstrap "
                       "sizes=3:6:12,resamples=200,conf=0.5:0.9 --pearson "
                       "observable=t1,fraction=0.5,resamples=100 --report " + dir.string());
    REQUIRE(rc == 0);
    for (const char* name : {"wafer_map.csv", "histogram.csv", "bootstrap.csv",
                             "correlation.csv", "radial.csv"})
        CHECK(fs::exists(dir / name));
    const std::string wafer = slurp(dir / "wafer_map.csv");
    CHECK(wafer.find("qubit_id,x_m,y_m,kind") != std::string::npos);
    const std::string boot = slurp(dir / "bootstrap.csv");
    CHECK(boot.find("median,3,") != std::string::npos);
}

TEST_CASE("thermal presets run from --mode") {
    const auto dir = scratch("thermal");
    REQUIRE(run("--seed 2 thermal --mode qpu_mode --out " + dir.string()) == 0);
    const std::string csv = slurp(dir / "thermal.csv");
    CHECK(csv.find("stage,passive_w") != std::string::npos);
    CHECK(csv.find("MXC,") != std::string::npos);
    CHECK(csv.find("differential_contraction_m") != std::string::npos);

    REQUIRE(run("--seed 2 thermal --mode high_throughput --report json --out " +
                dir.string()) == 0);
    const std::string js = slurp(dir / "thermal.json");
    CHECK(js.find("high_throughput") != std::string::npos);
}

TEST_CASE("seeded reports embed deterministic manifests") {
    const auto dir1 = scratch("manifest1");
    const auto dir2 = scratch("manifest2");
    REQUIRE(run("--seed 21 thermal --mode qpu_mode --out " + dir1.string()) == 0);
    REQUIRE(run("--seed 21 thermal --mode qpu_mode --out " + dir2.string()) == 0);
    CHECK(slurp(dir1 / "thermal.csv") == slurp(dir2 / "thermal.csv"));
    CHECK(slurp(dir1 / "thermal.csv").find("timestamp=deterministic") != std::string::npos);

    // A different seed leaves thermal numbers identical (no randomness) but
    // still stamps the manifest with the seed.
    const auto dir3 = scratch("manifest3");
    REQUIRE(run("--seed 22 thermal --mode qpu_mode --out " + dir3.string()) == 0);
    CHECK(slurp(dir3 / "thermal.csv").find("seed=22") != std::string::npos);
}

// End-to-end checks of the exflow binary: exit-code contract, JSON report
// shapes, and byte-level determinism of flow outputs.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_binary;
fs::path g_workdir;

int run_cli(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = g_binary + " " + args;
    if (!stdout_file.empty())
        cmd += " > " + (g_workdir / stdout_file).string() + " 2>/dev/null";
    else
        cmd += " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json load_json(const std::string& file) {
    std::ifstream in(g_workdir / file);
    json j;
    in >> j;
    return j;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

} // namespace

TEST_CASE("check-psi reports the expected condition sets") {
    REQUIRE(run_cli("check-psi sqrt_shift", "psi_sqrt.json") == 0);
    json j = load_json("psi_sqrt.json");
    CHECK(j["conditions"]["i"]["status"] == "holds-on-grid");
    CHECK(j["conditions"]["iia"]["status"] == "holds-on-grid");
    CHECK(j["conditions"]["iiia"]["status"] == "holds-on-grid");
    CHECK(j["conditions"]["iib"]["status"] == "violated");

    REQUIRE(run_cli("check-psi neg_power:alpha=1", "psi_np.json") == 0);
    json n = load_json("psi_np.json");
    for (const char* c : {"i", "iib", "iiib", "iv"})
        CHECK(n["conditions"][c]["status"] == "holds-on-grid");
    CHECK(n["dpsi_s2_nondecreasing"] == true);

    REQUIRE(run_cli("check-psi shifted_exp", "psi_se.json") == 0);
    json se = load_json("psi_se.json");
    for (const char* c : {"i", "iib", "iiib", "iv"})
        CHECK(se["conditions"][c]["status"] == "holds-on-grid");
    CHECK(se["sign_changing_on_grid"] == true);

    CHECK(run_cli("check-psi made_up_name") == 2);
}

TEST_CASE("check-speed verdicts") {
    REQUIRE(run_cli("check-speed power_mean:r=1 --dim 3 --trials 500 --seed 9", "sp1.json") == 0);
    json j = load_json("sp1.json");
    CHECK(j["admissibility"]["pass"] == true);
    CHECK(j["convex"]["pass"] == true);
    CHECK(j["inverse_concave_general"]["pass"] == true);
    CHECK(j["dual"]["pass"] == true);

    REQUIRE(run_cli("check-speed power_mean:r=-2 --dim 2 --trials 5000 --seed 9", "sp2.json") ==
            0);
    json bad = load_json("sp2.json");
    CHECK(bad["inverse_concave_general"]["pass"] == false);
    CHECK(bad["inverse_concave_general"]["witness"].contains("lambda"));

    REQUIRE(run_cli("check-speed sigma_root:k=2 --dim 3 --trials 2000 --seed 9", "sp3.json") == 0);
    json s2 = load_json("sp3.json");
    CHECK(s2["convex"]["pass"] == false);
    CHECK(s2["inverse_concave_general"]["pass"] == true);

    CHECK(run_cli("check-speed bogus:r=1") == 2);
}

TEST_CASE("verify-lemma exit codes") {
    CHECK(run_cli("verify-lemma --lemma boundary --speed power_mean:r=1 --psi identity "
                  "--dim 2 --trials 2000 --seed 4") == 0);
    CHECK(run_cli("verify-lemma --lemma interior --speed power_mean:r=-1 "
                  "--psi neg_power:alpha=1 --dim 3 --trials 1000 --seed 4") == 0);
    REQUIRE(run_cli("verify-lemma --lemma scalar-iv --psi neg_power:alpha=2 --trials 2000 "
                    "--seed 4",
                    "lemma_bad.json") == 1);
    json j = load_json("lemma_bad.json");
    CHECK(j["pass"] == false);
    CHECK(j["min_slack"].get<double>() < 0.0);
    CHECK(j["witness"].contains("scalar_a"));

    CHECK(run_cli("verify-lemma --lemma nonsense --psi identity") == 2);
    CHECK(run_cli("verify-lemma --psi identity") == 2); // missing --lemma
}

TEST_CASE("flow runs are deterministic and obey the exit-code contract") {
    write_file(g_workdir / "run.cfg",
               "# tiny deterministic run\n"
               "geometry = circle:r=1\n"
               "speed = power_mean:r=1\n"
               "psi = identity\n"
               "t_max = 0.02\n"
               "n = 128\n"
               "diag_interval = 50\n"
               "seed = 77\n");
    std::string cfg = (g_workdir / "run.cfg").string();
    REQUIRE(run_cli("flow " + cfg + " --out " + (g_workdir / "out1").string()) == 0);
    REQUIRE(run_cli("flow " + cfg + " --out " + (g_workdir / "out2").string()) == 0);
    std::string csv1 = slurp(g_workdir / "out1" / "diagnostics.csv");
    std::string csv2 = slurp(g_workdir / "out2" / "diagnostics.csv");
    REQUIRE(!csv1.empty());
    CHECK(csv1 == csv2);

    json man = json::parse(slurp(g_workdir / "out1" / "manifest.json"));
    CHECK(man["exflow_manifest"] == true);
    CHECK(man["completed"] == true);
    CHECK(man["verdicts"]["u_monotone"] == "pass");
    CHECK(fs::exists(g_workdir / "out1" / "snapshot_000000.csv"));
}

TEST_CASE("json config is accepted with identical keys") {
    write_file(g_workdir / "run.json",
               "{\"geometry\": \"circle:r=1\", \"speed\": \"power_mean:r=1\", "
               "\"psi\": \"identity\", \"t_max\": 0.02, \"n\": 128, "
               "\"diag_interval\": 50, \"seed\": 77}");
    REQUIRE(run_cli("flow " + (g_workdir / "run.json").string() + " --out " +
                    (g_workdir / "outj").string()) == 0);
    // same physics as the flat config: identical diagnostics bytes
    CHECK(slurp(g_workdir / "outj" / "diagnostics.csv") ==
          slurp(g_workdir / "out1" / "diagnostics.csv"));
}

TEST_CASE("config errors exit with code 2") {
    write_file(g_workdir / "bad1.cfg", "geometry = circle:r=1\nno_equals_sign_here\n");
    CHECK(run_cli("flow " + (g_workdir / "bad1.cfg").string() + " --out " +
                  (g_workdir / "badout").string()) == 2);

    write_file(g_workdir / "bad2.cfg", "geometry = circle:r=1\nunknown_key = 3\n");
    CHECK(run_cli("flow " + (g_workdir / "bad2.cfg").string() + " --out " +
                  (g_workdir / "badout").string()) == 2);

    write_file(g_workdir / "bad3.cfg", "geometry = circle:r=1\nc_cfl = 7\n");
    CHECK(run_cli("flow " + (g_workdir / "bad3.cfg").string() + " --out " +
                  (g_workdir / "badout").string()) == 2);

    CHECK(run_cli("flow " + (g_workdir / "missing.cfg").string() + " --out " +
                  (g_workdir / "badout").string()) == 2);
}

TEST_CASE("dt forced above the stability bound exits with code 1") {
    write_file(g_workdir / "forced.cfg",
               "geometry = ellipse:a=2,b=1\n"
               "speed = power_mean:r=1\n"
               "psi = neg_power:alpha=1\n"
               "t_max = 0.5\n"
               "n = 128\n"
               "dt_override = 1.0\n"
               "seed = 1\n");
    REQUIRE(run_cli("flow " + (g_workdir / "forced.cfg").string() + " --out " +
                    (g_workdir / "forcedout").string()) == 1);
    json man = json::parse(slurp(g_workdir / "forcedout" / "manifest.json"));
    CHECK(man["completed"] == false);
    std::string reason = man["halt_reason"].get<std::string>();
    CHECK(reason.find("stability") != std::string::npos);
    // partial outputs are retained
    CHECK(fs::exists(g_workdir / "forcedout" / "diagnostics.csv"));
}

TEST_CASE("results are independent of the worker count") {
    REQUIRE(run_cli("--threads 1 verify-lemma --lemma boundary --speed power_mean:r=-1 "
                    "--psi neg_power:alpha=1 --dim 3 --trials 4000 --seed 12",
                    "t1.json") == 0);
    REQUIRE(run_cli("--threads 2 verify-lemma --lemma boundary --speed power_mean:r=-1 "
                    "--psi neg_power:alpha=1 --dim 3 --trials 4000 --seed 12",
                    "t2.json") == 0);
    json a = load_json("t1.json");
    json b = load_json("t2.json");
    CHECK(a["min_slack"] == b["min_slack"]);
    CHECK(a["witness"] == b["witness"]);

    std::string cfg = (g_workdir / "run.cfg").string();
    REQUIRE(run_cli("--threads 2 flow " + cfg + " --out " + (g_workdir / "outT").string()) == 0);
    CHECK(slurp(g_workdir / "outT" / "diagnostics.csv") ==
          slurp(g_workdir / "out1" / "diagnostics.csv"));
}

TEST_CASE("report aggregates manifests") {
    CHECK(run_cli("report " + g_workdir.string(), "report.txt") == 0);
    std::string table = slurp(g_workdir / "report.txt");
    CHECK(table.find("out1") != std::string::npos);
    CHECK(table.find("circle:r=1") != std::string::npos);
}

int main(int argc, char** argv) {
    doctest::Context context;
    std::vector<char*> pass;
    for (int i = 0; i < argc; ++i) {
        if (std::string(argv[i]) == "--exflow-bin" && i + 1 < argc) {
            g_binary = argv[++i];
            continue;
        }
        pass.push_back(argv[i]);
    }
    if (g_binary.empty()) {
        const char* env = std::getenv("EXFLOW_BIN");
        if (env) g_binary = env;
    }
    if (g_binary.empty()) {
        std::fprintf(stderr, "usage: test_cli --exflow-bin <path>\n");
        return 2;
    }
    g_workdir = fs::temp_directory_path() / "exflow_cli_test";
    fs::remove_all(g_workdir);
    fs::create_directories(g_workdir);
    context.applyCommandLine(static_cast<int>(pass.size()), pass.data());
    int rc = context.run();
    fs::remove_all(g_workdir);
    return rc;
}

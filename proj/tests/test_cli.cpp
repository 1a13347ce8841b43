#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kSource = KSLAB_SOURCE_DIR;

struct Run {
    int code;
    fs::path out;
};

Run kslab(const std::string& sub, const std::string& config, const std::string& extra = "") {
    static int counter = 0;
    const fs::path out = fs::path(KSLAB_BINARY_DIR) / "cli_out" / (sub + "_" + std::to_string(++counter));
    fs::remove_all(out);
    const std::string cmd = std::string(KSLAB_BIN) + " " + sub + " --config " + (kSource / config).string() +
                            " --out " + out.string() + " --workers 1 " + extra + " > " + (out.string() + ".log") +
                            " 2>&1";
    fs::create_directories(out.parent_path());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string without_comments(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind('#', 0) != 0) out += line + "\n";
    return out;
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("certify passes and writes both artifacts") {
    const Run r = kslab("certify", "tests/cli/sup.json");
    CHECK(r.code == 0);
    const auto cert = load(r.out / "certificate.json");
    const auto rep = load(r.out / "certify_report.json");
    CHECK(rep["pass"] == true);
    CHECK(cert.contains("audit"));
    CHECK(cert["provenance"]["config"]["model"]["sigma"] == 2.0);
    CHECK(rep["provenance"]["config"]["certify"]["n_s"] == 100);
}

TEST_CASE("certify outside the supercritical regime is a regime error") {
    CHECK(kslab("certify", "tests/cli/sub.json").code == 2);
}

TEST_CASE("tampering theta fails with a located violation") {
    const Run r = kslab("certify", "tests/cli/sup.json", "--tamper theta=0");
    CHECK(r.code == 1);
    const auto rep = load(r.out / "certify_report.json");
    CHECK(rep["pass"] == false);
    CHECK(rep["P_outer"]["ratio"].get<double>() > 0);
    CHECK(rep["P_outer"].contains("s"));
    CHECK(load(r.out / "certificate.json")["tampered"][0] == "theta=0");
}

TEST_CASE("simulate: supercritical blows up, subcritical stays bounded") {
    const Run a = kslab("simulate", "tests/cli/sup.json");
    CHECK(a.code == 0);
    CHECK(load(a.out / "outcome.json")["kind"] == "blowup");
    const Run b = kslab("simulate", "tests/cli/sub.json");
    CHECK(b.code == 0);
    CHECK(load(b.out / "outcome.json")["kind"] == "bounded");
    const std::string series = slurp(b.out / "series.csv");
    CHECK(series.rfind("# kslab simulate\n# config {", 0) == 0);
    CHECK(without_comments(series).rfind("t,sup_u,sup_w,mass_u,mass_w,dt,lp_2,lq_2\n", 0) == 0);
}

TEST_CASE("horizon 0 gives an empty series") {
    const Run r = kslab("simulate", "tests/cli/horizon0.json");
    CHECK(r.code == 0);
    CHECK(without_comments(slurp(r.out / "series.csv")) == "t,sup_u,sup_w,mass_u,mass_w,dt,lp_2,lq_2\n");
}

TEST_CASE("masses table matches the golden file and starts at zero") {
    const Run r = kslab("masses", "tests/cli/masses_small.json");
    CHECK(r.code == 0);
    const std::string body = without_comments(slurp(r.out / "masses.csv"));
    CHECK(body == slurp(kSource / "tests/golden/masses_small.csv"));
    CHECK(body.find("\n0.0000000000000000e+00,0.0000000000000000e+00,0.0000000000000000e+00\n") !=
          std::string::npos);
    const Run again = kslab("masses", "tests/cli/masses_small.json");
    CHECK(without_comments(slurp(again.out / "masses.csv")) == body);
}

TEST_CASE("masses without a masses section is a configuration error") {
    CHECK(kslab("masses", "tests/cli/no_masses.json").code == 2);
}

TEST_CASE("single-point sweep matches the golden file") {
    const Run r = kslab("sweep", "tests/cli/sweep_point.json");
    CHECK(r.code == 0);
    CHECK(without_comments(slurp(r.out / "phase.csv")) == slurp(kSource / "tests/golden/sweep_point.csv"));
    CHECK(slurp(r.out / "phase_lines.txt").find("sigma = 2/3") != std::string::npos);
    CHECK(load(r.out / "sweep_summary.json")["agreement"].get<double>() == 1.0);
}

TEST_CASE("invalid sweep ranges are configuration errors") {
    CHECK(kslab("sweep", "tests/cli/sweep_bad.json").code == 2);
}

TEST_CASE("argument errors") {
    CHECK(kslab("certify", "tests/cli/does_not_exist.json").code == 2);
    CHECK(kslab("frobnicate", "tests/cli/sup.json").code == 2);
}

}  // TEST_SUITE

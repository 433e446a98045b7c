#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "errsurf_cli_tests";
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path out_file = scratch_dir() / "stdout.txt";
    const std::string cmd =
        std::string(ERRSURF_CLI) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    return r;
}

std::string viscometer_request() {
    return (fs::path(ERRSURF_DATA_DIR) / "viscometer.json").string();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("analyze produces a machine report with exit code 0") {
    const fs::path out = scratch_dir() / "report.json";
    const RunResult r =
        run("analyze " + viscometer_request() + " --format machine -o " + out.string());
    REQUIRE(r.code == 0);

    std::ifstream in(out);
    nlohmann::json report;
    in >> report;
    CHECK(report["surface"]["kind"] == "hyperbolic paraboloid");
    CHECK(report["surface"]["type"] == 1);
    const double k2 = report["accuracy"]["k_second"].get<double>();
    CHECK(std::round(k2 * 100.0) / 100.0 == 0.57);
}

TEST_CASE("analyze text goes to stdout by default") {
    const RunResult r = run("analyze " + viscometer_request());
    CHECK(r.code == 0);
    CHECK(r.output.find("hyperbolic paraboloid of type 1") != std::string::npos);
    CHECK(r.output.find("k_second = 0.5697") != std::string::npos);
}

TEST_CASE("exit codes by failure category") {
    const fs::path bad = scratch_dir() / "bad.json";

    // 2: schema
    CHECK(run("analyze " + (scratch_dir() / "does_not_exist.json").string()).code == 2);
    write_file(bad, "{ not json");
    CHECK(run("analyze " + bad.string()).code == 2);
    write_file(bad, R"({"formula": "x1", "variables": []})");
    CHECK(run("analyze " + bad.string()).code == 2);

    // 3: expression
    write_file(bad, R"({"formula": "x1 + ",
                        "variables": [{"name": "x1", "observations": [1, 2]}]})");
    CHECK(run("analyze " + bad.string()).code == 3);
    write_file(bad, R"({"formula": "x1 + boo",
                        "variables": [{"name": "x1", "observations": [1, 2]}]})");
    const RunResult unknown = run("analyze " + bad.string());
    CHECK(unknown.code == 3);
    CHECK(unknown.output.find("boo") != std::string::npos);

    // 4: measurement
    write_file(bad, R"({"formula": "x1", "mode": "relative",
                        "variables": [{"name": "x1", "observations": [-1, 1]}]})");
    const RunResult zero_mean = run("analyze " + bad.string());
    CHECK(zero_mean.code == 4);
    CHECK(zero_mean.output.find("x1") != std::string::npos);

    // command-line usage errors are CLI-level, not analysis categories
    CHECK(run("").code != 0);
    CHECK(run("analyze").code != 0);
}

TEST_CASE("derive prints reparsable partials") {
    const RunResult all = run("derive " + viscometer_request());
    CHECK(all.code == 0);
    CHECK(all.output.find("d/dt:") != std::string::npos);
    CHECK(all.output.find("d2/dt0dt0:") != std::string::npos);

    const RunResult one = run("derive " + viscometer_request() + " --wrt t");
    CHECK(one.code == 0);
    CHECK(one.output.find("eta0") != std::string::npos);

    const RunResult two = run("derive " + viscometer_request() + " --wrt t --wrt t0");
    CHECK(two.code == 0);

    CHECK(run("derive " + viscometer_request() + " --wrt nope").code == 2);
}

TEST_CASE("classify a coefficients file") {
    const fs::path coeffs = scratch_dir() / "coeffs.json";
    write_file(coeffs, R"({"n": 2, "first": [1, 1], "second": [[0, 1], [1, 2]]})");
    const RunResult r = run("classify " + coeffs.string() + " --format machine");
    REQUIRE(r.code == 0);
    const nlohmann::json out = nlohmann::json::parse(r.output);
    CHECK(out["surface"]["kind"] == "hyperbolic paraboloid");

    write_file(coeffs, R"({"n": 2, "first": [-1, 1], "second": [[0, 0], [0, 0]]})");
    CHECK(run("classify " + coeffs.string()).code == 2);
}

TEST_CASE("surface-grid emits one row per node") {
    const RunResult r = run("surface-grid " + viscometer_request() +
                            " --min 0 --max 0.02 --resolution 3");
    REQUIRE(r.code == 0);
    std::istringstream in(r.output);
    std::string line;
    int lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 10);  // header + 3x3 nodes

    CHECK(run("surface-grid " + viscometer_request() + " --min 0 --max 0.02 --resolution 0")
              .code == 2);
    CHECK(run("surface-grid " + viscometer_request() + " --min 1 --max 0 --resolution 3")
              .code == 2);
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavefront/config.hpp"

using namespace wavefront;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

std::string binary() {
    const char* bin = std::getenv("WAVEFRONT_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "WAVEFRONT_BIN must point at the CLI binary");
    return bin;
}

RunResult run_cli(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "wavefront_cli_stdout.txt";
    const std::string cmd = binary() + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return RunResult{WEXITSTATUS(status), ss.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("wavefront_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), ("missing output file: " + path.string()).c_str());
    return Json::parse(in);
}

Json load_schema(const char* name) {
    std::ifstream in(std::string(WAVEFRONT_SCHEMA_DIR) + "/" + name);
    REQUIRE(in.good());
    return Json::parse(in);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kDoubleWellConfig = R"({
  "schema": 1,
  "potential": {
    "dimension": 1,
    "monomials": [
      {"exponents": [4], "coefficient": 0.25},
      {"exponents": [2], "coefficient": -0.5},
      {"exponents": [0], "coefficient": 0.25}
    ]
  },
  "search_box": {"lo": [-2.0], "hi": [2.0]},
  "grid_density": 8,
  "speeds": [0.0, 1.0],
  "output": {"directory": "%OUT%"}
})";

const char* kNagumoConfig = R"({
  "schema": 1,
  "potential": {
    "dimension": 1,
    "monomials": [
      {"exponents": [4], "coefficient": 0.25},
      {"exponents": [3], "coefficient": -0.4166666666666667},
      {"exponents": [2], "coefficient": 0.125}
    ]
  },
  "search_box": {"lo": [-0.5], "hi": [1.5]},
  "grid_density": 8,
  "problem": {
    "departure": 2,
    "arrival": 0,
    "speed_interval": [0.05, 1.0]
  },
  "output": {"directory": "%OUT%"}
})";

const char* kQuadraticPulseConfig = R"({
  "schema": 1,
  "potential": {
    "dimension": 1,
    "monomials": [{"exponents": [2], "coefficient": 0.5}]
  },
  "search_box": {"lo": [-1.0], "hi": [1.0]},
  "grid_density": 4,
  "problem": {"equilibrium": 0, "pulse_mode": "symmetric"},
  "output": {"directory": "%OUT%"}
})";

std::string with_out(const char* tpl, const fs::path& out) {
    std::string s = tpl;
    const std::string key = "%OUT%";
    s.replace(s.find(key), key.size(), out.string());
    return s;
}

}  // namespace

TEST_CASE("cli equilibria: double well") {
    const fs::path dir = fresh_dir("equilibria");
    write_file(dir / "config.json", with_out(kDoubleWellConfig, dir));
    RunResult res = run_cli("equilibria " + (dir / "config.json").string());
    CHECK(res.exit_code == 0);

    Json out = read_json(dir / "equilibria.json");
    CHECK_NOTHROW(
        validate_against_schema(out, load_schema("equilibria.schema.json"), "equilibria"));
    REQUIRE(out["critical_points"].size() == 3);
    CHECK(out["critical_points"][0]["morse_index"] == 0);
    CHECK(out["critical_points"][1]["morse_index"] == 1);
    CHECK(out["critical_points"][2]["morse_index"] == 0);
    CHECK(out["spectra"].size() == 2);
}

TEST_CASE("cli front + check: Nagumo") {
    const fs::path dir = fresh_dir("front");
    write_file(dir / "config.json", with_out(kNagumoConfig, dir));
    RunResult res = run_cli("front " + (dir / "config.json").string());
    CHECK(res.exit_code == 0);

    Json sol = read_json(dir / "solution.json");
    CHECK_NOTHROW(validate_against_schema(sol, load_schema("solution.schema.json"), "solution"));
    CHECK(std::abs(sol["c"].get<double>() - 0.35355339059) < 1e-4);

    const std::string csv = read_text(dir / "profile.csv");
    CHECK(csv.rfind("xi,u1,v1,H\n", 0) == 0);

    RunResult check = run_cli("check " + (dir / "solution.json").string());
    CHECK(check.exit_code == 0);
    Json report = read_json(dir / "report.json");
    CHECK_NOTHROW(validate_against_schema(report, load_schema("report.schema.json"), "report"));
    bool found = false;
    for (const auto& r : report["reports"])
        if (r["name"] == "transversality") {
            CHECK(r["verdict"] == "transverse");
            found = true;
        }
    CHECK(found);
}

TEST_CASE("cli pulse + check: fish potential") {
    const fs::path dir = fresh_dir("pulse_fish");
    const char* cfg = R"({
      "schema": 1,
      "potential": {
        "dimension": 1,
        "monomials": [
          {"exponents": [2], "coefficient": 0.5},
          {"exponents": [3], "coefficient": -0.3333333333333333}
        ]
      },
      "search_box": {"lo": [-0.5], "hi": [1.2]},
      "grid_density": 8,
      "problem": {"equilibrium": 0, "pulse_mode": "symmetric"},
      "output": {"directory": "%OUT%"}
    })";
    write_file(dir / "config.json", with_out(cfg, dir));
    RunResult res = run_cli("pulse " + (dir / "config.json").string());
    CHECK(res.exit_code == 0);

    Json sol = read_json(dir / "solution.json");
    CHECK(sol["kind"] == "symmetric_pulse");
    CHECK(sol["symmetric"] == true);

    RunResult check = run_cli("check " + (dir / "solution.json").string());
    CHECK(check.exit_code == 0);
    Json report = read_json(dir / "report.json");
    CHECK_NOTHROW(validate_against_schema(report, load_schema("report.schema.json"), "report"));
    bool elementary = false, level_set_seen = false;
    for (const auto& r : report["reports"]) {
        if (r["name"] == "elementarity") {
            CHECK(r["verdict"] == "elementary");
            elementary = true;
        }
        if (r["name"] == "level_set_transversality") level_set_seen = true;
    }
    CHECK(elementary);
    CHECK(level_set_seen);
    CHECK(report["invariants"]["hamiltonian_residual"].get<double>() < 1e-8);
}

TEST_CASE("cli scan: bracketing information") {
    const fs::path dir = fresh_dir("scan");
    write_file(dir / "config.json", with_out(kNagumoConfig, dir));
    RunResult res = run_cli("scan " + (dir / "config.json").string());
    CHECK(res.exit_code == 0);
    Json out = read_json(dir / "scan.json");
    CHECK_NOTHROW(validate_against_schema(out, load_schema("scan.schema.json"), "scan"));
    CHECK(out["sign_changes"].get<int>() >= 1);
}

TEST_CASE("cli pulse: no homoclinic for the quadratic potential") {
    const fs::path dir = fresh_dir("pulse_quad");
    write_file(dir / "config.json", with_out(kQuadraticPulseConfig, dir));

    // The quadratic has exactly one equilibrium.
    RunResult eq = run_cli("equilibria " + (dir / "config.json").string());
    CHECK(eq.exit_code == 0);
    CHECK(read_json(dir / "equilibria.json")["critical_points"].size() == 1);

    RunResult res = run_cli("pulse " + (dir / "config.json").string());
    CHECK(res.exit_code == 4);
    Json reason = Json::parse(res.stdout_text);
    CHECK(reason["status"] == "failed");
    CHECK(reason["reason"] == "no homoclinic");
}

TEST_CASE("cli: malformed JSON exits 2") {
    const fs::path dir = fresh_dir("bad");
    write_file(dir / "config.json", "{ not json");
    RunResult res = run_cli("equilibria " + (dir / "config.json").string());
    CHECK(res.exit_code == 2);

    write_file(dir / "unknown.json", R"({"potential": {"dimension": 1,
      "monomials": [{"exponents": [2], "coefficient": 1.0}]}, "wat": 3})");
    RunResult res2 = run_cli("equilibria " + (dir / "unknown.json").string());
    CHECK(res2.exit_code == 2);
}

TEST_CASE("cli: infeasible front exits 4 with reason") {
    const fs::path dir = fresh_dir("infeasible");
    std::string cfg = with_out(kDoubleWellConfig, dir);
    // Symmetric wells: equal depths, fronts infeasible.
    Json doc = Json::parse(cfg);
    doc["problem"] = Json::parse(
        R"({"departure": 0, "arrival": 2, "speed_interval": [0.1, 1.0]})");
    write_file(dir / "config.json", doc.dump());
    RunResult res = run_cli("front " + (dir / "config.json").string());
    CHECK(res.exit_code == 4);
    Json reason = Json::parse(res.stdout_text);
    CHECK(reason["reason"] == "infeasible");
}

TEST_CASE("cli perturb: robustness report validates and matches the prediction") {
    const fs::path dir = fresh_dir("perturb");
    Json doc = Json::parse(with_out(kNagumoConfig, dir));
    doc["perturbation"] = Json::parse(
        R"({"type": "case1", "center": [0.5], "epsilon": 0.2, "direction": [1.0]})");
    doc["amplitudes"] = Json::parse("[1e-5, 1e-4]");
    write_file(dir / "config.json", doc.dump());
    RunResult res = run_cli("perturb " + (dir / "config.json").string());
    CHECK(res.exit_code == 0);

    Json out = read_json(dir / "perturb.json");
    CHECK_NOTHROW(validate_against_schema(out, load_schema("perturb.schema.json"), "perturb"));
    const auto& rob = out["robustness"];
    CHECK(rob["survived_up_to"].get<double>() == 1e-4);
    const double fit = rob["dc_damp_fit"].get<double>();
    const double predicted = rob["dc_damp_predicted"].get<double>();
    CHECK(std::abs(fit - predicted) <= 0.05 * std::abs(predicted));
}

TEST_CASE("cli determinism: byte-identical reruns modulo the timestamp") {
    const fs::path dir_a = fresh_dir("det_a");
    const fs::path dir_b = fresh_dir("det_b");
    write_file(dir_a / "config.json", with_out(kNagumoConfig, dir_a));
    write_file(dir_b / "config.json", with_out(kNagumoConfig, dir_b));

    REQUIRE(run_cli("front " + (dir_a / "config.json").string()).exit_code == 0);
    REQUIRE(run_cli("front " + (dir_b / "config.json").string()).exit_code == 0);

    CHECK(read_text(dir_a / "profile.csv") == read_text(dir_b / "profile.csv"));

    Json a = read_json(dir_a / "solution.json");
    Json b = read_json(dir_b / "solution.json");
    a["metadata"].erase("generated_at");
    b["metadata"].erase("generated_at");
    CHECK(a.dump() == b.dump());
}

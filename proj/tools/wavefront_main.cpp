// Batch front-end: declarative problem files in, CSV/JSON artifacts out.
//
// Subcommands: equilibria, front, pulse, scan, check, perturb.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 solver
// reported infeasible / no bracket / no connection (machine-readable reason
// on stdout).

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wavefront/io.hpp"

namespace wf = wavefront;
using wf::Json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    double tol_override = 0.0;
    int max_iter_override = 0;
};

struct RunConfig {
    Json raw;
    Json potential_doc;
    std::shared_ptr<const wf::PotentialModel> model;
    wf::SearchBox box;
    int grid_density = 12;
    std::vector<double> speeds{0.0};
    wf::ShootingOptions shooting;
    std::filesystem::path out_dir = "out";
};

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wf::ConfigError("cannot open config file: " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const std::exception& err) {
        throw wf::ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    return doc;
}

RunConfig parse_run_config(const CommonArgs& args) {
    RunConfig cfg;
    cfg.raw = load_json(args.config_path);
    wf::require_keys(cfg.raw, {"potential"},
                     {"schema", "search_box", "grid_density", "speeds", "problem", "tolerances",
                      "perturbation", "amplitudes", "output"},
                     "config");
    if (cfg.raw.contains("schema") && cfg.raw["schema"] != 1)
        throw wf::ConfigError("config.schema: only schema 1 is supported");

    cfg.potential_doc = cfg.raw["potential"];
    cfg.model = wf::build_potential_document(cfg.potential_doc);
    const int d = cfg.model->dimension();

    cfg.box.lo = wf::Vec::Constant(d, -5.0);
    cfg.box.hi = wf::Vec::Constant(d, 5.0);
    if (cfg.raw.contains("search_box")) {
        const Json& box = cfg.raw["search_box"];
        wf::require_keys(box, {"lo", "hi"}, {}, "config.search_box");
        if (!box["lo"].is_array() || !box["hi"].is_array() ||
            static_cast<int>(box["lo"].size()) != d || static_cast<int>(box["hi"].size()) != d)
            throw wf::ConfigError("config.search_box: lo/hi must be arrays of length dimension");
        for (int i = 0; i < d; ++i) {
            cfg.box.lo(i) = box["lo"][static_cast<std::size_t>(i)].get<double>();
            cfg.box.hi(i) = box["hi"][static_cast<std::size_t>(i)].get<double>();
        }
    }
    if (cfg.raw.contains("grid_density")) {
        cfg.grid_density = cfg.raw["grid_density"].get<int>();
        if (cfg.grid_density < 2) throw wf::ConfigError("config.grid_density: must be >= 2");
    }
    if (cfg.raw.contains("speeds")) {
        cfg.speeds.clear();
        for (const auto& c : cfg.raw["speeds"]) {
            if (!c.is_number() || c.get<double>() < 0.0)
                throw wf::ConfigError("config.speeds: entries must be nonnegative numbers");
            cfg.speeds.push_back(c.get<double>());
        }
    }
    if (cfg.raw.contains("tolerances")) {
        const Json& tol = cfg.raw["tolerances"];
        wf::require_keys(tol, {}, {"integrator", "solve_scale", "max_iterations"},
                         "config.tolerances");
        if (tol.contains("integrator"))
            cfg.shooting.integrator_tol = tol["integrator"].get<double>();
        if (tol.contains("solve_scale"))
            cfg.shooting.solve_tol_scale = tol["solve_scale"].get<double>();
        if (tol.contains("max_iterations"))
            cfg.shooting.max_iterations = tol["max_iterations"].get<int>();
    }
    if (cfg.raw.contains("output")) {
        wf::require_keys(cfg.raw["output"], {"directory"}, {}, "config.output");
        cfg.out_dir = cfg.raw["output"]["directory"].get<std::string>();
    }

    // Flags win over config, config wins over defaults.
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    if (args.tol_override > 0.0) cfg.shooting.integrator_tol = args.tol_override;
    if (args.max_iter_override > 0) cfg.shooting.max_iterations = args.max_iter_override;
    return cfg;
}

Json metadata() {
    Json j;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    j["generated_at"] = buf;  // the only output field allowed to vary across runs
    j["tool"] = "wavefront";
    j["schema"] = 1;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

wf::CriticalPointSearch resolve_equilibria(const RunConfig& cfg) {
    return wf::find_critical_points(*cfg.model, cfg.box, cfg.grid_density);
}

const wf::CriticalPoint& pick(const wf::CriticalPointSearch& search, int index,
                              const std::string& what) {
    if (index < 0 || index >= static_cast<int>(search.points.size()))
        throw wf::ConfigError("config.problem." + what + ": index " + std::to_string(index) +
                              " out of range (found " + std::to_string(search.points.size()) +
                              " critical points)");
    return search.points[static_cast<std::size_t>(index)];
}

const Json& problem_doc(const RunConfig& cfg) {
    if (!cfg.raw.contains("problem"))
        throw wf::ConfigError("config: this subcommand needs a 'problem' object");
    return cfg.raw["problem"];
}

// --------------------------------------------------------------------------

int cmd_equilibria(const RunConfig& cfg) {
    wf::CriticalPointSearch search = resolve_equilibria(cfg);
    Json out;
    out["schema"] = 1;
    out["dimension"] = cfg.model->dimension();
    Json pts = Json::array();
    for (const auto& cp : search.points) pts.push_back(wf::critical_point_to_json(cp));
    out["critical_points"] = std::move(pts);
    Json degenerate = Json::array();
    for (const auto& p : search.degenerate) {
        Json arr = Json::array();
        for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(p(i));
        degenerate.push_back(std::move(arr));
    }
    out["degenerate"] = std::move(degenerate);

    Json spectra = Json::array();
    for (double c : cfg.speeds) {
        Json entry;
        entry["c"] = c;
        Json per_point = Json::array();
        for (const auto& cp : search.points)
            per_point.push_back(wf::spectrum_to_json(wf::spectrum_at(*cfg.model, cp, c)));
        entry["per_point"] = std::move(per_point);
        spectra.push_back(std::move(entry));
    }
    out["spectra"] = std::move(spectra);
    out["metadata"] = metadata();
    wf::write_text_atomic(cfg.out_dir / "equilibria.json", dump(out));
    std::printf("equilibria: %zu critical points (%zu degenerate) -> %s\n",
                search.points.size(), search.degenerate.size(),
                (cfg.out_dir / "equilibria.json").c_str());
    return 0;
}

wf::FrontProblem make_front_problem(const RunConfig& cfg, Json& problem_out) {
    const Json& pd = problem_doc(cfg);
    wf::require_keys(pd, {"departure", "arrival", "speed_interval"},
                     {"speed_grid", "sign", "c"}, "config.problem");
    wf::CriticalPointSearch search = resolve_equilibria(cfg);
    wf::FrontProblem problem;
    problem.model = cfg.model;
    problem.departure = pick(search, pd["departure"].get<int>(), "departure");
    problem.arrival = pick(search, pd["arrival"].get<int>(), "arrival");
    if (!pd["speed_interval"].is_array() || pd["speed_interval"].size() != 2)
        throw wf::ConfigError("config.problem.speed_interval: expected [c_min, c_max]");
    problem.c_min = pd["speed_interval"][0].get<double>();
    problem.c_max = pd["speed_interval"][1].get<double>();
    problem_out = pd;
    return problem;
}

wf::ShootingSeeds seeds_from(const Json& pd) {
    wf::ShootingSeeds seeds;
    if (pd.contains("sign")) seeds.sign = pd["sign"].get<int>() >= 0 ? +1 : -1;
    if (pd.contains("c")) seeds.c = pd["c"].get<double>();
    return seeds;
}

int cmd_front(const RunConfig& cfg) {
    Json pd;
    wf::FrontProblem problem = make_front_problem(cfg, pd);
    wf::ShootingOptions opts = cfg.shooting;
    if (pd.contains("speed_grid")) opts.scan_grid = pd["speed_grid"].get<int>();
    wf::ConnectionSolution sol = wf::solve_front(problem, opts, seeds_from(pd));

    wf::write_text_atomic(cfg.out_dir / "profile.csv", wf::profile_csv(*cfg.model, sol.trajectory));
    Json sj = wf::solution_to_json(sol, *cfg.model, cfg.potential_doc, pd);
    sj["metadata"] = metadata();
    wf::write_text_atomic(cfg.out_dir / "solution.json", dump(sj));
    std::printf("front: c = %.10g, mismatch = %.3g -> %s\n", sol.c, sol.mismatch_norm,
                (cfg.out_dir / "solution.json").c_str());
    return 0;
}

int cmd_pulse(const RunConfig& cfg) {
    const Json& pd = problem_doc(cfg);
    wf::require_keys(pd, {"equilibrium"}, {"pulse_mode", "sign"}, "config.problem");
    wf::CriticalPointSearch search = resolve_equilibria(cfg);
    const wf::CriticalPoint& e = pick(search, pd["equilibrium"].get<int>(), "equilibrium");
    const std::string mode =
        pd.contains("pulse_mode") ? pd["pulse_mode"].get<std::string>() : "symmetric";

    wf::ConnectionSolution sol;
    if (mode == "symmetric")
        sol = wf::solve_symmetric_pulse(cfg.model, e, cfg.shooting, seeds_from(pd));
    else if (mode == "asymmetric")
        sol = wf::solve_asymmetric_pulse(cfg.model, e, cfg.shooting, seeds_from(pd));
    else
        throw wf::ConfigError("config.problem.pulse_mode: expected 'symmetric' or 'asymmetric'");

    wf::write_text_atomic(cfg.out_dir / "profile.csv", wf::profile_csv(*cfg.model, sol.trajectory));
    Json sj = wf::solution_to_json(sol, *cfg.model, cfg.potential_doc, pd);
    sj["metadata"] = metadata();
    wf::write_text_atomic(cfg.out_dir / "solution.json", dump(sj));
    std::printf("pulse: turning time %.10g, mismatch = %.3g -> %s\n", sol.turning_time,
                sol.mismatch_norm, (cfg.out_dir / "solution.json").c_str());
    return 0;
}

int cmd_scan(const RunConfig& cfg) {
    Json pd;
    wf::FrontProblem problem = make_front_problem(cfg, pd);
    int grid_n = pd.contains("speed_grid") ? pd["speed_grid"].get<int>() : cfg.shooting.scan_grid;
    if (grid_n < 1) throw wf::ConfigError("config.problem.speed_grid: must be >= 1");
    std::vector<double> grid(static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i)
        grid[static_cast<std::size_t>(i)] =
            problem.c_min + (problem.c_max - problem.c_min) * (i + 0.5) / grid_n;

    auto rows = wf::scan_speed(problem, grid, cfg.shooting);
    Json out;
    out["schema"] = 1;
    Json arr = Json::array();
    int sign_changes = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        arr.push_back(Json{{"c", rows[i].first}, {"indicator", rows[i].second}});
        if (i > 0 && (rows[i - 1].second < 0.0) != (rows[i].second < 0.0)) ++sign_changes;
    }
    out["scan"] = std::move(arr);
    out["sign_changes"] = sign_changes;
    out["metadata"] = metadata();
    wf::write_text_atomic(cfg.out_dir / "scan.json", dump(out));
    std::printf("scan: %d sign changes over %d speeds -> %s\n", sign_changes, grid_n,
                (cfg.out_dir / "scan.json").c_str());
    return 0;
}

wf::CriticalPoint critical_from_json(const wf::PotentialModel& model, const Json& j) {
    const int d = model.dimension();
    wf::Vec p(d);
    for (int i = 0; i < d; ++i) p(i) = j["point"][static_cast<std::size_t>(i)].get<double>();
    return wf::classify_critical_point(model, p);
}

int cmd_check(const CommonArgs& args) {
    Json sj = load_json(args.config_path);
    wf::require_keys(sj,
                     {"schema", "kind", "c", "flight_time", "b_unstable", "b_stable",
                      "r_unstable", "r_stable", "mismatch_norm", "symmetric",
                      "converged_to_symmetric", "min_symmetry_distance", "departure", "arrival",
                      "invariants", "potential", "problem"},
                     {"turning_time", "metadata"}, "solution");
    auto model = wf::build_potential_document(sj["potential"]);
    const std::string kind = sj["kind"].get<std::string>();

    std::filesystem::path out_dir = args.out_override.empty()
                                        ? std::filesystem::path(args.config_path).parent_path()
                                        : std::filesystem::path(args.out_override);

    wf::ShootingOptions opts;
    if (args.tol_override > 0.0) opts.integrator_tol = args.tol_override;
    if (args.max_iter_override > 0) opts.max_iterations = args.max_iter_override;

    wf::ShootingSeeds warm;
    {
        const auto& bu = sj["b_unstable"];
        wf::Vec b(bu.size());
        for (std::size_t i = 0; i < bu.size(); ++i)
            b(static_cast<Eigen::Index>(i)) = bu[i].get<double>();
        if (b.size() > 0) warm.b_unstable = b;
        const auto& bs = sj["b_stable"];
        wf::Vec b2(bs.size());
        for (std::size_t i = 0; i < bs.size(); ++i)
            b2(static_cast<Eigen::Index>(i)) = bs[i].get<double>();
        if (b2.size() > 0) warm.b_stable = b2;
        warm.flight_time = sj["flight_time"].get<double>();
        warm.c = sj["c"].get<double>();
    }

    Json out;
    out["schema"] = 1;
    out["kind"] = kind;
    Json reports = Json::array();

    wf::DiagnosticsOptions dopt;
    dopt.integrator_tol = opts.integrator_tol;

    if (kind == "front") {
        wf::FrontProblem problem;
        problem.model = model;
        problem.departure = critical_from_json(*model, sj["departure"]);
        problem.arrival = critical_from_json(*model, sj["arrival"]);
        problem.c_min = 0.5 * warm.c.value();
        problem.c_max = 1.5 * warm.c.value();
        wf::ConnectionSolution sol = wf::solve_front(problem, opts, warm);

        wf::TransversalityReport rep = wf::transversality_front(problem, sol, dopt);
        Json rj = wf::transversality_to_json(rep);
        rj["name"] = "transversality";
        reports.push_back(std::move(rj));

        Json inv;
        inv["dissipation_residual"] = wf::dissipation_residual(*model, sol.trajectory);
        const double lag = sol.departure.value - sol.arrival.value;
        inv["potential_lag_identity_residual"] =
            std::abs(lag + sol.c * wf::kinetic_integral(sol.trajectory)) /
            (1.0 + std::abs(lag));
        inv["bistable"] =
            sol.departure.morse_index == 0 && sol.arrival.morse_index == 0;
        out["invariants"] = inv;
        // Tangency at both ends.
        wf::EquilibriumSpectrum sp_right = wf::spectrum_at(*model, sol.arrival, sol.c);
        try {
            Json tj = wf::tangency_to_json(
                wf::tangency_check(sol.trajectory, sp_right, wf::TrajectoryEnd::right));
            tj["name"] = "tangency_right";
            reports.push_back(std::move(tj));
        } catch (const wf::WindowError& err) {
            reports.push_back(Json{{"name", "tangency_right"}, {"error", err.what()}});
        }
    } else {
        const wf::CriticalPoint e = critical_from_json(*model, sj["departure"]);
        wf::ConnectionSolution sol;
        if (kind == "symmetric_pulse") {
            sol = wf::solve_symmetric_pulse(model, e, opts, warm);
            wf::TransversalityReport rep = wf::elementarity_symmetric(model, sol, dopt);
            Json rj = wf::transversality_to_json(rep);
            rj["name"] = "elementarity";
            reports.push_back(std::move(rj));
            // Level-set transversality is reported for symmetric pulses too;
            // a failure there is not a defect (open question upstream).
            wf::TransversalityReport rep2 = wf::transversality_asymmetric(model, sol, dopt);
            Json rj2 = wf::transversality_to_json(rep2);
            rj2["name"] = "level_set_transversality";
            reports.push_back(std::move(rj2));
        } else if (kind == "asymmetric_pulse") {
            sol = wf::solve_asymmetric_pulse(model, e, opts, warm);
            wf::TransversalityReport rep = wf::transversality_asymmetric(model, sol, dopt);
            Json rj = wf::transversality_to_json(rep);
            rj["name"] = "level_set_transversality";
            reports.push_back(std::move(rj));
        } else {
            throw wf::ConfigError("solution.kind: unknown kind '" + kind + "'");
        }
        Json inv;
        inv["hamiltonian_residual"] =
            std::abs(wf::hamiltonian(*model, sol.trajectory.at(0.0)) + e.value);
        inv["dissipation_residual"] = wf::dissipation_residual(*model, sol.trajectory);
        out["invariants"] = inv;
    }

    out["reports"] = std::move(reports);
    out["metadata"] = metadata();
    wf::write_text_atomic(out_dir / "report.json", dump(out));

    std::string verdicts;
    for (const auto& r : out["reports"])
        if (r.contains("verdict"))
            verdicts += std::string(verdicts.empty() ? "" : ", ") + r["name"].get<std::string>() +
                        "=" + r["verdict"].get<std::string>();
    std::printf("check: %s -> %s\n", verdicts.c_str(), (out_dir / "report.json").c_str());
    return 0;
}

int cmd_perturb(const RunConfig& cfg) {
    Json pd;
    wf::FrontProblem problem = make_front_problem(cfg, pd);
    if (!cfg.raw.contains("perturbation"))
        throw wf::ConfigError("config: perturb needs a 'perturbation' object");
    auto term = wf::build_perturbation(cfg.raw["perturbation"], cfg.model->dimension());

    std::vector<double> amplitudes = wf::default_amplitude_ladder();
    if (cfg.raw.contains("amplitudes")) {
        amplitudes.clear();
        for (const auto& a : cfg.raw["amplitudes"]) amplitudes.push_back(a.get<double>());
        if (amplitudes.empty()) throw wf::ConfigError("config.amplitudes: must be nonempty");
    }

    wf::ConnectionSolution sol = wf::solve_front(problem, cfg.shooting, seeds_from(pd));
    wf::RobustnessReport report =
        wf::robustness_experiment(problem, sol, term, amplitudes, cfg.shooting);

    Json out;
    out["schema"] = 1;
    out["base_c"] = sol.c;
    out["robustness"] = wf::robustness_to_json(report);
    out["metadata"] = metadata();
    wf::write_text_atomic(cfg.out_dir / "perturb.json", dump(out));
    std::printf("perturb: survived up to %.3g, dc/damp fit %.6g vs predicted %.6g -> %s\n",
                report.survived_up_to, report.dc_damp_fit, report.dc_damp_predicted,
                (cfg.out_dir / "perturb.json").c_str());
    return 0;
}

int fail_with_reason(const std::string& reason, const wf::Error& err) {
    Json j;
    j["status"] = "failed";
    j["reason"] = reason;
    j["message"] = err.what();
    std::cout << j.dump() << "\n";
    return 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"travelling-front and standing-pulse computations for gradient systems"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string command;
    for (const char* name : {"equilibria", "front", "pulse", "scan", "check", "perturb"}) {
        CLI::App* sub = app.add_subcommand(
            name, std::string("run the ") + name + (std::string(name) == "check"
                                                        ? " diagnostics on a solution file"
                                                        : " workflow"));
        sub->add_option("config", args.config_path,
                        std::string(name) == "check" ? "solution.json to certify"
                                                     : "JSON problem configuration")
            ->required();
        sub->add_option("--out", args.out_override, "output directory override");
        sub->add_option("--tol", args.tol_override, "integrator tolerance override");
        sub->add_option("--max-iter", args.max_iter_override, "solver iteration cap override");
        sub->callback([&command, name]() { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (command == "check") return cmd_check(args);
        RunConfig cfg = parse_run_config(args);
        if (command == "equilibria") return cmd_equilibria(cfg);
        if (command == "front") return cmd_front(cfg);
        if (command == "pulse") return cmd_pulse(cfg);
        if (command == "scan") return cmd_scan(cfg);
        if (command == "perturb") return cmd_perturb(cfg);
        std::cerr << "unknown command\n";
        return 2;
    } catch (const wf::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const wf::InfeasibleError& err) {
        return fail_with_reason("infeasible", err);
    } catch (const wf::NoBracketError& err) {
        return fail_with_reason("no_bracket", err);
    } catch (const wf::NoConvergenceError& err) {
        return fail_with_reason("no homoclinic", err);
    } catch (const wf::ReturnsToEquilibriumError& err) {
        return fail_with_reason("no homoclinic", err);
    } catch (const wf::Error& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "unexpected error: " << err.what() << "\n";
        return 3;
    }
}

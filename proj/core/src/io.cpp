#include "wavefront/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "wavefront/errors.hpp"

namespace wavefront {

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string profile_csv(const PotentialModel& model, const Trajectory& trajectory) {
    const int d = model.dimension();
    std::string out = "xi";
    for (int i = 1; i <= d; ++i) out += ",u" + std::to_string(i);
    for (int i = 1; i <= d; ++i) out += ",v" + std::to_string(i);
    out += ",H\n";
    for (const auto& s : trajectory.curve.samples()) {
        out += format_double(s.xi);
        for (int i = 0; i < 2 * d; ++i) out += "," + format_double(s.y(i));
        out += "," + format_double(hamiltonian(model, unpack(s.y)));
        out += "\n";
    }
    return out;
}

namespace {

Json vec_to_json(const Vec& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json complex_list_to_json(const std::vector<std::complex<double>>& v) {
    Json arr = Json::array();
    for (const auto& z : v) arr.push_back(Json{{"re", z.real()}, {"im", z.imag()}});
    return arr;
}

}  // namespace

Json critical_point_to_json(const CriticalPoint& cp) {
    Json j;
    j["point"] = vec_to_json(cp.point);
    j["value"] = cp.value;
    j["morse_index"] = cp.morse_index;
    j["hessian_eigenvalues"] = vec_to_json(cp.hessian_eigenvalues);
    j["hessian_eigenvectors"] = mat_to_json(cp.hessian_eigenvectors);
    return j;
}

Json spectrum_to_json(const EquilibriumSpectrum& sp) {
    Json j;
    j["speed"] = sp.speed;
    j["equilibrium"] = critical_point_to_json(sp.equilibrium);
    j["lambda_minus"] = complex_list_to_json(sp.lambda_minus);
    j["lambda_plus"] = complex_list_to_json(sp.lambda_plus);
    j["dim_unstable"] = sp.unstable_basis.cols();
    j["dim_stable"] = sp.stable_basis.cols();
    j["dim_centre"] = sp.centre_basis.cols();
    j["unstable_basis"] = mat_to_json(sp.unstable_basis);
    j["stable_basis"] = mat_to_json(sp.stable_basis);
    j["centre_basis"] = mat_to_json(sp.centre_basis);
    j["beta_u"] = sp.beta_u;
    j["beta_s"] = sp.beta_s;
    j["has_complex_stable"] = sp.has_complex_stable;
    j["strong_splitting_available"] = sp.strong_splitting_available;
    if (sp.strong_splitting_available) {
        j["strong_unstable_basis"] = mat_to_json(sp.strong_unstable_basis);
        j["strong_stable_basis"] = mat_to_json(sp.strong_stable_basis);
        j["mild_basis"] = mat_to_json(sp.mild_basis);
        j["beta_su"] = sp.beta_su;
        j["beta_ss"] = sp.beta_ss;
    } else {
        j["strong_splitting_note"] = sp.strong_splitting_note;
    }
    return j;
}

const char* kind_name(ConnectionKind kind) {
    switch (kind) {
        case ConnectionKind::front: return "front";
        case ConnectionKind::symmetric_pulse: return "symmetric_pulse";
        case ConnectionKind::asymmetric_pulse: return "asymmetric_pulse";
    }
    return "unknown";
}

const char* verdict_name(TransversalityVerdict verdict) {
    switch (verdict) {
        case TransversalityVerdict::transverse: return "transverse";
        case TransversalityVerdict::degenerate: return "degenerate";
        case TransversalityVerdict::elementary: return "elementary";
        case TransversalityVerdict::non_elementary: return "non_elementary";
    }
    return "unknown";
}

Json transversality_to_json(const TransversalityReport& rep) {
    Json j;
    j["kind"] = kind_name(rep.kind);
    j["dims"] = Json{{"rows", rep.rows}, {"cols", rep.cols}};
    j["singular_values"] = vec_to_json(rep.singular_values);
    j["target_rank"] = rep.target_rank;
    j["rank"] = rep.rank;
    j["verdict"] = verdict_name(rep.verdict);
    j["margin"] = rep.margin;
    j["details"] = rep.details;
    return j;
}

Json tangency_to_json(const TangencyReport& rep) {
    Json j;
    switch (rep.verdict) {
        case TangencyVerdict::slow_tangent: j["verdict"] = "slow_tangent"; break;
        case TangencyVerdict::fast: j["verdict"] = "fast"; break;
        case TangencyVerdict::unavailable: j["verdict"] = "unavailable"; break;
    }
    j["fitted_rate"] = rep.fitted_rate;
    j["expected_rate"] = rep.expected_rate;
    j["direction_cosine"] = rep.direction_cosine;
    j["samples_used"] = rep.samples_used;
    j["details"] = rep.details;
    return j;
}

Json solution_to_json(const ConnectionSolution& solution, const PotentialModel& model,
                      const Json& potential_doc, const Json& problem_doc) {
    Json j;
    j["schema"] = 1;
    j["kind"] = kind_name(solution.kind);
    j["c"] = solution.c;
    j["flight_time"] = solution.flight_time;
    if (solution.kind == ConnectionKind::symmetric_pulse)
        j["turning_time"] = solution.turning_time;
    j["b_unstable"] = vec_to_json(solution.b_unstable);
    j["b_stable"] = vec_to_json(solution.b_stable);
    j["r_unstable"] = solution.r_unstable;
    j["r_stable"] = solution.r_stable;
    j["mismatch_norm"] = solution.mismatch_norm;
    j["symmetric"] = solution.symmetric_flag;
    j["converged_to_symmetric"] = solution.converged_to_symmetric;
    j["min_symmetry_distance"] = solution.min_symmetry_distance;
    j["departure"] = critical_point_to_json(solution.departure);
    j["arrival"] = critical_point_to_json(solution.arrival);

    const auto& samples = solution.trajectory.curve.samples();
    const int d = model.dimension();
    Json inv;
    inv["dissipation_residual"] = dissipation_residual(model, solution.trajectory);
    inv["kinetic_integral"] = kinetic_integral(solution.trajectory);
    inv["potential_lag"] = solution.departure.value - solution.arrival.value;
    inv["end_speed_left"] = samples.front().y.tail(d).norm();
    inv["end_speed_right"] = samples.back().y.tail(d).norm();
    inv["hamiltonian_at_start"] = hamiltonian(model, unpack(samples.front().y));
    j["invariants"] = inv;

    j["potential"] = potential_doc;
    j["problem"] = problem_doc;
    return j;
}

Json robustness_to_json(const RobustnessReport& report) {
    Json j;
    Json rungs = Json::array();
    for (const auto& r : report.rungs) {
        Json e;
        e["amplitude"] = r.amplitude;
        e["converged"] = r.converged;
        e["c"] = r.c;
        e["delta_c"] = r.delta_c;
        e["profile_drift"] = r.profile_drift;
        e["mismatch"] = r.mismatch;
        if (!r.failure.empty()) e["failure"] = r.failure;
        rungs.push_back(std::move(e));
    }
    j["rungs"] = std::move(rungs);
    j["survived_up_to"] = report.survived_up_to;
    j["dc_damp_fit"] = report.dc_damp_fit;
    j["dc_damp_predicted"] = report.dc_damp_predicted;
    return j;
}

}  // namespace wavefront

#pragma once

#include <filesystem>
#include <string>

#include "wavefront/config.hpp"
#include "wavefront/diagnostics.hpp"
#include "wavefront/perturbation.hpp"

namespace wavefront {

/// Writes via a temporary file in the same directory, then renames.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// CSV with header xi,u1..ud,v1..vd,H; one row per stored sample.
std::string profile_csv(const PotentialModel& model, const Trajectory& trajectory);

Json critical_point_to_json(const CriticalPoint& cp);
Json spectrum_to_json(const EquilibriumSpectrum& sp);
Json transversality_to_json(const TransversalityReport& rep);
Json tangency_to_json(const TangencyReport& rep);

/// Self-contained solution document: embeds the potential document and the
/// unknowns so `check` can rebuild everything.
Json solution_to_json(const ConnectionSolution& solution, const PotentialModel& model,
                      const Json& potential_doc, const Json& problem_doc);

Json robustness_to_json(const RobustnessReport& report);

const char* kind_name(ConnectionKind kind);
const char* verdict_name(TransversalityVerdict verdict);

}  // namespace wavefront

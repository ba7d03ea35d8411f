#pragma once

#include <json.hpp>

#include "wavefront/potential.hpp"

namespace wavefront {

using Json = nlohmann::ordered_json;

/// Throws ConfigError if obj is not an object, misses a required key, or
/// carries a key outside required + optional.
void require_keys(const Json& obj, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& where);

struct PotentialConfig {
    int dimension = 0;
    std::vector<Monomial> monomials;
    std::optional<double> quadratic_extension_radius;
};

/// { "dimension": d, "monomials": [{"exponents": [...], "coefficient": x}],
///   "quadratic_extension_radius": optional }
PotentialConfig parse_potential_config(const Json& doc);

std::shared_ptr<const PotentialModel> build_potential(const PotentialConfig& config);

/// Accepts either a plain potential document or a composition
/// { "base": <potential>, "perturbations": [<perturbation>...] }.
std::shared_ptr<const PotentialModel> build_potential_document(const Json& doc);

/// { "type": "case1"|"case2", "center": [...], "epsilon": e,
///   "direction": [...] (case1), "amplitude": a }
std::shared_ptr<const PotentialModel> build_perturbation(const Json& doc, int dimension,
                                                         double* amplitude_out = nullptr);

/// Minimal JSON-schema validation: type, properties, required, items,
/// additionalProperties, enum. Throws ConfigError with a path on failure.
void validate_against_schema(const Json& doc, const Json& schema, const std::string& where);

}  // namespace wavefront

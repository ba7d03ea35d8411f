#include "wavefront/config.hpp"

#include <algorithm>

#include "wavefront/errors.hpp"
#include "wavefront/perturbation.hpp"

namespace wavefront {

void require_keys(const Json& obj, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& key : required)
        if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    for (const auto& item : obj.items()) {
        const std::string& key = item.key();
        if (std::find(required.begin(), required.end(), key) != required.end()) continue;
        if (std::find(optional.begin(), optional.end(), key) != optional.end()) continue;
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

namespace {

double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

Vec as_vector(const Json& v, int dimension, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != dimension)
        throw ConfigError(where + ": expected an array of length " + std::to_string(dimension));
    Vec out(dimension);
    for (int i = 0; i < dimension; ++i)
        out(i) = as_number(v[static_cast<std::size_t>(i)], where);
    return out;
}

}  // namespace

PotentialConfig parse_potential_config(const Json& doc) {
    require_keys(doc, {"dimension", "monomials"}, {"quadratic_extension_radius"}, "potential");
    PotentialConfig cfg;
    if (!doc["dimension"].is_number_integer() || doc["dimension"].get<int>() < 1)
        throw ConfigError("potential.dimension: expected a positive integer");
    cfg.dimension = doc["dimension"].get<int>();

    if (!doc["monomials"].is_array() || doc["monomials"].empty())
        throw ConfigError("potential.monomials: expected a nonempty array");
    for (const auto& m : doc["monomials"]) {
        require_keys(m, {"exponents", "coefficient"}, {}, "potential.monomials[]");
        Monomial mono;
        if (!m["exponents"].is_array() ||
            static_cast<int>(m["exponents"].size()) != cfg.dimension)
            throw ConfigError("potential.monomials[].exponents: length must equal dimension");
        for (const auto& e : m["exponents"]) {
            if (!e.is_number_integer() || e.get<int>() < 0)
                throw ConfigError("potential.monomials[].exponents: nonnegative integers");
            mono.exponents.push_back(e.get<int>());
        }
        mono.coefficient = as_number(m["coefficient"], "potential.monomials[].coefficient");
        cfg.monomials.push_back(std::move(mono));
    }
    if (doc.contains("quadratic_extension_radius")) {
        const double r =
            as_number(doc["quadratic_extension_radius"], "potential.quadratic_extension_radius");
        if (!(r > 0.0))
            throw ConfigError("potential.quadratic_extension_radius: must be positive");
        cfg.quadratic_extension_radius = r;
    }
    return cfg;
}

std::shared_ptr<const PotentialModel> build_potential(const PotentialConfig& config) {
    std::shared_ptr<const PotentialModel> model =
        std::make_shared<PolynomialPotential>(config.dimension, config.monomials);
    if (config.quadratic_extension_radius)
        model = quadratic_extension(std::move(model), *config.quadratic_extension_radius);
    return model;
}

std::shared_ptr<const PotentialModel> build_perturbation(const Json& doc, int dimension,
                                                         double* amplitude_out) {
    require_keys(doc, {"type", "center", "epsilon"}, {"direction", "amplitude"}, "perturbation");
    const std::string type = doc["type"].is_string() ? doc["type"].get<std::string>() : "";
    const Vec center = as_vector(doc["center"], dimension, "perturbation.center");
    const double eps = as_number(doc["epsilon"], "perturbation.epsilon");
    if (amplitude_out)
        *amplitude_out =
            doc.contains("amplitude") ? as_number(doc["amplitude"], "perturbation.amplitude") : 1.0;

    if (type == "case1") {
        if (!doc.contains("direction"))
            throw ConfigError("perturbation: case1 needs a 'direction'");
        Vec dir = as_vector(doc["direction"], dimension, "perturbation.direction");
        const double n = dir.norm();
        if (!(n > 0.0)) throw ConfigError("perturbation.direction: must be nonzero");
        return case1_bump(center, eps, dir / n);
    }
    if (type == "case2") {
        if (doc.contains("direction"))
            throw ConfigError("perturbation: case2 takes no 'direction'");
        return case2_bump(center, eps);
    }
    throw ConfigError("perturbation.type: expected 'case1' or 'case2'");
}

std::shared_ptr<const PotentialModel> build_potential_document(const Json& doc) {
    if (doc.is_object() && doc.contains("base")) {
        require_keys(doc, {"base", "perturbations"}, {}, "potential composition");
        PotentialConfig base_cfg = parse_potential_config(doc["base"]);
        std::shared_ptr<const PotentialModel> base = build_potential(base_cfg);
        if (!doc["perturbations"].is_array())
            throw ConfigError("potential composition: 'perturbations' must be an array");
        std::vector<PerturbedPotential::Term> terms;
        for (const auto& p : doc["perturbations"]) {
            double amp = 1.0;
            auto term = build_perturbation(p, base_cfg.dimension, &amp);
            terms.push_back({std::move(term), amp});
        }
        if (terms.empty()) return base;
        return std::make_shared<PerturbedPotential>(std::move(base), std::move(terms));
    }
    return build_potential(parse_potential_config(doc));
}

namespace {

void validate_node(const Json& doc, const Json& schema, const std::string& path) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        bool ok = false;
        if (type == "object") ok = doc.is_object();
        else if (type == "array") ok = doc.is_array();
        else if (type == "string") ok = doc.is_string();
        else if (type == "number") ok = doc.is_number();
        else if (type == "integer") ok = doc.is_number_integer();
        else if (type == "boolean") ok = doc.is_boolean();
        else if (type == "null") ok = doc.is_null();
        if (!ok) throw ConfigError(path + ": expected type '" + type + "'");
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema["enum"])
            if (v == doc) ok = true;
        if (!ok) throw ConfigError(path + ": value not in enum");
    }
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!doc.contains(key.get<std::string>()))
                    throw ConfigError(path + ": missing required '" + key.get<std::string>() +
                                      "'");
        const bool closed =
            schema.contains("additionalProperties") && schema["additionalProperties"] == false;
        for (const auto& item : doc.items()) {
            const bool described =
                schema.contains("properties") && schema["properties"].contains(item.key());
            if (described)
                validate_node(item.value(), schema["properties"][item.key()],
                              path + "." + item.key());
            else if (closed)
                throw ConfigError(path + ": unexpected property '" + item.key() + "'");
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < doc.size(); ++i)
            validate_node(doc[i], schema["items"], path + "[" + std::to_string(i) + "]");
    }
}

}  // namespace

void validate_against_schema(const Json& doc, const Json& schema, const std::string& where) {
    validate_node(doc, schema, where);
}

}  // namespace wavefront

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minsurf/error.hpp"
#include "minsurf/expr.hpp"

namespace minsurf {

/// Axis-aligned box in ambient coordinates.
struct Box {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t dim() const noexcept { return min.size(); }

    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < min.size(); ++i)
            if (x[i] < min[i] || x[i] > max[i]) return false;
        return true;
    }

    /// Distance from x (inside) to the nearest face.
    double distance_to_boundary(std::span<const double> x) const {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < min.size(); ++i) d = std::min({d, x[i] - min[i], max[i] - x[i]});
        return d;
    }

    double extent(std::size_t i) const { return max[i] - min[i]; }

    double diagonal() const {
        double s = 0.0;
        for (std::size_t i = 0; i < min.size(); ++i) s += extent(i) * extent(i);
        return std::sqrt(s);
    }

    double min_extent() const {
        double e = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < min.size(); ++i) e = std::min(e, extent(i));
        return e;
    }
};

/// An m-map E^n -> R^m given by m component expressions over a domain box.
///
/// load_map() enforces 1 <= m < n. The differential-geometry routines only
/// need components.size() <= n, so square maps can be assembled by hand for
/// the determinant-form case.
struct MapDefinition {
    std::string name;
    int n = 0;
    int m = 0;
    std::vector<ExprPtr> components;
    std::vector<std::string> sources;
    Box domain;

    std::vector<double> evaluate(std::span<const double> x) const {
        std::vector<double> v(components.size());
        for (std::size_t i = 0; i < components.size(); ++i) v[i] = minsurf::evaluate(*components[i], x);
        return v;
    }

    std::vector<double> center() const {
        std::vector<double> c(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (domain.min[i] + domain.max[i]);
        return c;
    }
};

/// Checks the standing invariants; throws DimensionError / DomainError.
inline void validate(const MapDefinition& map) {
    if (map.n < 1) throw DimensionError("n must be >= 1");
    if (map.m < 1 || map.m >= map.n)
        throw DimensionError("map dimension must satisfy 1 <= m < n (got n=" + std::to_string(map.n) +
                             ", m=" + std::to_string(map.m) + ")");
    if (map.components.size() != static_cast<std::size_t>(map.m))
        throw DimensionError("expected " + std::to_string(map.m) + " components, got " +
                             std::to_string(map.components.size()));
    if (map.domain.min.size() != static_cast<std::size_t>(map.n) ||
        map.domain.max.size() != static_cast<std::size_t>(map.n))
        throw DomainError("domain bounds must have n entries");
    for (int i = 0; i < map.n; ++i) {
        const double lo = map.domain.min[static_cast<std::size_t>(i)];
        const double hi = map.domain.max[static_cast<std::size_t>(i)];
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw DomainError("degenerate domain on axis " + std::to_string(i + 1));
    }
}

/// Builds and validates a map from already-parsed component sources.
inline MapDefinition make_map(std::string name, int n, std::vector<std::string> sources, Box domain) {
    MapDefinition map;
    map.name = std::move(name);
    map.n = n;
    map.m = static_cast<int>(sources.size());
    for (const auto& s : sources) map.components.push_back(parse(s, n));
    map.sources = std::move(sources);
    map.domain = std::move(domain);
    validate(map);
    return map;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError(std::string("missing key '") + key + "'");
    return *it;
}

inline std::vector<double> number_array(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw SchemaError(std::string(what) + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number()) throw SchemaError(std::string(what) + " must be an array of numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

} // namespace detail

/// Parses a map document (see README for the schema). Unknown keys are ignored
/// so run configs can carry extra fields.
inline MapDefinition map_from_json(const nlohmann::json& doc) {
    using detail::require;
    if (!doc.is_object()) throw SchemaError("map document must be a JSON object");

    const auto& name = require(doc, "name");
    const auto& n = require(doc, "n");
    const auto& m = require(doc, "m");
    const auto& comps = require(doc, "components");
    const auto& domain = require(doc, "domain");
    if (!name.is_string()) throw SchemaError("'name' must be a string");
    if (!n.is_number_integer()) throw SchemaError("'n' must be an integer");
    if (!m.is_number_integer()) throw SchemaError("'m' must be an integer");
    if (!comps.is_array()) throw SchemaError("'components' must be an array of strings");
    if (!domain.is_object()) throw SchemaError("'domain' must be an object");

    MapDefinition map;
    map.name = name.get<std::string>();
    map.n = n.get<int>();
    map.m = m.get<int>();
    map.domain.min = detail::number_array(require(domain, "min"), "domain.min");
    map.domain.max = detail::number_array(require(domain, "max"), "domain.max");

    if (map.n < 1) throw DimensionError("n must be >= 1");
    if (map.m < 1 || map.m >= map.n)
        throw DimensionError("map dimension must satisfy 1 <= m < n (got n=" + std::to_string(map.n) +
                             ", m=" + std::to_string(map.m) + ")");
    if (map.domain.min.size() != static_cast<std::size_t>(map.n) ||
        map.domain.max.size() != static_cast<std::size_t>(map.n))
        throw SchemaError("domain.min and domain.max must have n entries");

    for (const auto& c : comps) {
        if (!c.is_string()) throw SchemaError("'components' must be an array of strings");
        map.sources.push_back(c.get<std::string>());
        map.components.push_back(parse(map.sources.back(), map.n));
    }
    validate(map);
    return map;
}

inline MapDefinition load_map(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return map_from_json(doc);
}

inline nlohmann::ordered_json to_json(const MapDefinition& map) {
    nlohmann::ordered_json j;
    j["name"] = map.name;
    j["n"] = map.n;
    j["m"] = map.m;
    auto comps = nlohmann::ordered_json::array();
    for (const auto& c : map.components) comps.push_back(to_string(*c));
    j["components"] = comps;
    j["domain"]["min"] = map.domain.min;
    j["domain"]["max"] = map.domain.max;
    return j;
}

} // namespace minsurf

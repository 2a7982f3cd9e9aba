#pragma once

// Run configuration documents: a map document plus run parameters.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minsurf/diffgeo.hpp"
#include "minsurf/error.hpp"
#include "minsurf/mapdef.hpp"

#ifndef MINSURF_VERSION
#define MINSURF_VERSION "0.1.0"
#endif

namespace minsurf {

inline constexpr std::string_view version = MINSURF_VERSION;

/// 64-bit FNV-1a, as 16 lowercase hex digits.
inline std::string fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct VariationSettings {
    int fields = 16;
    std::uint64_t seed = 0;
    double tol = 1e-3;
};

inline std::vector<MinimalityReading> default_readings() {
    return {MinimalityReading::full_trace(), MinimalityReading::sectional_all(1), MinimalityReading::sectional_all(2)};
}

struct RunConfig {
    MapDefinition map;
    std::vector<int> grid;
    int levels = 5;
    std::optional<std::vector<double>> level;
    std::vector<MinimalityReading> readings = default_readings();
    VariationSettings variation;
    std::string output_dir = "out";

    /// Canonical form with flag overrides applied; hashed into every report.
    /// The output directory is left out so relocated runs hash identically.
    nlohmann::ordered_json to_json() const {
        auto j = minsurf::to_json(map);
        j["grid"] = grid;
        j["levels"] = levels;
        if (level) j["level"] = *level;
        auto tags = nlohmann::ordered_json::array();
        for (const auto& r : readings) tags.push_back(r.tag());
        j["readings"] = tags;
        j["variation"] = {{"fields", variation.fields}, {"seed", variation.seed}, {"tol", variation.tol}};
        return j;
    }

    std::string hash() const { return fnv1a64(to_json().dump()); }
};

inline void validate_grid(const std::vector<int>& grid, int n) {
    if (grid.size() != static_cast<std::size_t>(n)) throw SchemaError("'grid' must have n entries");
    for (int g : grid)
        if (g < 8) throw SchemaError("'grid' entries must be >= 8");
}

/// Optional per-axis grid key of a map or config document.
inline std::optional<std::vector<int>> grid_from_json(const nlohmann::json& doc) {
    auto it = doc.find("grid");
    if (it == doc.end()) return std::nullopt;
    if (!it->is_array()) throw SchemaError("'grid' must be an array of integers");
    std::vector<int> g;
    for (const auto& e : *it) {
        if (!e.is_number_integer()) throw SchemaError("'grid' must be an array of integers");
        g.push_back(e.get<int>());
    }
    return g;
}

inline RunConfig config_from_json(const nlohmann::json& doc) {
    RunConfig cfg;
    cfg.map = map_from_json(doc);
    cfg.grid = grid_from_json(doc).value_or(std::vector<int>(static_cast<std::size_t>(cfg.map.n), 32));
    validate_grid(cfg.grid, cfg.map.n);

    if (auto it = doc.find("levels"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1) throw SchemaError("'levels' must be a positive integer");
        cfg.levels = it->get<int>();
    }
    if (auto it = doc.find("level"); it != doc.end()) cfg.level = detail::number_array(*it, "level");
    if (auto it = doc.find("readings"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("'readings' must be an array of tags");
        cfg.readings.clear();
        for (const auto& t : *it) {
            if (!t.is_string()) throw SchemaError("'readings' must be an array of tags");
            cfg.readings.push_back(parse_reading(t.get<std::string>()));
        }
    }
    if (auto it = doc.find("variation"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("'variation' must be an object");
        if (auto f = it->find("fields"); f != it->end()) {
            if (!f->is_number_integer() || f->get<int>() < 1) throw SchemaError("'variation.fields' must be >= 1");
            cfg.variation.fields = f->get<int>();
        }
        if (auto s = it->find("seed"); s != it->end()) {
            if (!s->is_number_integer() || s->get<long long>() < 0) throw SchemaError("'variation.seed' must be >= 0");
            cfg.variation.seed = s->get<std::uint64_t>();
        }
        if (auto t = it->find("tol"); t != it->end()) {
            if (!t->is_number() || !(t->get<double>() > 0.0)) throw SchemaError("'variation.tol' must be positive");
            cfg.variation.tol = t->get<double>();
        }
    }
    if (auto it = doc.find("output_dir"); it != doc.end()) {
        if (!it->is_string()) throw SchemaError("'output_dir' must be a string");
        cfg.output_dir = it->get<std::string>();
    }
    return cfg;
}

inline RunConfig load_config(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

} // namespace minsurf

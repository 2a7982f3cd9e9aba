#pragma once

// Desk-scale checks of the three lemma assertions and the agreement matrix
// between the differential minimality readings and the variational oracle.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "minsurf/config.hpp"
#include "minsurf/diffgeo.hpp"
#include "minsurf/forms.hpp"
#include "minsurf/levelset.hpp"
#include "minsurf/variational.hpp"

namespace minsurf {

struct CorpusEntry {
    std::string file;
    MapDefinition map;
    std::optional<std::vector<int>> grid;
};

/// Every *.json file in `dir`, in file-name order. Errors name the file.
inline std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error("corpus directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("corpus directory has no .json maps: " + dir.string());

    std::vector<CorpusEntry> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            const auto doc = nlohmann::json::parse(ss.str());
            CorpusEntry entry{f.filename().string(), map_from_json(doc), grid_from_json(doc)};
            if (entry.grid) validate_grid(*entry.grid, entry.map.n);
            out.push_back(std::move(entry));
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(f.filename().string() + ": invalid JSON: " + e.what());
        } catch (const Error& e) {
            throw SchemaError(f.filename().string() + ": " + e.what());
        }
    }
    return out;
}

struct LemmaTolerances {
    double residual = 1e-6;        // per-reading "minimal" verdict
    double stationarity = 1e-3;    // oracle, relative to 1 + measure
    double closedness = 1e-4;
    double reconstruction = 1e-5;
    double harmonicity = 1e-3;
    double mean_curvature = 1e-8;  // reported for zero levels
    double witness = 0.01;         // relative, loop discrepancy vs 2 pi
    double step = 1e-3;            // finite-difference step h
};

struct LemmaOptions {
    std::vector<MinimalityReading> readings = default_readings();
    std::uint64_t seed = 0;
    int residual_samples = 200;
    int fields = 16;
    int levels = 3;
    std::optional<std::vector<int>> grid;  // overrides every corpus grid
    LemmaTolerances tol;
    std::string config_hash;
};

struct LeafVerdict {
    std::vector<double> level;
    double measure = 0.0;
    bool evaluated = false;
    bool stationary = false;
    double max_first_variation = 0.0;
    int worst_field = -1;
};

struct ZeroLevel {
    double measure = 0.0;
    bool evaluated = false;
    bool stationary = false;
    double max_first_variation = 0.0;
    std::optional<double> max_mean_curvature;  // m = 1 only
};

struct ReadingVerdict {
    std::string tag;
    bool applicable = true;
    bool minimal = false;
    double max_residual = 0.0;
    int samples = 0;
};

enum class OracleVerdict { Stationary, NonStationary, Inconclusive };

inline const char* to_string(OracleVerdict v) {
    switch (v) {
    case OracleVerdict::Stationary: return "stationary";
    case OracleVerdict::NonStationary: return "non-stationary";
    default: return "inconclusive";
    }
}

struct MapAgreement {
    std::string name;
    std::string file;
    int n = 0;
    int m = 0;
    std::vector<int> grid;
    RegularityReport regularity;
    OracleVerdict oracle = OracleVerdict::Inconclusive;
    std::vector<LeafVerdict> leaves;
    std::optional<ZeroLevel> zero_level;
    std::vector<std::string> warnings;
    std::vector<ReadingVerdict> readings;
    std::optional<double> closedness;
    std::optional<double> reconstruction;
    std::optional<double> harmonicity;
    bool invariants_pass = true;
    std::string error;
};

struct Confusion {
    int both_minimal = 0;
    int both_not_minimal = 0;
    int reading_only = 0;  // reading says minimal, oracle says not
    int oracle_only = 0;   // oracle says stationary, reading says not
    int skipped = 0;       // reading not applicable or oracle inconclusive
};

struct NonExactWitness {
    double closedness = 0.0;
    double path_discrepancy = 0.0;
    bool exact = true;
    bool pass = false;
};

struct AgreementReport {
    LemmaOptions options;
    std::vector<MapAgreement> maps;
    std::vector<std::pair<std::string, Confusion>> confusion;  // reading order
    NonExactWitness witness;
    bool invariants_pass = true;
};

namespace detail {

inline std::vector<int> default_grid(int n) {
    return std::vector<int>(static_cast<std::size_t>(n), n == 2 ? 128 : 32);
}

inline void run_oracle(const MapDefinition& map, const std::vector<int>& grid, const LemmaOptions& opt,
                       MapAgreement& out) {
    const SweepOptions sweep{opt.fields, opt.seed, opt.tol.stationarity};
    const auto fol = sample_foliation(map, opt.levels, grid);
    out.warnings = fol.warnings;

    // three leaves spread across the foliation (all of them for m = 1, k = 3)
    const std::size_t L = fol.leaves.size();
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto idx = static_cast<std::size_t>(std::lround(static_cast<double>(i) * static_cast<double>(L - 1) / 2.0));
        if (picks.empty() || picks.back() != idx) picks.push_back(idx);
    }
    bool any = false, all = true;
    for (auto idx : picks) {
        const auto& leaf = fol.leaves[idx];
        LeafVerdict v;
        v.level = leaf.level;
        v.measure = leaf.measure();
        if (!leaf.empty) {
            const auto r = stationarity_sweep(leaf.geometry, map.domain, sweep);
            if (r.worst_field >= 0) {
                v.evaluated = true;
                v.stationary = r.stationary;
                v.max_first_variation = r.max_first_variation;
                v.worst_field = r.worst_field;
                any = true;
                all = all && r.stationary;
            }
        }
        out.leaves.push_back(std::move(v));
    }
    out.oracle = !any ? OracleVerdict::Inconclusive : (all ? OracleVerdict::Stationary : OracleVerdict::NonStationary);

    // the zero level, when every component attains 0 on the grid
    const auto grids = sample_grid(map, grid);
    for (const auto& g : grids) {
        const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
        if (*lo > 0.0 || *hi < 0.0) return;
    }
    const std::vector<double> zero(map.components.size(), 0.0);
    const auto ls = extract_level_set(map, grids, zero);
    if (ls.empty) return;
    ZeroLevel z;
    z.measure = ls.measure();
    const auto r = stationarity_sweep(ls.geometry, map.domain, sweep);
    if (r.worst_field >= 0) {
        z.evaluated = true;
        z.stationary = r.stationary;
        z.max_first_variation = r.max_first_variation;
    }
    if (map.components.size() == 1) {
        double worst = 0.0;
        for (const auto& v : vertices_of(ls.geometry)) {
            const std::span<const double> p(v.data(), static_cast<std::size_t>(map.n));
            worst = std::max(worst, std::abs(implicit_mean_curvature(map, p)));
        }
        z.max_mean_curvature = worst;
    }
    out.zero_level = z;
}

inline void run_readings(const MapDefinition& map, const LemmaOptions& opt, MapAgreement& out) {
    const auto pts = Sampler{Sampler::Kind::Random, opt.residual_samples, opt.seed}.points(map.domain);
    for (const auto& reading : opt.readings) {
        ReadingVerdict v;
        v.tag = reading.tag();
        v.applicable = reading.applies_to(map.n);
        if (v.applicable) {
            for (const auto& p : pts) {
                for (double r : minimality_residual(map, p, reading)) v.max_residual = std::max(v.max_residual, std::abs(r));
                ++v.samples;
            }
            v.minimal = v.max_residual <= opt.tol.residual;
        }
        out.readings.push_back(std::move(v));
    }
}

inline void run_invariants(const MapDefinition& map, const LemmaOptions& opt, MapAgreement& out) {
    const double h = opt.tol.step;
    const auto form = sample_exterior_differential(map, map.n == 2 ? 17 : 9, 2.0 * h);
    out.closedness = check_closedness(form, h);
    if (out.regularity.regular && *out.closedness > opt.tol.closedness) out.invariants_pass = false;
    if (map.components.size() != 1) return;

    const auto pot = reconstruct_potential(form, map.domain.min);
    const double phi0 = evaluate(*map.components[0], map.domain.min);
    double worst = 0.0;
    for (const auto& p : pot.probes)
        worst = std::max(worst, std::abs(pot.potential(p) - (evaluate(*map.components[0], p) - phi0)));
    out.reconstruction = worst;
    if (worst > opt.tol.reconstruction || !pot.exact) out.invariants_pass = false;

    const auto full = std::find_if(out.readings.begin(), out.readings.end(),
                                   [](const ReadingVerdict& v) { return v.tag == "FULL_TRACE"; });
    if (full != out.readings.end() && full->minimal) {
        out.harmonicity = check_linear_harmonicity(form, h).hodge_residual;
        if (*out.harmonicity > opt.tol.harmonicity) out.invariants_pass = false;
    }
}

} // namespace detail

/// The closed 1-form (-x2, x1)/(x1^2 + x2^2) on [-1,1]^2: closed on the annulus
/// 1/2 <= r <= 1, yet path integration from the corner depends on the path.
inline NonExactWitness angular_form_witness(const LemmaTolerances& tol = {}) {
    const Box square{{-1.0, -1.0}, {1.0, 1.0}};
    auto field = [](std::span<const double> x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return std::vector<double>{-x[1] / r2, x[0] / r2};
    };
    std::vector<std::vector<double>> annulus;
    for (auto& p : grid_points(square, 16)) {
        const double r = std::hypot(p[0], p[1]);
        if (r >= 0.5 && r <= 1.0) annulus.push_back(p);
    }
    NonExactWitness w;
    w.closedness = check_closedness(sample_form(2, 1, square, field, annulus, "angular"), tol.step);

    PotentialOptions popt;
    popt.probes_per_axis = 8;
    popt.intervals = 512;
    const std::vector<double> base{-1.0, -1.0};
    const auto pot = reconstruct_potential(sample_form(2, 1, square, field, {}, "angular"), base, popt);
    w.path_discrepancy = pot.path_discrepancy;
    w.exact = pot.exact;
    const double two_pi = 2.0 * std::numbers::pi;
    w.pass = w.closedness <= tol.closedness && !w.exact && std::abs(w.path_discrepancy - two_pi) <= tol.witness * two_pi;
    return w;
}

/// Oracle verdicts, reading verdicts and lemma invariants for every map.
/// Per-map failures are recorded in MapAgreement::error and fail the invariants.
inline AgreementReport minimality_agreement(const std::vector<CorpusEntry>& corpus, const LemmaOptions& opt = {}) {
    AgreementReport rep;
    rep.options = opt;
    for (const auto& entry : corpus) {
        const auto& map = entry.map;
        MapAgreement a;
        a.name = map.name;
        a.file = entry.file;
        a.n = map.n;
        a.m = static_cast<int>(map.components.size());
        a.grid = opt.grid ? *opt.grid : entry.grid.value_or(detail::default_grid(map.n));
        try {
            if (a.grid.size() != static_cast<std::size_t>(map.n)) throw DimensionError("grid override has wrong length");
            a.regularity = regularity_check(map, Sampler{});
            detail::run_readings(map, opt, a);
            detail::run_oracle(map, a.grid, opt, a);
            detail::run_invariants(map, opt, a);
        } catch (const std::exception& e) {
            a.error = e.what();
            a.invariants_pass = false;
        }
        rep.invariants_pass = rep.invariants_pass && a.invariants_pass;
        rep.maps.push_back(std::move(a));
    }

    for (const auto& reading : opt.readings) {
        Confusion c;
        const auto tag = reading.tag();
        for (const auto& a : rep.maps) {
            const auto it = std::find_if(a.readings.begin(), a.readings.end(),
                                         [&](const ReadingVerdict& v) { return v.tag == tag; });
            if (it == a.readings.end() || !it->applicable || a.oracle == OracleVerdict::Inconclusive) {
                ++c.skipped;
                continue;
            }
            const bool stationary = a.oracle == OracleVerdict::Stationary;
            if (it->minimal && stationary) ++c.both_minimal;
            else if (!it->minimal && !stationary) ++c.both_not_minimal;
            else if (it->minimal) ++c.reading_only;
            else ++c.oracle_only;
        }
        rep.confusion.emplace_back(tag, c);
    }

    rep.witness = angular_form_witness(opt.tol);
    rep.invariants_pass = rep.invariants_pass && rep.witness.pass;
    return rep;
}

// ---- serialization -----------------------------------------------------------

inline nlohmann::ordered_json tolerances_json(const LemmaTolerances& t) {
    nlohmann::ordered_json j;
    j["residual"] = t.residual;
    j["stationarity"] = t.stationarity;
    j["closedness"] = t.closedness;
    j["reconstruction"] = t.reconstruction;
    j["harmonicity"] = t.harmonicity;
    j["mean_curvature"] = t.mean_curvature;
    j["witness"] = t.witness;
    j["step"] = t.step;
    return j;
}

namespace detail {

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace detail

inline nlohmann::ordered_json to_json(const MapAgreement& a, const LemmaOptions& opt) {
    using J = nlohmann::ordered_json;
    J j;
    j["map"] = a.name;
    j["file"] = a.file;
    j["n"] = a.n;
    j["m"] = a.m;
    j["grid"] = a.grid;
    j["seed"] = opt.seed;
    j["tolerances"] = tolerances_json(opt.tol);
    j["regularity"] = {{"regular", a.regularity.regular},
                       {"min_singular_value", a.regularity.min_singular_value},
                       {"tolerance", a.regularity.tolerance},
                       {"samples", a.regularity.samples},
                       {"failures", a.regularity.failures}};

    J oracle;
    oracle["verdict"] = to_string(a.oracle);
    oracle["fields"] = opt.fields;
    auto leaves = J::array();
    for (const auto& l : a.leaves)
        leaves.push_back({{"level", l.level},
                          {"measure", l.measure},
                          {"evaluated", l.evaluated},
                          {"stationary", l.stationary},
                          {"max_first_variation", l.max_first_variation},
                          {"worst_field", l.worst_field}});
    oracle["leaves"] = leaves;
    if (a.zero_level) {
        const auto& z = *a.zero_level;
        oracle["zero_level"] = {{"measure", z.measure},
                                {"evaluated", z.evaluated},
                                {"stationary", z.stationary},
                                {"max_first_variation", z.max_first_variation},
                                {"max_mean_curvature", detail::optional_number(z.max_mean_curvature)}};
    } else {
        oracle["zero_level"] = nullptr;
    }
    j["oracle"] = oracle;

    J readings = J::object();
    for (const auto& r : a.readings) {
        J v;
        v["verdict"] = !r.applicable ? "not applicable" : (r.minimal ? "minimal" : "not minimal");
        v["max_residual"] = r.max_residual;
        v["samples"] = r.samples;
        if (r.applicable && a.oracle != OracleVerdict::Inconclusive)
            v["agrees_with_oracle"] = r.minimal == (a.oracle == OracleVerdict::Stationary);
        else
            v["agrees_with_oracle"] = nullptr;
        readings[r.tag] = v;
    }
    j["readings"] = readings;
    j["invariants"] = {{"closedness", detail::optional_number(a.closedness)},
                       {"reconstruction", detail::optional_number(a.reconstruction)},
                       {"harmonicity", detail::optional_number(a.harmonicity)},
                       {"pass", a.invariants_pass}};
    j["warnings"] = a.warnings;
    j["error"] = a.error.empty() ? J(nullptr) : J(a.error);
    return j;
}

inline nlohmann::ordered_json to_json(const AgreementReport& rep) {
    using J = nlohmann::ordered_json;
    J j;
    j["artifact"] = "minsurf";
    j["version"] = std::string(version);
    j["config_hash"] = rep.options.config_hash;
    j["seed"] = rep.options.seed;
    j["tolerances"] = tolerances_json(rep.options.tol);
    auto tags = J::array();
    for (const auto& r : rep.options.readings) tags.push_back(r.tag());
    j["readings"] = tags;
    auto maps = J::array();
    for (const auto& a : rep.maps) maps.push_back(to_json(a, rep.options));
    j["maps"] = maps;

    J confusion = J::object();
    auto disagreements = J::array();
    for (const auto& [tag, c] : rep.confusion)
        confusion[tag] = {{"both_minimal", c.both_minimal},
                          {"both_not_minimal", c.both_not_minimal},
                          {"reading_only", c.reading_only},
                          {"oracle_only", c.oracle_only},
                          {"skipped", c.skipped}};
    for (const auto& a : rep.maps)
        for (const auto& r : a.readings)
            if (r.applicable && a.oracle != OracleVerdict::Inconclusive &&
                r.minimal != (a.oracle == OracleVerdict::Stationary))
                disagreements.push_back({{"map", a.name},
                                         {"reading", r.tag},
                                         {"oracle", to_string(a.oracle)},
                                         {"reading_verdict", r.minimal ? "minimal" : "not minimal"}});
    j["confusion"] = confusion;
    j["disagreements"] = disagreements;
    j["non_exact_witness"] = {{"form", "(-x2, x1)/(x1^2 + x2^2)"},
                              {"closedness", rep.witness.closedness},
                              {"path_discrepancy", rep.witness.path_discrepancy},
                              {"exact", rep.witness.exact},
                              {"pass", rep.witness.pass}};
    j["invariants_pass"] = rep.invariants_pass;
    return j;
}

} // namespace minsurf

// minsurf: regularity checks, level-set extraction, foliations, variation
// sweeps and the lemma harness from the command line.
//
// Exit codes: 0 success / property holds, 1 property fails, 2 error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minsurf/config.hpp"
#include "minsurf/diffgeo.hpp"
#include "minsurf/lemma.hpp"
#include "minsurf/levelset.hpp"
#include "minsurf/variational.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace minsurf;

namespace {

struct Flags {
    std::string config;
    std::vector<double> level;
    std::vector<int> grid;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string corpus;
    std::optional<int> fields;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

RunConfig resolve(const Flags& f) {
    if (f.config.empty()) throw Error("--config is required");
    auto cfg = load_config(read_text(f.config));
    if (!f.grid.empty()) {
        validate_grid(f.grid, cfg.map.n);
        cfg.grid = f.grid;
    }
    if (!f.level.empty()) cfg.level = f.level;
    if (f.seed) cfg.variation.seed = *f.seed;
    if (f.fields) cfg.variation.fields = *f.fields;
    if (!f.out.empty()) cfg.output_dir = f.out;
    return cfg;
}

json header(const char* command, const RunConfig& cfg) {
    json j;
    j["artifact"] = "minsurf";
    j["version"] = std::string(version);
    j["command"] = command;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.variation.seed;
    j["map"] = cfg.map.name;
    j["grid"] = cfg.grid;
    return j;
}

std::string obj_comment(const RunConfig& cfg, const std::vector<double>& level) {
    std::string s = "minsurf " + std::string(version) + " map=" + cfg.map.name + " level=";
    for (std::size_t k = 0; k < level.size(); ++k) s += (k ? "," : "") + format_double(level[k]);
    return s + " seed=" + std::to_string(cfg.variation.seed) + " config=" + cfg.hash();
}

std::vector<double> require_level(const RunConfig& cfg) {
    if (!cfg.level) throw Error("no level given (use --level or the config 'level' key)");
    if (cfg.level->size() != cfg.map.components.size())
        throw DimensionError("level needs " + std::to_string(cfg.map.components.size()) + " value(s)");
    return *cfg.level;
}

json geometry_summary(const LevelSet& ls) {
    json j;
    j["level"] = ls.level;
    j["empty"] = ls.empty;
    if (const auto* mesh = std::get_if<Mesh>(&ls.geometry)) {
        j["kind"] = "mesh";
        j["vertices"] = mesh->vertices.size();
        j["triangles"] = mesh->triangles.size();
        j["area"] = mesh_area(*mesh);
    } else {
        const auto& line = std::get<Polyline>(ls.geometry);
        j["kind"] = "polyline";
        j["vertices"] = line.vertices.size();
        j["segments"] = line.segments.size();
        j["closed"] = line.closed;
        j["length"] = polyline_length(line);
    }
    j["measure"] = ls.measure();
    return j;
}

int cmd_check(const Flags& f) {
    const auto cfg = resolve(f);
    const auto reg = regularity_check(cfg.map, Sampler{});
    auto j = header("check", cfg);
    j["tolerances"] = {{"rank", "max(n,m) * sigma_max * 2^-40"}, {"residual", 1e-6}};

    json r;
    r["regular"] = reg.regular;
    r["min_singular_value"] = reg.min_singular_value;
    r["max_singular_value"] = reg.max_singular_value;
    r["tolerance"] = reg.tolerance;
    r["samples"] = reg.samples;
    r["failures"] = reg.failures;
    auto witnesses = json::array();
    for (const auto& w : reg.witnesses) {
        json wj = {{"point", w.point}, {"singular_value", w.singular_value}};
        wj["error"] = w.error.empty() ? json(nullptr) : json(w.error);
        witnesses.push_back(wj);
    }
    r["witnesses"] = witnesses;
    j["regularity"] = r;

    const auto pts = Sampler{Sampler::Kind::Random, 200, cfg.variation.seed}.points(cfg.map.domain);
    json minimality = json::object();
    for (const auto& reading : cfg.readings) {
        json v;
        if (!reading.applies_to(cfg.map.n)) {
            v["verdict"] = "not applicable";
            minimality[reading.tag()] = v;
            continue;
        }
        double worst = 0.0;
        int failed = 0;
        for (const auto& p : pts) {
            try {
                for (double x : minimality_residual(cfg.map, p, reading)) worst = std::max(worst, std::abs(x));
            } catch (const EvaluationError&) {
                ++failed;
            }
        }
        v["verdict"] = worst <= 1e-6 ? "minimal" : "not minimal";
        v["max_residual"] = worst;
        v["samples"] = pts.size();
        v["evaluation_failures"] = failed;
        minimality[reading.tag()] = v;
    }
    j["minimality"] = minimality;
    write_json(fs::path(cfg.output_dir) / "report.json", j);
    std::cout << cfg.map.name << ": " << (reg.regular ? "regular" : "not regular") << "\n";
    return reg.regular ? 0 : 1;
}

int cmd_extract(const Flags& f) {
    const auto cfg = resolve(f);
    const auto c = require_level(cfg);
    const auto ls = extract_level_set(cfg.map, c, cfg.grid);
    const std::string file = cfg.map.name + ".obj";
    write_text(fs::path(cfg.output_dir) / file, to_obj(ls.geometry, obj_comment(cfg, c)));
    auto j = header("extract", cfg);
    auto summary = geometry_summary(ls);
    summary["file"] = file;
    j["leaf"] = summary;
    write_json(fs::path(cfg.output_dir) / "report.json", j);
    std::cout << file << ": measure " << format_double(ls.measure()) << "\n";
    return 0;
}

int cmd_foliate(const Flags& f) {
    const auto cfg = resolve(f);
    const auto fol = sample_foliation(cfg.map, cfg.levels, cfg.grid);
    auto j = header("foliate", cfg);
    j["levels_per_component"] = cfg.levels;
    auto leaves = json::array();
    for (std::size_t k = 0; k < fol.leaves.size(); ++k) {
        const std::string file = "leaf_" + std::to_string(k) + ".obj";
        write_text(fs::path(cfg.output_dir) / file, to_obj(fol.leaves[k].geometry, obj_comment(cfg, fol.levels[k])));
        auto s = geometry_summary(fol.leaves[k]);
        s["file"] = file;
        leaves.push_back(s);
    }
    j["leaves"] = leaves;
    j["warnings"] = fol.warnings;
    for (const auto& w : fol.warnings) std::cerr << "warning: " << w << "\n";
    write_json(fs::path(cfg.output_dir) / "report.json", j);
    std::cout << fol.leaves.size() << " leaves written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_variation(const Flags& f) {
    const auto cfg = resolve(f);
    const auto c = require_level(cfg);
    const auto ls = extract_level_set(cfg.map, c, cfg.grid);
    if (ls.empty) throw DomainError("level set is empty on the domain box");
    const SweepOptions opt{cfg.variation.fields, cfg.variation.seed, cfg.variation.tol};
    const auto r = stationarity_sweep(ls.geometry, cfg.map.domain, opt);

    auto j = header("variation", cfg);
    j["tolerances"] = {{"stationarity", cfg.variation.tol}, {"epsilons", default_epsilons()}};
    j["level"] = c;
    j["measure"] = r.measure;
    j["stationary"] = r.stationary;
    j["worst_field"] = r.worst_field;
    j["max_first_variation"] = r.max_first_variation;
    auto fields = json::array();
    for (std::size_t k = 0; k < r.fields.size(); ++k) {
        const auto& fld = r.fields[k];
        const auto& res = r.results[k];
        json fj;
        fj["center"] = fld.center;
        fj["radius"] = fld.radius;
        fj["amplitude"] = fld.amplitude;
        if (fld.direction == VariationField::Direction::Normal)
            fj["direction"] = "normal";
        else
            fj["direction"] = std::vector<double>{fld.vector.x(), fld.vector.y(), fld.vector.z()};
        fj["first_variation"] = res.first_variation;
        fj["second_variation"] = res.second_variation;
        fj["stationary"] = res.stationary;
        fields.push_back(fj);
    }
    j["fields"] = fields;
    write_json(fs::path(cfg.output_dir) / "report.json", j);
    std::cout << cfg.map.name << ": " << (r.stationary ? "stationary" : "not stationary") << " (max |dV| "
              << format_double(r.max_first_variation) << ")\n";
    return r.stationary ? 0 : 1;
}

int cmd_verify_lemma(const Flags& f) {
    const auto corpus = load_corpus(f.corpus);
    LemmaOptions opt;
    if (f.seed) opt.seed = *f.seed;
    if (f.fields) opt.fields = *f.fields;
    if (!f.grid.empty()) opt.grid = f.grid;

    // hash the corpus bytes together with the effective options
    std::string material;
    for (const auto& e : corpus) material += e.file + "\n" + read_text(fs::path(f.corpus) / e.file);
    json o;
    o["seed"] = opt.seed;
    o["fields"] = opt.fields;
    o["grid"] = opt.grid ? json(*opt.grid) : json(nullptr);
    material += o.dump();
    opt.config_hash = fnv1a64(material);

    const auto rep = minimality_agreement(corpus, opt);
    const fs::path out = f.out.empty() ? fs::path("out") : fs::path(f.out);
    write_json(out / "agreement.json", to_json(rep));
    for (const auto& a : rep.maps) {
        std::cout << a.name << ": oracle " << to_string(a.oracle);
        for (const auto& r : a.readings)
            std::cout << ", " << r.tag << " " << (!r.applicable ? "n/a" : (r.minimal ? "minimal" : "not minimal"));
        if (!a.error.empty()) std::cout << " [error: " << a.error << "]";
        std::cout << "\n";
    }
    std::cout << "invariants " << (rep.invariants_pass ? "pass" : "FAIL") << "\n";
    return rep.invariants_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minsurf: regular m-maps, level-set foliations and minimality checks"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Flags flags;

    auto add_run_flags = [&](CLI::App* sub, bool with_level) {
        sub->add_option("--config", flags.config, "run config (map document plus run parameters)")->required();
        if (with_level) sub->add_option("--level", flags.level, "level values, comma separated")->delimiter(',');
        sub->add_option("--grid", flags.grid, "cells per axis, comma separated")->delimiter(',');
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--out", flags.out, "output directory");
    };

    auto* check = app.add_subcommand("check", "regularity and minimality residuals; exit 1 if not regular");
    add_run_flags(check, false);
    auto* extract = app.add_subcommand("extract", "extract one level set to <name>.obj");
    add_run_flags(extract, true);
    auto* foliate = app.add_subcommand("foliate", "sample the foliation to leaf_<k>.obj");
    add_run_flags(foliate, false);
    auto* variation = app.add_subcommand("variation", "stationarity sweep on one level; exit 1 if not stationary");
    add_run_flags(variation, true);
    variation->add_option("--fields", flags.fields, "number of random variation fields")->check(CLI::PositiveNumber);

    auto* lemma = app.add_subcommand("verify-lemma", "agreement report over a corpus directory");
    lemma->add_option("corpus", flags.corpus, "directory of map documents")->required();
    lemma->add_option("--grid", flags.grid, "cells per axis for every map, comma separated")->delimiter(',');
    lemma->add_option("--seed", flags.seed, "random seed");
    lemma->add_option("--fields", flags.fields, "variation fields per leaf")->check(CLI::PositiveNumber);
    lemma->add_option("--out", flags.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*check) return cmd_check(flags);
        if (*extract) return cmd_extract(flags);
        if (*foliate) return cmd_foliate(flags);
        if (*variation) return cmd_variation(flags);
        if (*lemma) return cmd_verify_lemma(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "minsurf/lemma.hpp"
#include "test_support.hpp"

using namespace minsurf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("minsurf_lemma_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const AgreementReport& corpus_report() {
    static const AgreementReport rep = [] {
        LemmaOptions opt;
        opt.seed = 7;
        return minimality_agreement(load_corpus(MINSURF_CORPUS_DIR), opt);
    }();
    return rep;
}

const MapAgreement& entry(const std::string& name) {
    for (const auto& a : corpus_report().maps)
        if (a.name == name) return a;
    throw std::runtime_error("missing " + name);
}

const ReadingVerdict& reading(const MapAgreement& a, const std::string& tag) {
    for (const auto& r : a.readings)
        if (r.tag == tag) return r;
    throw std::runtime_error("missing reading " + tag);
}

} // namespace

TEST(Corpus, LoadsInFileOrder) {
    const auto corpus = load_corpus(MINSURF_CORPUS_DIR);
    ASSERT_EQ(corpus.size(), 8u);
    EXPECT_EQ(corpus.front().file, "01_hyperplanes.json");
    EXPECT_EQ(corpus[3].map.name, "helicoid");
    ASSERT_TRUE(corpus[3].grid.has_value());
    EXPECT_EQ(*corpus[3].grid, (std::vector<int>{48, 48, 192}));
}

TEST(Corpus, BrokenMapNamesTheFile) {
    const auto dir = scratch_dir("broken");
    write(dir / "a.json", R"json({"name":"ok","n":2,"m":1,"components":["x1"],"domain":{"min":[0,0],"max":[1,1]}})json");
    write(dir / "b.json", R"json({"name":"bad","n":2,"m":1,"components":["x1 +"],"domain":{"min":[0,0],"max":[1,1]}})json");
    try {
        load_corpus(dir);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("b.json"), std::string::npos);
    }
    write(dir / "b.json", "{not json");
    EXPECT_THROW(load_corpus(dir), SchemaError);
}

TEST(Corpus, EmptyOrMissingDirectory) {
    EXPECT_THROW(load_corpus(scratch_dir("empty")), minsurf::Error);
    EXPECT_THROW(load_corpus(scratch_dir("gone") / "nope"), minsurf::Error);
}

TEST(Witness, AngularFormClosedButNotExact) {
    const auto w = angular_form_witness();
    EXPECT_LE(w.closedness, 1e-4);
    EXPECT_FALSE(w.exact);
    EXPECT_NEAR(w.path_discrepancy, 2 * std::numbers::pi, 0.01 * 2 * std::numbers::pi);
    EXPECT_TRUE(w.pass);
}

TEST(Agreement, EveryMapOnce) {
    const auto& rep = corpus_report();
    ASSERT_EQ(rep.maps.size(), 8u);
    for (const auto& a : rep.maps) {
        EXPECT_TRUE(a.error.empty()) << a.name << ": " << a.error;
        EXPECT_EQ(a.readings.size(), 3u);
    }
    EXPECT_TRUE(rep.invariants_pass);
}

TEST(Agreement, HyperplanesStationaryAndMinimal) {
    for (const char* name : {"hyperplanes", "rotated_hyperplanes"}) {
        const auto& a = entry(name);
        EXPECT_EQ(a.oracle, OracleVerdict::Stationary) << name;
        for (const auto& r : a.readings) {
            EXPECT_TRUE(r.minimal) << name << " " << r.tag;
            EXPECT_EQ(r.samples, 200);
        }
    }
}

TEST(Agreement, CirclesNotMinimal) {
    const auto& a = entry("concentric_circles");
    EXPECT_EQ(a.oracle, OracleVerdict::NonStationary);
    EXPECT_FALSE(reading(a, "FULL_TRACE").minimal);
    EXPECT_NEAR(reading(a, "FULL_TRACE").max_residual, 4.0, 1e-12);
    EXPECT_FALSE(a.regularity.regular);
    EXPECT_FALSE(a.warnings.empty());
}

TEST(Agreement, HelicoidZeroLevel) {
    const auto& a = entry("helicoid");
    EXPECT_TRUE(a.regularity.regular);
    EXPECT_EQ(a.oracle, OracleVerdict::Stationary);
    ASSERT_TRUE(a.zero_level.has_value());
    EXPECT_TRUE(a.zero_level->stationary);
    ASSERT_TRUE(a.zero_level->max_mean_curvature.has_value());
    EXPECT_LE(*a.zero_level->max_mean_curvature, 1e-8);
    EXPECT_TRUE(reading(a, "FULL_TRACE").minimal);
    ASSERT_TRUE(a.harmonicity.has_value());
    EXPECT_LE(*a.harmonicity, 1e-3);
}

TEST(Agreement, ScherkReadingDisagreement) {
    const auto& a = entry("scherk");
    EXPECT_EQ(a.oracle, OracleVerdict::Stationary);
    const auto& full = reading(a, "FULL_TRACE");
    EXPECT_FALSE(full.minimal);
    EXPECT_GT(full.max_residual, 0.1);
    const auto j = to_json(corpus_report());
    bool recorded = false;
    for (const auto& d : j["disagreements"])
        if (d["map"] == "scherk" && d["reading"] == "FULL_TRACE") recorded = true;
    EXPECT_TRUE(recorded);
    EXPECT_EQ(j["maps"][5]["readings"]["FULL_TRACE"]["agrees_with_oracle"], false);
}

TEST(Agreement, VerticalLines) {
    const auto& a = entry("vertical_lines");
    EXPECT_EQ(a.m, 2);
    EXPECT_EQ(a.oracle, OracleVerdict::Stationary);
    EXPECT_TRUE(reading(a, "FULL_TRACE").minimal);
    EXPECT_FALSE(a.reconstruction.has_value());
    ASSERT_TRUE(a.closedness.has_value());
    EXPECT_LE(*a.closedness, 1e-4);
}

TEST(Agreement, InvariantsHoldOnSmoothMaps) {
    for (const auto& a : corpus_report().maps) {
        ASSERT_TRUE(a.closedness.has_value()) << a.name;
        if (a.regularity.regular) {
            EXPECT_LE(*a.closedness, 1e-4) << a.name;
        }
        if (a.m == 1) {
            ASSERT_TRUE(a.reconstruction.has_value()) << a.name;
            EXPECT_LE(*a.reconstruction, 1e-5) << a.name;
        }
    }
}

TEST(Agreement, ConfusionCountsCoverCorpus) {
    for (const auto& [tag, c] : corpus_report().confusion)
        EXPECT_EQ(c.both_minimal + c.both_not_minimal + c.reading_only + c.oracle_only + c.skipped, 8) << tag;
}

TEST(Agreement, SectionalReadingSkipsSmallDimensions) {
    const auto dir = scratch_dir("sectional");
    write(dir / "plane.json",
          R"json({"name":"line","n":2,"m":1,"components":["x1 + 2*x2"],"domain":{"min":[-1,-1],"max":[1,1]},"grid":[32,32]})json");
    LemmaOptions opt;
    opt.readings = {MinimalityReading::full_trace(), MinimalityReading::sectional_all(3)};
    opt.fields = 4;
    const auto rep = minimality_agreement(load_corpus(dir), opt);
    ASSERT_EQ(rep.maps.size(), 1u);
    EXPECT_FALSE(rep.maps[0].readings[1].applicable);
    EXPECT_EQ(rep.confusion[1].second.skipped, 1);
    EXPECT_EQ(rep.confusion[0].second.both_minimal, 1);
}

TEST(Agreement, PerMapFailureIsRecorded) {
    const auto dir = scratch_dir("failure");
    write(dir / "log.json",
          R"json({"name":"log","n":2,"m":1,"components":["log(x1)"],"domain":{"min":[-1,-1],"max":[1,1]},"grid":[16,16]})json");
    LemmaOptions opt;
    opt.fields = 2;
    const auto rep = minimality_agreement(load_corpus(dir), opt);
    EXPECT_FALSE(rep.maps[0].error.empty());
    EXPECT_FALSE(rep.invariants_pass);
}

TEST(Agreement, DeterministicJson) {
    const auto dir = scratch_dir("determinism");
    fs::copy_file(fs::path(MINSURF_CORPUS_DIR) / "04_helicoid.json", dir / "04_helicoid.json");
    fs::copy_file(fs::path(MINSURF_CORPUS_DIR) / "03_concentric_circles.json", dir / "03_concentric_circles.json");
    LemmaOptions opt;
    opt.seed = 3;
    opt.fields = 4;
    opt.grid = std::nullopt;
    const auto a = to_json(minimality_agreement(load_corpus(dir), opt)).dump(2);
    const auto b = to_json(minimality_agreement(load_corpus(dir), opt)).dump(2);
    EXPECT_EQ(a, b);
    opt.seed = 4;
    EXPECT_NE(a, to_json(minimality_agreement(load_corpus(dir), opt)).dump(2));
}

TEST(Agreement, ReportSchema) {
    auto opt = corpus_report().options;
    const auto j = to_json(corpus_report());
    for (const char* key : {"artifact", "version", "config_hash", "seed", "tolerances", "readings", "maps", "confusion",
                            "disagreements", "non_exact_witness", "invariants_pass"})
        EXPECT_TRUE(j.contains(key)) << key;
    for (const auto& m : j["maps"])
        for (const char* key : {"map", "oracle", "readings", "grid", "seed", "tolerances"})
            EXPECT_TRUE(m.contains(key)) << key;
    EXPECT_EQ(j["seed"], opt.seed);
}

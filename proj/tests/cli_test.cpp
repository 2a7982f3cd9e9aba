#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using minsurf::support::read_file;

namespace {

const fs::path configs = MINSURF_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("minsurf_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the CLI, returns its exit status; stderr goes to <out>/stderr.txt.
int run(const std::string& args, const fs::path& out) {
    const std::string cmd = std::string("\"") + MINSURF_CLI_PATH + "\" " + args + " > \"" + (out / "stdout.txt").string() +
                            "\" 2> \"" + (out / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cfg(const std::string& name) { return "--config \"" + (configs / (name + ".json")).string() + "\""; }

json report(const fs::path& p) { return json::parse(read_file(p)); }

} // namespace

TEST(Cli, CheckHelicoidIsRegular) {
    const auto out = scratch("check_helicoid");
    EXPECT_EQ(run("check " + cfg("helicoid") + " --out \"" + out.string() + "\"", out), 0);
    const auto j = report(out / "report.json");
    EXPECT_EQ(j["regularity"]["regular"], true);
    EXPECT_EQ(j["minimality"]["FULL_TRACE"]["verdict"], "minimal");
    EXPECT_EQ(j["seed"], 1);
    EXPECT_EQ(j["version"], MINSURF_VERSION);
    EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
    EXPECT_TRUE(j.contains("tolerances"));
}

TEST(Cli, CheckParaboloidOnOriginBox) {
    const auto out = scratch("check_paraboloid");
    EXPECT_EQ(run("check " + cfg("paraboloid") + " --out \"" + out.string() + "\"", out), 1);
    const auto j = report(out / "report.json");
    EXPECT_EQ(j["regularity"]["regular"], false);
    const auto& w = j["regularity"]["witnesses"][0]["point"];
    EXPECT_LE(std::hypot(w[0].get<double>(), w[1].get<double>()), 2 * 2.0 / 64 * std::sqrt(2.0));
}

TEST(Cli, MissingConfigFile) {
    const auto out = scratch("missing");
    EXPECT_EQ(run("check --config \"" + (out / "nope.json").string() + "\"", out), 2);
    EXPECT_NE(read_file(out / "stderr.txt").find("nope.json"), std::string::npos);
}

TEST(Cli, BadArguments) {
    const auto out = scratch("badargs");
    EXPECT_EQ(run("", out), 2);
    EXPECT_EQ(run("frobnicate", out), 2);
    EXPECT_EQ(run("extract " + cfg("sphere") + " --grid 4,4,4 --out \"" + out.string() + "\"", out), 2);
    EXPECT_EQ(run("extract " + cfg("sphere") + " --level 0,1 --out \"" + out.string() + "\"", out), 2);
    EXPECT_EQ(run("extract " + cfg("paraboloid") + " --out \"" + out.string() + "\"", out), 2);  // no level
}

TEST(Cli, ExtractSphere) {
    const auto out = scratch("extract_sphere");
    EXPECT_EQ(run("extract " + cfg("sphere") + " --level 0 --out \"" + out.string() + "\"", out), 0);
    ASSERT_TRUE(fs::exists(out / "sphere.obj"));
    const auto j = report(out / "report.json");
    EXPECT_NEAR(j["leaf"]["area"].get<double>(), 4 * std::numbers::pi, 0.02 * 4 * std::numbers::pi);
    EXPECT_EQ(j["leaf"]["file"], "sphere.obj");
    const auto obj = read_file(out / "sphere.obj");
    EXPECT_NE(obj.find("\nvn "), std::string::npos);
    EXPECT_NE(obj.find("\nf "), std::string::npos);
    EXPECT_NE(obj.find("seed=11"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfig) {
    const auto out = scratch("override");
    EXPECT_EQ(run("extract " + cfg("sphere") + " --level 0.44 --grid 16,16,16 --seed 9 --out \"" + out.string() + "\"",
                  out),
              0);
    const auto j = report(out / "report.json");
    EXPECT_EQ(j["grid"], json::array({16, 16, 16}));
    EXPECT_EQ(j["seed"], 9);
    EXPECT_EQ(j["leaf"]["level"][0], 0.44);
    // radius sqrt(1.44) = 1.2
    EXPECT_NEAR(j["leaf"]["area"].get<double>(), 4 * std::numbers::pi * 1.44, 0.05 * 4 * std::numbers::pi * 1.44);
}

TEST(Cli, FoliateLinearGivesFivePlanes) {
    const auto out = scratch("foliate_linear");
    EXPECT_EQ(run("foliate " + cfg("linear") + " --out \"" + out.string() + "\"", out), 0);
    const auto j = report(out / "report.json");
    ASSERT_EQ(j["leaves"].size(), 5u);
    for (int k = 0; k < 5; ++k) {
        const auto path = out / ("leaf_" + std::to_string(k) + ".obj");
        ASSERT_TRUE(fs::exists(path));
        const double c = j["leaves"][static_cast<std::size_t>(k)]["level"][0];
        std::istringstream in(read_file(path));
        std::string tag;
        int verts = 0;
        for (std::string line; std::getline(in, line);) {
            std::istringstream ls(line);
            ls >> tag;
            if (tag != "v") continue;
            double x, y, z;
            ls >> x >> y >> z;
            EXPECT_NEAR(0.48 * x + 0.6 * y + 0.64 * z, c, 1e-12);
            ++verts;
        }
        EXPECT_GT(verts, 0);
    }
}

TEST(Cli, FoliateCurves) {
    const auto out = scratch("foliate_ring");
    EXPECT_EQ(run("foliate " + cfg("circle_pair") + " --out \"" + out.string() + "\"", out), 0);
    EXPECT_EQ(report(out / "report.json")["leaves"].size(), 9u);
    EXPECT_NE(read_file(out / "leaf_4.obj").find("\nl "), std::string::npos);
    EXPECT_FALSE(report(out / "report.json")["warnings"].empty());
}

TEST(Cli, UnsupportedSignature) {
    const auto out = scratch("n4");
    EXPECT_EQ(run("extract " + cfg("hyperplane4") + " --out \"" + out.string() + "\"", out), 2);
    EXPECT_NE(read_file(out / "stderr.txt").find("unsupported signature"), std::string::npos);
    EXPECT_EQ(run("foliate " + cfg("hyperplane4") + " --out \"" + out.string() + "\"", out), 2);
    EXPECT_EQ(run("check " + cfg("hyperplane4") + " --out \"" + out.string() + "\"", out), 0);
}

TEST(Cli, VariationVerdicts) {
    const auto out = scratch("variation");
    EXPECT_EQ(run("variation " + cfg("helicoid") + " --fields 6 --out \"" + out.string() + "\"", out), 0);
    auto j = report(out / "report.json");
    EXPECT_EQ(j["stationary"], true);
    EXPECT_EQ(j["fields"].size(), 6u);
    EXPECT_EQ(run("variation " + cfg("sphere") + " --grid 24,24,24 --out \"" + out.string() + "\"", out), 1);
    j = report(out / "report.json");
    EXPECT_EQ(j["stationary"], false);
    EXPECT_EQ(j["fields"][0]["direction"], "normal");
}

TEST(Cli, DeterministicOutputs) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::string args = "foliate " + cfg("helicoid") + " --grid 16,16,32 --out ";
    ASSERT_EQ(run(args + "\"" + a.string() + "\"", a), 0);
    ASSERT_EQ(run(args + "\"" + b.string() + "\"", b), 0);
    EXPECT_EQ(read_file(a / "report.json"), read_file(b / "report.json"));
    for (int k = 0; k < 8; ++k) {
        const auto f = "leaf_" + std::to_string(k) + ".obj";
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    }
    const std::string var = "variation " + cfg("sphere") + " --grid 16,16,16 --fields 4 --out ";
    run(var + "\"" + a.string() + "\"", a);
    run(var + "\"" + b.string() + "\"", b);
    EXPECT_EQ(read_file(a / "report.json"), read_file(b / "report.json"));
}

TEST(Cli, VerifyLemmaShippedCorpus) {
    const auto out = scratch("lemma");
    EXPECT_EQ(run("verify-lemma \"" + std::string(MINSURF_CORPUS_DIR) + "\" --out \"" + out.string() + "\"", out), 0);
    const auto j = report(out / "agreement.json");
    EXPECT_EQ(j["maps"].size(), 8u);
    EXPECT_EQ(j["invariants_pass"], true);
}

TEST(Cli, VerifyLemmaBrokenCorpus) {
    const auto out = scratch("lemma_broken");
    const auto corpus = out / "corpus";
    fs::create_directories(corpus);
    fs::copy_file(fs::path(MINSURF_CORPUS_DIR) / "01_hyperplanes.json", corpus / "01_hyperplanes.json");
    std::ofstream(corpus / "02_broken.json")
        << R"json({"name":"broken","n":3,"m":1,"components":["x1 *"],"domain":{"min":[0,0,0],"max":[1,1,1]}})json";
    EXPECT_EQ(run("verify-lemma \"" + corpus.string() + "\" --out \"" + out.string() + "\"", out), 2);
    EXPECT_NE(read_file(out / "stderr.txt").find("02_broken.json"), std::string::npos);
    EXPECT_FALSE(fs::exists(out / "agreement.json"));
}

TEST(Cli, VerifyLemmaEmptyCorpus) {
    const auto out = scratch("lemma_empty");
    fs::create_directories(out / "corpus");
    EXPECT_EQ(run("verify-lemma \"" + (out / "corpus").string() + "\" --out \"" + out.string() + "\"", out), 2);
}

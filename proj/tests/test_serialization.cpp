#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "rsplearn/errors.hpp"
#include "rsplearn/learner.hpp"
#include "rsplearn/serialization.hpp"

using namespace rsplearn;
namespace fs = std::filesystem;

namespace {

// Fresh directory per test case so file names never collide.
struct TempDir {
    fs::path path;

    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("rsplearn_serialization_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("mdp json round-trip is exact and repeatable") {
    TempDir dir;
    SplitMix64 rng(120);
    Mdp mdp = oracles::randomErgodicMdp(rng, 5, 3);
    saveMdp(mdp, dir.file("mdp.json"));
    Mdp loaded = loadMdp(dir.file("mdp.json"));
    CHECK(loaded.numStates == 5);
    CHECK(loaded.numActions == 3);
    CHECK(loaded.transition == mdp.transition);
    CHECK(loaded.reward == mdp.reward);

    saveMdp(loaded, dir.file("again.json"));
    CHECK(slurp(dir.file("again.json")) == slurp(dir.file("mdp.json")));
}

TEST_CASE("mdp loader rejects malformed and invalid inputs") {
    TempDir dir;
    spit(dir.file("broken.json"), "{ not json");
    CHECK_THROWS_AS(loadMdp(dir.file("broken.json")), ConfigError);

    spit(dir.file("missing.json"), R"({"num_states": 2, "num_actions": 1})");
    CHECK_THROWS_AS(loadMdp(dir.file("missing.json")), ConfigError);

    // Structurally fine but not row-stochastic.
    spit(dir.file("bad.json"),
         R"({"num_states": 1, "num_actions": 1, "transition": [0.5], "reward": [0]})");
    CHECK_THROWS_AS(loadMdp(dir.file("bad.json")), ConfigError);

    CHECK_THROWS_AS(loadMdp(dir.file("nope.json")), ConfigError);
}

TEST_CASE("deterministic policies serialize as a bare action array") {
    TempDir dir;
    saveDeterministicPolicy({2, 0, 1}, dir.file("policy.json"));
    std::string text = slurp(dir.file("policy.json"));
    CHECK(text.front() == '[');
    CHECK(loadDeterministicPolicy(dir.file("policy.json")) == std::vector<int>{2, 0, 1});

    spit(dir.file("object.json"), R"({"actions": [1, 2]})");
    CHECK_THROWS_AS(loadDeterministicPolicy(dir.file("object.json")), ConfigError);
    spit(dir.file("floats.json"), "[1.5, 2]");
    CHECK_THROWS_AS(loadDeterministicPolicy(dir.file("floats.json")), ConfigError);
}

TEST_CASE("feature map round-trip and validation") {
    TempDir dir;
    SplitMix64 rng(121);
    auto fm = oracles::randomFeatureMap(rng, 3, 2, 4);
    saveFeatureMap(*fm, dir.file("fm.json"));
    auto loaded = loadFeatureMap(dir.file("fm.json"));
    CHECK(loaded->numStates == 3);
    CHECK(loaded->numActions == 2);
    CHECK(loaded->numFeatures == 4);
    CHECK(loaded->values == fm->values);

    auto bad = *fm;
    bad.values[0] = 1.5;  // outside [0, 1]
    saveFeatureMap(bad, dir.file("bad.json"));
    CHECK_THROWS_AS(loadFeatureMap(dir.file("bad.json")), ConfigError);
}

TEST_CASE("rsp with an inline feature map round-trips") {
    TempDir dir;
    SplitMix64 rng(122);
    auto fm = oracles::randomFeatureMap(rng, 2, 3, 3);
    Rsp rsp{oracles::randomTheta(rng, 3, 2.0), fm};
    saveRsp(rsp, dir.file("rsp.json"));
    Rsp loaded = loadRsp(dir.file("rsp.json"));
    CHECK((loaded.theta - rsp.theta).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.features->values == fm->values);
}

TEST_CASE("rsp can reference its feature map by relative path") {
    TempDir dir;
    SplitMix64 rng(123);
    auto fm = oracles::randomFeatureMap(rng, 2, 2, 2);
    saveFeatureMap(*fm, dir.file("features.json"));
    spit(dir.file("rsp.json"),
         R"({"theta": [0.5, -1.25], "feature_map": "features.json"})");
    Rsp loaded = loadRsp(dir.file("rsp.json"));
    CHECK(loaded.theta(0) == 0.5);
    CHECK(loaded.theta(1) == -1.25);
    CHECK(loaded.features->values == fm->values);

    // theta length must match the referenced map.
    spit(dir.file("short.json"), R"({"theta": [0.5], "feature_map": "features.json"})");
    CHECK_THROWS_AS(loadRsp(dir.file("short.json")), ConfigError);
}

TEST_CASE("sample sets round-trip through csv") {
    TempDir dir;
    SampleSet s{123456789012345ULL, {{0, 1}, {2, 0}, {1, 1}}};
    saveSampleSet(s, dir.file("samples.csv"));
    SampleSet loaded = loadSampleSet(dir.file("samples.csv"));
    CHECK(loaded.seed == s.seed);
    CHECK(loaded.pairs == s.pairs);

    SampleSet empty{7, {}};
    saveSampleSet(empty, dir.file("empty.csv"));
    SampleSet loadedEmpty = loadSampleSet(dir.file("empty.csv"));
    CHECK(loadedEmpty.seed == 7);
    CHECK(loadedEmpty.pairs.empty());

    spit(dir.file("noheader.csv"), "state,action\n0,1\n");
    CHECK_THROWS_AS(loadSampleSet(dir.file("noheader.csv")), ConfigError);
    spit(dir.file("badrow.csv"), "# seed=1\nstate,action\n0\n");
    CHECK_THROWS_AS(loadSampleSet(dir.file("badrow.csv")), ConfigError);
}

TEST_CASE("grid spec round-trip") {
    TempDir dir;
    GridSpec spec = defaultGridSpec();
    saveGridSpec(spec, dir.file("grid.json"));
    GridSpec loaded = loadGridSpec(dir.file("grid.json"));
    CHECK(loaded.width == spec.width);
    CHECK(loaded.height == spec.height);
    CHECK(loaded.intendedProb == spec.intendedProb);
    CHECK(loaded.slipProb == spec.slipProb);
    CHECK(loaded.featureWaypoints == spec.featureWaypoints);
    REQUIRE(loaded.rewardWaypoints.size() == spec.rewardWaypoints.size());
    for (std::size_t i = 0; i < spec.rewardWaypoints.size(); ++i) {
        CHECK(loaded.rewardWaypoints[i].x == spec.rewardWaypoints[i].x);
        CHECK(loaded.rewardWaypoints[i].y == spec.rewardWaypoints[i].y);
        CHECK(loaded.rewardWaypoints[i].r == spec.rewardWaypoints[i].r);
    }

    spit(dir.file("bad.json"), R"({"width": 13})");
    CHECK_THROWS_AS(loadGridSpec(dir.file("bad.json")), ConfigError);
}

TEST_CASE("trained policies load back as plain rsp files") {
    TempDir dir;
    SplitMix64 rng(124);
    Mdp mdp = oracles::randomErgodicMdp(rng, 3, 2);
    auto fm = oracles::randomFeatureMap(rng, 3, 2, 2);
    Rsp expert{oracles::randomTheta(rng, 2, 1.0), fm};
    SampleSet s = sampleDemonstrations(mdp, policyMatrix(expert), 40, 9);

    TrainConfig config;
    config.budgetCap = 2.0;
    TrainedPolicy trained = trainAlgorithm1(s, fm, config);
    trained.diagnostics.warning = "did not converge";

    saveFeatureMap(*fm, dir.file("features.json"));
    saveTrainedPolicy(trained, "features.json", dir.file("trained.json"));

    Rsp reloaded = loadRsp(dir.file("trained.json"));
    CHECK((reloaded.theta - trained.rsp.theta).cwiseAbs().maxCoeff() == 0.0);

    std::string text = slurp(dir.file("trained.json"));
    CHECK(text.find("\"chosen_budget\"") != std::string::npos);
    CHECK(text.find("\"holdout_log_loss\"") != std::string::npos);
    CHECK(text.find("\"projected_gradient_norm\"") != std::string::npos);
    CHECK(text.find("\"warning\"") != std::string::npos);
}

TEST_CASE("certificates serialize infinities as strings") {
    TempDir dir;
    RegretCertificate cert;
    cert.klTerm = 0.25;
    cert.trueRegret = 0.01;
    cert.estimationTerm = 0.004;
    cert.perturbationTerm = 0.006;
    cert.rMax = 1.0;
    cert.kappas.normZ = 2.0;
    cert.kappas.normGI = 3.0;
    cert.kappas.inverseGap = std::numeric_limits<double>::infinity();
    cert.kappas.tauZ = 1.5;
    cert.boundPerKappa = {1.0, 1.5, std::numeric_limits<double>::infinity(), 0.9};
    cert.minKappaName = "fundamental_tau";
    cert.minBound = 0.9;

    saveCertificate(cert, dir.file("cert.json"));
    std::string text = slurp(dir.file("cert.json"));
    CHECK(text.find("\"inf\"") != std::string::npos);
    CHECK(text.find("\"min_kappa\": \"fundamental_tau\"") != std::string::npos);

    std::string table = renderCertificateTable(cert);
    CHECK(table.find("inf") != std::string::npos);
    CHECK(table.find("tightest: fundamental_tau") != std::string::npos);
    CHECK(table.find("0.9") != std::string::npos);
}

TEST_CASE("double formatting is shortest round-trip") {
    CHECK(formatDouble(0.1) == "0.1");
    CHECK(formatDouble(1.0) == "1");
    CHECK(formatDouble(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(formatDouble(-std::numeric_limits<double>::infinity()) == "-inf");

    SplitMix64 rng(125);
    for (int trial = 0; trial < 2000; ++trial) {
        double scale = std::pow(10.0, static_cast<double>(rng.nextBounded(21)) - 10.0);
        double v = (2.0 * rng.nextDouble() - 1.0) * scale;
        std::string text = formatDouble(v);
        CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
}

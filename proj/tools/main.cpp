#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "rsplearn/errors.hpp"
#include "rsplearn/experiment.hpp"
#include "rsplearn/gridworld.hpp"
#include "rsplearn/markov.hpp"
#include "rsplearn/perturbation.hpp"
#include "rsplearn/serialization.hpp"

namespace {

using namespace rsplearn;

// A policy file is either a bare JSON array of action indices (deterministic)
// or an Rsp object ({"theta", "feature_map"}). Returns the row-stochastic
// matrix either way.
PolicyMatrix loadPolicyMatrix(const std::string& path, const Mdp& mdp) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (j.is_array()) {
        auto actions = loadDeterministicPolicy(path);
        if (static_cast<int>(actions.size()) != mdp.numStates)
            throw ConfigError(path + ": policy length does not match the environment");
        return deterministicPolicyMatrix(actions, mdp.numActions);
    }
    if (j.is_object() && j.contains("theta")) {
        Rsp rsp = loadRsp(path);
        if (rsp.features->numStates != mdp.numStates ||
            rsp.features->numActions != mdp.numActions)
            throw ConfigError(path + ": policy dimensions do not match the environment");
        return policyMatrix(rsp);
    }
    throw ConfigError(path + ": expected an action array or a theta policy file");
}

void addGridworldSolve(CLI::App& app) {
    auto* cmd = app.add_subcommand("gridworld-solve",
                                   "Build the grid environment and compute the value-iteration "
                                   "expert policy");
    auto configPath = std::make_shared<std::string>();
    auto outPath = std::make_shared<std::string>();
    auto envPath = std::make_shared<std::string>();
    auto featuresPath = std::make_shared<std::string>();
    auto discount = std::make_shared<double>(0.95);
    cmd->add_option("--config", *configPath, "grid spec JSON")->required();
    cmd->add_option("--discount", *discount, "value-iteration discount in (0,1)");
    cmd->add_option("--out", *outPath, "output expert policy JSON")->required();
    cmd->add_option("--dump-env", *envPath, "also write the built MDP as JSON");
    cmd->add_option("--dump-features", *featuresPath, "also write the feature map as JSON");
    cmd->callback([=] {
        GridSpec spec = loadGridSpec(*configPath);
        Mdp mdp = buildGridMdp(spec);
        ValueIterationResult vi = valueIteration(mdp, *discount, 1e-10);
        saveDeterministicPolicy(vi.policy, *outPath);
        if (!envPath->empty()) saveMdp(mdp, *envPath);
        if (!featuresPath->empty()) saveFeatureMap(*buildFeatureMap(spec, mdp), *featuresPath);
        std::printf("expert policy written to %s (%d value-iteration sweeps)\n", outPath->c_str(),
                    vi.iterations);
    });
}

void addSample(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "sample", "Draw expert demonstrations from the stationary distribution");
    auto envPath = std::make_shared<std::string>();
    auto expertPath = std::make_shared<std::string>();
    auto outPath = std::make_shared<std::string>();
    auto m = std::make_shared<int>(0);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--env", *envPath, "environment MDP JSON")->required();
    cmd->add_option("--expert", *expertPath, "expert policy JSON (actions or theta)")->required();
    cmd->add_option("--m", *m, "number of demonstration pairs")
        ->required()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", *seed, "sampling seed");
    cmd->add_option("--out", *outPath, "output CSV")->required();
    cmd->callback([=] {
        Mdp mdp = loadMdp(*envPath);
        PolicyMatrix expert = loadPolicyMatrix(*expertPath, mdp);
        SampleSet samples = sampleDemonstrations(mdp, expert, *m, *seed);
        saveSampleSet(samples, *outPath);
        std::printf("%d samples written to %s\n", *m, outPath->c_str());
    });
}

void addTrain(CLI::App& app) {
    auto* cmd = app.add_subcommand("train",
                                   "Fit l1-constrained policies over the budget grid and keep "
                                   "the best hold-out budget");
    auto samplesPath = std::make_shared<std::string>();
    auto featuresPath = std::make_shared<std::string>();
    auto outPath = std::make_shared<std::string>();
    auto cfg = std::make_shared<TrainConfig>();
    cmd->add_option("--samples", *samplesPath, "demonstration CSV")->required();
    cmd->add_option("--features", *featuresPath, "feature map JSON")->required();
    cmd->add_option("--gamma", cfg->gamma, "hold-out fraction in (0,1)");
    cmd->add_option("--cap", cfg->budgetCap, "largest l1 budget in the grid");
    cmd->add_option("--tol", cfg->tol, "optimizer stopping tolerance");
    cmd->add_option("--max-iters", cfg->maxIters, "optimizer iteration cap");
    cmd->add_option("--seed", cfg->seed, "split shuffle seed");
    cmd->add_option("--out", *outPath, "output trained policy JSON")->required();
    cmd->callback([=] {
        SampleSet samples = loadSampleSet(*samplesPath);
        auto features = loadFeatureMap(*featuresPath);
        TrainedPolicy trained = trainAlgorithm1(samples, features, *cfg);
        // Reference the feature map relative to the output file so the
        // trained policy loads as an Rsp from anywhere.
        auto outDir = std::filesystem::absolute(*outPath).parent_path();
        auto rel = std::filesystem::proximate(std::filesystem::absolute(*featuresPath), outDir);
        saveTrainedPolicy(trained, rel.string(), *outPath);
        if (!trained.diagnostics.warning.empty())
            std::fprintf(stderr, "warning: %s\n", trained.diagnostics.warning.c_str());
        std::printf("chosen budget %s, trained policy written to %s\n",
                    formatDouble(trained.chosenBudget).c_str(), outPath->c_str());
    });
}

void addCertify(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "certify", "Evaluate the regret bound of an estimated policy against the target");
    auto envPath = std::make_shared<std::string>();
    auto targetPath = std::make_shared<std::string>();
    auto estimatePath = std::make_shared<std::string>();
    auto outPath = std::make_shared<std::string>();
    cmd->add_option("--env", *envPath, "environment MDP JSON")->required();
    cmd->add_option("--target", *targetPath, "target RSP JSON")->required();
    cmd->add_option("--estimate", *estimatePath, "estimated RSP JSON")->required();
    cmd->add_option("--out", *outPath, "output certificate JSON")->required();
    cmd->callback([=] {
        Mdp mdp = loadMdp(*envPath);
        Rsp target = loadRsp(*targetPath);
        Rsp estimate = loadRsp(*estimatePath);
        if (target.features->numStates != mdp.numStates ||
            target.features->numActions != mdp.numActions ||
            estimate.features->numStates != mdp.numStates ||
            estimate.features->numActions != mdp.numActions)
            throw ConfigError("certify: policy dimensions do not match the environment");
        RegretCertificate cert = regretCertificate(mdp, target, estimate);
        saveCertificate(cert, *outPath);
        std::fputs(renderCertificateTable(cert).c_str(), stdout);
    });
}

void addExperiment(CLI::App& app) {
    auto* cmd =
        app.add_subcommand("experiment", "Run a seeded sweep over sample sizes and policies");
    auto configPath = std::make_shared<std::string>();
    auto outOverride = std::make_shared<std::string>();
    cmd->add_option("--config", *configPath, "experiment config JSON")->required();
    cmd->add_option("--out", *outOverride, "override the configured output CSV path");
    cmd->callback([=] {
        ExperimentConfig cfg = loadExperimentConfig(*configPath);
        if (!outOverride->empty()) cfg.outPath = *outOverride;
        SweepResult result = runExperiment(cfg);
        std::size_t failures = 0;
        for (const auto& row : result.rows)
            if (!row.error.empty()) ++failures;
        std::printf("%zu rows written to %s (summary: %s)", result.rows.size(),
                    result.rawPath.c_str(), result.summaryPath.c_str());
        if (failures > 0) std::printf(", %zu trials failed", failures);
        std::printf("\n");
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy learning from Markov decision process demonstrations"};
    app.require_subcommand(1);
    addGridworldSolve(app);
    addSample(app);
    addTrain(app);
    addCertify(app);
    addExperiment(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NotErgodicError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

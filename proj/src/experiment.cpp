#include "rsplearn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rsplearn/errors.hpp"
#include "rsplearn/markov.hpp"
#include "rsplearn/perturbation.hpp"
#include "rsplearn/rng.hpp"
#include "rsplearn/serialization.hpp"

namespace rsplearn {

using json = nlohmann::ordered_json;

namespace {

const char* const kKnownPolicies[] = {"target", "l1", "unregularized", "greedy"};

GridSpec gridSpecFromJson(const json& j) {
    GridSpec spec;
    spec.rewardWaypoints.clear();
    spec.featureWaypoints.clear();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.intendedProb = j.at("intended_prob").get<double>();
    spec.slipProb = j.at("slip_prob").get<double>();
    for (const auto& w : j.at("reward_waypoints"))
        spec.rewardWaypoints.push_back(
            {w.at("x").get<int>(), w.at("y").get<int>(), w.at("r").get<double>()});
    for (const auto& w : j.at("feature_waypoints"))
        spec.featureWaypoints.emplace_back(w.at("x").get<int>(), w.at("y").get<int>());
    spec.validate();
    return spec;
}

int workerCount() {
    if (const char* env = std::getenv("RSPLEARN_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

// theta* with exactly r nonzero components, magnitudes in [K/2, K), random
// signs, positions drawn without replacement. Everything comes from one
// SplitMix64 stream seeded with the master seed.
Eigen::VectorXd syntheticSparseTheta(int numFeatures, int r, double k, std::uint64_t seed) {
    if (r > numFeatures)
        throw ConfigError("experiment: sparsity_r exceeds the number of features");
    std::vector<int> idx(static_cast<std::size_t>(numFeatures));
    std::iota(idx.begin(), idx.end(), 0);
    SplitMix64 rng(seed);
    shuffle(idx, rng);
    idx.resize(static_cast<std::size_t>(r));
    std::sort(idx.begin(), idx.end());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(numFeatures);
    for (int i : idx) {
        double magnitude = 0.5 * k + 0.5 * k * rng.nextDouble();
        theta(i) = rng.nextBounded(2) == 0 ? magnitude : -magnitude;
    }
    return theta;
}

struct TrialContext {
    const ExperimentConfig& cfg;
    const Mdp& mdp;
    std::shared_ptr<const FeatureMap> features;
    PolicyMatrix expertMatrix;
    const Rsp* targetRsp = nullptr;  // theorem mode only
    double targetReward = 0.0;
    double greedyReward = 0.0;
};

void runTrial(const TrialContext& ctx, std::size_t mIdx, int runIdx, SweepRow* out) {
    const auto& cfg = ctx.cfg;
    const int m = cfg.sampleSizes[mIdx];
    const std::uint64_t trialSeed =
        cfg.masterSeed ^ splitmixMix((static_cast<std::uint64_t>(mIdx) << 32) |
                                     static_cast<std::uint64_t>(runIdx));

    SampleSet samples;
    std::string sampleError;
    try {
        samples = sampleDemonstrations(ctx.mdp, ctx.expertMatrix, m, trialSeed);
    } catch (const std::exception& e) {
        sampleError = e.what();
    }

    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        SweepRow& row = out[p];
        row.m = m;
        row.run = runIdx;
        row.policy = cfg.policies[p];
        const bool needsSamples = row.policy == "l1" || row.policy == "unregularized";
        if (needsSamples && !sampleError.empty()) {
            row.error = sampleError;
            continue;
        }
        try {
            if (row.policy == "target") {
                row.avgReward = ctx.targetReward;
            } else if (row.policy == "greedy") {
                row.avgReward = ctx.greedyReward;
            } else if (row.policy == "l1") {
                TrainConfig train = cfg.train;
                train.seed = splitmixMix(trialSeed);  // distinct stream from the sampler
                TrainedPolicy trained = trainAlgorithm1(samples, ctx.features, train);
                row.avgReward = averageReward(ctx.mdp, policyMatrix(trained.rsp));
                row.chosenBudget = trained.chosenBudget;
                for (auto [budget, loss] : trained.perBudgetHoldout)
                    if (budget == trained.chosenBudget) row.holdoutLoss = loss;
                if (ctx.targetRsp) {
                    RegretCertificate cert = regretCertificate(ctx.mdp, *ctx.targetRsp, trained.rsp);
                    row.certificate = CertificateSummary{cert.klTerm, cert.trueRegret, cert.minBound};
                }
            } else {  // unregularized: single fit on the full sample set, no budget
                FitResult fit =
                    fitConstrainedMle(samples, ctx.features,
                                      std::numeric_limits<double>::infinity(), cfg.train.tol,
                                      cfg.train.maxIters);
                row.avgReward = averageReward(ctx.mdp, policyMatrix(fit.rsp));
                if (ctx.targetRsp) {
                    RegretCertificate cert = regretCertificate(ctx.mdp, *ctx.targetRsp, fit.rsp);
                    row.certificate = CertificateSummary{cert.klTerm, cert.trueRegret, cert.minBound};
                }
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }
}

void writeRawCsv(const std::vector<SweepRow>& rows, bool theoremMode, const std::string& path) {
    std::ostringstream out;
    out << "m,run,policy,avg_reward,holdout_logloss,chosen_budget";
    if (theoremMode) out << ",kl_term,true_regret,bound_min_kappa";
    out << ",error\n";
    for (const auto& row : rows) {
        out << row.m << ',' << row.run << ',' << row.policy << ',';
        if (row.error.empty()) out << formatDouble(row.avgReward);
        out << ',';
        if (row.holdoutLoss) out << formatDouble(*row.holdoutLoss);
        out << ',';
        if (row.chosenBudget) out << formatDouble(*row.chosenBudget);
        if (theoremMode) {
            out << ',';
            if (row.certificate) out << formatDouble(row.certificate->klTerm);
            out << ',';
            if (row.certificate) out << formatDouble(row.certificate->trueRegret);
            out << ',';
            if (row.certificate) out << formatDouble(row.certificate->minBound);
        }
        out << ',' << csvField(row.error) << "\n";
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open " + path + " for writing");
    file << out.str();
    if (!file) throw ConfigError("write to " + path + " failed");
}

void writeSummaryCsv(const std::vector<SweepRow>& rows, const ExperimentConfig& cfg,
                     const std::string& path) {
    std::ostringstream out;
    out << "m,policy,n,mean_avg_reward,std_avg_reward\n";
    for (int m : cfg.sampleSizes) {
        for (const auto& policy : cfg.policies) {
            double sum = 0.0;
            double sumSq = 0.0;
            int n = 0;
            for (const auto& row : rows) {
                if (row.m != m || row.policy != policy || !row.error.empty()) continue;
                sum += row.avgReward;
                sumSq += row.avgReward * row.avgReward;
                ++n;
            }
            out << m << ',' << policy << ',' << n << ',';
            if (n > 0) out << formatDouble(sum / n);
            out << ',';
            if (n > 1) {
                double variance = (sumSq - sum * sum / n) / (n - 1);
                out << formatDouble(std::sqrt(std::max(variance, 0.0)));
            } else if (n == 1) {
                out << formatDouble(0.0);
            }
            out << "\n";
        }
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open " + path + " for writing");
    file << out.str();
    if (!file) throw ConfigError("write to " + path + " failed");
}

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    if (sampleSizes.empty()) throw ConfigError("experiment: sample_sizes must be non-empty");
    int prev = 1;
    for (int m : sampleSizes) {
        if (m < 2) throw ConfigError("experiment: every sample size must be at least 2");
        if (m <= prev) throw ConfigError("experiment: sample_sizes must be strictly increasing");
        prev = m;
    }
    if (runs < 1) throw ConfigError("experiment: runs must be at least 1");
    if (policies.empty()) throw ConfigError("experiment: policies must be non-empty");
    for (const auto& p : policies) {
        if (std::find(std::begin(kKnownPolicies), std::end(kKnownPolicies), p) ==
            std::end(kKnownPolicies))
            throw ConfigError("experiment: unknown policy '" + p + "'");
        if (std::count(policies.begin(), policies.end(), p) != 1)
            throw ConfigError("experiment: duplicate policy '" + p + "'");
    }
    if (mode != "fig3" && mode != "theorem")
        throw ConfigError("experiment: mode must be 'fig3' or 'theorem'");
    if (!(train.gamma > 0.0 && train.gamma < 1.0))
        throw ConfigError("experiment: gamma must lie in (0,1)");
    if (train.budgetCap < 0.0 || !std::isfinite(train.budgetCap))
        throw ConfigError("experiment: budget_cap must be finite and non-negative");
    if (!(train.tol > 0.0)) throw ConfigError("experiment: tol must be positive");
    if (train.maxIters < 1) throw ConfigError("experiment: max_iters must be at least 1");
    if (sparsityR < 1) throw ConfigError("experiment: sparsity_r must be at least 1");
    if (!(sparsityK > 0.0)) throw ConfigError("experiment: sparsity_k must be positive");
    if (!(discount > 0.0 && discount < 1.0))
        throw ConfigError("experiment: discount must lie in (0,1)");
}

ExperimentConfig loadExperimentConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        ExperimentConfig cfg;
        const auto& grid = j.at("grid");
        if (grid.is_string()) {
            auto gridPath = std::filesystem::path(path).parent_path() / grid.get<std::string>();
            cfg.grid = loadGridSpec(gridPath.string());
        } else if (grid.is_object()) {
            cfg.grid = gridSpecFromJson(grid);
        } else {
            throw ConfigError(path + ": grid must be an object or a path string");
        }
        if (j.contains("sample_sizes")) cfg.sampleSizes = j["sample_sizes"].get<std::vector<int>>();
        if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
        if (j.contains("train")) {
            const auto& t = j["train"];
            if (t.contains("gamma")) cfg.train.gamma = t["gamma"].get<double>();
            if (t.contains("budget_cap")) cfg.train.budgetCap = t["budget_cap"].get<double>();
            if (t.contains("tol")) cfg.train.tol = t["tol"].get<double>();
            if (t.contains("max_iters")) cfg.train.maxIters = t["max_iters"].get<int>();
        }
        if (j.contains("policies")) cfg.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("master_seed")) cfg.masterSeed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("out")) cfg.outPath = j["out"].get<std::string>();
        if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
        if (j.contains("sparsity_r")) cfg.sparsityR = j["sparsity_r"].get<int>();
        if (j.contains("sparsity_k")) cfg.sparsityK = j["sparsity_k"].get<double>();
        if (j.contains("discount")) cfg.discount = j["discount"].get<double>();
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

SweepResult runExperiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Mdp mdp = buildGridMdp(cfg.grid);
    std::shared_ptr<const FeatureMap> features = buildFeatureMap(cfg.grid, mdp);

    TrialContext ctx{cfg, mdp, features, {}, nullptr, 0.0, 0.0};
    Rsp targetRsp;
    if (cfg.mode == "theorem") {
        targetRsp.theta =
            syntheticSparseTheta(features->numFeatures, cfg.sparsityR, cfg.sparsityK,
                                 cfg.masterSeed);
        targetRsp.features = features;
        ctx.expertMatrix = policyMatrix(targetRsp);
        ctx.targetRsp = &targetRsp;
    } else {
        ValueIterationResult vi = valueIteration(mdp, cfg.discount, 1e-10);
        ctx.expertMatrix = deterministicPolicyMatrix(vi.policy, mdp.numActions);
    }
    ctx.targetReward = averageReward(mdp, ctx.expertMatrix);
    ctx.greedyReward =
        averageReward(mdp, deterministicPolicyMatrix(greedyPolicy(mdp), mdp.numActions));

    const std::size_t numTrials = cfg.sampleSizes.size() * static_cast<std::size_t>(cfg.runs);
    const std::size_t numPolicies = cfg.policies.size();
    SweepResult result;
    result.rows.resize(numTrials * numPolicies);

    std::atomic<std::size_t> nextTrial{0};
    auto worker = [&] {
        while (true) {
            std::size_t t = nextTrial.fetch_add(1);
            if (t >= numTrials) break;
            std::size_t mIdx = t / static_cast<std::size_t>(cfg.runs);
            int runIdx = static_cast<int>(t % static_cast<std::size_t>(cfg.runs));
            runTrial(ctx, mIdx, runIdx, &result.rows[t * numPolicies]);
        }
    };
    int workers = std::min<int>(workerCount(), static_cast<int>(numTrials));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::filesystem::path raw(cfg.outPath);
    std::filesystem::path summary = raw.parent_path() / (raw.stem().string() + "_summary.csv");
    result.rawPath = raw.string();
    result.summaryPath = summary.string();
    writeRawCsv(result.rows, cfg.mode == "theorem", result.rawPath);
    writeSummaryCsv(result.rows, cfg, result.summaryPath);
    return result;
}

}  // namespace rsplearn

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsplearn/gridworld.hpp"
#include "rsplearn/learner.hpp"

namespace rsplearn {

/// Sweep design: which grid, which sample sizes, how many repetitions, which
/// policies, and how training is configured.
///
/// mode "fig3": expert = deterministic value-iteration policy.
/// mode "theorem": expert = synthetic sparse RSP theta* (sparsityR nonzero
/// components with magnitudes in [K/2, K], drawn from masterSeed); each
/// learned-policy row additionally carries a regret certificate.
struct ExperimentConfig {
    GridSpec grid;
    std::vector<int> sampleSizes = {50, 100, 200, 400, 800, 1600, 3200, 6400};
    int runs = 100;
    TrainConfig train;
    std::vector<std::string> policies = {"target", "l1", "unregularized", "greedy"};
    std::uint64_t masterSeed = 0;
    std::string outPath = "results.csv";
    std::string mode = "fig3";
    int sparsityR = 4;
    double sparsityK = 4.0;
    double discount = 0.95;  // expert value iteration (fig3 mode)

    /// Sample sizes strictly increasing and >= 2, runs >= 1, known policy
    /// names and mode. Throws ConfigError.
    void validate() const;
};

ExperimentConfig loadExperimentConfig(const std::string& path);

struct CertificateSummary {
    double klTerm = 0.0;
    double trueRegret = 0.0;
    double minBound = 0.0;
};

struct SweepRow {
    int m = 0;
    int run = 0;
    std::string policy;
    double avgReward = 0.0;
    std::optional<double> holdoutLoss;    // l1 rows only
    std::optional<double> chosenBudget;   // l1 rows only
    std::string error;                    // non-empty when the trial failed
    std::optional<CertificateSummary> certificate;  // theorem mode, learned rows
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string rawPath;
    std::string summaryPath;
};

/// Runs the sweep and writes the per-trial CSV to cfg.outPath plus a
/// mean/standard-deviation summary CSV alongside it (suffix `_summary`).
/// Per-trial seed: masterSeed XOR splitmixMix((mIndex << 32) | runIndex).
/// Trials run on a worker pool (RSPLEARN_WORKERS overrides the size); results
/// are merged in (m, run, policy) order, never completion order, so output
/// bytes are scheduling-independent. Trial failures are recorded in the `error`
/// column and the sweep continues.
SweepResult runExperiment(const ExperimentConfig& cfg);

}  // namespace rsplearn

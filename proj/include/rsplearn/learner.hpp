#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rsplearn/policy.hpp"

namespace rsplearn {

/// Euclidean projection onto {u : ||u||_1 <= radius} by soft-thresholding at
/// the level found from the sorted absolute values. Returns v unchanged when
/// it is already feasible. Throws std::invalid_argument for radius < 0.
Eigen::VectorXd projectOntoL1Ball(const Eigen::VectorXd& v, double radius);

/// Candidate budgets {0, 1, 2, 4, 8, ...} capped at `cap`, with the cap itself
/// appended when it is not a power of two.
std::vector<double> budgetGrid(double cap);

/// Average log-likelihood (1/m) sum_i log mu_theta(a_i|x_i) and, when grad is
/// non-null, its gradient. This is the exact objective fitConstrainedMle
/// maximizes, exposed so the gradient can be checked against finite
/// differences.
double averageLogLikelihood(const SampleSet& samples, const FeatureMap& features,
                            const Eigen::VectorXd& theta, Eigen::VectorXd* grad = nullptr);

struct TrainConfig {
    double gamma = 0.3;       // hold-out fraction
    double budgetCap = 16.0;  // largest l1 budget in the grid
    double tol = 1e-6;        // optimizer stopping tolerance (projected-gradient norm)
    int maxIters = 600;
    std::uint64_t seed = 0;  // split shuffle seed
};

struct OptimizerDiagnostics {
    double finalObjective = 0.0;  // average log-likelihood at the returned point
    int iterations = 0;
    double projGradNorm = 0.0;
    bool converged = false;
    std::string warning;  // set when maxIters hit with residual > 100*tol
};

struct FitResult {
    Rsp rsp;
    OptimizerDiagnostics diagnostics;
};

/// Maximizes the average log-likelihood subject to ||theta||_1 <= budget by
/// projected gradient ascent with Armijo backtracking. budget may be
/// +infinity (projection skipped). Non-convergence is reported in the
/// diagnostics, never thrown.
FitResult fitConstrainedMle(const SampleSet& samples,
                            std::shared_ptr<const FeatureMap> features,
                            double budget, double tol, int maxIters);

struct TrainedPolicy {
    Rsp rsp;
    double chosenBudget = 0.0;
    std::vector<std::pair<double, double>> perBudgetHoldout;  // (B, hold-out loss)
    OptimizerDiagnostics diagnostics;                         // of the chosen fit
};

/// The full train/validate loop: seeded shuffle, split into the first
/// ceil((1-gamma)m) samples and the rest, fit each budget on the first part,
/// pick the budget with the smallest hold-out sample log-loss (ties to the
/// smaller budget). Throws std::invalid_argument when either part is empty.
TrainedPolicy trainAlgorithm1(const SampleSet& samples,
                              std::shared_ptr<const FeatureMap> features,
                              const TrainConfig& config);

}  // namespace rsplearn

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rsplearn/mdp.hpp"

namespace rsplearn {

/// State chain P_mu(y|x) = sum_a mu(a|x) P(y|x,a) induced by acting with
/// `policy` in `mdp`. Throws ConfigError on dimension mismatch.
Eigen::MatrixXd inducedChain(const Mdp& mdp, const PolicyMatrix& policy);

/// Unique stationary distribution of a row-stochastic chain, by direct solve
/// of (I - P)' with one equation replaced by the normalization constraint.
///
/// Near-decomposable chains (legitimate here: deterministic grid policies)
/// produce solutions with entries as low as -1e-7 even in exact arithmetic on
/// the rounded P, so small negatives are clamped and the vector re-polished;
/// NotErgodicError is reserved for rank deficiency (sigma_min/sigma_max
/// < 1e-13), substantially negative mass (< -1e-6), or a final balance
/// residual above 1e-8.
Eigen::VectorXd stationaryDistribution(const Eigen::MatrixXd& chain);

/// Exact long-run average reward sum_{x,a} pi(x) mu(a|x) R(x,a).
/// Propagates NotErgodicError from the stationary solve.
double averageReward(const Mdp& mdp, const PolicyMatrix& policy);

struct ValueIterationResult {
    std::vector<int> policy;  // greedy action per state at the fixed point
    Eigen::VectorXd values;
    int iterations = 0;
    double residual = 0.0;  // final max-norm change
};

/// Discounted value iteration; stops when successive value vectors differ by
/// less than tol in max-norm. Ties in the final argmax break to the smaller
/// action index. Throws ConvergenceError if maxIters is exhausted.
ValueIterationResult valueIteration(const Mdp& mdp, double discount, double tol,
                                    int maxIters = 200000);

}  // namespace rsplearn

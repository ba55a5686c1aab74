#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace rsplearn {

/// Finite MDP with dense transition kernel and one-step rewards.
///
/// Layout (also the on-disk JSON layout):
///   transition[(x*numActions + a)*numStates + y] = P(y | x, a)
///   reward[x*numActions + a]                     = R(x, a)
struct Mdp {
    int numStates = 0;
    int numActions = 0;
    std::vector<double> transition;
    std::vector<double> reward;

    double p(int x, int a, int y) const {
        return transition[(static_cast<std::size_t>(x) * numActions + a) * numStates + y];
    }
    double& p(int x, int a, int y) {
        return transition[(static_cast<std::size_t>(x) * numActions + a) * numStates + y];
    }
    double r(int x, int a) const {
        return reward[static_cast<std::size_t>(x) * numActions + a];
    }
    double& r(int x, int a) {
        return reward[static_cast<std::size_t>(x) * numActions + a];
    }

    /// max over (x,a) of |R(x,a)|.
    double rMax() const;

    /// Checks sizes, row-stochasticity of every P(.|x,a) within 1e-12,
    /// non-negativity, and finite rewards. Throws ConfigError.
    void validate() const;
};

/// Row-stochastic state->action matrix: row x is the action distribution at x.
/// Both deterministic policies (one-hot rows) and RSPs reduce to this form.
using PolicyMatrix = Eigen::MatrixXd;

/// One-hot PolicyMatrix for a deterministic policy given as action indices.
PolicyMatrix deterministicPolicyMatrix(const std::vector<int>& actions, int numActions);

}  // namespace rsplearn

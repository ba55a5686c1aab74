#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "rsplearn/markov.hpp"
#include "rsplearn/mdp.hpp"

namespace rsplearn {

/// Feature vectors phi(x,a) in [0,1]^n, stored flat:
///   values[(x*numActions + a)*numFeatures + i] = phi_i(x, a)
struct FeatureMap {
    int numStates = 0;
    int numActions = 0;
    int numFeatures = 0;
    std::vector<double> values;

    Eigen::Map<const Eigen::VectorXd> phi(int x, int a) const {
        return {values.data() +
                    (static_cast<std::size_t>(x) * numActions + a) * numFeatures,
                numFeatures};
    }

    /// Checks sizes and the [0,1] component bound. Throws ConfigError.
    void validate() const;
};

/// Boltzmann randomized stationary policy mu_theta(a|x) over a feature map:
/// mu_theta(a|x) proportional to exp(theta . phi(x,a)).
struct Rsp {
    Eigen::VectorXd theta;
    std::shared_ptr<const FeatureMap> features;
};

/// softmax_a of theta.phi(x,a), computed with max-logit subtraction.
Eigen::VectorXd actionDistribution(const Rsp& rsp, int x);

/// All action distributions stacked into a row-stochastic matrix.
PolicyMatrix policyMatrix(const Rsp& rsp);

/// Expert demonstrations: states i.i.d. from the expert's stationary
/// distribution, actions from the expert's action distribution.
struct SampleSet {
    std::uint64_t seed = 0;
    std::vector<std::pair<int, int>> pairs;  // (state, action)
};

/// Draws m demonstration pairs; deterministic per seed (inverse-CDF sampling
/// from a SplitMix64 stream). Propagates NotErgodicError from the expert chain.
SampleSet sampleDemonstrations(const Mdp& mdp, const PolicyMatrix& expert, int m,
                               std::uint64_t seed);

/// Exact expected log-loss of `rsp` under the reference policy's stationary
/// state-action distribution (full enumeration, natural log). Probabilities
/// are floored at 1e-300 before the log: softmax weights underflow to 0 for
/// extreme logits, and that rounding must not read as an infinite loss.
double logLoss(const Rsp& rsp, const Rsp& reference, const Mdp& mdp);

/// (1/m) sum_i -log mu(a_i|x_i), natural log, with the same 1e-300 floor as
/// logLoss. Throws std::invalid_argument on an empty sample set.
double sampleLogLoss(const Rsp& rsp, const SampleSet& samples);

/// KL(p || q) in nats with the 0 log 0 = 0 convention; +infinity when p puts
/// mass where q has none.
double klDivergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// KL between the two policies' action distributions averaged over the base
/// policy's stationary state distribution.
double averagedKl(const Rsp& base, const Rsp& other, const Mdp& mdp);

}  // namespace rsplearn

#include "rsplearn/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsplearn/errors.hpp"
#include "rsplearn/markov.hpp"
#include "rsplearn/rng.hpp"

namespace rsplearn {

namespace {

// Probabilities are floored here before logs. Softmax weights can underflow
// to exactly 0.0 when logits differ by more than ~745; that is rounding, not
// a structural zero, so it must not produce an infinite loss.
constexpr double kLogFloor = 1e-300;

}  // namespace

void FeatureMap::validate() const {
    if (numStates <= 0 || numActions <= 0 || numFeatures <= 0)
        throw ConfigError("featureMap: dimensions must be positive");
    const auto want = static_cast<std::size_t>(numStates) * static_cast<std::size_t>(numActions) *
                      static_cast<std::size_t>(numFeatures);
    if (values.size() != want)
        throw ConfigError("featureMap: value array has wrong length");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError("featureMap: feature values must lie in [0,1]");
}

Eigen::VectorXd actionDistribution(const Rsp& rsp, int x) {
    const FeatureMap& fm = *rsp.features;
    if (x < 0 || x >= fm.numStates)
        throw std::invalid_argument("actionDistribution: state index out of range");
    if (rsp.theta.size() != fm.numFeatures)
        throw ConfigError("actionDistribution: theta length does not match the feature map");
    Eigen::VectorXd logits(fm.numActions);
    for (int a = 0; a < fm.numActions; ++a) logits(a) = rsp.theta.dot(fm.phi(x, a));
    // Shifting by the max leaves the distribution unchanged and makes the
    // largest exponent 0, so the sum cannot overflow.
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd w = logits.array().exp();
    return w / w.sum();
}

PolicyMatrix policyMatrix(const Rsp& rsp) {
    const FeatureMap& fm = *rsp.features;
    PolicyMatrix mu(fm.numStates, fm.numActions);
    for (int x = 0; x < fm.numStates; ++x) mu.row(x) = actionDistribution(rsp, x).transpose();
    return mu;
}

SampleSet sampleDemonstrations(const Mdp& mdp, const PolicyMatrix& expert, int m,
                               std::uint64_t seed) {
    if (m < 0) throw std::invalid_argument("sampleDemonstrations: m must be non-negative");
    if (expert.rows() != mdp.numStates || expert.cols() != mdp.numActions)
        throw ConfigError("sampleDemonstrations: expert dimensions do not match the MDP");
    Eigen::VectorXd pi = stationaryDistribution(inducedChain(mdp, expert));

    // Cumulative tables for inverse-CDF draws. The final entry is forced to 1
    // so accumulated rounding can never push a draw past the table.
    std::vector<double> stateCdf(static_cast<std::size_t>(mdp.numStates));
    double acc = 0.0;
    for (int x = 0; x < mdp.numStates; ++x) {
        acc += pi(x);
        stateCdf[static_cast<std::size_t>(x)] = acc;
    }
    stateCdf.back() = 1.0;
    std::vector<double> actionCdf(static_cast<std::size_t>(mdp.numStates) *
                                  static_cast<std::size_t>(mdp.numActions));
    for (int x = 0; x < mdp.numStates; ++x) {
        acc = 0.0;
        for (int a = 0; a < mdp.numActions; ++a) {
            acc += expert(x, a);
            actionCdf[static_cast<std::size_t>(x) * mdp.numActions + a] = acc;
        }
        actionCdf[static_cast<std::size_t>(x) * mdp.numActions + mdp.numActions - 1] = 1.0;
    }

    auto invert = [](const double* cdf, int n, double u) {
        int lo = 0;
        int hi = n - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (cdf[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    };

    SampleSet out;
    out.seed = seed;
    out.pairs.reserve(static_cast<std::size_t>(m));
    SplitMix64 rng(seed);
    for (int i = 0; i < m; ++i) {
        int x = invert(stateCdf.data(), mdp.numStates, rng.nextDouble());
        int a = invert(&actionCdf[static_cast<std::size_t>(x) * mdp.numActions], mdp.numActions,
                       rng.nextDouble());
        out.pairs.emplace_back(x, a);
    }
    return out;
}

double logLoss(const Rsp& rsp, const Rsp& reference, const Mdp& mdp) {
    PolicyMatrix ref = policyMatrix(reference);
    Eigen::VectorXd pi = stationaryDistribution(inducedChain(mdp, ref));
    double total = 0.0;
    for (int x = 0; x < mdp.numStates; ++x) {
        if (pi(x) == 0.0) continue;
        Eigen::VectorXd mu = actionDistribution(rsp, x);
        for (int a = 0; a < mdp.numActions; ++a) {
            double weight = pi(x) * ref(x, a);
            if (weight == 0.0) continue;
            total -= weight * std::log(std::max(mu(a), kLogFloor));
        }
    }
    return total;
}

double sampleLogLoss(const Rsp& rsp, const SampleSet& samples) {
    if (samples.pairs.empty())
        throw std::invalid_argument("sampleLogLoss: sample set is empty");
    const FeatureMap& fm = *rsp.features;
    double total = 0.0;
    int lastState = -1;
    Eigen::VectorXd mu;
    for (auto [x, a] : samples.pairs) {
        if (a < 0 || a >= fm.numActions)
            throw std::invalid_argument("sampleLogLoss: action index out of range");
        if (x != lastState) {
            mu = actionDistribution(rsp, x);
            lastState = x;
        }
        total -= std::log(std::max(mu(a), kLogFloor));
    }
    return total / static_cast<double>(samples.pairs.size());
}

double klDivergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("klDivergence: dimension mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < -1e-12 || q(i) < -1e-12)
            throw std::invalid_argument("klDivergence: negative probability");
        if (p(i) <= 0.0) continue;
        if (q(i) <= 0.0) return std::numeric_limits<double>::infinity();
        total += p(i) * std::log(p(i) / q(i));
    }
    return std::max(total, 0.0);
}

double averagedKl(const Rsp& base, const Rsp& other, const Mdp& mdp) {
    Eigen::VectorXd pi = stationaryDistribution(inducedChain(mdp, policyMatrix(base)));
    double total = 0.0;
    for (int x = 0; x < mdp.numStates; ++x) {
        if (pi(x) == 0.0) continue;
        double d = klDivergence(actionDistribution(base, x), actionDistribution(other, x));
        if (std::isinf(d)) return d;
        total += pi(x) * d;
    }
    return total;
}

}  // namespace rsplearn

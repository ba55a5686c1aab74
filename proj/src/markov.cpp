#include "rsplearn/markov.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <string>

#include "rsplearn/errors.hpp"

namespace rsplearn {

namespace {

std::string describe(const char* what, double value) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s (%.3e)", what, value);
    return buf;
}

}  // namespace

double Mdp::rMax() const {
    double m = 0.0;
    for (double v : reward) m = std::max(m, std::abs(v));
    return m;
}

void Mdp::validate() const {
    if (numStates <= 0 || numActions <= 0)
        throw ConfigError("mdp: numStates and numActions must be positive");
    const auto S = static_cast<std::size_t>(numStates);
    const auto H = static_cast<std::size_t>(numActions);
    if (transition.size() != S * H * S)
        throw ConfigError("mdp: transition array has wrong length");
    if (reward.size() != S * H)
        throw ConfigError("mdp: reward array has wrong length");
    for (int x = 0; x < numStates; ++x) {
        for (int a = 0; a < numActions; ++a) {
            double sum = 0.0;
            for (int y = 0; y < numStates; ++y) {
                double v = p(x, a, y);
                if (v < 0.0) throw ConfigError("mdp: negative transition probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw ConfigError(describe("mdp: transition row does not sum to 1", sum));
        }
    }
    for (double v : reward)
        if (!std::isfinite(v)) throw ConfigError("mdp: non-finite reward");
}

PolicyMatrix deterministicPolicyMatrix(const std::vector<int>& actions, int numActions) {
    PolicyMatrix mu = PolicyMatrix::Zero(static_cast<Eigen::Index>(actions.size()), numActions);
    for (std::size_t x = 0; x < actions.size(); ++x) {
        int a = actions[x];
        if (a < 0 || a >= numActions)
            throw ConfigError("policy: action index out of range");
        mu(static_cast<Eigen::Index>(x), a) = 1.0;
    }
    return mu;
}

Eigen::MatrixXd inducedChain(const Mdp& mdp, const PolicyMatrix& policy) {
    if (policy.rows() != mdp.numStates || policy.cols() != mdp.numActions)
        throw ConfigError("inducedChain: policy dimensions do not match the MDP");
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(mdp.numStates, mdp.numStates);
    for (int x = 0; x < mdp.numStates; ++x)
        for (int a = 0; a < mdp.numActions; ++a) {
            double w = policy(x, a);
            if (w == 0.0) continue;
            for (int y = 0; y < mdp.numStates; ++y) chain(x, y) += w * mdp.p(x, a, y);
        }
    return chain;
}

Eigen::VectorXd stationaryDistribution(const Eigen::MatrixXd& chain) {
    const Eigen::Index n = chain.rows();
    if (n == 0 || chain.cols() != n)
        throw ConfigError("stationaryDistribution: chain must be square and non-empty");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (chain.row(i).minCoeff() < -1e-12)
            throw ConfigError("stationaryDistribution: negative chain entry");
        if (std::abs(chain.row(i).sum() - 1.0) > 1e-12)
            throw ConfigError("stationaryDistribution: chain row does not sum to 1");
    }
    if (n == 1) return Eigen::VectorXd::Ones(1);

    Eigen::MatrixXd M = (Eigen::MatrixXd::Identity(n, n) - chain).transpose();
    M.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(n - 1) / sv(0) < 1e-13)
        throw NotErgodicError(describe(
            "stationary system is rank deficient; the chain has no unique "
            "stationary distribution. sigma_min/sigma_max",
            sv(0) > 0.0 ? sv(n - 1) / sv(0) : 0.0));
    Eigen::VectorXd pi = svd.solve(b);

    if (pi.minCoeff() < -1e-6)
        throw NotErgodicError(
            describe("stationary solve produced substantially negative mass", pi.minCoeff()));
    pi = pi.cwiseMax(0.0);
    double total = pi.sum();
    if (!(total > 0.0))
        throw NotErgodicError("stationary solve produced a zero vector");
    pi /= total;

    // A few power steps absorb the clamping perturbation; slow-mode error
    // contributes negligibly to the balance residual by construction.
    double residual = (chain.transpose() * pi - pi).lpNorm<1>();
    for (int it = 0; it < 50 && residual > 1e-12; ++it) {
        Eigen::VectorXd next = (chain.transpose() * pi).cwiseMax(0.0);
        next /= next.sum();
        double nextResidual = (chain.transpose() * next - next).lpNorm<1>();
        if (nextResidual >= residual) break;
        pi = next;
        residual = nextResidual;
    }
    if (residual > 1e-8)
        throw NotErgodicError(describe("stationary balance residual too large", residual));
    return pi;
}

double averageReward(const Mdp& mdp, const PolicyMatrix& policy) {
    Eigen::MatrixXd chain = inducedChain(mdp, policy);
    Eigen::VectorXd pi = stationaryDistribution(chain);
    double total = 0.0;
    for (int x = 0; x < mdp.numStates; ++x) {
        double rowMean = 0.0;
        for (int a = 0; a < mdp.numActions; ++a) rowMean += policy(x, a) * mdp.r(x, a);
        total += pi(x) * rowMean;
    }
    return total;
}

ValueIterationResult valueIteration(const Mdp& mdp, double discount, double tol, int maxIters) {
    if (!(discount > 0.0 && discount < 1.0))
        throw ConfigError("valueIteration: discount must be in (0,1)");
    if (!(tol > 0.0)) throw ConfigError("valueIteration: tol must be positive");

    const int S = mdp.numStates;
    const int H = mdp.numActions;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
    Eigen::VectorXd next(S);
    double residual = 0.0;
    int it = 0;
    for (; it < maxIters; ++it) {
        for (int x = 0; x < S; ++x) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < H; ++a) {
                double q = mdp.r(x, a);
                const double* row = &mdp.transition[(static_cast<std::size_t>(x) * H + a) * S];
                for (int y = 0; y < S; ++y) q += discount * row[y] * v(y);
                if (q > best) best = q;
            }
            next(x) = best;
        }
        residual = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        if (residual < tol) break;
    }
    if (residual >= tol)
        throw ConvergenceError(describe("value iteration did not converge; residual", residual));

    ValueIterationResult out;
    out.values = v;
    out.iterations = it + 1;
    out.residual = residual;
    out.policy.resize(S);
    for (int x = 0; x < S; ++x) {
        int bestA = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < H; ++a) {
            double q = mdp.r(x, a);
            const double* row = &mdp.transition[(static_cast<std::size_t>(x) * H + a) * S];
            for (int y = 0; y < S; ++y) q += discount * row[y] * v(y);
            if (q > best) {  // strict: ties keep the smaller action index
                best = q;
                bestA = a;
            }
        }
        out.policy[x] = bestA;
    }
    return out;
}

}  // namespace rsplearn

#include "rsplearn/perturbation.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "rsplearn/errors.hpp"
#include "rsplearn/markov.hpp"

namespace rsplearn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const char* what, double value) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s (%.3e)", what, value);
    return buf;
}

void checkSquarePair(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi) {
    if (chain.rows() == 0 || chain.rows() != chain.cols())
        throw std::invalid_argument("chain must be square and non-empty");
    if (pi.size() != chain.rows())
        throw std::invalid_argument("pi length does not match the chain");
}

double maxAbs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void validateGroupInverse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gi) {
    double r1 = maxAbs(a * gi * a - a);
    double r2 = maxAbs(gi * a * gi - gi);
    double r3 = maxAbs(a * gi - gi * a);
    double worst = std::max({r1, r2, r3});
    if (worst > 1e-8)
        throw ConditioningError(describe("group inverse fails its defining equations", worst));
}

}  // namespace

Eigen::MatrixXd fundamentalMatrix(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi) {
    checkSquarePair(chain, pi);
    const Eigen::Index n = chain.rows();
    Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(n, n) - chain + Eigen::VectorXd::Ones(n) * pi.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible())
        throw NotErgodicError("fundamental matrix does not exist: I - P + e pi' is singular");
    Eigen::MatrixXd z = lu.inverse();
    double residual = maxAbs(z * m - Eigen::MatrixXd::Identity(n, n));
    if (residual > 1e-8)
        throw NotErgodicError(describe("fundamental matrix inverse residual too large", residual));
    return z;
}

Eigen::MatrixXd groupInverse(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi) {
    Eigen::MatrixXd z = fundamentalMatrix(chain, pi);
    const Eigen::Index n = chain.rows();
    Eigen::MatrixXd gi = z - Eigen::VectorXd::Ones(n) * pi.transpose();
    validateGroupInverse(Eigen::MatrixXd::Identity(n, n) - chain, gi);
    return gi;
}

double ergodicCoefficient(const Eigen::MatrixXd& b) {
    if (b.rows() == 0 || b.rows() != b.cols())
        throw std::invalid_argument("ergodicCoefficient: matrix must be square and non-empty");
    Eigen::VectorXd sums = b.rowwise().sum();
    if (sums.maxCoeff() - sums.minCoeff() > 1e-8)
        throw std::invalid_argument("ergodicCoefficient: rows must have equal sums");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = i + 1; j < b.rows(); ++j)
            worst = std::max(worst, (b.row(i) - b.row(j)).lpNorm<1>());
    return 0.5 * worst;
}

const std::array<const char*, 4>& ConditionNumbers::names() {
    static const std::array<const char*, 4> kNames = {"fundamental_norm", "group_inverse_norm",
                                                      "ergodic_gap", "fundamental_tau"};
    return kNames;
}

ConditionNumbers ChainAnalysis::kappas() const {
    ConditionNumbers k;
    k.normZ = rowSumNormZ;
    k.normGI = rowSumNormGI;
    k.inverseGap = ergodicCoeffP >= 1.0 ? kInf : 1.0 / (1.0 - ergodicCoeffP);
    k.tauZ = ergodicCoeffZ;
    return k;
}

ChainAnalysis analyzeChain(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi) {
    checkSquarePair(chain, pi);
    const Eigen::Index n = chain.rows();
    ChainAnalysis out;
    out.fundamental = fundamentalMatrix(chain, pi);
    out.groupInverse = out.fundamental - Eigen::VectorXd::Ones(n) * pi.transpose();
    validateGroupInverse(Eigen::MatrixXd::Identity(n, n) - chain, out.groupInverse);
    out.ergodicCoeffP = ergodicCoefficient(chain);
    out.ergodicCoeffZ = ergodicCoefficient(out.fundamental);
    double tauGI = ergodicCoefficient(out.groupInverse);
    // tau ignores constant-row shifts and A# = Z - e pi', so the two must agree.
    if (std::abs(out.ergodicCoeffZ - tauGI) > 1e-8)
        throw ConditioningError(
            describe("tau(Z) and tau(A#) disagree", std::abs(out.ergodicCoeffZ - tauGI)));
    out.rowSumNormZ = out.fundamental.cwiseAbs().rowwise().sum().maxCoeff();
    out.rowSumNormGI = out.groupInverse.cwiseAbs().rowwise().sum().maxCoeff();
    return out;
}

PerturbationCheck perturbationBoundCheck(const Eigen::MatrixXd& chainA,
                                         const Eigen::MatrixXd& chainB) {
    if (chainA.rows() != chainB.rows() || chainA.cols() != chainB.cols())
        throw std::invalid_argument("perturbationBoundCheck: dimension mismatch");
    Eigen::VectorXd piA = stationaryDistribution(chainA);
    Eigen::VectorXd piB = stationaryDistribution(chainB);

    PerturbationCheck out;
    out.lhs = (piA - piB).lpNorm<1>();
    Eigen::MatrixXd e = chainA - chainB;
    out.perturbationInput = (e.transpose() * piA).lpNorm<1>();
    ConditionNumbers kappas = analyzeChain(chainB, piB).kappas();
    auto k = kappas.asArray();
    for (std::size_t i = 0; i < k.size(); ++i)
        out.rhs[i] = out.perturbationInput == 0.0 ? 0.0 : k[i] * out.perturbationInput;
    return out;
}

RegretCertificate regretCertificate(const Mdp& mdp, const Rsp& target, const Rsp& estimate) {
    const PolicyMatrix muT = policyMatrix(target);
    const PolicyMatrix muE = policyMatrix(estimate);
    if (muT.rows() != mdp.numStates || muT.cols() != mdp.numActions ||
        muE.rows() != mdp.numStates || muE.cols() != mdp.numActions)
        throw ConfigError("regretCertificate: policy dimensions do not match the MDP");
    const Eigen::MatrixXd chainT = inducedChain(mdp, muT);
    const Eigen::MatrixXd chainE = inducedChain(mdp, muE);
    const Eigen::VectorXd piT = stationaryDistribution(chainT);
    const Eigen::VectorXd piE = stationaryDistribution(chainE);

    double estimationSigned = 0.0;
    double perturbationSigned = 0.0;
    double rewardT = 0.0;
    double rewardE = 0.0;
    for (int x = 0; x < mdp.numStates; ++x) {
        double rowT = 0.0;
        double rowE = 0.0;
        for (int a = 0; a < mdp.numActions; ++a) {
            rowT += muT(x, a) * mdp.r(x, a);
            rowE += muE(x, a) * mdp.r(x, a);
        }
        rewardT += piT(x) * rowT;
        rewardE += piE(x) * rowE;
        estimationSigned += piT(x) * (rowT - rowE);
        perturbationSigned += (piT(x) - piE(x)) * rowE;
    }

    RegretCertificate out;
    out.trueRegret = std::abs(rewardT - rewardE);
    out.estimationTerm = std::abs(estimationSigned);
    out.perturbationTerm = std::abs(perturbationSigned);
    out.klTerm = averagedKl(target, estimate, mdp);
    out.rMax = mdp.rMax();
    out.kappas = analyzeChain(chainE, piE).kappas();

    double factor = std::isinf(out.klTerm)
                        ? kInf
                        : std::sqrt(2.0 * out.klTerm * std::log(2.0)) * out.rMax;
    auto k = out.kappas.asArray();
    std::size_t best = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        out.boundPerKappa[i] = factor == 0.0 ? 0.0 : factor * (1.0 + k[i]);
        if (out.boundPerKappa[i] < out.boundPerKappa[best]) best = i;
    }
    out.minKappaName = ConditionNumbers::names()[best];
    out.minBound = out.boundPerKappa[best];
    return out;
}

}  // namespace rsplearn

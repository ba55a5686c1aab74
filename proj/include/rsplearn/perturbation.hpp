#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "rsplearn/mdp.hpp"
#include "rsplearn/policy.hpp"

namespace rsplearn {

/// Fundamental matrix Z = (I - P + e pi')^{-1}. `pi` must be the stationary
/// distribution of `chain`. Throws NotErgodicError when the matrix is
/// numerically singular or the inverse fails its residual check.
Eigen::MatrixXd fundamentalMatrix(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi);

/// Group inverse of A = I - P via the identity A# = Z - e pi', validated
/// against the three defining axioms (A A# A = A, A# A A# = A#, A A# = A# A)
/// to 1e-8. Axiom failure throws ConditioningError.
Eigen::MatrixXd groupInverse(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi);

/// Ergodic coefficient tau(B) = 1/2 max_{i,j} sum_s |b_is - b_js| for a
/// matrix with equal row sums (checked to 1e-8; unequal sums throw
/// std::invalid_argument).
double ergodicCoefficient(const Eigen::MatrixXd& b);

/// The four sensitivity constants of the regret bound, evaluated on one chain.
struct ConditionNumbers {
    double normZ = 0.0;       // max absolute row sum of Z
    double normGI = 0.0;      // max absolute row sum of A#
    double inverseGap = 0.0;  // 1 / (1 - tau(P)), +infinity when tau(P) = 1
    double tauZ = 0.0;        // tau(Z) ( = tau(A#) )

    std::array<double, 4> asArray() const { return {normZ, normGI, inverseGap, tauZ}; }
    static const std::array<const char*, 4>& names();
};

struct ChainAnalysis {
    Eigen::MatrixXd fundamental;
    Eigen::MatrixXd groupInverse;
    double ergodicCoeffP = 0.0;
    double ergodicCoeffZ = 0.0;
    double rowSumNormZ = 0.0;
    double rowSumNormGI = 0.0;

    ConditionNumbers kappas() const;
};

/// Computes Z, A#, tau(P), tau(Z) and the row-sum norms in one pass.
/// Asserts tau(Z) = tau(A#) within 1e-8 (ConditioningError otherwise).
ChainAnalysis analyzeChain(const Eigen::MatrixXd& chain, const Eigen::VectorXd& pi);

struct PerturbationCheck {
    double lhs = 0.0;                    // ||pi_A - pi_B||_1
    double perturbationInput = 0.0;      // ||pi_A' (P_A - P_B)||_1
    std::array<double, 4> rhs{};         // kappa_i(chain_B) * perturbationInput
};

/// Both sides of the stationary-perturbation bound
/// ||pi_A - pi_B||_1 <= kappa(B) ||pi_A' E||_1, E = P_A - P_B.
PerturbationCheck perturbationBoundCheck(const Eigen::MatrixXd& chainA,
                                         const Eigen::MatrixXd& chainB);

/// End-to-end regret certificate for an estimated policy against the target.
/// All quantities are exact at desk scale (full enumeration, exact stationary
/// distributions).
struct RegretCertificate {
    double klTerm = 0.0;       // averaged KL of estimate from target, nats
    double trueRegret = 0.0;   // |Rbar(target) - Rbar(estimate)|
    double estimationTerm = 0.0;
    double perturbationTerm = 0.0;
    double rMax = 0.0;
    ConditionNumbers kappas;   // evaluated on the estimated chain
    std::array<double, 4> boundPerKappa{};  // sqrt(2 kl log2) Rmax (1 + kappa)
    std::string minKappaName;  // variant attaining the smallest finite bound
    double minBound = 0.0;
};

RegretCertificate regretCertificate(const Mdp& mdp, const Rsp& target, const Rsp& estimate);

}  // namespace rsplearn

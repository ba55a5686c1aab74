#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rsplearn/errors.hpp"
#include "rsplearn/markov.hpp"
#include "rsplearn/policy.hpp"

using namespace rsplearn;

namespace {

std::shared_ptr<FeatureMap> singleStateFeatures(int numActions, int numFeatures) {
    auto fm = std::make_shared<FeatureMap>();
    fm->numStates = 1;
    fm->numActions = numActions;
    fm->numFeatures = numFeatures;
    fm->values.assign(static_cast<std::size_t>(numActions) * numFeatures, 0.0);
    return fm;
}

Mdp singleStateMdp(int numActions) {
    Mdp mdp;
    mdp.numStates = 1;
    mdp.numActions = numActions;
    mdp.transition.assign(static_cast<std::size_t>(numActions), 1.0);
    mdp.reward.assign(static_cast<std::size_t>(numActions), 0.0);
    return mdp;
}

}  // namespace

TEST_CASE("feature map validation enforces the unit interval") {
    SplitMix64 rng(51);
    auto fm = oracles::randomFeatureMap(rng, 3, 2, 4);
    CHECK_NOTHROW(fm->validate());
    fm->values[5] = 1.5;
    CHECK_THROWS_AS(fm->validate(), ConfigError);
    fm->values[5] = -0.1;
    CHECK_THROWS_AS(fm->validate(), ConfigError);
    fm->values[5] = 0.5;
    fm->values.pop_back();
    CHECK_THROWS_AS(fm->validate(), ConfigError);
}

TEST_CASE("zero parameters give the uniform action distribution") {
    SplitMix64 rng(52);
    auto fm = oracles::randomFeatureMap(rng, 4, 5, 3);
    Rsp rsp{Eigen::VectorXd::Zero(3), fm};
    for (int x = 0; x < 4; ++x) {
        Eigen::VectorXd mu = actionDistribution(rsp, x);
        for (int a = 0; a < 5; ++a) CHECK(mu(a) == doctest::Approx(0.2).epsilon(1e-14));
    }
}

TEST_CASE("identical features across actions give uniform regardless of theta") {
    auto fm = std::make_shared<FeatureMap>();
    fm->numStates = 2;
    fm->numActions = 3;
    fm->numFeatures = 2;
    fm->values.clear();
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 3; ++a) {
            fm->values.push_back(0.3 + 0.1 * x);
            fm->values.push_back(0.7);
        }
    SplitMix64 rng(53);
    Rsp rsp{oracles::randomTheta(rng, 2, 5.0), fm};
    Eigen::VectorXd mu = actionDistribution(rsp, 1);
    for (int a = 0; a < 3; ++a) CHECK(mu(a) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("two-action logistic example") {
    auto fm = singleStateFeatures(2, 1);
    fm->values = {1.0, 0.0};
    Rsp rsp{Eigen::VectorXd::Constant(1, std::log(3.0)), fm};
    Eigen::VectorXd mu = actionDistribution(rsp, 0);
    CHECK(mu(0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(mu(1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax is invariant to shifting all logits by a constant") {
    // A feature that is constant across actions adds the same amount to every
    // logit, so enabling it must not change the distribution.
    SplitMix64 rng(54);
    for (int trial = 0; trial < 10; ++trial) {
        auto fm = std::make_shared<FeatureMap>();
        fm->numStates = 1;
        fm->numActions = 4;
        fm->numFeatures = 3;
        double shared = rng.nextDouble();
        for (int a = 0; a < 4; ++a) {
            fm->values.push_back(rng.nextDouble());
            fm->values.push_back(rng.nextDouble());
            fm->values.push_back(shared);
        }
        Eigen::VectorXd theta = oracles::randomTheta(rng, 3, 3.0);
        Eigen::VectorXd withShift = theta;
        theta(2) = 0.0;
        Eigen::VectorXd base = actionDistribution(Rsp{theta, fm}, 0);
        Eigen::VectorXd shifted = actionDistribution(Rsp{withShift, fm}, 0);
        for (int a = 0; a < 4; ++a)
            CHECK(base(a) == doctest::Approx(shifted(a)).epsilon(1e-12));
    }
}

TEST_CASE("action distributions sum to one for extreme parameters") {
    SplitMix64 rng(55);
    auto fm = oracles::randomFeatureMap(rng, 3, 4, 5);
    Rsp rsp{oracles::randomTheta(rng, 5, 400.0), fm};
    for (int x = 0; x < 3; ++x) {
        Eigen::VectorXd mu = actionDistribution(rsp, x);
        CHECK(std::isfinite(mu.sum()));
        CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mu.minCoeff() >= 0.0);
    }
}

TEST_CASE("sampling zero demonstrations yields an empty set") {
    SplitMix64 rng(56);
    Mdp mdp = oracles::randomErgodicMdp(rng, 3, 2);
    SampleSet s = sampleDemonstrations(mdp, Eigen::MatrixXd::Constant(3, 2, 0.5), 0, 9);
    CHECK(s.pairs.empty());
    CHECK(s.seed == 9);
}

TEST_CASE("single-state deterministic expert repeats one pair") {
    Mdp mdp = singleStateMdp(3);
    PolicyMatrix expert = deterministicPolicyMatrix({2}, 3);
    SampleSet s = sampleDemonstrations(mdp, expert, 25, 4);
    REQUIRE(s.pairs.size() == 25);
    for (auto [x, a] : s.pairs) {
        CHECK(x == 0);
        CHECK(a == 2);
    }
}

TEST_CASE("sampled state and action frequencies match the stationary joint") {
    Mdp mdp;
    mdp.numStates = 2;
    mdp.numActions = 2;
    // Both actions share the kernel, so the chain is fixed regardless of the
    // expert mix: [[0.9, 0.1], [0.2, 0.8]] with pi = (2/3, 1/3).
    mdp.transition = {0.9, 0.1, 0.9, 0.1, 0.2, 0.8, 0.2, 0.8};
    mdp.reward = {0, 0, 0, 0};
    PolicyMatrix expert(2, 2);
    expert << 0.3, 0.7, 0.6, 0.4;

    SampleSet s = sampleDemonstrations(mdp, expert, 60000, 123);
    double state0 = 0.0;
    double state0Action0 = 0.0;
    for (auto [x, a] : s.pairs) {
        if (x == 0) {
            state0 += 1.0;
            if (a == 0) state0Action0 += 1.0;
        }
    }
    CHECK(std::abs(state0 / 60000.0 - 2.0 / 3.0) < 0.01);
    CHECK(std::abs(state0Action0 / state0 - 0.3) < 0.01);
}

TEST_CASE("sampling is deterministic per seed") {
    SplitMix64 rng(57);
    Mdp mdp = oracles::randomErgodicMdp(rng, 4, 3);
    auto fm = oracles::randomFeatureMap(rng, 4, 3, 2);
    PolicyMatrix expert = policyMatrix(Rsp{oracles::randomTheta(rng, 2, 1.0), fm});
    SampleSet a = sampleDemonstrations(mdp, expert, 200, 77);
    SampleSet b = sampleDemonstrations(mdp, expert, 200, 77);
    SampleSet c = sampleDemonstrations(mdp, expert, 200, 78);
    CHECK(a.pairs == b.pairs);
    CHECK(a.pairs != c.pairs);
}

TEST_CASE("log-loss of the uniform policy is log of the action count") {
    SplitMix64 rng(58);
    Mdp mdp = oracles::randomErgodicMdp(rng, 5, 4);
    auto fm = oracles::randomFeatureMap(rng, 5, 4, 3);
    Rsp uniform{Eigen::VectorXd::Zero(3), fm};
    CHECK(logLoss(uniform, uniform, mdp) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("log-loss of a policy against itself is its expected entropy") {
    SplitMix64 rng(59);
    Mdp mdp = oracles::randomErgodicMdp(rng, 4, 3);
    auto fm = oracles::randomFeatureMap(rng, 4, 3, 4);
    Rsp rsp{oracles::randomTheta(rng, 4, 2.0), fm};
    Eigen::VectorXd pi = stationaryDistribution(inducedChain(mdp, policyMatrix(rsp)));
    double entropy = 0.0;
    for (int x = 0; x < 4; ++x) {
        Eigen::VectorXd mu = actionDistribution(rsp, x);
        for (int a = 0; a < 3; ++a) entropy -= pi(x) * mu(a) * std::log(mu(a));
    }
    CHECK(logLoss(rsp, rsp, mdp) == doctest::Approx(entropy).epsilon(1e-12));
}

TEST_CASE("exact log-loss agrees with a large sampled estimate") {
    SplitMix64 rng(60);
    Mdp mdp = oracles::randomErgodicMdp(rng, 3, 3);
    auto fm = oracles::randomFeatureMap(rng, 3, 3, 3);
    Rsp reference{oracles::randomTheta(rng, 3, 1.0), fm};
    Rsp other{oracles::randomTheta(rng, 3, 1.0), fm};
    SampleSet s = sampleDemonstrations(mdp, policyMatrix(reference), 100000, 5);
    CHECK(std::abs(logLoss(other, reference, mdp) - sampleLogLoss(other, s)) < 0.01);
}

TEST_CASE("sample log-loss basics") {
    auto fm = singleStateFeatures(2, 1);
    fm->values = {1.0, 0.0};
    Rsp uniform{Eigen::VectorXd::Zero(1), fm};

    SampleSet one{0, {{0, 0}}};
    CHECK(sampleLogLoss(uniform, one) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    SampleSet mixed{0, {{0, 0}, {0, 1}, {0, 0}}};
    SampleSet doubledUp{0, {{0, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 1}, {0, 0}}};
    CHECK(sampleLogLoss(uniform, mixed) == sampleLogLoss(uniform, doubledUp));

    SampleSet empty{0, {}};
    CHECK_THROWS_AS(sampleLogLoss(uniform, empty), std::invalid_argument);
}

TEST_CASE("kl divergence on hand-checked pairs") {
    Eigen::VectorXd p(2), q(2);
    p << 0.5, 0.5;
    CHECK(klDivergence(p, p) == 0.0);

    q << 0.25, 0.75;
    double expect = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    CHECK(klDivergence(p, q) == doctest::Approx(expect).epsilon(1e-12));

    Eigen::VectorXd point(2), half(2);
    point << 1.0, 0.0;
    half << 0.5, 0.5;
    CHECK(klDivergence(point, half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::isinf(klDivergence(half, point)));
}

TEST_CASE("kl divergence is non-negative and vanishes only at equality") {
    // With natural-log KL the variation-distance inequality reads
    // D >= ||p - q||_1^2 / 2; the base-2 statement D_bits >= ||.||^2/(2 log 2)
    // is the same inequality after dividing by log 2.
    SplitMix64 rng(61);
    for (int trial = 0; trial < 10000; ++trial) {
        int n = 2 + static_cast<int>(rng.nextBounded(5));
        Eigen::VectorXd p(n), q(n);
        for (int i = 0; i < n; ++i) {
            p(i) = 0.01 + rng.nextDouble();
            q(i) = 0.01 + rng.nextDouble();
        }
        p /= p.sum();
        q /= q.sum();
        double d = klDivergence(p, q);
        double l1 = (p - q).lpNorm<1>();
        CHECK(d >= -1e-15);
        CHECK(d + 1e-12 >= 0.5 * l1 * l1);
        CHECK(d / std::log(2.0) + 1e-12 >= l1 * l1 / (2.0 * std::log(2.0)));
        CHECK(klDivergence(p, p) <= 1e-12);
    }
}

TEST_CASE("averaged kl at a single state is the plain divergence") {
    Mdp mdp = singleStateMdp(3);
    auto fm = singleStateFeatures(3, 2);
    fm->values = {0.1, 0.9, 0.5, 0.5, 0.9, 0.1};
    SplitMix64 rng(62);
    Rsp base{oracles::randomTheta(rng, 2, 2.0), fm};
    Rsp other{oracles::randomTheta(rng, 2, 2.0), fm};
    double direct = klDivergence(actionDistribution(base, 0), actionDistribution(other, 0));
    CHECK(averagedKl(base, other, mdp) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(averagedKl(base, base, mdp) == 0.0);
}

TEST_CASE("log-loss gap equals the averaged kl divergence") {
    SplitMix64 rng(63);
    for (int trial = 0; trial < 50; ++trial) {
        int numStates = 2 + static_cast<int>(rng.nextBounded(6));
        int numActions = 2 + static_cast<int>(rng.nextBounded(3));
        int numFeatures = 1 + static_cast<int>(rng.nextBounded(5));
        Mdp mdp = oracles::randomErgodicMdp(rng, numStates, numActions);
        auto fm = oracles::randomFeatureMap(rng, numStates, numActions, numFeatures);
        Rsp base{oracles::randomTheta(rng, numFeatures, 2.0), fm};
        Rsp other{oracles::randomTheta(rng, numFeatures, 2.0), fm};
        double gap = logLoss(other, base, mdp) - logLoss(base, base, mdp);
        CHECK(std::abs(averagedKl(base, other, mdp) - gap) <= 1e-10);
    }
}

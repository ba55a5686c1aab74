#include "rsplearn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rsplearn/errors.hpp"
#include "rsplearn/rng.hpp"

namespace rsplearn {

Eigen::VectorXd projectOntoL1Ball(const Eigen::VectorXd& v, double radius) {
    if (radius < 0.0) throw std::invalid_argument("projectOntoL1Ball: radius must be non-negative");
    if (radius == 0.0) return Eigen::VectorXd::Zero(v.size());
    if (v.lpNorm<1>() <= radius) return v;

    // Soft-threshold form of the projection: every magnitude shrinks by the
    // same lambda, chosen so the result lands exactly on the ball.
    Eigen::VectorXd u = v.cwiseAbs();
    std::sort(u.data(), u.data() + u.size(), std::greater<double>());
    double cumulative = 0.0;
    double lambda = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        cumulative += u(j);
        double candidate = (cumulative - radius) / static_cast<double>(j + 1);
        if (u(j) > candidate)
            lambda = candidate;
        else
            break;
    }
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double mag = std::abs(v(i)) - lambda;
        out(i) = mag > 0.0 ? (v(i) > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

std::vector<double> budgetGrid(double cap) {
    if (cap < 0.0) throw std::invalid_argument("budgetGrid: cap must be non-negative");
    if (std::isinf(cap)) throw std::invalid_argument("budgetGrid: cap must be finite");
    std::vector<double> grid{0.0};
    if (cap >= 1.0) {
        grid.push_back(1.0);
        for (double b = 2.0; b < cap; b *= 2.0) grid.push_back(b);
    }
    if (cap > 0.0 && cap != grid.back()) grid.push_back(cap);
    return grid;
}

namespace {

// Sufficient statistics of a sample set: per-state visit counts plus the
// count-weighted feature total. The likelihood depends on the samples only
// through these, so optimizer cost scales with distinct states, not with m.
struct Aggregate {
    std::vector<std::pair<int, double>> stateCounts;
    Eigen::VectorXd sumPhi;
    double total = 0.0;
};

Aggregate aggregate(const SampleSet& samples, const FeatureMap& fm) {
    std::map<int, double> perState;
    Aggregate agg;
    agg.sumPhi = Eigen::VectorXd::Zero(fm.numFeatures);
    for (auto [x, a] : samples.pairs) {
        if (x < 0 || x >= fm.numStates || a < 0 || a >= fm.numActions)
            throw std::invalid_argument("fitConstrainedMle: sample index out of range");
        perState[x] += 1.0;
        agg.sumPhi += fm.phi(x, a);
    }
    agg.stateCounts.assign(perState.begin(), perState.end());
    agg.total = static_cast<double>(samples.pairs.size());
    return agg;
}

// Average negative log-likelihood and, when grad is non-null, its gradient.
// Minimizing this is the constrained MLE.
double objective(const Aggregate& agg, const FeatureMap& fm, const Eigen::VectorXd& theta,
                 Eigen::VectorXd* grad) {
    double value = -theta.dot(agg.sumPhi);
    if (grad) *grad = -agg.sumPhi;
    Eigen::VectorXd logits(fm.numActions);
    for (auto [x, count] : agg.stateCounts) {
        for (int a = 0; a < fm.numActions; ++a) logits(a) = theta.dot(fm.phi(x, a));
        double shift = logits.maxCoeff();
        Eigen::VectorXd w = (logits.array() - shift).exp();
        double z = w.sum();
        value += count * (shift + std::log(z));
        if (grad)
            for (int a = 0; a < fm.numActions; ++a)
                grad->noalias() += (count * w(a) / z) * fm.phi(x, a);
    }
    if (grad) *grad /= agg.total;
    return value / agg.total;
}

Eigen::VectorXd project(const Eigen::VectorXd& v, double budget) {
    // +infinity budget means the unconstrained problem; the projection is the
    // identity there.
    return std::isinf(budget) ? v : projectOntoL1Ball(v, budget);
}

}  // namespace

double averageLogLikelihood(const SampleSet& samples, const FeatureMap& features,
                            const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    if (samples.pairs.empty())
        throw std::invalid_argument("averageLogLikelihood: sample set is empty");
    double value = -objective(aggregate(samples, features), features, theta, grad);
    if (grad) *grad = -*grad;
    return value;
}

FitResult fitConstrainedMle(const SampleSet& samples, std::shared_ptr<const FeatureMap> features,
                            double budget, double tol, int maxIters) {
    if (!features) throw std::invalid_argument("fitConstrainedMle: missing feature map");
    if (samples.pairs.empty())
        throw std::invalid_argument("fitConstrainedMle: sample set is empty");
    if (budget < 0.0 || std::isnan(budget))
        throw std::invalid_argument("fitConstrainedMle: budget must be non-negative");
    if (!(tol > 0.0)) throw std::invalid_argument("fitConstrainedMle: tol must be positive");
    if (maxIters <= 0) throw std::invalid_argument("fitConstrainedMle: maxIters must be positive");
    const FeatureMap& fm = *features;
    const Aggregate agg = aggregate(samples, fm);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(fm.numFeatures);
    Eigen::VectorXd grad(fm.numFeatures);
    double f = objective(agg, fm, theta, &grad);

    constexpr double kArmijo = 1e-4;
    double step = 1.0;
    double residual = (project(theta - grad, budget) - theta).norm();
    int it = 0;
    for (; it < maxIters && residual >= tol; ++it) {
        Eigen::VectorXd candidate;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            candidate = project(theta - step * grad, budget);
            double move = (candidate - theta).squaredNorm();
            if (move == 0.0) break;
            double fCandidate = objective(agg, fm, candidate, nullptr);
            if (fCandidate <= f - kArmijo * move / step) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent step at any tried length
        theta = candidate;
        f = objective(agg, fm, theta, &grad);
        step = std::min(step * 2.0, 1e12);
        residual = (project(theta - grad, budget) - theta).norm();
    }

    FitResult out;
    out.rsp.theta = theta;
    out.rsp.features = std::move(features);
    out.diagnostics.finalObjective = -f;  // reported as average log-likelihood
    out.diagnostics.iterations = it;
    out.diagnostics.projGradNorm = residual;
    out.diagnostics.converged = residual < tol;
    if (!out.diagnostics.converged && residual > 100.0 * tol) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "optimizer stopped after %d iterations with projected-gradient residual "
                      "%.3e (tol %.3e)",
                      it, residual, tol);
        out.diagnostics.warning = buf;
    }
    return out;
}

TrainedPolicy trainAlgorithm1(const SampleSet& samples, std::shared_ptr<const FeatureMap> features,
                              const TrainConfig& config) {
    const std::size_t m = samples.pairs.size();
    if (m < 2) throw std::invalid_argument("train: need at least two samples to split");
    if (!(config.gamma > 0.0 && config.gamma < 1.0))
        throw std::invalid_argument("train: gamma must lie in (0,1)");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(config.seed);
    shuffle(order, rng);

    const auto trainCount =
        static_cast<std::size_t>(std::ceil((1.0 - config.gamma) * static_cast<double>(m)));
    if (trainCount == 0 || trainCount >= m)
        throw std::invalid_argument("train: gamma leaves an empty training or hold-out part");
    SampleSet trainPart{samples.seed, {}};
    SampleSet holdPart{samples.seed, {}};
    trainPart.pairs.reserve(trainCount);
    holdPart.pairs.reserve(m - trainCount);
    for (std::size_t i = 0; i < m; ++i)
        (i < trainCount ? trainPart : holdPart).pairs.push_back(samples.pairs[order[i]]);

    TrainedPolicy out;
    double bestLoss = std::numeric_limits<double>::infinity();
    for (double budget : budgetGrid(config.budgetCap)) {
        FitResult fit = fitConstrainedMle(trainPart, features, budget, config.tol, config.maxIters);
        double loss = sampleLogLoss(fit.rsp, holdPart);
        out.perBudgetHoldout.emplace_back(budget, loss);
        if (loss < bestLoss) {  // strict: ties resolve to the smaller budget
            bestLoss = loss;
            out.chosenBudget = budget;
        }
    }

    FitResult finalFit = fitConstrainedMle(samples, std::move(features), out.chosenBudget,
                                           config.tol, config.maxIters);
    out.rsp = std::move(finalFit.rsp);
    out.diagnostics = finalFit.diagnostics;
    return out;
}

}  // namespace rsplearn

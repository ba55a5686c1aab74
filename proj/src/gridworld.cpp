#include "rsplearn/gridworld.hpp"

#include <cmath>

#include "rsplearn/errors.hpp"

namespace rsplearn {

namespace {

constexpr double kGaussNorm = 0.3989422804014327;  // 1/sqrt(2 pi)

// Unit displacement for each action; laterals are the two perpendicular
// neighbors of the current cell.
struct Move {
    int dx;
    int dy;
};
constexpr Move kMoves[4] = {{0, 1}, {1, 0}, {-1, 0}, {0, -1}};  // N, E, W, S

bool inside(const GridSpec& spec, int x, int y) {
    return x >= 0 && x < spec.width && y >= 0 && y < spec.height;
}

// Destination of a displacement with the bounce rule: off-grid collapses to
// the starting cell.
std::pair<int, int> land(const GridSpec& spec, int x, int y, int dx, int dy) {
    int nx = x + dx;
    int ny = y + dy;
    if (!inside(spec, nx, ny)) return {x, y};
    return {nx, ny};
}

}  // namespace

void GridSpec::validate() const {
    if (width <= 0 || height <= 0)
        throw ConfigError("grid: width and height must be positive");
    if (!(intendedProb > 0.0) || slipProb < 0.0)
        throw ConfigError("grid: probabilities out of range");
    if (std::abs(intendedProb + 2.0 * slipProb - 1.0) > 1e-12)
        throw ConfigError("grid: intendedProb + 2*slipProb must equal 1");
    for (const auto& w : rewardWaypoints)
        if (!inside(*this, w.x, w.y))
            throw ConfigError("grid: reward waypoint out of bounds");
    if (featureWaypoints.empty())
        throw ConfigError("grid: at least one feature waypoint is required");
    for (const auto& [wx, wy] : featureWaypoints)
        if (!inside(*this, wx, wy))
            throw ConfigError("grid: feature waypoint out of bounds");
}

GridSpec defaultGridSpec() {
    GridSpec spec;
    spec.rewardWaypoints = {{1, 1, 1.0}, {11, 1, 20.0}, {1, 11, 20.0}, {11, 11, 1.0}};
    for (int wy : {1, 3, 5, 7, 9, 11})
        for (int wx : {1, 3, 5, 7, 9, 11}) spec.featureWaypoints.emplace_back(wx, wy);
    return spec;
}

double rewardField(const GridSpec& spec, double yx, double yy) {
    double f = 0.0;
    for (const auto& w : spec.rewardWaypoints) {
        double dx = w.x - yx;
        double dy = w.y - yy;
        f += w.r * kGaussNorm * std::exp(-0.5 * (dx * dx + dy * dy));
    }
    return f;
}

Mdp buildGridMdp(const GridSpec& spec) {
    spec.validate();
    const int S = spec.width * spec.height;
    const int H = 4;
    Mdp mdp;
    mdp.numStates = S;
    mdp.numActions = H;
    mdp.transition.assign(static_cast<std::size_t>(S) * H * S, 0.0);
    mdp.reward.assign(static_cast<std::size_t>(S) * H, 0.0);

    std::vector<double> field(static_cast<std::size_t>(S));
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            field[static_cast<std::size_t>(spec.stateIndex(x, y))] = rewardField(spec, x, y);

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            int s = spec.stateIndex(x, y);
            for (int a = 0; a < H; ++a) {
                auto add = [&](int dx, int dy, double prob) {
                    auto [tx, ty] = land(spec, x, y, dx, dy);
                    mdp.p(s, a, spec.stateIndex(tx, ty)) += prob;
                };
                const Move mv = kMoves[a];
                add(mv.dx, mv.dy, spec.intendedProb);
                // Perpendicular neighbors of the current cell.
                add(mv.dy, mv.dx, spec.slipProb);
                add(-mv.dy, -mv.dx, spec.slipProb);
                double r = 0.0;
                for (int t = 0; t < S; ++t) {
                    double pr = mdp.p(s, a, t);
                    if (pr > 0.0) r += pr * field[static_cast<std::size_t>(t)];
                }
                mdp.r(s, a) = r;
            }
        }
    }
    mdp.validate();
    return mdp;
}

std::shared_ptr<FeatureMap> buildFeatureMap(const GridSpec& spec, const Mdp& mdp) {
    spec.validate();
    if (mdp.numStates != spec.width * spec.height || mdp.numActions != 4)
        throw ConfigError("buildFeatureMap: MDP does not match the grid spec");
    auto fm = std::make_shared<FeatureMap>();
    fm->numStates = mdp.numStates;
    fm->numActions = 4;
    fm->numFeatures = static_cast<int>(spec.featureWaypoints.size());
    fm->values.resize(static_cast<std::size_t>(fm->numStates) * 4 * fm->numFeatures);

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            int s = spec.stateIndex(x, y);
            for (int a = 0; a < 4; ++a) {
                auto [ix, iy] = land(spec, x, y, kMoves[a].dx, kMoves[a].dy);
                double* phi = &fm->values[(static_cast<std::size_t>(s) * 4 + a) * fm->numFeatures];
                for (int i = 0; i < fm->numFeatures; ++i) {
                    double dx = spec.featureWaypoints[static_cast<std::size_t>(i)].first - ix;
                    double dy = spec.featureWaypoints[static_cast<std::size_t>(i)].second - iy;
                    phi[i] = kGaussNorm * std::exp(-0.5 * (dx * dx + dy * dy));
                }
            }
        }
    }
    fm->validate();
    return fm;
}

std::vector<int> greedyPolicy(const Mdp& mdp) {
    std::vector<int> policy(static_cast<std::size_t>(mdp.numStates));
    for (int x = 0; x < mdp.numStates; ++x) {
        int bestA = 0;
        for (int a = 1; a < mdp.numActions; ++a)
            if (mdp.r(x, a) > mdp.r(x, bestA)) bestA = a;  // ties keep the lower index
        policy[static_cast<std::size_t>(x)] = bestA;
    }
    return policy;
}

}  // namespace rsplearn

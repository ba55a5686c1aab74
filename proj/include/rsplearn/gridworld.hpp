#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "rsplearn/mdp.hpp"
#include "rsplearn/policy.hpp"

namespace rsplearn {

/// Grid-world actions, also the deterministic tie-break order.
enum GridAction : int { kNorth = 0, kEast = 1, kWest = 2, kSouth = 3 };

struct RewardWaypoint {
    int x = 0;
    int y = 0;
    double r = 0.0;
};

/// Robot-navigation environment: width x height cells, four compass actions,
/// 0.8 intended / 0.1 lateral slip, wall bounce, and a Gaussian-bump reward
/// field anchored at the reward waypoints.
struct GridSpec {
    int width = 13;
    int height = 13;
    double intendedProb = 0.8;
    double slipProb = 0.1;
    std::vector<RewardWaypoint> rewardWaypoints;
    std::vector<std::pair<int, int>> featureWaypoints;

    int stateIndex(int x, int y) const { return x + width * y; }

    /// Bounds, probability structure (intended + 2*slip = 1), waypoint
    /// membership. Throws ConfigError.
    void validate() const;
};

/// The shipped default: 13x13, reward waypoints (1,1)=1, (11,1)=20, (1,11)=20,
/// (11,11)=1, feature waypoints on the 6x6 lattice {1,3,5,7,9,11}^2.
GridSpec defaultGridSpec();

/// Reward field f(y) = sum_w r_w (1/sqrt(2 pi)) exp(-||w - y||^2 / 2).
double rewardField(const GridSpec& spec, double yx, double yy);

/// States indexed x + width*y; action a moves to the intended neighbor with
/// probability intendedProb and to each cell lateral to the motion axis with
/// probability slipProb; any off-grid destination collapses onto the current
/// cell. R(x,a) is the transition-averaged reward field.
Mdp buildGridMdp(const GridSpec& spec);

/// phi_i(x,a) = unit-height Gaussian bump of feature waypoint i evaluated at
/// the intended (post-bounce) next cell; all components in (0, 1/sqrt(2 pi)].
std::shared_ptr<FeatureMap> buildFeatureMap(const GridSpec& spec, const Mdp& mdp);

/// Baseline maximizing one-step expected reward: argmax_a R(x,a) per state,
/// ties broken by action order North < East < West < South.
std::vector<int> greedyPolicy(const Mdp& mdp);

}  // namespace rsplearn

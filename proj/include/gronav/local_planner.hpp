#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gronav/reasoning.hpp"
#include "gronav/world.hpp"

namespace gronav {

/// Euclidean distance (m) from any point to the nearest obstacle cell,
/// precomputed once per grid. Infinity when the grid has no obstacles.
class DistanceField {
public:
    explicit DistanceField(const WorldGrid& grid);

    double clearance(Vec2 p) const;
    bool inside(Vec2 p) const { return grid_.in_bounds(p); }

private:
    const WorldGrid& grid_;
    std::vector<float> dist_;  // per cell, meters from cell center
    bool any_obstacle_{false};
};

/// Uniform sample grid over the intersection of the velocity box and the
/// one-tick acceleration window.
std::vector<std::pair<double, double>> admissible_velocities(const KinematicLimits& limits,
                                                             double v, double omega,
                                                             int v_samples, int omega_samples);

struct Rollout {
    double v{0.0};
    double omega{0.0};
    std::vector<Pose> poses;  // includes the start pose
    Vec2 endpoint;
};

/// Ideal (no-slip) unicycle propagation over [0, horizon] using exact arc
/// integration per step.
Rollout rollout(const RobotState& state, double v, double omega, double horizon, double dt);

/// rho1*head + rho2*dist + rho3*vel; nullopt when a rollout pose collides.
std::optional<double> base_objective(const Rollout& r, Vec2 goal, const DistanceField& field,
                                     const KinematicLimits& limits, const PlannerWeights& weights,
                                     double footprint_radius);

enum class FrontierSide { left, center, right };

struct FrontierCandidate {
    FrontierSide side{FrontierSide::center};
    Vec2 point;
};

struct FrontierPoint {
    FrontierSide side{FrontierSide::center};
    Vec2 point;
    std::string label;
    double tau{kEpsilonTau};  // floored at epsilon_tau
};

struct FrontierSet {
    std::vector<FrontierPoint> points;

    bool empty() const { return points.empty(); }
};

/// Candidate points at distance L and bearings {-alpha, 0, +alpha} from the
/// heading; out-of-map or on-obstacle points are dropped. An empty result
/// means the planner falls back to base DWA for this tick.
std::vector<FrontierCandidate> extract_frontiers(const RobotState& state, const WorldGrid& grid,
                                                 double lookahead, double half_angle);

/// Classifies each candidate's front patch through the backend and assigns
/// tau = max(table(label), epsilon_tau).
FrontierSet classify_frontiers(VlmBackend& backend, const std::vector<FrontierCandidate>& candidates,
                               const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                               const TraversabilityTable& table, double patch_size);

struct FrontierCost {
    double phi{0.0};
    FrontierSide chosen{FrontierSide::center};  // diagnostics; ties prefer C, L, R
};

/// phi = min over frontiers of d(endpoint, p) * tau(p).
FrontierCost frontier_cost(const Rollout& r, const FrontierSet& frontiers);

struct CommandChoice {
    double v{0.0};
    double omega{0.0};
    bool blocked{false};  // all rollouts rejected; command is (0, 0)
    double cost{0.0};
};

/// argmin of G = J + rho4 * phi over the sampled admissible velocities.
/// Tie-break: lower G, then higher v, then |omega| closer to 0, then
/// smaller omega. An empty frontier set drops the rho4 term for this tick.
CommandChoice select_command(const RobotState& state, Vec2 goal, const DistanceField& field,
                             const FrontierSet& frontiers, const PlannerWeights& weights,
                             const KinematicLimits& limits);

}  // namespace gronav

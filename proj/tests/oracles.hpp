#pragma once

// Independent reference implementations used to cross-check planner outputs.

#include <limits>
#include <vector>

#include "gronav/global_planner.hpp"
#include "gronav/local_planner.hpp"

namespace gronav::test {

struct BrutePlan {
    double cost{std::numeric_limits<double>::infinity()};
    std::vector<int> ids;
};

/// Exhaustive simple-path search for the minimum-cost waypoint sequence,
/// breaking cost ties by the lexicographically smallest id sequence. Only
/// viable on small graphs.
inline BrutePlan brute_force_best_plan(const WaypointGraph& g, double lambda_eff,
                                       const TraversabilityTable& table,
                                       const std::vector<TerrainClass>& classes) {
    BrutePlan best;
    std::vector<char> visited(g.size() + 1, 0);
    std::vector<int> path{g.start_id};
    visited[g.start_id] = 1;

    auto dfs = [&](auto&& self, int cur, double cost) -> void {
        if (cost > best.cost + 1e-9) return;
        if (cur == g.goal_id) {
            if (cost < best.cost - 1e-9 ||
                (cost <= best.cost + 1e-9 && (best.ids.empty() || path < best.ids))) {
                best.cost = cost;
                best.ids = path;
            }
            return;
        }
        for (const auto& e : g.edges[cur - 1]) {
            if (visited[e.to]) continue;
            visited[e.to] = 1;
            path.push_back(e.to);
            self(self, e.to, cost + edge_cost(e, lambda_eff, table, classes));
            path.pop_back();
            visited[e.to] = 0;
        }
    };
    dfs(dfs, g.start_id, 0.0);
    return best;
}

inline double plan_cost(const std::vector<int>& ids, const WaypointGraph& g, double lambda_eff,
                        const TraversabilityTable& table,
                        const std::vector<TerrainClass>& classes) {
    double cost = 0.0;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i)
        cost += edge_cost(*g.find_edge(ids[i], ids[i + 1]), lambda_eff, table, classes);
    return cost;
}

/// Plain dynamic-window selection without any frontier term: argmin of the
/// base objective with the same sampling and tie-break rules.
inline CommandChoice base_dwa_reference(const RobotState& state, Vec2 goal,
                                        const DistanceField& field,
                                        const PlannerWeights& weights,
                                        const KinematicLimits& limits) {
    const auto samples =
        admissible_velocities(limits, state.v, state.omega, weights.v_samples,
                              weights.omega_samples);
    CommandChoice choice;
    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [v, omega] : samples) {
        const auto r = rollout(state, v, omega, weights.horizon, weights.rollout_dt);
        const auto j = base_objective(r, goal, field, limits, weights, state.footprint_radius);
        if (!j) continue;
        const bool better =
            !found || *j < best ||
            (*j == best &&
             (v > choice.v ||
              (v == choice.v && (std::abs(omega) < std::abs(choice.omega) ||
                                 (std::abs(omega) == std::abs(choice.omega) &&
                                  omega < choice.omega)))));
        if (better) {
            best = *j;
            choice.v = v;
            choice.omega = omega;
            choice.cost = *j;
            found = true;
        }
    }
    if (!found) {
        choice.blocked = true;
        choice.v = std::max(0.0, state.v - limits.a_max * limits.dt);
        choice.omega = state.omega > 0.0
                           ? std::max(0.0, state.omega - limits.alpha_max * limits.dt)
                           : std::min(0.0, state.omega + limits.alpha_max * limits.dt);
        choice.cost = 0.0;
    }
    return choice;
}

}  // namespace gronav::test

#pragma once

#include <string>
#include <vector>

#include "gronav/reasoning.hpp"
#include "gronav/world.hpp"

namespace gronav {

struct WaypointEdge {
    int to{0};                         // 1-based marker id
    double length{0.0};                // m
    std::vector<std::uint8_t> labels;  // class ids sampled along the segment
};

/// Uniform marker lattice over the aerial view plus injected start/goal
/// markers. Ids are dense 1..M; edges are symmetric and obstacle-free.
struct WaypointGraph {
    std::vector<Vec2> positions;                    // positions[id-1]
    std::vector<std::vector<WaypointEdge>> edges;   // edges[id-1]
    double spacing{5.0};
    int start_id{0};
    int goal_id{0};

    int size() const { return static_cast<int>(positions.size()); }
    Vec2 position(int id) const { return positions[id - 1]; }
    const WaypointEdge* find_edge(int from, int to) const;
};

/// Worst-case class id of an edge: the label with maximum tau under the
/// given table (ties resolve to the lower class id).
std::uint8_t edge_worst_label(const WaypointEdge& edge, const TraversabilityTable& table,
                              const std::vector<TerrainClass>& classes);

/// length * (1 + lambda' * tau(worst-case label))
double edge_cost(const WaypointEdge& edge, double lambda_eff,
                 const TraversabilityTable& table, const std::vector<TerrainClass>& classes);

/// Symbolic marked aerial image: the graph plus the tau table snapshot it
/// was marked with. The raster form is rendered only for remote queries.
struct MarkedAerialImage {
    const WaypointGraph* graph{nullptr};
    TraversabilityTable table;
    int start_id{0};
    int goal_id{0};
};

struct WaypointPlan {
    std::vector<int> ids;
    int cursor{0};  // next unvisited index into ids
    bool valid{false};
    enum class Source { mock, remote, fallback };
    Source source{Source::mock};

    bool finished() const { return cursor >= static_cast<int>(ids.size()); }
};

/// Builds the marker lattice at `spacing`, drops markers on obstacles,
/// connects 8-neighbors whose straight segments avoid obstacles, and injects
/// start/goal markers. Throws if start and goal end up disconnected.
WaypointGraph build_waypoint_graph(const WorldGrid& grid,
                                   const std::vector<TerrainClass>& classes,
                                   Vec2 start, Vec2 goal, double spacing);

/// Objective-conditioned waypoint sequence. Mock semantics (normative):
/// Dijkstra over lambda'-weighted edge costs with deterministic tie-break by
/// lexicographically smallest id sequence. Remote answers are validated and
/// fall back to mock semantics after 2 failed attempts.
WaypointPlan plan_global(VlmBackend& backend, const MarkedAerialImage& marked,
                         const NavigationObjective& objective,
                         const TraversabilityTable& table,
                         const std::vector<TerrainClass>& classes);

/// Checks the adjacency chain, endpoint proximity, and id uniqueness.
/// Returns an empty list when the plan is acceptable.
std::vector<std::string> validate_plan(const std::vector<int>& ids, const WaypointGraph& graph,
                                       Vec2 start, Vec2 goal);

/// True iff a label whose tau moved by more than theta appears as the
/// worst-case label of a remaining plan edge.
bool should_replan(const TraversabilityTable& table_prev, const TraversabilityTable& table_now,
                   const WaypointPlan& plan, const WaypointGraph& graph,
                   const std::vector<TerrainClass>& classes, double theta_replan);

}  // namespace gronav

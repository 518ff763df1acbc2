#include "gronav/global_planner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace gronav {

const WaypointEdge* WaypointGraph::find_edge(int from, int to) const {
    for (const auto& e : edges[from - 1])
        if (e.to == to) return &e;
    return nullptr;
}

std::uint8_t edge_worst_label(const WaypointEdge& edge, const TraversabilityTable& table,
                              const std::vector<TerrainClass>& classes) {
    std::uint8_t worst = edge.labels.front();
    double worst_tau = table.tau(classes[worst].label);
    for (std::uint8_t id : edge.labels) {
        const double tau = table.tau(classes[id].label);
        if (tau > worst_tau || (tau == worst_tau && id < worst)) {
            worst = id;
            worst_tau = tau;
        }
    }
    return worst;
}

double edge_cost(const WaypointEdge& edge, double lambda_eff,
                 const TraversabilityTable& table, const std::vector<TerrainClass>& classes) {
    const std::uint8_t worst = edge_worst_label(edge, table, classes);
    return edge.length * (1.0 + lambda_eff * table.tau(classes[worst].label));
}

namespace {

struct SegmentScan {
    bool free{true};
    std::vector<std::uint8_t> labels;
};

SegmentScan scan_segment(const WorldGrid& grid, Vec2 a, Vec2 b) {
    SegmentScan scan;
    std::set<std::uint8_t> labels;
    const double len = distance(a, b);
    const double step = grid.resolution / 2.0;
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        Vec2 p = a + s * (b - a);
        p.x = std::clamp(p.x, 0.0, grid.width_m());
        p.y = std::clamp(p.y, 0.0, grid.height_m());
        const int cx = grid.cell_x(p.x);
        const int cy = grid.cell_y(p.y);
        if (grid.obstacles[grid.index(cx, cy)]) {
            scan.free = false;
            return scan;
        }
        labels.insert(grid.cells[grid.index(cx, cy)]);
    }
    scan.labels.assign(labels.begin(), labels.end());
    return scan;
}

void connect(WaypointGraph& g, const WorldGrid& grid, int a, int b) {
    const Vec2 pa = g.position(a), pb = g.position(b);
    auto scan = scan_segment(grid, pa, pb);
    if (!scan.free) return;
    const double len = distance(pa, pb);
    g.edges[a - 1].push_back({b, len, scan.labels});
    g.edges[b - 1].push_back({a, len, scan.labels});
}

bool connected(const WaypointGraph& g, int from, int to) {
    std::vector<char> seen(g.size() + 1, 0);
    std::queue<int> q;
    q.push(from);
    seen[from] = 1;
    while (!q.empty()) {
        const int cur = q.front();
        q.pop();
        if (cur == to) return true;
        for (const auto& e : g.edges[cur - 1]) {
            if (!seen[e.to]) {
                seen[e.to] = 1;
                q.push(e.to);
            }
        }
    }
    return false;
}

}  // namespace

WaypointGraph build_waypoint_graph(const WorldGrid& grid,
                                   const std::vector<TerrainClass>& classes,
                                   Vec2 start, Vec2 goal, double spacing) {
    (void)classes;
    if (spacing < 2.0 * grid.resolution)
        throw std::invalid_argument("marker spacing must be at least twice the grid resolution");

    WaypointGraph g;
    g.spacing = spacing;
    const int nx = static_cast<int>(std::floor(grid.width_m() / spacing + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(grid.height_m() / spacing + 1e-9)) + 1;

    std::vector<std::vector<int>> lattice_id(ny, std::vector<int>(nx, 0));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Vec2 p{i * spacing, j * spacing};
            p.x = std::min(p.x, grid.width_m());
            p.y = std::min(p.y, grid.height_m());
            if (grid.obstacles[grid.index(grid.cell_x(p.x), grid.cell_y(p.y))]) continue;
            g.positions.push_back(p);
            g.edges.emplace_back();
            lattice_id[j][i] = static_cast<int>(g.positions.size());
        }
    }

    // 8-neighbor lattice edges
    const int di[4] = {1, 0, 1, -1};
    const int dj[4] = {0, 1, 1, 1};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!lattice_id[j][i]) continue;
            for (int k = 0; k < 4; ++k) {
                const int i2 = i + di[k], j2 = j + dj[k];
                if (i2 < 0 || i2 >= nx || j2 < 0 || j2 >= ny || !lattice_id[j2][i2]) continue;
                connect(g, grid, lattice_id[j][i], lattice_id[j2][i2]);
            }
        }
    }

    // inject start/goal markers, connected to their neighborhoods; a point
    // coinciding with an existing marker reuses it (a zero-length duplicate
    // edge would break the strictly-decreasing walk in path reconstruction)
    auto inject = [&](Vec2 p) {
        for (int other = 1; other <= static_cast<int>(g.positions.size()); ++other)
            if (distance(p, g.position(other)) < 1e-9) return other;
        g.positions.push_back(p);
        g.edges.emplace_back();
        const int id = static_cast<int>(g.positions.size());
        for (int other = 1; other < id; ++other) {
            if (distance(p, g.position(other)) <= 1.5 * spacing) connect(g, grid, id, other);
        }
        return id;
    };
    g.start_id = inject(start);
    g.goal_id = inject(goal);

    if (!connected(g, g.start_id, g.goal_id))
        throw std::runtime_error("waypoint graph construction: start and goal are disconnected");
    return g;
}

namespace {

/// Min-cost path with deterministic tie-break by lexicographically smallest
/// marker id sequence: Dijkstra from the goal, then a greedy walk from the
/// start picking the smallest id consistent with the optimal remaining cost.
std::vector<int> dijkstra_plan(const WaypointGraph& g, double lambda_eff,
                               const TraversabilityTable& table,
                               const std::vector<TerrainClass>& classes) {
    const int n = g.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n + 1, inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[g.goal_id] = 0.0;
    pq.push({0.0, g.goal_id});
    while (!pq.empty()) {
        auto [d, cur] = pq.top();
        pq.pop();
        if (d > dist[cur]) continue;
        for (const auto& e : g.edges[cur - 1]) {
            const double nd = d + edge_cost(e, lambda_eff, table, classes);
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                pq.push({nd, e.to});
            }
        }
    }
    if (dist[g.start_id] == inf)
        throw std::runtime_error("global planner: graph is disconnected");

    std::vector<int> path{g.start_id};
    int cur = g.start_id;
    while (cur != g.goal_id) {
        int next = 0;
        double next_d = inf;
        for (const auto& e : g.edges[cur - 1]) {
            const double via = edge_cost(e, lambda_eff, table, classes) + dist[e.to];
            const double tol = 1e-9 * std::max(1.0, dist[cur]);
            if (std::abs(via - dist[cur]) <= tol && dist[e.to] < dist[cur]) {
                if (next == 0 || e.to < next) {
                    next = e.to;
                    next_d = dist[e.to];
                }
            }
        }
        if (next == 0) throw std::runtime_error("global planner: path reconstruction failed");
        (void)next_d;
        path.push_back(next);
        cur = next;
    }
    return path;
}

}  // namespace

WaypointPlan plan_global(VlmBackend& backend, const MarkedAerialImage& marked,
                         const NavigationObjective& objective,
                         const TraversabilityTable& table,
                         const std::vector<TerrainClass>& classes) {
    const WaypointGraph& g = *marked.graph;
    const double lambda_eff =
        objective.kind == NavigationObjective::Kind::avoid_hazard ? objective.hazard_weight : 0.0;

    WaypointPlan plan;
    plan.source = WaypointPlan::Source::mock;

    if (backend.name() != "mock") {
        WaypointQuery query;
        query.objective = objective;
        query.marker_count = g.size();
        query.start_id = g.start_id;
        query.goal_id = g.goal_id;
        for (const auto& [label, entry] : table.entries) query.label_taus[label] = entry.tau;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto ids = backend.select_waypoints(query);
            if (!ids) continue;
            auto violations =
                validate_plan(*ids, g, g.position(g.start_id), g.position(g.goal_id));
            if (violations.empty()) {
                plan.ids = *ids;
                plan.valid = true;
                plan.source = WaypointPlan::Source::remote;
                return plan;
            }
            for (const auto& v : violations)
                std::clog << "[gronav] remote plan rejected: " << v << "\n";
        }
        plan.source = WaypointPlan::Source::fallback;
    }

    plan.ids = dijkstra_plan(g, lambda_eff, table, classes);
    plan.valid = validate_plan(plan.ids, g, g.position(g.start_id), g.position(g.goal_id)).empty();
    return plan;
}

std::vector<std::string> validate_plan(const std::vector<int>& ids, const WaypointGraph& graph,
                                       Vec2 start, Vec2 goal) {
    std::vector<std::string> violations;
    if (ids.empty()) {
        violations.push_back("empty plan");
        return violations;
    }
    std::set<int> seen;
    for (int id : ids) {
        if (id < 1 || id > graph.size()) {
            violations.push_back("unknown marker id " + std::to_string(id));
            return violations;
        }
        if (!seen.insert(id).second)
            violations.push_back("repeated marker id " + std::to_string(id));
    }
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        if (!graph.find_edge(ids[i], ids[i + 1]))
            violations.push_back("non-adjacent step " + std::to_string(ids[i]) + " -> " +
                                 std::to_string(ids[i + 1]));
    }
    if (distance(graph.position(ids.front()), start) > graph.spacing)
        violations.push_back("endpoint: first marker farther than spacing from robot");
    if (distance(graph.position(ids.back()), goal) > graph.spacing)
        violations.push_back("endpoint: last marker farther than spacing from goal");
    return violations;
}

bool should_replan(const TraversabilityTable& table_prev, const TraversabilityTable& table_now,
                   const WaypointPlan& plan, const WaypointGraph& graph,
                   const std::vector<TerrainClass>& classes, double theta_replan) {
    std::set<std::string> changed;
    for (const auto& [label, entry] : table_now.entries) {
        auto it = table_prev.entries.find(label);
        if (it == table_prev.entries.end()) continue;
        if (std::abs(entry.tau - it->second.tau) > theta_replan) changed.insert(label);
    }
    if (changed.empty()) return false;

    for (int i = std::max(0, plan.cursor - 1); i + 1 < static_cast<int>(plan.ids.size()); ++i) {
        const WaypointEdge* e = graph.find_edge(plan.ids[i], plan.ids[i + 1]);
        if (!e) continue;
        const std::uint8_t worst = edge_worst_label(*e, table_now, classes);
        if (changed.count(classes[worst].label)) return true;
    }
    return false;
}

}  // namespace gronav

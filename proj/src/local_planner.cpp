#include "gronav/local_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gronav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb & Huttenlocher 1D squared distance transform
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    d.assign(n, 0.0);
    std::vector<int> v(n, 0);
    std::vector<double> z(n + 1, 0.0);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
    }
}

}  // namespace

DistanceField::DistanceField(const WorldGrid& grid) : grid_(grid) {
    const int w = grid.width, h = grid.height;
    // large finite seed; infinite parabola heights break the lower-envelope
    // breakpoint computation (inf - inf), and any real squared distance on the
    // grid is far below this
    const double far = 1e12;
    std::vector<double> sq(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < sq.size(); ++i) {
        sq[i] = grid.obstacles[i] ? 0.0 : far;
        if (grid.obstacles[i]) any_obstacle_ = true;
    }
    dist_.assign(sq.size(), std::numeric_limits<float>::infinity());
    if (!any_obstacle_) return;

    std::vector<double> col(h), cold(h), row(w), rowd(w);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = sq[grid.index(x, y)];
        edt_1d(col, cold);
        for (int y = 0; y < h; ++y) sq[grid.index(x, y)] = cold[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) row[x] = sq[grid.index(x, y)];
        edt_1d(row, rowd);
        for (int x = 0; x < w; ++x)
            dist_[grid.index(x, y)] = static_cast<float>(std::sqrt(rowd[x]) * grid.resolution);
    }
}

double DistanceField::clearance(Vec2 p) const {
    if (!any_obstacle_) return kInf;
    const int cx = std::clamp(grid_.cell_x(p.x), 0, grid_.width - 1);
    const int cy = std::clamp(grid_.cell_y(p.y), 0, grid_.height - 1);
    return dist_[grid_.index(cx, cy)];
}

std::vector<std::pair<double, double>> admissible_velocities(const KinematicLimits& limits,
                                                             double v, double omega,
                                                             int v_samples, int omega_samples) {
    const double v_lo = std::max(0.0, v - limits.a_max * limits.dt);
    const double v_hi = std::min(limits.v_max, v + limits.a_max * limits.dt);
    const double w_lo = std::max(-limits.omega_max, omega - limits.alpha_max * limits.dt);
    const double w_hi = std::min(limits.omega_max, omega + limits.alpha_max * limits.dt);

    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(v_samples) * omega_samples);
    for (int i = 0; i < v_samples; ++i) {
        const double vs =
            v_samples == 1 ? v_lo : v_lo + (v_hi - v_lo) * i / static_cast<double>(v_samples - 1);
        for (int j = 0; j < omega_samples; ++j) {
            const double ws = omega_samples == 1
                                  ? w_lo
                                  : w_lo + (w_hi - w_lo) * j / static_cast<double>(omega_samples - 1);
            samples.emplace_back(vs, ws);
        }
    }
    return samples;
}

Rollout rollout(const RobotState& state, double v, double omega, double horizon, double dt) {
    Rollout r;
    r.v = v;
    r.omega = omega;
    Pose pose = state.pose;
    r.poses.push_back(pose);
    double remaining = horizon;
    while (remaining > 1e-12) {
        const double step = std::min(dt, remaining);
        if (std::abs(omega) < 1e-12) {
            pose.x += v * step * std::cos(pose.theta);
            pose.y += v * step * std::sin(pose.theta);
        } else {
            const double radius = v / omega;
            const double next_theta = pose.theta + omega * step;
            pose.x += radius * (std::sin(next_theta) - std::sin(pose.theta));
            pose.y -= radius * (std::cos(next_theta) - std::cos(pose.theta));
            pose.theta = normalize_angle(next_theta);
        }
        r.poses.push_back(pose);
        remaining -= step;
    }
    r.endpoint = r.poses.back().position();
    return r;
}

std::optional<double> base_objective(const Rollout& r, Vec2 goal, const DistanceField& field,
                                     const KinematicLimits& limits, const PlannerWeights& weights,
                                     double footprint_radius) {
    double clearance = kInf;
    for (const auto& pose : r.poses) {
        if (!field.inside(pose.position())) return std::nullopt;  // map edge acts as obstacle
        const double c = field.clearance(pose.position());
        if (c < footprint_radius) return std::nullopt;  // collision: rollout rejected
        clearance = std::min(clearance, c);
    }

    const Pose& end = r.poses.back();
    double head = 0.0;
    const double dx = goal.x - end.x, dy = goal.y - end.y;
    if (dx != 0.0 || dy != 0.0)
        head = std::abs(normalize_angle(std::atan2(dy, dx) - end.theta)) / M_PI;

    double dist_cost = 0.0;
    if (std::isfinite(clearance))
        dist_cost = std::clamp(1.0 - clearance / weights.d_safe, 0.0, 1.0);

    const double vel_cost = (limits.v_max - r.v) / limits.v_max;

    return weights.rho1 * head + weights.rho2 * dist_cost + weights.rho3 * vel_cost;
}

std::vector<FrontierCandidate> extract_frontiers(const RobotState& state, const WorldGrid& grid,
                                                 double lookahead, double half_angle) {
    std::vector<FrontierCandidate> out;
    const auto consider = [&](FrontierSide side, double bearing) {
        const double theta = state.pose.theta + bearing;
        Vec2 p{state.pose.x + lookahead * std::cos(theta),
               state.pose.y + lookahead * std::sin(theta)};
        if (!grid.in_bounds(p)) return;
        if (grid.obstacle_at(p)) return;
        out.push_back({side, p});
    };
    consider(FrontierSide::left, half_angle);
    consider(FrontierSide::center, 0.0);
    consider(FrontierSide::right, -half_angle);
    return out;
}

FrontierSet classify_frontiers(VlmBackend& backend, const std::vector<FrontierCandidate>& candidates,
                               const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                               const TraversabilityTable& table, double patch_size) {
    FrontierSet set;
    for (const auto& c : candidates) {
        const auto patch =
            patch_descriptor(grid, classes, c.point, patch_size, PatchDescriptor::Source::front);
        FrontierPoint fp;
        fp.side = c.side;
        fp.point = c.point;
        fp.label = backend.classify(patch, classes);
        fp.tau = std::max(table.tau(fp.label), kEpsilonTau);
        set.points.push_back(std::move(fp));
    }
    return set;
}

FrontierCost frontier_cost(const Rollout& r, const FrontierSet& frontiers) {
    // ties prefer center, then left, then right (diagnostics only)
    const FrontierSide preference[3] = {FrontierSide::center, FrontierSide::left,
                                        FrontierSide::right};
    FrontierCost best;
    bool found = false;
    for (FrontierSide side : preference) {
        for (const auto& p : frontiers.points) {
            if (p.side != side) continue;
            const double phi = distance(r.endpoint, p.point) * p.tau;
            if (!found || phi < best.phi) {
                best.phi = phi;
                best.chosen = side;
                found = true;
            }
        }
    }
    return best;
}

CommandChoice select_command(const RobotState& state, Vec2 goal, const DistanceField& field,
                             const FrontierSet& frontiers, const PlannerWeights& weights,
                             const KinematicLimits& limits) {
    const auto samples = admissible_velocities(limits, state.v, state.omega, weights.v_samples,
                                               weights.omega_samples);
    CommandChoice best;
    bool found = false;
    for (const auto& [v, w] : samples) {
        const Rollout r = rollout(state, v, w, weights.horizon, weights.rollout_dt);
        const auto base = base_objective(r, goal, field, limits, weights, state.footprint_radius);
        if (!base) continue;
        double g = *base;
        if (!frontiers.empty()) g += weights.rho4 * frontier_cost(r, frontiers).phi;

        bool better = false;
        if (!found) {
            better = true;
        } else if (g != best.cost) {
            better = g < best.cost;
        } else if (v != best.v) {
            better = v > best.v;
        } else if (std::abs(w) != std::abs(best.omega)) {
            better = std::abs(w) < std::abs(best.omega);
        } else {
            better = w < best.omega;
        }
        if (better) {
            best = {v, w, false, g};
            found = true;
        }
    }
    if (!found) {
        // blocked: stop as fast as the acceleration window allows
        CommandChoice stop;
        stop.blocked = true;
        stop.v = std::max(0.0, state.v - limits.a_max * limits.dt);
        if (state.omega > 0)
            stop.omega = std::max(0.0, state.omega - limits.alpha_max * limits.dt);
        else
            stop.omega = std::min(0.0, state.omega + limits.alpha_max * limits.dt);
        return stop;
    }
    return best;
}

}  // namespace gronav

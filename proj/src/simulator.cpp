#include "gronav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gronav {

std::string to_string(TrialState s) {
    switch (s) {
        case TrialState::running: return "running";
        case TrialState::success: return "success";
        case TrialState::collision: return "collision";
        case TrialState::immobilized: return "immobilized";
        case TrialState::timeout: return "timeout";
    }
    return "unknown";
}

double effective_slip(const TerrainClass& cell, double u, Embodiment embodiment) {
    double sigma_eff = cell.slipperiness * u;
    if (embodiment == Embodiment::legged) sigma_eff *= 0.5;
    return sigma_eff;
}

std::pair<double, double> true_motion(double v, double omega, double dt, double sigma_eff) {
    return {v * dt * (1.0 - sigma_eff), omega * dt * (1.0 - sigma_eff / 2.0)};
}

std::vector<double> synthesize_joint_forces(const TerrainClass& cell, Rng& rng,
                                            double f0, double kappa, double s_f,
                                            int n_joints) {
    if (!(f0 > 0)) throw std::invalid_argument("f0 must be positive");
    if (kappa < 0) throw std::invalid_argument("kappa must be non-negative");
    std::vector<double> forces(n_joints);
    const double base = f0 * (1.0 + kappa * cell.deformability);
    const double stddev = s_f * cell.roughness;
    for (auto& f : forces) f = std::max(0.0, rng.gaussian(base, stddev));
    return forces;
}

std::pair<std::pair<double, double>, std::pair<double, double>> synthesize_odometry(
    std::pair<double, double> true_delta, double v, double omega, double dt,
    Rng& rng, double s_lidar) {
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    std::pair<double, double> odom{v * dt, omega * dt};
    std::pair<double, double> lidar{rng.gaussian(true_delta.first, s_lidar),
                                    rng.gaussian(true_delta.second, s_lidar)};
    return {odom, lidar};
}

namespace {

bool footprint_collides(const WorldGrid& grid, Vec2 pos, double radius) {
    const int cx_lo = std::max(0, static_cast<int>(std::floor((pos.x - radius) / grid.resolution)));
    const int cx_hi = std::min(grid.width - 1, static_cast<int>(std::floor((pos.x + radius) / grid.resolution)));
    const int cy_lo = std::max(0, static_cast<int>(std::floor((pos.y - radius) / grid.resolution)));
    const int cy_hi = std::min(grid.height - 1, static_cast<int>(std::floor((pos.y + radius) / grid.resolution)));
    for (int cy = cy_lo; cy <= cy_hi; ++cy) {
        for (int cx = cx_lo; cx <= cx_hi; ++cx) {
            if (!grid.obstacles[grid.index(cx, cy)]) continue;
            // distance from pos to the cell rectangle
            const double x0 = cx * grid.resolution, x1 = (cx + 1) * grid.resolution;
            const double y0 = cy * grid.resolution, y1 = (cy + 1) * grid.resolution;
            const double dx = std::max({x0 - pos.x, 0.0, pos.x - x1});
            const double dy = std::max({y0 - pos.y, 0.0, pos.y - y1});
            if (dx * dx + dy * dy <= radius * radius) return true;
        }
    }
    return false;
}

}  // namespace

TrialStatus check_termination(const RobotState& state, double t, const WorldGrid& grid,
                              const std::deque<HazardHistoryEntry>& history,
                              const TerminationConfig& cfg) {
    if (distance(state.pose.position(), cfg.goal) <= cfg.goal_radius)
        return {TrialState::success, t};
    if (footprint_collides(grid, state.pose.position(), state.footprint_radius))
        return {TrialState::collision, t};
    if (t > cfg.timeout_s) return {TrialState::timeout, t};

    // stuck detection needs a full window of history
    if (!history.empty() && history.front().t <= t - cfg.stuck_window) {
        const double window_start = t - cfg.stuck_window;
        if (state.embodiment == Embodiment::wheeled) {
            double sum = 0.0;
            int n = 0;
            for (const auto& e : history) {
                if (e.t < window_start || !e.slip_ratio) continue;
                sum += *e.slip_ratio;
                n += 1;
            }
            if (n > 0 && sum / n > cfg.slip_stuck_threshold)
                return {TrialState::immobilized, t};
        } else {
            double sum = 0.0;
            int n = 0;
            for (const auto& e : history) {
                if (e.t < window_start) continue;
                sum += e.tau_sinkage;
                n += 1;
            }
            if (n > 0 && sum / n > cfg.sinkage_stuck_threshold)
                return {TrialState::immobilized, t};
        }
    }
    return {TrialState::running, t};
}

Simulator::Simulator(const ScenarioConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(Rng::splitmix(seed)) {}

ProprioSample Simulator::step(RobotState& state, double v, double omega) {
    const auto& lim = cfg_.limits;
    const double dt = lim.dt;
    const double eps = 1e-9;
    if (v < -eps || v > lim.v_max + eps || std::abs(omega) > lim.omega_max + eps)
        throw std::invalid_argument("command outside kinematic limits");
    if (std::abs(v - state.v) > lim.a_max * dt + eps ||
        std::abs(omega - state.omega) > lim.alpha_max * dt + eps)
        throw std::invalid_argument("command outside acceleration window");

    const TerrainClass& cell = cfg_.class_at(state.pose.position());
    const double u = rng_.uniform(0.7, 1.0);
    const double sigma_eff = effective_slip(cell, u, state.embodiment);
    const auto [dd, dth] = true_motion(v, omega, dt, sigma_eff);

    ProprioSample sample;
    if (state.embodiment == Embodiment::legged) {
        sample.joint_forces = synthesize_joint_forces(cell, rng_, cfg_.simulator.f0,
                                                      cfg_.simulator.kappa,
                                                      cfg_.simulator.s_f,
                                                      cfg_.simulator.n_joints);
    } else {
        auto [odom, lidar] =
            synthesize_odometry({dd, dth}, v, omega, dt, rng_, cfg_.simulator.s_lidar);
        sample.odom_delta = odom;
        sample.lidar_delta = lidar;
    }

    const double hazard = cell.roughness +
                          (state.embodiment == Embodiment::legged ? cell.deformability
                                                                  : cell.slipperiness);
    const double imu_std = cfg_.simulator.s_imu * hazard;
    const double a_forward = (v - state.v) / dt;
    const double a_lateral = v * omega;  // centripetal
    sample.imu_accel = {rng_.gaussian(a_forward, imu_std), rng_.gaussian(a_lateral, imu_std),
                        rng_.gaussian(0.0, imu_std)};

    state.pose.x += dd * std::cos(state.pose.theta);
    state.pose.y += dd * std::sin(state.pose.theta);
    state.pose.theta = normalize_angle(state.pose.theta + dth);
    state.pose.x = std::clamp(state.pose.x, 0.0, cfg_.grid.width_m());
    state.pose.y = std::clamp(state.pose.y, 0.0, cfg_.grid.height_m());
    state.v = v;
    state.omega = omega;

    t_ += dt;
    sample.t = t_;
    sample.position = state.pose.position();
    return sample;
}

TerminationMonitor::TerminationMonitor(const ScenarioConfig& cfg, Vec2 goal)
    : grid_(cfg.grid) {
    term_.goal = goal;
    term_.goal_radius = cfg.simulator.goal_radius;
    term_.stuck_window = cfg.simulator.stuck_window;
    term_.slip_stuck_threshold = cfg.simulator.slip_stuck_threshold;
    term_.sinkage_stuck_threshold = cfg.simulator.sinkage_stuck_threshold;
    term_.timeout_s = cfg.timeout_s;
}

void TerminationMonitor::record(const ProprioSample& sample, double tau_sinkage) {
    HazardHistoryEntry e;
    e.t = sample.t;
    e.tau_sinkage = tau_sinkage;
    if (sample.odom_delta && sample.lidar_delta && sample.odom_delta->first > 1e-9)
        e.slip_ratio = 1.0 - sample.lidar_delta->first / sample.odom_delta->first;
    history_.push_back(e);
}

TrialStatus TerminationMonitor::update(const RobotState& state, double t) {
    if (status_.terminal()) return status_;  // terminal states are absorbing
    status_ = check_termination(state, t, grid_, history_, term_);
    return status_;
}

}  // namespace gronav

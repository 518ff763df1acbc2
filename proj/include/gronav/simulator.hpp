#pragma once

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "gronav/rng.hpp"
#include "gronav/world.hpp"

namespace gronav {

/// One tick of synthesized proprioception.
struct ProprioSample {
    double t{0.0};
    std::vector<double> joint_forces;  // legged only
    std::optional<std::pair<double, double>> odom_delta;   // (d, theta), wheeled
    std::optional<std::pair<double, double>> lidar_delta;  // (d, theta), wheeled
    std::array<double, 3> imu_accel{0, 0, 0};
    Vec2 position;
};

enum class TrialState { running, success, collision, immobilized, timeout };

std::string to_string(TrialState s);

struct TrialStatus {
    TrialState state{TrialState::running};
    double t{0.0};

    bool terminal() const { return state != TrialState::running; }
};

/// Slip fraction for one tick. u is the per-tick uniform draw from
/// [0.7, 1.0]; legs slip half as much as wheels.
double effective_slip(const TerrainClass& cell, double u, Embodiment embodiment);

/// Slip-degraded displacement for one tick:
///   d = v*dt*(1 - sigma_eff), dtheta = omega*dt*(1 - sigma_eff/2).
std::pair<double, double> true_motion(double v, double omega, double dt, double sigma_eff);

/// Per-joint forces: f_i = f0*(1 + kappa*delta) + N(0, s_f*r), clamped >= 0.
std::vector<double> synthesize_joint_forces(const TerrainClass& cell, Rng& rng,
                                            double f0, double kappa, double s_f,
                                            int n_joints);

/// Wheel odometry reports commanded motion; lidar odometry reports true
/// motion plus gaussian noise per component.
std::pair<std::pair<double, double>, std::pair<double, double>> synthesize_odometry(
    std::pair<double, double> true_delta, double v, double omega, double dt,
    Rng& rng, double s_lidar);

/// One termination-history entry: per-tick slip ratio (wheeled) or smoothed
/// sinkage traversability (legged), with its timestamp.
struct HazardHistoryEntry {
    double t{0.0};
    std::optional<double> slip_ratio;  // 1 - dd_lidar/dd_odom, only when dd_odom > 0
    double tau_sinkage{0.0};
};

struct TerminationConfig {
    Vec2 goal;
    double goal_radius{1.0};
    double stuck_window{3.0};
    double slip_stuck_threshold{0.8};
    double sinkage_stuck_threshold{0.9};
    double timeout_s{150.0};
};

TrialStatus check_termination(const RobotState& state, double t, const WorldGrid& grid,
                              const std::deque<HazardHistoryEntry>& history,
                              const TerminationConfig& cfg);

/// Advances robot state under (v, omega) commands over the terrain grid and
/// synthesizes the proprioceptive stream. Owns its RNG; one instance per trial.
class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, std::uint64_t seed);

    /// Applies one command. Throws std::invalid_argument if the command lies
    /// outside the kinematic limits or the one-tick acceleration window.
    ProprioSample step(RobotState& state, double v, double omega);

    double time() const { return t_; }
    const ScenarioConfig& config() const { return cfg_; }

private:
    const ScenarioConfig& cfg_;
    Rng rng_;
    double t_{0.0};
};

/// Sliding-window hazard monitor feeding check_termination.
class TerminationMonitor {
public:
    TerminationMonitor(const ScenarioConfig& cfg, Vec2 goal);

    void record(const ProprioSample& sample, double tau_sinkage);
    TrialStatus update(const RobotState& state, double t);

    const std::deque<HazardHistoryEntry>& history() const { return history_; }

private:
    TerminationConfig term_;
    const WorldGrid& grid_;
    std::deque<HazardHistoryEntry> history_;
    TrialStatus status_{};
};

}  // namespace gronav

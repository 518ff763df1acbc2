#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gronav/geometry.hpp"
#include "gronav/traversability.hpp"

namespace gronav {

struct TerrainClass {
    std::string label;
    double deformability{0.0};  // delta, drives legged sinkage
    double slipperiness{0.0};   // sigma, drives wheel slip
    double roughness{0.0};      // r, drives vibration
    double prior_tau{0.0};
    std::array<std::uint8_t, 3> appearance{128, 128, 128};
};

/// 2D cell lattice of terrain ids plus an obstacle mask. Doubles as the
/// "aerial image" of the environment.
struct WorldGrid {
    int width{0};   // cells
    int height{0};  // cells
    double resolution{1.0};  // meters per cell
    std::vector<std::uint8_t> cells;      // row-major terrain class ids
    std::vector<std::uint8_t> obstacles;  // row-major, nonzero = blocked

    double width_m() const { return width * resolution; }
    double height_m() const { return height * resolution; }

    int index(int cx, int cy) const { return cy * width + cx; }
    bool cell_in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height;
    }
    bool in_bounds(Vec2 p) const {
        return p.x >= 0.0 && p.x <= width_m() && p.y >= 0.0 && p.y <= height_m();
    }

    /// Metric coordinate to cell index along one axis. Positions exactly on
    /// a cell boundary map to the lower-index cell.
    int coord_to_cell(double v, int n_cells) const;

    int cell_x(double x) const { return coord_to_cell(x, width); }
    int cell_y(double y) const { return coord_to_cell(y, height); }

    bool obstacle_at(Vec2 p) const;
};

enum class Embodiment { legged, wheeled };

std::string to_string(Embodiment e);
Embodiment embodiment_from_string(const std::string& s);

struct RobotState {
    Pose pose;
    double v{0.0};
    double omega{0.0};
    Embodiment embodiment{Embodiment::wheeled};
    double footprint_radius{0.4};
};

struct KinematicLimits {
    double v_max{1.0};       // m/s
    double omega_max{1.5};   // rad/s
    double a_max{1.0};       // m/s^2
    double alpha_max{3.0};   // rad/s^2
    double dt{0.1};          // control period, s

    void validate() const;
};

struct NavigationObjective {
    enum class Kind { min_length, avoid_hazard };
    Kind kind{Kind::avoid_hazard};
    double hazard_weight{4.0};  // lambda, avoid_hazard only
};

struct PlannerWeights {
    double rho1{1.0};
    double rho2{1.0};
    double rho3{0.3};
    double rho4{1.5};
    double horizon{2.0};        // s
    int v_samples{11};
    int omega_samples{21};
    double rollout_dt{0.2};     // s
    double d_safe{2.0};         // m, clearance saturation
    double frontier_lookahead{3.0};        // m
    double frontier_half_angle{M_PI / 6};  // rad
    int classify_period_ticks{5};
    double marker_spacing{5.0};  // m
    double waypoint_radius{2.0}; // m, cursor advance distance

    void validate() const;
};

struct SimulatorParams {
    int n_joints{12};
    double f0{100.0};          // N, baseline joint force
    double kappa{0.5};         // deformability force gain
    double s_f{0.0};           // N, joint force noise scale
    double s_imu{0.0};         // m/s^2, IMU noise scale
    double s_lidar{0.0};       // lidar odometry noise std
    double goal_radius{1.0};   // m
    double stuck_window{3.0};  // s
    double slip_stuck_threshold{0.8};
    double sinkage_stuck_threshold{0.9};
    double classifier_error_rate{0.0};  // mock frontier classifier p_err
};

struct CalibrationConfig {
    SinkageCalibration sinkage;
    SlipCalibration slip;
    bool sinkage_from_force_law{true};  // derive s_min/s_max from f0, kappa, n
    double smoothing_window{1.0};       // s, indicator moving average
    double exemplar_window{1.0};        // s, averaging window after patch entry
    double patch_size{5.0};             // m
    double capture_period{1.0};         // s between patch captures
    double capture_lookahead{3.0};      // m ahead of the robot
    int pool_capacity{8};               // exemplars per label
    double theta_replan{0.2};
};

struct ScenarioConfig {
    std::string name;
    WorldGrid grid;
    std::vector<TerrainClass> classes;
    Vec2 start;
    Vec2 goal;
    Embodiment embodiment{Embodiment::wheeled};
    std::string weather;
    NavigationObjective objective;
    PlannerWeights planner;
    KinematicLimits limits;
    CalibrationConfig calibration;
    SimulatorParams simulator;
    double timeout_s{150.0};
    double footprint_radius{0.4};

    const TerrainClass& class_at(Vec2 p) const;
    double straight_line_distance() const;

    /// Resolved sinkage calibration (derived from the force law when the
    /// config does not pin explicit references).
    SinkageCalibration sinkage_calibration() const;

    void validate() const;  // throws std::invalid_argument naming the violated invariant
};

/// Class-mixture summary of a square patch of the grid.
struct PatchDescriptor {
    Vec2 center;
    double size{5.0};  // m, side length
    std::map<std::string, double> class_histogram;  // fractions, sums to 1
    std::array<double, 3> mean_appearance{0, 0, 0};
    enum class Source { aerial, front };
    Source source{Source::aerial};

    /// Largest-fraction label; ties resolve to the lexicographically
    /// smallest label.
    std::string majority_label() const;
};

/// Terrain class of the cell containing `position`. Throws on out-of-bounds.
const TerrainClass& terrain_at(const WorldGrid& grid,
                               const std::vector<TerrainClass>& classes,
                               Vec2 position);

/// Histogram over all in-bounds cells whose centers fall inside the square.
/// Throws if the patch misses the grid entirely.
PatchDescriptor patch_descriptor(const WorldGrid& grid,
                                 const std::vector<TerrainClass>& classes,
                                 Vec2 center, double size,
                                 PatchDescriptor::Source source);

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);
std::string save_scenario(const ScenarioConfig& cfg);

}  // namespace gronav

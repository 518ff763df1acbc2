#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gronav/simulator.hpp"
#include "gronav/traversability.hpp"
#include "gronav/world.hpp"

namespace gronav {

/// S = sum of squared joint forces. Throws on an empty list.
double sinkage_indicator(std::span<const double> forces);

/// tau = clamp(gamma * (S - s_min) / (s_max - s_min), 0, 1)
TraversabilityValue sinkage_traversability(double s, const SinkageCalibration& calib);

/// tau = clamp(beta1*|dd_lidar - dd_odom| + beta2*|dth_lidar - dth_odom|, 0, 1).
/// Magnitudes are used so slipping wheels (lidar < odom) score positive.
TraversabilityValue slip_traversability(const ProprioSample& sample,
                                        const SlipCalibration& calib);

/// An (aerial patch, front patch, shifted indicator, label) tuple grounding
/// the reasoning module.
struct Exemplar {
    PatchDescriptor aerial;
    PatchDescriptor front;
    TraversabilityValue tau_shifted;
    std::string label;
    double t_image{0.0};
    double t_proprio{0.0};
};

struct PatchEvent {
    double t_image{0.0};
    PatchDescriptor aerial;
    PatchDescriptor front;
};

/// Per-sample indicator, chosen by embodiment and calibration.
using IndicatorFn = std::function<double(const ProprioSample&)>;

IndicatorFn make_indicator(Embodiment embodiment, const SinkageCalibration& sink,
                           const SlipCalibration& slip);

/// For each captured patch, finds the first time the robot entered the patch
/// square after capture and averages the (smoothed) indicator while the robot
/// stays inside the square, up to `window_w` seconds. Patches never entered
/// yield no exemplar.
std::vector<Exemplar> associate_exemplars(const std::vector<PatchEvent>& patch_events,
                                          const std::vector<ProprioSample>& proprio_log,
                                          double window_w, double smoothing_window,
                                          const IndicatorFn& indicator);

struct ImuEnergyAccumulator {
    double e_ax{0.0};
    double e_ay{0.0};
    double e_az{0.0};
    long n{0};

    void add(const ProprioSample& sample) {
        e_ax += sample.imu_accel[0] * sample.imu_accel[0];
        e_ay += sample.imu_accel[1] * sample.imu_accel[1];
        e_az += sample.imu_accel[2] * sample.imu_accel[2];
        n += 1;
    }

    double total() const { return e_ax + e_ay + e_az; }
};

}  // namespace gronav

#include "gronav/proprioception.hpp"

#include <cmath>
#include <stdexcept>

namespace gronav {

double sinkage_indicator(std::span<const double> forces) {
    if (forces.empty()) throw std::invalid_argument("sinkage indicator needs at least one joint force");
    double s = 0.0;
    for (double f : forces) s += f * f;
    return s;
}

TraversabilityValue sinkage_traversability(double s, const SinkageCalibration& calib) {
    calib.validate();
    const double tau = calib.gamma * (s - calib.s_min) / (calib.s_max - calib.s_min);
    return {clamp01(tau)};
}

TraversabilityValue slip_traversability(const ProprioSample& sample,
                                        const SlipCalibration& calib) {
    calib.validate();
    if (!sample.odom_delta || !sample.lidar_delta)
        throw std::invalid_argument("slip traversability needs both odometry delta pairs");
    const double dd = std::abs(sample.lidar_delta->first - sample.odom_delta->first);
    const double dth = std::abs(sample.lidar_delta->second - sample.odom_delta->second);
    return {clamp01(calib.beta1 * dd + calib.beta2 * dth)};
}

IndicatorFn make_indicator(Embodiment embodiment, const SinkageCalibration& sink,
                           const SlipCalibration& slip) {
    if (embodiment == Embodiment::legged) {
        return [sink](const ProprioSample& s) {
            return sinkage_traversability(sinkage_indicator(s.joint_forces), sink).tau;
        };
    }
    return [slip](const ProprioSample& s) { return slip_traversability(s, slip).tau; };
}

namespace {

bool inside_square(Vec2 p, Vec2 center, double size) {
    const double half = size / 2.0;
    return std::abs(p.x - center.x) <= half && std::abs(p.y - center.y) <= half;
}

}  // namespace

std::vector<Exemplar> associate_exemplars(const std::vector<PatchEvent>& patch_events,
                                          const std::vector<ProprioSample>& proprio_log,
                                          double window_w, double smoothing_window,
                                          const IndicatorFn& indicator) {
    const std::size_t n = proprio_log.size();
    std::vector<double> raw(n), smoothed(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = indicator(proprio_log[i]);

    // trailing moving average over smoothing_window seconds
    std::size_t tail = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += raw[i];
        while (proprio_log[tail].t <= proprio_log[i].t - smoothing_window) {
            acc -= raw[tail];
            ++tail;
        }
        smoothed[i] = acc / static_cast<double>(i - tail + 1);
    }

    std::vector<Exemplar> out;
    for (const auto& event : patch_events) {
        const Vec2 center = event.aerial.center;
        const double size = event.aerial.size;
        std::size_t entry = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (proprio_log[i].t <= event.t_image) continue;
            if (inside_square(proprio_log[i].position, center, size)) {
                entry = i;
                break;
            }
        }
        if (entry == n) continue;  // never entered

        const double t_entry = proprio_log[entry].t;
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = entry; i < n; ++i) {
            if (proprio_log[i].t > t_entry + window_w) break;
            if (!inside_square(proprio_log[i].position, center, size)) break;
            sum += smoothed[i];
            count += 1;
        }
        if (count == 0) continue;

        Exemplar e;
        e.aerial = event.aerial;
        e.front = event.front;
        e.tau_shifted = {clamp01(sum / count)};
        e.label = event.aerial.majority_label();
        e.t_image = event.t_image;
        e.t_proprio = t_entry;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace gronav

#pragma once

#include <algorithm>
#include <stdexcept>

namespace gronav {

/// Scalar hazard score: 0 = fully traversable, 1 = impassable.
struct TraversabilityValue {
    double tau{0.0};
};

/// Floor applied wherever tau multiplies a cost, so tau = 0 cannot zero
/// a distance-weighted term.
inline constexpr double kEpsilonTau = 0.05;

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

struct SinkageCalibration {
    double s_min{0.0};   // N^2, least deformable reference
    double s_max{1.0};   // N^2, most deformable reference
    double gamma{1.0};   // scaling factor

    void validate() const {
        if (!(s_max > s_min)) throw std::invalid_argument("sinkage calibration: s_max must exceed s_min");
        if (!(gamma > 0.0)) throw std::invalid_argument("sinkage calibration: gamma must be positive");
    }
};

struct SlipCalibration {
    double beta1{5.0};  // 1/m
    double beta2{1.0};  // 1/rad

    void validate() const {
        if (beta1 < 0.0 || beta2 < 0.0) throw std::invalid_argument("slip calibration: betas must be non-negative");
        if (beta1 == 0.0 && beta2 == 0.0) throw std::invalid_argument("slip calibration: betas must not both be zero");
    }
};

}  // namespace gronav

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gronav/proprioception.hpp"
#include "gronav/simulator.hpp"
#include "test_support.hpp"

using namespace gronav;
using test::make_class;

namespace {

ProprioSample wheeled_sample(double d_odom, double d_lidar, double th_odom, double th_lidar) {
    ProprioSample s;
    s.odom_delta = {{d_odom, th_odom}};
    s.lidar_delta = {{d_lidar, th_lidar}};
    return s;
}

}  // namespace

TEST_CASE("sinkage indicator sums squared joint forces") {
    CHECK(sinkage_indicator(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(sinkage_indicator(std::vector<double>(12, 100.0)) == doctest::Approx(120000.0));
    CHECK(sinkage_indicator(std::vector<double>{100.0, 150.0}) == doctest::Approx(32500.0));
    CHECK(sinkage_indicator(std::vector<double>(12, 125.0)) == doctest::Approx(187500.0));
    CHECK_THROWS_AS(sinkage_indicator(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("sinkage indicator is invariant to joint ordering") {
    std::vector<double> forces{10, 80, 45, 120, 3, 99};
    const double s = sinkage_indicator(forces);
    std::mt19937 gen(5);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(forces.begin(), forces.end(), gen);
        CHECK(sinkage_indicator(forces) == doctest::Approx(s).epsilon(1e-15));
    }
}

TEST_CASE("sinkage traversability maps the calibration range linearly") {
    const SinkageCalibration calib{120000.0, 270000.0, 1.0};
    CHECK(sinkage_traversability(120000.0, calib).tau == 0.0);
    CHECK(sinkage_traversability(270000.0, calib).tau == 1.0);
    CHECK(sinkage_traversability(195000.0, calib).tau == doctest::Approx(0.5).epsilon(1e-9));

    SUBCASE("clamped outside the range") {
        CHECK(sinkage_traversability(0.0, calib).tau == 0.0);
        CHECK(sinkage_traversability(1e9, calib).tau == 1.0);
    }
    SUBCASE("gamma rescales before clamping") {
        const SinkageCalibration scaled{0.0, 1.0, 2.0};
        CHECK(sinkage_traversability(0.25, scaled).tau == doctest::Approx(0.5));
        CHECK(sinkage_traversability(0.75, scaled).tau == 1.0);
    }
    SUBCASE("monotone non-decreasing in the indicator") {
        double prev = -1.0;
        for (double s = 0.0; s <= 400000.0; s += 10000.0) {
            const double tau = sinkage_traversability(s, calib).tau;
            CHECK(tau >= prev);
            prev = tau;
        }
    }
    SUBCASE("invalid calibration rejected") {
        CHECK_THROWS_AS(sinkage_traversability(0.0, {5.0, 5.0, 1.0}), std::invalid_argument);
        CHECK_THROWS_AS(sinkage_traversability(0.0, {0.0, 1.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("slip traversability weighs the odometry disagreement") {
    const SlipCalibration calib{5.0, 1.0};
    SUBCASE("identical deltas score zero") {
        CHECK(slip_traversability(wheeled_sample(0.1, 0.1, 0.02, 0.02), calib).tau == 0.0);
    }
    SUBCASE("0.04 m distance gap scores 0.2") {
        CHECK(slip_traversability(wheeled_sample(0.1, 0.06, 0.0, 0.0), calib).tau ==
              doctest::Approx(0.2));
    }
    SUBCASE("large gaps clamp to 1") {
        CHECK(slip_traversability(wheeled_sample(0.3, 0.0, 0.0, 0.0), calib).tau == 1.0);
    }
    SUBCASE("symmetric in the sign of the gap") {
        const double a = slip_traversability(wheeled_sample(0.1, 0.06, 0.0, 0.0), calib).tau;
        const double b = slip_traversability(wheeled_sample(0.06, 0.1, 0.0, 0.0), calib).tau;
        CHECK(a == doctest::Approx(b));
    }
    SUBCASE("angular gap contributes through beta2") {
        CHECK(slip_traversability(wheeled_sample(0.1, 0.1, 0.0, 0.3), calib).tau ==
              doctest::Approx(0.3));
    }
    SUBCASE("legged sample without odometry throws") {
        ProprioSample legged;
        legged.joint_forces = {100.0};
        CHECK_THROWS_AS(slip_traversability(legged, calib), std::invalid_argument);
    }
    SUBCASE("degenerate calibrations rejected") {
        CHECK_THROWS_AS(slip_traversability(wheeled_sample(0.1, 0.1, 0, 0), {0.0, 0.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(slip_traversability(wheeled_sample(0.1, 0.1, 0, 0), {-1.0, 1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("noise-free sinkage recovers deformability through the closed form") {
    // With forces f0*(1+kappa*delta) and calibration endpoints n*f0^2 and
    // n*(f0*(1+kappa))^2, tau reduces to ((1+kd)^2 - 1) / ((1+k)^2 - 1).
    const double f0 = 100.0, kappa = 0.5;
    const int n = 12;
    const SinkageCalibration calib{n * f0 * f0, n * f0 * f0 * (1 + kappa) * (1 + kappa), 1.0};
    Rng rng(1);
    for (double delta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto cls = make_class("c", delta, 0, 0, 0, {0, 0, 0});
        const auto forces = synthesize_joint_forces(cls, rng, f0, kappa, 0.0, n);
        const double tau = sinkage_traversability(sinkage_indicator(forces), calib).tau;
        const double kd = 1.0 + kappa * delta;
        const double k1 = 1.0 + kappa;
        CHECK(tau == doctest::Approx((kd * kd - 1.0) / (k1 * k1 - 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("IMU energy accumulates per-axis squared accelerations") {
    ImuEnergyAccumulator acc;
    CHECK(acc.total() == 0.0);

    ProprioSample a;
    a.imu_accel = {1.0, 0.0, 0.0};
    ProprioSample b;
    b.imu_accel = {0.0, 2.0, 0.0};
    acc.add(a);
    acc.add(b);
    CHECK(acc.total() == doctest::Approx(5.0));
    CHECK(acc.n == 2);

    SUBCASE("closed form for a constant stream") {
        ImuEnergyAccumulator uniform;
        ProprioSample s;
        s.imu_accel = {0.5, 0.5, 0.5};
        for (int i = 0; i < 40; ++i) uniform.add(s);
        CHECK(uniform.total() == doctest::Approx(3 * 40 * 0.25));
    }
}

namespace {

/// Straight drive along +x at constant speed over a synthetic legged log.
std::vector<ProprioSample> straight_legged_log(const TerrainClass& cls, double speed,
                                               double duration, double dt) {
    Rng rng(1);
    std::vector<ProprioSample> log;
    for (double t = dt; t <= duration + 1e-9; t += dt) {
        ProprioSample s;
        s.t = t;
        s.position = {speed * t, 10.0};
        s.joint_forces = synthesize_joint_forces(cls, rng, 100.0, 0.5, 0.0, 12);
        log.push_back(std::move(s));
    }
    return log;
}

PatchEvent patch_event_at(const ScenarioConfig& cfg, Vec2 center, double t_image) {
    PatchEvent e;
    e.t_image = t_image;
    e.aerial = patch_descriptor(cfg.grid, cfg.classes, center, cfg.calibration.patch_size,
                                PatchDescriptor::Source::aerial);
    e.front = patch_descriptor(cfg.grid, cfg.classes, center, cfg.calibration.patch_size,
                               PatchDescriptor::Source::front);
    return e;
}

}  // namespace

TEST_CASE("exemplars associate a patch with the indicator measured inside it") {
    const auto mud = make_class("mud", 0.5, 0.0, 0.0, 0.4, {110, 90, 50});
    auto cfg = test::flat_scenario(mud, Embodiment::legged);
    const auto calib = cfg.sinkage_calibration();
    const auto indicator = make_indicator(Embodiment::legged, calib, cfg.calibration.slip);

    // patch captured at t=0 around x=10; driving 1 m/s from the origin the
    // robot crosses its near edge (x = 7.5) at about 7.5 s
    const auto log = straight_legged_log(mud, 1.0, 12.0, 0.1);
    const auto event = patch_event_at(cfg, {10.0, 10.0}, 0.0);
    const auto exemplars = associate_exemplars({event}, log, 1.0, 1.0, indicator);

    REQUIRE(exemplars.size() == 1);
    const auto& e = exemplars[0];
    CHECK(e.label == "mud");
    CHECK(e.t_proprio >= e.t_image);
    CHECK(e.t_proprio == doctest::Approx(7.6).epsilon(0.02));  // first tick past x=7.5
    // steady terrain: the averaged indicator equals the closed-form value
    CHECK(e.tau_shifted.tau == doctest::Approx((1.25 * 1.25 - 1.0) / 1.25).epsilon(1e-9));
}

TEST_CASE("a patch the robot never enters yields no exemplar") {
    const auto mud = make_class("mud", 0.5, 0.0, 0.0, 0.4, {110, 90, 50});
    auto cfg = test::flat_scenario(mud, Embodiment::legged);
    const auto indicator =
        make_indicator(Embodiment::legged, cfg.sinkage_calibration(), cfg.calibration.slip);

    const auto log = straight_legged_log(mud, 1.0, 8.0, 0.1);  // drives x = 5..13 at y = 10
    const auto far_patch = patch_event_at(cfg, {10.0, 25.0}, 0.0);
    CHECK(associate_exemplars({far_patch}, log, 1.0, 1.0, indicator).empty());

    SUBCASE("entry must happen after the capture time") {
        const auto behind = patch_event_at(cfg, {3.0, 10.0}, 7.9);  // square already left
        CHECK(associate_exemplars({behind}, log, 1.0, 1.0, indicator).empty());
    }
}

TEST_CASE("exemplar on rigid terrain scores zero") {
    const auto concrete = make_class("concrete", 0.0, 0.0, 0.0, 0.05, {180, 180, 185});
    auto cfg = test::flat_scenario(concrete, Embodiment::legged);
    const auto indicator =
        make_indicator(Embodiment::legged, cfg.sinkage_calibration(), cfg.calibration.slip);

    const auto log = straight_legged_log(concrete, 1.0, 8.0, 0.1);
    const auto event = patch_event_at(cfg, {10.0, 10.0}, 0.0);
    const auto exemplars = associate_exemplars({event}, log, 1.0, 1.0, indicator);
    REQUIRE(exemplars.size() == 1);
    CHECK(exemplars[0].tau_shifted.tau == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("the averaging window stays spatially inside the patch square") {
    const auto mud = make_class("mud", 1.0, 0.0, 0.0, 0.4, {110, 90, 50});
    auto cfg = test::flat_scenario(mud, Embodiment::legged);
    const auto indicator =
        make_indicator(Embodiment::legged, cfg.sinkage_calibration(), cfg.calibration.slip);

    // fast crossing: at 4 m/s the robot spends 1.25 s inside the 5 m square,
    // so a 2 s window must be clipped at the exit
    const auto log = straight_legged_log(mud, 4.0, 8.0, 0.1);
    const auto event = patch_event_at(cfg, {10.0, 10.0}, 0.0);
    const auto exemplars = associate_exemplars({event}, log, 2.0, 1.0, indicator);
    REQUIRE(exemplars.size() == 1);

    const double half = cfg.calibration.patch_size / 2.0;
    for (const auto& s : log) {
        if (s.t < exemplars[0].t_proprio || s.t > exemplars[0].t_proprio + 2.0) continue;
        if (std::abs(s.position.x - 10.0) > half) {
            // samples past the square exit exist, proving the clip mattered
            CHECK(s.position.x > 10.0 + half);
        }
    }
    CHECK(exemplars[0].tau_shifted.tau == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("indicator smoothing averages out a single-tick spike") {
    auto cfg = test::flat_scenario(make_class("c", 0, 0, 0, 0, {0, 0, 0}), Embodiment::wheeled);
    const SlipCalibration slip{10.0, 0.0};
    const auto indicator = make_indicator(Embodiment::wheeled, {}, slip);

    std::vector<ProprioSample> log;
    for (int i = 1; i <= 60; ++i) {
        auto s = wheeled_sample(0.1, (i == 16) ? 0.0 : 0.1, 0.0, 0.0);  // one full-slip tick
        s.t = i * 0.1;
        s.position = {5.0 + i * 0.1, 20.0};
        log.push_back(std::move(s));
    }
    // square [6.5, 11.5]: entry at i=15, spike at the next tick inside a
    // short 0.2 s averaging window
    const auto event = patch_event_at(cfg, {9.0, 20.0}, 0.0);

    const auto smoothed = associate_exemplars({event}, log, 0.2, 1.0, indicator);
    const auto unsmoothed = associate_exemplars({event}, log, 0.2, 0.1, indicator);
    REQUIRE(smoothed.size() == 1);
    REQUIRE(unsmoothed.size() == 1);
    // the spike dominates the raw window mean; the 1 s trailing average
    // spreads it out before the window sees it
    CHECK(unsmoothed[0].tau_shifted.tau >= 1.0 / 3.0 - 1e-9);
    CHECK(smoothed[0].tau_shifted.tau < unsmoothed[0].tau_shifted.tau);
    CHECK(smoothed[0].tau_shifted.tau < 0.1);
}

#!/usr/bin/env python3
"""Regenerates the bundled scenario JSON files in scenarios/."""

import json
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")

# 50 m x 30 m world at 0.5 m resolution
W, H, RES = 100, 60, 0.5


def base_grid(base_id):
    return [base_id] * (W * H)


def fill_rect(cells, class_id, x0, x1, y0, y1):
    """Metric rectangle [x0,x1) x [y0,y1) in meters."""
    for cy in range(int(y0 / RES), int(y1 / RES)):
        for cx in range(int(x0 / RES), int(x1 / RES)):
            cells[cy * W + cx] = class_id


def scenario(name, classes, cells, embodiment, weather, beta1=12.0, beta2=2.0,
             s_f=0.0, s_lidar=0.0):
    return {
        "name": name,
        "grid": {
            "width": W,
            "height": H,
            "resolution": RES,
            "cells": cells,
            "obstacles": [False] * (W * H),
        },
        "classes": classes,
        "start": {"x": 4.0, "y": 15.0},
        "goal": {"x": 46.0, "y": 15.0},
        "embodiment": embodiment,
        "weather": weather,
        "objective": {"kind": "avoid_hazard", "hazard_weight": 4.0},
        "planner": {
            "rho1": 1.0, "rho2": 1.0, "rho3": 0.3, "rho4": 1.5,
            "horizon": 2.0, "v_samples": 11, "omega_samples": 21,
            "rollout_dt": 0.2, "d_safe": 2.0,
            "frontier_lookahead": 3.0, "frontier_half_angle": 0.5235987755982988,
            "classify_period_ticks": 5, "marker_spacing": 5.0, "waypoint_radius": 2.0,
            "v_max": 1.0, "omega_max": 1.5, "a_max": 1.0, "alpha_max": 3.0, "dt": 0.1,
        },
        "calibration": {
            "beta1": beta1, "beta2": beta2,
            "smoothing_window": 1.0, "exemplar_window": 1.0,
            "patch_size": 5.0, "capture_period": 1.0, "capture_lookahead": 3.0,
            "pool_capacity": 8, "theta_replan": 0.2,
        },
        "simulator": {
            "n_joints": 12, "f0": 100.0, "kappa": 0.5,
            "s_f": s_f, "s_imu": 1.0, "s_lidar": s_lidar,
            "goal_radius": 1.0, "stuck_window": 3.0,
            "slip_stuck_threshold": 0.8, "sinkage_stuck_threshold": 0.9,
            "classifier_error_rate": 0.0,
        },
        "timeout_s": 150.0,
        "footprint_radius": 0.4,
    }


def tclass(label, delta, sigma, r, prior, appearance):
    return {"label": label, "deformability": delta, "slipperiness": sigma,
            "roughness": r, "prior_tau": prior, "appearance": list(appearance)}


def hazard_layout(base_id, hazard_id, corridor_id):
    """Hazard strip astride the straight start-goal line; clear corridor below."""
    cells = base_grid(base_id)
    fill_rect(cells, corridor_id, 0.0, 50.0, 0.0, 6.0)   # firm band along the bottom
    fill_rect(cells, hazard_id, 22.0, 30.0, 8.0, 30.0)   # strip blocking y >= 8
    return cells


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    scenarios = []

    # Legged robot; deep muddy grass astride the direct line.
    classes1 = [
        tclass("dry grass", 0.20, 0.10, 0.30, 0.15, (170, 190, 90)),
        tclass("muddy grass", 1.00, 0.80, 0.60, 0.65, (110, 90, 50)),
        tclass("concrete", 0.00, 0.00, 0.05, 0.05, (180, 180, 185)),
    ]
    scenarios.append(scenario("scenario1", classes1, hazard_layout(0, 1, 2),
                              "legged", "overcast after rain", s_f=3.0))

    # Legged robot; loose sand is severe but passable, so the baseline crosses
    # it and pays in vibration.
    classes2 = [
        tclass("dry grass", 0.20, 0.10, 0.30, 0.15, (170, 190, 90)),
        tclass("sand", 0.88, 0.30, 0.95, 0.60, (225, 205, 140)),
        tclass("concrete", 0.00, 0.00, 0.05, 0.05, (180, 180, 185)),
    ]
    scenarios.append(scenario("scenario2", classes2, hazard_layout(0, 1, 2),
                              "legged", "clear and dry", s_f=3.0))

    # Wheeled robot; saturated muddy grass immobilizes wheels.
    classes3 = [
        tclass("dry grass", 0.20, 0.15, 0.30, 0.15, (170, 190, 90)),
        tclass("muddy grass", 0.90, 1.00, 0.60, 0.65, (110, 90, 50)),
        tclass("concrete", 0.00, 0.00, 0.05, 0.05, (180, 180, 185)),
    ]
    scenarios.append(scenario("scenario3", classes3, hazard_layout(0, 1, 2),
                              "wheeled", "overcast after rain", s_lidar=0.002))

    # Wheeled robot; fresh snow over concrete, muddy shoulder along the top.
    classes4 = [
        tclass("concrete", 0.00, 0.00, 0.05, 0.05, (180, 180, 185)),
        tclass("snow", 0.10, 1.00, 0.30, 0.70, (240, 244, 250)),
        tclass("muddy grass", 0.60, 0.55, 0.60, 0.50, (110, 90, 50)),
    ]
    cells4 = hazard_layout(0, 1, 0)
    fill_rect(cells4, 2, 0.0, 50.0, 26.0, 30.0)
    scenarios.append(scenario("scenario4", classes4, cells4,
                              "wheeled", "after snowfall", s_lidar=0.002))

    for s in scenarios:
        path = os.path.join(OUT_DIR, s["name"] + ".json")
        with open(path, "w") as f:
            json.dump(s, f, indent=1)
            f.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()

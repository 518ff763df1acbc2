#include "gronav/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "gronav/proprioception.hpp"
#include "gronav/render.hpp"

namespace gronav {

using ordered_json = nlohmann::ordered_json;

std::string to_string(MethodVariant::Kind kind) {
    switch (kind) {
        case MethodVariant::Kind::full: return "full";
        case MethodVariant::Kind::no_gp: return "no_gp";
        case MethodVariant::Kind::no_icl: return "no_icl";
        case MethodVariant::Kind::dwa: return "dwa";
    }
    return "unknown";
}

MethodVariant::Kind variant_from_string(const std::string& s) {
    if (s == "full") return MethodVariant::Kind::full;
    if (s == "no_gp") return MethodVariant::Kind::no_gp;
    if (s == "no_icl") return MethodVariant::Kind::no_icl;
    if (s == "dwa") return MethodVariant::Kind::dwa;
    throw std::invalid_argument("unknown variant: " + s);
}

namespace {

struct ExemplarTracker {
    std::vector<PatchEvent> pending;
    std::vector<ProprioSample> log;

    /// Re-associates pending events against the full log and returns the
    /// exemplars whose averaging window has certainly completed.
    std::vector<Exemplar> drain(double now, double window_w, double smoothing_window,
                                const IndicatorFn& indicator) {
        auto exemplars = associate_exemplars(pending, log, window_w, smoothing_window, indicator);
        std::vector<Exemplar> ready;
        for (const auto& e : exemplars) {
            if (now <= e.t_proprio + window_w) continue;  // window may still be filling
            ready.push_back(e);
            pending.erase(std::remove_if(pending.begin(), pending.end(),
                                         [&](const PatchEvent& ev) {
                                             return ev.t_image == e.t_image;
                                         }),
                          pending.end());
        }
        return ready;
    }
};

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, const MethodVariant& variant,
                      std::uint64_t seed, const TrialOptions& options) {
    const auto wall_start = std::chrono::steady_clock::now();

    MockBackend mock(cfg.simulator.classifier_error_rate, seed);
    VlmBackend& backend = options.backend ? *options.backend : mock;

    TrialResult result;
    result.scenario = cfg.name;
    result.variant = to_string(variant.kind);
    result.seed = seed;
    result.straight_line = cfg.straight_line_distance();

    RobotState state;
    state.pose = {cfg.start.x, cfg.start.y,
                  std::atan2(cfg.goal.y - cfg.start.y, cfg.goal.x - cfg.start.x)};
    state.embodiment = cfg.embodiment;
    state.footprint_radius = cfg.footprint_radius;

    Simulator sim(cfg, seed);
    TerminationMonitor monitor(cfg, cfg.goal);
    DistanceField field(cfg.grid);
    const SinkageCalibration sink = cfg.sinkage_calibration();
    const SlipCalibration& slip = cfg.calibration.slip;
    const IndicatorFn indicator = make_indicator(cfg.embodiment, sink, slip);

    PromptTemplate prompt;
    prompt.weather = cfg.weather;
    std::vector<std::string> labels;
    for (const auto& c : cfg.classes) labels.push_back(c.label);
    ExemplarPool pool(labels, cfg.calibration.pool_capacity);
    TraversabilityTable table = init_terrain_classes(backend, cfg);

    std::optional<WaypointGraph> graph;
    WaypointPlan plan;
    TraversabilityTable table_at_plan = table;
    if (variant.uses_global_plan()) {
        graph = build_waypoint_graph(cfg.grid, cfg.classes, cfg.start, cfg.goal,
                                     cfg.planner.marker_spacing);
        MarkedAerialImage marked{&*graph, table, graph->start_id, graph->goal_id};
        plan = plan_global(backend, marked, cfg.objective, table, cfg.classes);
        plan.cursor = 0;
    }

    std::ofstream trace;
    if (options.trace_path) {
        trace.open(*options.trace_path);
        if (!trace) throw std::runtime_error("cannot open trace file: " + *options.trace_path);
    }

    ExemplarTracker tracker;
    ImuEnergyAccumulator imu;
    FrontierSet frontiers;
    double next_capture = 0.0;
    int tick = 0;
    TrialStatus status{};
    result.trajectory.push_back(state.pose.position());

    while (true) {
        const double t = sim.time();

        // local goal from the waypoint plan
        Vec2 local_goal = cfg.goal;
        if (graph && plan.valid) {
            while (plan.cursor + 1 < static_cast<int>(plan.ids.size()) &&
                   distance(state.pose.position(), graph->position(plan.ids[plan.cursor])) <=
                       cfg.planner.waypoint_radius)
                plan.cursor += 1;
            local_goal = graph->position(plan.ids[plan.cursor]);
        }

        // frontier refresh, cached between classification ticks
        if (variant.uses_frontier_cost() && tick % cfg.planner.classify_period_ticks == 0) {
            const auto candidates = extract_frontiers(state, cfg.grid,
                                                      cfg.planner.frontier_lookahead,
                                                      cfg.planner.frontier_half_angle);
            frontiers = classify_frontiers(backend, candidates, cfg.grid, cfg.classes, table,
                                           cfg.calibration.patch_size);
        }

        const auto choice = select_command(state, local_goal, field,
                                           variant.uses_frontier_cost() ? frontiers : FrontierSet{},
                                           cfg.planner, cfg.limits);

        // inline admissibility assertion
        {
            const auto& lim = cfg.limits;
            const double eps = 1e-9;
            const bool in_box = choice.v >= -eps && choice.v <= lim.v_max + eps &&
                                std::abs(choice.omega) <= lim.omega_max + eps;
            const bool in_window = std::abs(choice.v - state.v) <= lim.a_max * lim.dt + eps &&
                                   std::abs(choice.omega - state.omega) <=
                                       lim.alpha_max * lim.dt + eps;
            if (!in_box || !in_window) result.limit_violations += 1;
        }

        const Vec2 before = state.pose.position();
        const auto sample = sim.step(state, choice.v, choice.omega);
        result.path_length += distance(before, state.pose.position());
        result.trajectory.push_back(state.pose.position());
        imu.add(sample);
        tracker.log.push_back(sample);

        const double tau_tick = indicator(sample);
        monitor.record(sample, cfg.embodiment == Embodiment::legged ? tau_tick : 0.0);

        // patch capture ahead of the robot
        if (sim.time() >= next_capture) {
            next_capture += cfg.calibration.capture_period;
            const Vec2 ahead{state.pose.x + cfg.calibration.capture_lookahead * std::cos(state.pose.theta),
                             state.pose.y + cfg.calibration.capture_lookahead * std::sin(state.pose.theta)};
            try {
                PatchEvent event;
                event.t_image = sim.time();
                event.aerial = patch_descriptor(cfg.grid, cfg.classes, ahead,
                                                cfg.calibration.patch_size,
                                                PatchDescriptor::Source::aerial);
                event.front = patch_descriptor(cfg.grid, cfg.classes, ahead,
                                               cfg.calibration.patch_size,
                                               PatchDescriptor::Source::front);
                tracker.pending.push_back(std::move(event));
            } catch (const std::invalid_argument&) {
                // patch fully outside the grid; nothing to capture
            }
        }

        // grounding: finished exemplars update the pool and the table
        if (variant.uses_icl() && tick % 10 == 0) {
            for (const auto& e : tracker.drain(sim.time(), cfg.calibration.exemplar_window,
                                               cfg.calibration.smoothing_window, indicator)) {
                pool.push(e);
                refresh_table(table, backend, prompt, pool, cfg.classes, sim.time());
            }
        }

        // replanning on significant traversability change along the route
        if (variant.kind == MethodVariant::Kind::full && graph && plan.valid &&
            should_replan(table_at_plan, table, plan, *graph, cfg.classes,
                          cfg.calibration.theta_replan)) {
            MarkedAerialImage marked{&*graph, table, graph->start_id, graph->goal_id};
            plan = plan_global(backend, marked, cfg.objective, table, cfg.classes);
            plan.cursor = 0;
            table_at_plan = table;
            result.replan_count += 1;
        }

        status = monitor.update(state, sim.time());

        if (trace.is_open()) {
            ordered_json line;
            line["t"] = sample.t;
            line["pose"] = {state.pose.x, state.pose.y, state.pose.theta};
            line["cmd"] = {choice.v, choice.omega};
            line["tau_tick"] = tau_tick;
            line["imu"] = {sample.imu_accel[0], sample.imu_accel[1], sample.imu_accel[2]};
            line["state"] = to_string(status.state);
            trace << line.dump() << "\n";
        }

        if (status.terminal()) break;
        (void)t;
        tick += 1;
    }

    result.status = status;
    result.sim_time = status.t;
    result.imu_energy = imu.total();
    result.norm_traj_length =
        result.straight_line > 0 ? result.path_length / result.straight_line : 0.0;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                           .count();
    return result;
}

BatchResult run_batch(const ScenarioConfig& cfg, const std::vector<MethodVariant>& variants,
                      int n_trials, std::uint64_t base_seed, const TrialOptions& options) {
    if (n_trials < 1) throw std::invalid_argument("batch needs at least one trial");
    BatchResult batch;
    for (const auto& variant : variants) {
        BatchSummaryRow row;
        row.variant = to_string(variant.kind);
        row.n_trials = n_trials;
        double norm_sum = 0.0;
        double imu_sum = 0.0;
        for (int i = 0; i < n_trials; ++i) {
            auto r = run_trial(cfg, variant, base_seed + static_cast<std::uint64_t>(i), options);
            norm_sum += r.norm_traj_length;
            if (r.status.state == TrialState::success) {
                row.n_success += 1;
                imu_sum += r.imu_energy;
            }
            batch.trials.push_back(std::move(r));
        }
        row.success_rate = static_cast<double>(row.n_success) / n_trials;
        row.mean_norm_traj_length = norm_sum / n_trials;
        row.mean_imu_energy = row.n_success > 0 ? imu_sum / row.n_success
                                                : std::numeric_limits<double>::quiet_NaN();
        batch.summary.push_back(std::move(row));
    }
    return batch;
}

std::string trial_result_to_json(const TrialResult& r) {
    ordered_json j;
    j["scenario"] = r.scenario;
    j["variant"] = r.variant;
    j["seed"] = r.seed;
    j["status"] = to_string(r.status.state);
    j["path_length"] = r.path_length;
    j["straight_line"] = r.straight_line;
    j["norm_traj_length"] = r.norm_traj_length;
    j["imu_energy"] = r.imu_energy;
    j["sim_time"] = r.sim_time;
    j["replan_count"] = r.replan_count;
    j["limit_violations"] = r.limit_violations;
    return j.dump();
}

void emit_outputs(const ScenarioConfig& cfg, const BatchResult& results,
                  const std::string& out_dir, const OutputFlags& flags) {
    std::filesystem::create_directories(out_dir);

    std::ofstream jsonl(out_dir + "/results.jsonl");
    if (!jsonl) throw std::runtime_error("cannot write results.jsonl in " + out_dir);
    for (const auto& r : results.trials) jsonl << trial_result_to_json(r) << "\n";

    std::ofstream csv(out_dir + "/summary.csv");
    if (!csv) throw std::runtime_error("cannot write summary.csv in " + out_dir);
    csv << "variant,success_rate,norm_traj_length,imu_energy\n";
    for (const auto& row : results.summary) {
        csv << row.variant << "," << row.success_rate << "," << row.mean_norm_traj_length << ",";
        if (std::isnan(row.mean_imu_energy))
            csv << "n/a";
        else
            csv << row.mean_imu_energy;
        csv << "\n";
    }

    if (flags.plot) {
        static const std::array<std::uint8_t, 3> palette[4] = {
            {60, 160, 255}, {30, 30, 30}, {200, 120, 30}, {140, 60, 200}};
        std::vector<TrajectoryOverlay> overlays;
        std::map<std::string, int> variant_color;
        for (const auto& r : results.trials) {
            auto [it, inserted] =
                variant_color.emplace(r.variant, static_cast<int>(variant_color.size()) % 4);
            overlays.push_back({r.variant, palette[it->second], r.trajectory});
            (void)inserted;
        }
        write_png(out_dir + "/trajectories.png",
                  render_trajectories(cfg.grid, cfg.classes, cfg.start, cfg.goal, overlays));
    }

    if (flags.marked_image_path) {
        const auto graph = build_waypoint_graph(cfg.grid, cfg.classes, cfg.start, cfg.goal,
                                                cfg.planner.marker_spacing);
        write_png(*flags.marked_image_path, render_marked_aerial(cfg.grid, cfg.classes, graph));
    }
}

}  // namespace gronav

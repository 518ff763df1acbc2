#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gronav/global_planner.hpp"
#include "gronav/local_planner.hpp"
#include "gronav/reasoning.hpp"
#include "gronav/simulator.hpp"
#include "gronav/world.hpp"

namespace gronav {

struct MethodVariant {
    enum class Kind { full, no_gp, no_icl, dwa };
    Kind kind{Kind::full};

    bool uses_global_plan() const { return kind == Kind::full || kind == Kind::no_icl; }
    bool uses_icl() const { return kind == Kind::full || kind == Kind::no_gp; }
    bool uses_frontier_cost() const { return kind != Kind::dwa; }
};

std::string to_string(MethodVariant::Kind kind);
MethodVariant::Kind variant_from_string(const std::string& s);

struct TrialResult {
    std::string scenario;
    std::string variant;
    std::uint64_t seed{0};
    TrialStatus status;
    double path_length{0.0};
    double straight_line{0.0};
    double norm_traj_length{0.0};
    double imu_energy{0.0};
    double sim_time{0.0};
    double wall_time{0.0};  // not serialized; results must be bit-reproducible
    int replan_count{0};
    int limit_violations{0};  // commands outside the velocity box or accel window
    std::vector<Vec2> trajectory;
};

struct TrialOptions {
    std::optional<std::string> trace_path;  // JSON-lines per-tick trace
    VlmBackend* backend{nullptr};           // default: per-trial seeded mock
};

/// One seeded trial: init, then tick {sense -> proprioception -> reasoning ->
/// replan? -> local plan -> step} until a terminal status.
TrialResult run_trial(const ScenarioConfig& cfg, const MethodVariant& variant,
                      std::uint64_t seed, const TrialOptions& options = {});

struct BatchSummaryRow {
    std::string variant;
    double success_rate{0.0};
    double mean_norm_traj_length{0.0};  // over all trials
    double mean_imu_energy{0.0};        // over successful trials; NaN when none
    int n_trials{0};
    int n_success{0};
};

struct BatchResult {
    std::vector<TrialResult> trials;
    std::vector<BatchSummaryRow> summary;
};

/// Runs n_trials per variant with seeds base_seed + trial index (shared
/// across variants).
BatchResult run_batch(const ScenarioConfig& cfg, const std::vector<MethodVariant>& variants,
                      int n_trials, std::uint64_t base_seed, const TrialOptions& options = {});

struct OutputFlags {
    bool plot{false};
    std::optional<std::string> marked_image_path;
};

std::string trial_result_to_json(const TrialResult& r);

/// Writes results.jsonl and summary.csv (and optional PNGs) to out_dir.
void emit_outputs(const ScenarioConfig& cfg, const BatchResult& results,
                  const std::string& out_dir, const OutputFlags& flags);

}  // namespace gronav

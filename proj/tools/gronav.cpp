#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gronav/harness.hpp"
#include "gronav/remote_backend.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gronav: terrain-aware navigation trials in a seeded 2D simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a batch of seeded trials");
    std::string scenario_path;
    std::vector<std::string> variant_names{"full"};
    std::string backend_name = "mock";
    int n_trials = 10;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool plot = false;
    std::string marked_image_path;
    bool trace = false;
    std::string remote_url;
    std::string remote_model = "gpt-4o";
    double remote_timeout = 10.0;

    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--variant", variant_names, "Method variant: full|no_gp|no_icl|dwa (repeatable)");
    run->add_option("--backend", backend_name, "VLM backend: mock|remote");
    run->add_option("--trials", n_trials, "Trials per variant");
    run->add_option("--seed", seed, "Base seed; trial i uses seed + i");
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--plot", plot, "Write trajectories.png");
    run->add_option("--emit-marked-image", marked_image_path, "Write the marked aerial PNG here");
    run->add_flag("--trace", trace, "Write per-trial tick traces to the output directory");
    run->add_option("--remote-url", remote_url, "Remote backend base URL");
    run->add_option("--remote-model", remote_model, "Remote backend model name");
    run->add_option("--remote-timeout", remote_timeout, "Remote backend timeout (s)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = gronav::load_scenario(scenario_path);

        std::vector<gronav::MethodVariant> variants;
        for (const auto& name : variant_names)
            variants.push_back({gronav::variant_from_string(name)});

        std::unique_ptr<gronav::RemoteBackend> remote;
        gronav::TrialOptions options;
        if (backend_name == "remote") {
            if (remote_url.empty())
                throw std::invalid_argument("remote backend requires --remote-url");
            gronav::RemoteConfig rc;
            rc.base_url = remote_url;
            rc.model = remote_model;
            rc.timeout_s = remote_timeout;
            remote = std::make_unique<gronav::RemoteBackend>(rc);
            options.backend = remote.get();
        } else if (backend_name != "mock") {
            throw std::invalid_argument("unknown backend: " + backend_name);
        }

        gronav::BatchResult batch;
        if (trace) {
            // per-trial trace files need distinct paths, so run trial by trial
            std::filesystem::create_directories(out_dir);
            for (const auto& variant : variants) {
                gronav::BatchSummaryRow row;
                row.variant = gronav::to_string(variant.kind);
                row.n_trials = n_trials;
                double norm_sum = 0.0, imu_sum = 0.0;
                for (int i = 0; i < n_trials; ++i) {
                    auto opt = options;
                    opt.trace_path = out_dir + "/trace_" + row.variant + "_" +
                                     std::to_string(seed + i) + ".jsonl";
                    auto r = gronav::run_trial(cfg, variant, seed + i, opt);
                    norm_sum += r.norm_traj_length;
                    if (r.status.state == gronav::TrialState::success) {
                        row.n_success += 1;
                        imu_sum += r.imu_energy;
                    }
                    batch.trials.push_back(std::move(r));
                }
                row.success_rate = static_cast<double>(row.n_success) / n_trials;
                row.mean_norm_traj_length = norm_sum / n_trials;
                row.mean_imu_energy = row.n_success ? imu_sum / row.n_success
                                                    : std::numeric_limits<double>::quiet_NaN();
                batch.summary.push_back(std::move(row));
            }
        } else {
            batch = gronav::run_batch(cfg, variants, n_trials, seed, options);
        }

        gronav::OutputFlags flags;
        flags.plot = plot;
        if (!marked_image_path.empty()) flags.marked_image_path = marked_image_path;
        gronav::emit_outputs(cfg, batch, out_dir, flags);

        for (const auto& row : batch.summary)
            std::cout << cfg.name << " " << row.variant << ": success_rate=" << row.success_rate
                      << " norm_traj_length=" << row.mean_norm_traj_length
                      << " imu_energy=" << row.mean_imu_energy << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

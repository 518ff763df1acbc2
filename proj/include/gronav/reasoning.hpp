#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gronav/proprioception.hpp"
#include "gronav/rng.hpp"
#include "gronav/world.hpp"

namespace gronav {

/// Per-label ring buffers of exemplars, FIFO-evicted at capacity.
class ExemplarPool {
public:
    ExemplarPool(std::vector<std::string> labels, int capacity);

    /// Appends to the exemplar's label buffer; evicts the oldest entry when
    /// over capacity. Throws on a label outside the scenario class set.
    void push(const Exemplar& exemplar);

    const std::deque<Exemplar>& buffer(const std::string& label) const;
    bool known_label(const std::string& label) const { return buffers_.count(label) > 0; }
    int capacity() const { return capacity_; }

    /// Most recent exemplars first, capped at capacity.
    std::vector<Exemplar> recent(const std::string& label) const;

private:
    std::map<std::string, std::deque<Exemplar>> buffers_;
    int capacity_;
};

enum class Provenance { prior, grounded };

struct TraversabilityTable {
    struct Entry {
        double tau{0.0};
        Provenance provenance{Provenance::prior};
        double last_update{0.0};
    };
    std::map<std::string, Entry> entries;

    double tau(const std::string& label) const { return entries.at(label).tau; }
};

/// Text scaffolding for in-context queries; exemplar tau values are carried
/// at 2-decimal precision.
struct PromptTemplate {
    std::string system_text =
        "You estimate terrain traversability for a ground robot. "
        "0.0 means fully traversable, 1.0 means impassable. "
        "Reply with a fenced JSON object {\"tau\": <number>}.";
    std::string weather;

    std::string render_exemplar(const Exemplar& e) const;
    std::string render_query(const std::string& label, const PatchDescriptor* patch) const;
    std::string build(const std::vector<Exemplar>& exemplars, const std::string& query_label,
                      const PatchDescriptor* query_patch) const;
};

/// Round-trips a tau value through the 2-decimal prompt encoding.
double parse_prompt_tau(const std::string& exemplar_line);

/// Everything a backend needs to answer a global-planning query.
struct WaypointQuery {
    std::vector<unsigned char> marked_png;  // raster marked aerial image
    NavigationObjective objective;
    std::map<std::string, double> label_taus;
    int marker_count{0};
    int start_id{0};
    int goal_id{0};
};

/// Pluggable VLM. The mock implementation is the normative semantics for
/// tests; the remote implementation is behavior-compatible.
class VlmBackend {
public:
    virtual ~VlmBackend() = default;

    virtual std::string name() const = 0;

    /// Terrain label of a patch. Must return a label from `classes`.
    virtual std::string classify(const PatchDescriptor& patch,
                                 const std::vector<TerrainClass>& classes) = 0;

    /// Traversability estimate given exemplars (most recent first).
    /// nullopt means "no answer" and the caller falls back to the prior or
    /// the last table value.
    virtual std::optional<double> estimate(const PromptTemplate& prompt,
                                           const std::vector<Exemplar>& exemplars,
                                           const std::string& query_label,
                                           const PatchDescriptor* query_patch) = 0;

    /// Ordered marker ids; nullopt routes the caller to mock plan semantics.
    virtual std::optional<std::vector<int>> select_waypoints(const WaypointQuery& query) = 0;
};

/// Deterministic oracle: classify = majority class (confused with probability
/// p_err), estimate = class-conditional mean of pooled indicators.
class MockBackend : public VlmBackend {
public:
    explicit MockBackend(double p_err = 0.0, std::uint64_t seed = 0)
        : p_err_(p_err), rng_(Rng::splitmix(seed ^ 0x6d6f636bULL)) {}

    std::string name() const override { return "mock"; }
    std::string classify(const PatchDescriptor& patch,
                         const std::vector<TerrainClass>& classes) override;
    std::optional<double> estimate(const PromptTemplate& prompt,
                                   const std::vector<Exemplar>& exemplars,
                                   const std::string& query_label,
                                   const PatchDescriptor* query_patch) override;
    std::optional<std::vector<int>> select_waypoints(const WaypointQuery& query) override;

private:
    double p_err_;
    Rng rng_;
};

/// Table of per-class priors from the scenario config. A remote backend may
/// override a prior; answers are clamped to [0,1] and failures fall back to
/// the config value.
TraversabilityTable init_terrain_classes(VlmBackend& backend, const ScenarioConfig& cfg);

struct EstimateResult {
    TraversabilityValue value;
    Provenance provenance{Provenance::prior};
};

/// Resolves the query to a label (majority class for a patch) and asks the
/// backend; empty pools fall back to the class prior.
EstimateResult estimate_traversability(VlmBackend& backend, const PromptTemplate& prompt,
                                       const ExemplarPool& pool, const std::string& query_label,
                                       const PatchDescriptor* query_patch,
                                       const std::vector<TerrainClass>& classes);

/// Re-estimates every label with a non-empty buffer; other entries untouched.
void refresh_table(TraversabilityTable& table, VlmBackend& backend,
                   const PromptTemplate& prompt, const ExemplarPool& pool,
                   const std::vector<TerrainClass>& classes, double now);

}  // namespace gronav

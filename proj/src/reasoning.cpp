#include "gronav/reasoning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gronav {

ExemplarPool::ExemplarPool(std::vector<std::string> labels, int capacity)
    : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("pool capacity must be at least 1");
    for (auto& l : labels) buffers_[std::move(l)];
}

void ExemplarPool::push(const Exemplar& exemplar) {
    auto it = buffers_.find(exemplar.label);
    if (it == buffers_.end())
        throw std::invalid_argument("exemplar label not in scenario class set: " + exemplar.label);
    it->second.push_back(exemplar);
    while (static_cast<int>(it->second.size()) > capacity_) it->second.pop_front();
}

const std::deque<Exemplar>& ExemplarPool::buffer(const std::string& label) const {
    auto it = buffers_.find(label);
    if (it == buffers_.end())
        throw std::invalid_argument("unknown label: " + label);
    return it->second;
}

std::vector<Exemplar> ExemplarPool::recent(const std::string& label) const {
    const auto& buf = buffer(label);
    return {buf.rbegin(), buf.rend()};
}

namespace {

std::string format_tau(double tau) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", tau);
    return buf;
}

}  // namespace

std::string PromptTemplate::render_exemplar(const Exemplar& e) const {
    std::ostringstream os;
    os << "example terrain=" << e.label << " tau=" << format_tau(e.tau_shifted.tau)
       << " histogram={";
    bool first = true;
    for (const auto& [label, frac] : e.aerial.class_histogram) {
        if (!first) os << ", ";
        os << label << ": " << format_tau(frac);
        first = false;
    }
    os << "}";
    return os.str();
}

std::string PromptTemplate::render_query(const std::string& label,
                                         const PatchDescriptor* patch) const {
    std::ostringstream os;
    os << "query terrain=" << label;
    if (patch) {
        os << " histogram={";
        bool first = true;
        for (const auto& [l, frac] : patch->class_histogram) {
            if (!first) os << ", ";
            os << l << ": " << format_tau(frac);
            first = false;
        }
        os << "}";
    }
    return os.str();
}

std::string PromptTemplate::build(const std::vector<Exemplar>& exemplars,
                                  const std::string& query_label,
                                  const PatchDescriptor* query_patch) const {
    std::ostringstream os;
    os << system_text << "\n";
    if (!weather.empty()) os << "weather: " << weather << "\n";
    for (const auto& e : exemplars) os << render_exemplar(e) << "\n";
    os << render_query(query_label, query_patch) << "\n";
    return os.str();
}

double parse_prompt_tau(const std::string& exemplar_line) {
    const auto pos = exemplar_line.find("tau=");
    if (pos == std::string::npos) throw std::invalid_argument("no tau field in prompt line");
    return std::stod(exemplar_line.substr(pos + 4));
}

std::string MockBackend::classify(const PatchDescriptor& patch,
                                  const std::vector<TerrainClass>& classes) {
    const std::string majority = patch.majority_label();
    if (p_err_ <= 0.0 || classes.size() < 2 || rng_.uniform01() >= p_err_) return majority;

    // confuse with the appearance-nearest other class
    const TerrainClass* truth = nullptr;
    for (const auto& c : classes)
        if (c.label == majority) truth = &c;
    if (!truth) return majority;
    const TerrainClass* best = nullptr;
    double best_d2 = 0.0;
    for (const auto& c : classes) {
        if (c.label == majority) continue;
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = static_cast<double>(c.appearance[k]) - truth->appearance[k];
            d2 += d * d;
        }
        if (!best || d2 < best_d2) {
            best = &c;
            best_d2 = d2;
        }
    }
    return best->label;
}

std::optional<double> MockBackend::estimate(const PromptTemplate&,
                                            const std::vector<Exemplar>& exemplars,
                                            const std::string&, const PatchDescriptor*) {
    if (exemplars.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& e : exemplars) sum += e.tau_shifted.tau;
    return sum / static_cast<double>(exemplars.size());
}

std::optional<std::vector<int>> MockBackend::select_waypoints(const WaypointQuery&) {
    return std::nullopt;  // routed to graph-search semantics by the caller
}

TraversabilityTable init_terrain_classes(VlmBackend& backend, const ScenarioConfig& cfg) {
    TraversabilityTable table;
    PromptTemplate prompt;
    prompt.weather = cfg.weather;
    for (const auto& c : cfg.classes) {
        TraversabilityTable::Entry e;
        e.tau = clamp01(c.prior_tau);
        e.provenance = Provenance::prior;
        e.last_update = 0.0;
        if (backend.name() != "mock") {
            if (auto tau = backend.estimate(prompt, {}, c.label, nullptr))
                e.tau = clamp01(*tau);
        }
        table.entries[c.label] = e;
    }
    return table;
}

EstimateResult estimate_traversability(VlmBackend& backend, const PromptTemplate& prompt,
                                       const ExemplarPool& pool, const std::string& query_label,
                                       const PatchDescriptor* query_patch,
                                       const std::vector<TerrainClass>& classes) {
    std::string label = query_label;
    if (label.empty() && query_patch) label = query_patch->majority_label();
    const TerrainClass* cls = nullptr;
    for (const auto& c : classes)
        if (c.label == label) cls = &c;
    if (!cls) throw std::invalid_argument("estimate query label not in class set: " + label);

    const auto exemplars = pool.recent(label);
    if (auto tau = backend.estimate(prompt, exemplars, label, query_patch)) {
        EstimateResult r;
        r.value = {clamp01(*tau)};
        r.provenance = exemplars.empty() ? Provenance::prior : Provenance::grounded;
        return r;
    }
    return {{clamp01(cls->prior_tau)}, Provenance::prior};
}

void refresh_table(TraversabilityTable& table, VlmBackend& backend,
                   const PromptTemplate& prompt, const ExemplarPool& pool,
                   const std::vector<TerrainClass>& classes, double now) {
    for (const auto& c : classes) {
        if (pool.buffer(c.label).empty()) continue;
        const auto r = estimate_traversability(backend, prompt, pool, c.label, nullptr, classes);
        auto& entry = table.entries.at(c.label);
        entry.tau = r.value.tau;
        entry.provenance = r.provenance;
        entry.last_update = now;
    }
}

}  // namespace gronav

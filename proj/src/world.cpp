#include "gronav/world.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gronav {

using ordered_json = nlohmann::ordered_json;

int WorldGrid::coord_to_cell(double v, int n_cells) const {
    const double scaled = v / resolution;
    int c = static_cast<int>(std::floor(scaled));
    // exact boundary resolves to the lower cell index
    if (scaled == std::floor(scaled) && c > 0) c -= 1;
    if (c >= n_cells) c = n_cells - 1;
    return c;
}

bool WorldGrid::obstacle_at(Vec2 p) const {
    if (!in_bounds(p)) return false;
    return obstacles[index(cell_x(p.x), cell_y(p.y))] != 0;
}

std::string to_string(Embodiment e) {
    return e == Embodiment::legged ? "legged" : "wheeled";
}

Embodiment embodiment_from_string(const std::string& s) {
    if (s == "legged") return Embodiment::legged;
    if (s == "wheeled") return Embodiment::wheeled;
    throw std::invalid_argument("unknown embodiment: " + s);
}

void KinematicLimits::validate() const {
    if (!(v_max > 0 && omega_max > 0 && a_max > 0 && alpha_max > 0 && dt > 0))
        throw std::invalid_argument("kinematic limits must be strictly positive");
}

void PlannerWeights::validate() const {
    if (rho1 < 0 || rho2 < 0 || rho3 < 0 || rho4 < 0)
        throw std::invalid_argument("planner weights must be non-negative");
    if (!(horizon > 0)) throw std::invalid_argument("planner horizon must be positive");
    if (v_samples < 3 || omega_samples < 3)
        throw std::invalid_argument("planner sample counts must be at least 3");
}

const TerrainClass& ScenarioConfig::class_at(Vec2 p) const {
    return terrain_at(grid, classes, p);
}

double ScenarioConfig::straight_line_distance() const {
    return distance(start, goal);
}

SinkageCalibration ScenarioConfig::sinkage_calibration() const {
    if (!calibration.sinkage_from_force_law) return calibration.sinkage;
    SinkageCalibration c;
    const double n = simulator.n_joints;
    const double f0 = simulator.f0;
    const double fmax = f0 * (1.0 + simulator.kappa);
    c.s_min = n * f0 * f0;
    c.s_max = n * fmax * fmax;
    c.gamma = 1.0;
    return c;
}

void ScenarioConfig::validate() const {
    if (grid.width <= 0 || grid.height <= 0)
        throw std::invalid_argument("grid dimensions must be positive");
    if (!(grid.resolution > 0))
        throw std::invalid_argument("grid resolution must be positive");
    const std::size_t n_cells = static_cast<std::size_t>(grid.width) * grid.height;
    if (grid.cells.size() != n_cells)
        throw std::invalid_argument("grid cells array size does not match width*height");
    if (grid.obstacles.size() != n_cells)
        throw std::invalid_argument("grid obstacles array size does not match width*height");
    if (classes.empty()) throw std::invalid_argument("scenario declares no terrain classes");
    std::set<std::string> labels;
    for (const auto& c : classes) {
        if (!labels.insert(c.label).second)
            throw std::invalid_argument("duplicate terrain label: " + c.label);
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(c.deformability) || !in01(c.slipperiness) || !in01(c.roughness) || !in01(c.prior_tau))
            throw std::invalid_argument("terrain properties of '" + c.label + "' must lie in [0,1]");
    }
    for (std::uint8_t id : grid.cells)
        if (id >= classes.size())
            throw std::invalid_argument("grid cell refers to undeclared terrain class id");
    if (!grid.in_bounds(start)) throw std::invalid_argument("start position out of grid bounds");
    if (!grid.in_bounds(goal)) throw std::invalid_argument("goal position out of grid bounds");
    if (grid.obstacle_at(start)) throw std::invalid_argument("start lies on an obstacle cell");
    if (grid.obstacle_at(goal)) throw std::invalid_argument("goal lies on an obstacle cell");
    if (!(straight_line_distance() > 0))
        throw std::invalid_argument("start and goal must be distinct");
    if (!(timeout_s > 0)) throw std::invalid_argument("trial timeout must be positive");
    limits.validate();
    planner.validate();
    calibration.slip.validate();
    sinkage_calibration().validate();
    if (objective.hazard_weight < 0)
        throw std::invalid_argument("hazard weight must be non-negative");
}

std::string PatchDescriptor::majority_label() const {
    std::string best;
    double best_frac = -1.0;
    for (const auto& [label, frac] : class_histogram) {
        if (frac > best_frac) {  // map iteration is sorted, so ties keep the smaller label
            best_frac = frac;
            best = label;
        }
    }
    return best;
}

const TerrainClass& terrain_at(const WorldGrid& grid,
                               const std::vector<TerrainClass>& classes,
                               Vec2 position) {
    if (!grid.in_bounds(position)) {
        std::ostringstream os;
        os << "position (" << position.x << ", " << position.y << ") out of grid bounds";
        throw std::out_of_range(os.str());
    }
    const int cx = grid.cell_x(position.x);
    const int cy = grid.cell_y(position.y);
    return classes[grid.cells[grid.index(cx, cy)]];
}

PatchDescriptor patch_descriptor(const WorldGrid& grid,
                                 const std::vector<TerrainClass>& classes,
                                 Vec2 center, double size,
                                 PatchDescriptor::Source source) {
    if (!(size > 0)) throw std::invalid_argument("patch size must be positive");
    PatchDescriptor patch;
    patch.center = center;
    patch.size = size;
    patch.source = source;

    const double half = size / 2.0;
    std::map<std::string, int> counts;
    int total = 0;
    const int cx_lo = std::max(0, static_cast<int>(std::floor((center.x - half) / grid.resolution)));
    const int cx_hi = std::min(grid.width - 1, static_cast<int>(std::floor((center.x + half) / grid.resolution)));
    const int cy_lo = std::max(0, static_cast<int>(std::floor((center.y - half) / grid.resolution)));
    const int cy_hi = std::min(grid.height - 1, static_cast<int>(std::floor((center.y + half) / grid.resolution)));
    for (int cy = cy_lo; cy <= cy_hi; ++cy) {
        for (int cx = cx_lo; cx <= cx_hi; ++cx) {
            const double px = (cx + 0.5) * grid.resolution;
            const double py = (cy + 0.5) * grid.resolution;
            if (px < center.x - half || px > center.x + half) continue;
            if (py < center.y - half || py > center.y + half) continue;
            counts[classes[grid.cells[grid.index(cx, cy)]].label] += 1;
            total += 1;
        }
    }
    if (total == 0) throw std::invalid_argument("patch lies fully outside the grid");

    std::map<std::string, const TerrainClass*> by_label;
    for (const auto& c : classes) by_label[c.label] = &c;
    for (const auto& [label, count] : counts) {
        const double frac = static_cast<double>(count) / total;
        patch.class_histogram[label] = frac;
        const auto& app = by_label.at(label)->appearance;
        for (int k = 0; k < 3; ++k) patch.mean_appearance[k] += frac * app[k];
    }
    return patch;
}

namespace {

ordered_json vec2_to_json(Vec2 v) { return ordered_json{{"x", v.x}, {"y", v.y}}; }

Vec2 vec2_from_json(const nlohmann::json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

std::string objective_kind_to_string(NavigationObjective::Kind k) {
    return k == NavigationObjective::Kind::min_length ? "min_length" : "avoid_hazard";
}

NavigationObjective::Kind objective_kind_from_string(const std::string& s) {
    if (s == "min_length") return NavigationObjective::Kind::min_length;
    if (s == "avoid_hazard") return NavigationObjective::Kind::avoid_hazard;
    throw std::invalid_argument("unknown objective kind: " + s);
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("scenario parse error: ") + e.what());
    }

    ScenarioConfig cfg;
    try {
        read_if(j, "name", cfg.name);
        const auto& jg = j.at("grid");
        cfg.grid.width = jg.at("width").get<int>();
        cfg.grid.height = jg.at("height").get<int>();
        cfg.grid.resolution = jg.at("resolution").get<double>();
        cfg.grid.cells = jg.at("cells").get<std::vector<std::uint8_t>>();
        for (const auto& b : jg.at("obstacles"))
            cfg.grid.obstacles.push_back(b.get<bool>() ? 1 : 0);

        for (const auto& jc : j.at("classes")) {
            TerrainClass c;
            c.label = jc.at("label").get<std::string>();
            c.deformability = jc.at("deformability").get<double>();
            c.slipperiness = jc.at("slipperiness").get<double>();
            c.roughness = jc.at("roughness").get<double>();
            c.prior_tau = jc.at("prior_tau").get<double>();
            const auto& app = jc.at("appearance");
            for (int k = 0; k < 3; ++k) c.appearance[k] = app.at(k).get<std::uint8_t>();
            cfg.classes.push_back(std::move(c));
        }

        cfg.start = vec2_from_json(j.at("start"));
        cfg.goal = vec2_from_json(j.at("goal"));
        cfg.embodiment = embodiment_from_string(j.at("embodiment").get<std::string>());
        cfg.weather = j.at("weather").get<std::string>();

        const auto& jo = j.at("objective");
        cfg.objective.kind = objective_kind_from_string(jo.at("kind").get<std::string>());
        read_if(jo, "hazard_weight", cfg.objective.hazard_weight);

        const auto& jp = j.at("planner");
        auto& p = cfg.planner;
        read_if(jp, "rho1", p.rho1);
        read_if(jp, "rho2", p.rho2);
        read_if(jp, "rho3", p.rho3);
        read_if(jp, "rho4", p.rho4);
        read_if(jp, "horizon", p.horizon);
        read_if(jp, "v_samples", p.v_samples);
        read_if(jp, "omega_samples", p.omega_samples);
        read_if(jp, "rollout_dt", p.rollout_dt);
        read_if(jp, "d_safe", p.d_safe);
        read_if(jp, "frontier_lookahead", p.frontier_lookahead);
        read_if(jp, "frontier_half_angle", p.frontier_half_angle);
        read_if(jp, "classify_period_ticks", p.classify_period_ticks);
        read_if(jp, "marker_spacing", p.marker_spacing);
        read_if(jp, "waypoint_radius", p.waypoint_radius);
        auto& l = cfg.limits;
        read_if(jp, "v_max", l.v_max);
        read_if(jp, "omega_max", l.omega_max);
        read_if(jp, "a_max", l.a_max);
        read_if(jp, "alpha_max", l.alpha_max);
        read_if(jp, "dt", l.dt);

        const auto& jcal = j.at("calibration");
        auto& cal = cfg.calibration;
        if (jcal.contains("s_min")) {
            cal.sinkage_from_force_law = false;
            cal.sinkage.s_min = jcal.at("s_min").get<double>();
            cal.sinkage.s_max = jcal.at("s_max").get<double>();
            read_if(jcal, "gamma", cal.sinkage.gamma);
        }
        read_if(jcal, "beta1", cal.slip.beta1);
        read_if(jcal, "beta2", cal.slip.beta2);
        read_if(jcal, "smoothing_window", cal.smoothing_window);
        read_if(jcal, "exemplar_window", cal.exemplar_window);
        read_if(jcal, "patch_size", cal.patch_size);
        read_if(jcal, "capture_period", cal.capture_period);
        read_if(jcal, "capture_lookahead", cal.capture_lookahead);
        read_if(jcal, "pool_capacity", cal.pool_capacity);
        read_if(jcal, "theta_replan", cal.theta_replan);

        const auto& js = j.at("simulator");
        auto& s = cfg.simulator;
        read_if(js, "n_joints", s.n_joints);
        read_if(js, "f0", s.f0);
        read_if(js, "kappa", s.kappa);
        read_if(js, "s_f", s.s_f);
        read_if(js, "s_imu", s.s_imu);
        read_if(js, "s_lidar", s.s_lidar);
        read_if(js, "goal_radius", s.goal_radius);
        read_if(js, "stuck_window", s.stuck_window);
        read_if(js, "slip_stuck_threshold", s.slip_stuck_threshold);
        read_if(js, "sinkage_stuck_threshold", s.sinkage_stuck_threshold);
        read_if(js, "classifier_error_rate", s.classifier_error_rate);

        cfg.timeout_s = j.at("timeout_s").get<double>();
        read_if(j, "footprint_radius", cfg.footprint_radius);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scenario parse error: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string save_scenario(const ScenarioConfig& cfg) {
    ordered_json j;
    j["name"] = cfg.name;
    ordered_json jg;
    jg["width"] = cfg.grid.width;
    jg["height"] = cfg.grid.height;
    jg["resolution"] = cfg.grid.resolution;
    jg["cells"] = cfg.grid.cells;
    ordered_json obs = ordered_json::array();
    for (auto b : cfg.grid.obstacles) obs.push_back(b != 0);
    jg["obstacles"] = std::move(obs);
    j["grid"] = std::move(jg);

    ordered_json jclasses = ordered_json::array();
    for (const auto& c : cfg.classes) {
        ordered_json jc;
        jc["label"] = c.label;
        jc["deformability"] = c.deformability;
        jc["slipperiness"] = c.slipperiness;
        jc["roughness"] = c.roughness;
        jc["prior_tau"] = c.prior_tau;
        jc["appearance"] = {c.appearance[0], c.appearance[1], c.appearance[2]};
        jclasses.push_back(std::move(jc));
    }
    j["classes"] = std::move(jclasses);
    j["start"] = vec2_to_json(cfg.start);
    j["goal"] = vec2_to_json(cfg.goal);
    j["embodiment"] = to_string(cfg.embodiment);
    j["weather"] = cfg.weather;
    j["objective"] = ordered_json{{"kind", objective_kind_to_string(cfg.objective.kind)},
                                  {"hazard_weight", cfg.objective.hazard_weight}};

    const auto& p = cfg.planner;
    const auto& l = cfg.limits;
    j["planner"] = ordered_json{
        {"rho1", p.rho1}, {"rho2", p.rho2}, {"rho3", p.rho3}, {"rho4", p.rho4},
        {"horizon", p.horizon}, {"v_samples", p.v_samples}, {"omega_samples", p.omega_samples},
        {"rollout_dt", p.rollout_dt}, {"d_safe", p.d_safe},
        {"frontier_lookahead", p.frontier_lookahead}, {"frontier_half_angle", p.frontier_half_angle},
        {"classify_period_ticks", p.classify_period_ticks}, {"marker_spacing", p.marker_spacing},
        {"waypoint_radius", p.waypoint_radius},
        {"v_max", l.v_max}, {"omega_max", l.omega_max}, {"a_max", l.a_max},
        {"alpha_max", l.alpha_max}, {"dt", l.dt}};

    const auto& cal = cfg.calibration;
    ordered_json jcal;
    if (!cal.sinkage_from_force_law) {
        jcal["s_min"] = cal.sinkage.s_min;
        jcal["s_max"] = cal.sinkage.s_max;
        jcal["gamma"] = cal.sinkage.gamma;
    }
    jcal["beta1"] = cal.slip.beta1;
    jcal["beta2"] = cal.slip.beta2;
    jcal["smoothing_window"] = cal.smoothing_window;
    jcal["exemplar_window"] = cal.exemplar_window;
    jcal["patch_size"] = cal.patch_size;
    jcal["capture_period"] = cal.capture_period;
    jcal["capture_lookahead"] = cal.capture_lookahead;
    jcal["pool_capacity"] = cal.pool_capacity;
    jcal["theta_replan"] = cal.theta_replan;
    j["calibration"] = std::move(jcal);

    const auto& s = cfg.simulator;
    j["simulator"] = ordered_json{
        {"n_joints", s.n_joints}, {"f0", s.f0}, {"kappa", s.kappa},
        {"s_f", s.s_f}, {"s_imu", s.s_imu}, {"s_lidar", s.s_lidar},
        {"goal_radius", s.goal_radius}, {"stuck_window", s.stuck_window},
        {"slip_stuck_threshold", s.slip_stuck_threshold},
        {"sinkage_stuck_threshold", s.sinkage_stuck_threshold},
        {"classifier_error_rate", s.classifier_error_rate}};

    j["timeout_s"] = cfg.timeout_s;
    j["footprint_radius"] = cfg.footprint_radius;
    return j.dump(2) + "\n";
}

}  // namespace gronav

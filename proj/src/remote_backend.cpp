#include "gronav/remote_backend.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "gronav/render.hpp"

namespace gronav {

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    static const char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = bytes[i] << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

std::optional<std::string> extract_fenced_json(const std::string& reply) {
    std::size_t fence = reply.find("```");
    if (fence == std::string::npos) return std::nullopt;
    std::size_t body = fence + 3;
    if (reply.compare(body, 4, "json") == 0) body += 4;
    while (body < reply.size() && (reply[body] == '\n' || reply[body] == '\r' || reply[body] == ' '))
        ++body;
    const std::size_t end = reply.find("```", body);
    if (end == std::string::npos) return std::nullopt;
    std::string text = reply.substr(body, end - body);
    // trim trailing whitespace
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' '))
        text.pop_back();
    if (text.empty() || text.front() != '{') return std::nullopt;
    return text;
}

std::optional<double> parse_tau_response(const std::string& reply) {
    const auto text = extract_fenced_json(reply);
    if (!text) return std::nullopt;
    const auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.contains("tau") || !j["tau"].is_number()) return std::nullopt;
    return j["tau"].get<double>();
}

std::optional<std::string> parse_label_response(const std::string& reply) {
    const auto text = extract_fenced_json(reply);
    if (!text) return std::nullopt;
    const auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.contains("label") || !j["label"].is_string()) return std::nullopt;
    return j["label"].get<std::string>();
}

std::optional<std::vector<int>> parse_waypoints_response(const std::string& reply) {
    const auto text = extract_fenced_json(reply);
    if (!text) return std::nullopt;
    const auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.contains("waypoints") || !j["waypoints"].is_array())
        return std::nullopt;
    std::vector<int> ids;
    for (const auto& v : j["waypoints"]) {
        if (!v.is_number_integer()) return std::nullopt;
        ids.push_back(v.get<int>());
    }
    return ids;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

std::optional<std::string> RemoteBackend::chat(
    const std::string& system_text, const std::string& user_text,
    const std::vector<std::pair<std::string, std::string>>& captioned_images_b64) {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", user_text}});
    for (const auto& [caption, b64] : captioned_images_b64) {
        if (!caption.empty()) content.push_back({{"type", "text"}, {"text", caption}});
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:image/png;base64," + b64}}}});
    }
    nlohmann::json body = {
        {"model", config_.model},
        {"messages",
         {{{"role", "system"}, {"content", system_text}},
          {{"role", "user"}, {"content", content}}}}};

    httplib::Client client(config_.base_url);
    client.set_read_timeout(static_cast<time_t>(config_.timeout_s),
                            static_cast<time_t>((config_.timeout_s - static_cast<time_t>(config_.timeout_s)) * 1e6));
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res || res->status != 200) {
        std::clog << "[gronav] remote backend: request failed"
                  << (res ? " (status " + std::to_string(res->status) + ")" : "") << "\n";
        return std::nullopt;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
        std::clog << "[gronav] remote backend: response is not JSON\n";
        return std::nullopt;
    }
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        std::clog << "[gronav] remote backend: unexpected response shape\n";
        return std::nullopt;
    }
}

std::string RemoteBackend::classify(const PatchDescriptor& patch,
                                    const std::vector<TerrainClass>& classes) {
    std::ostringstream user;
    user << "Classify the terrain in the image. Known classes:";
    for (const auto& c : classes) user << " " << c.label << ";";
    user << " Reply with a fenced JSON object {\"label\": <string>}.";
    const auto png = encode_png(render_patch(patch));
    const auto reply = chat("You are a terrain classifier for a ground robot.", user.str(),
                            {{"", base64_encode(png)}});
    if (reply) {
        if (auto label = parse_label_response(*reply)) {
            for (const auto& c : classes)
                if (c.label == *label) return *label;
            std::clog << "[gronav] remote backend: label outside class set: " << *label << "\n";
        }
    }
    // degraded answer: majority class of the patch
    return patch.majority_label();
}

std::optional<double> RemoteBackend::estimate(const PromptTemplate& prompt,
                                              const std::vector<Exemplar>& exemplars,
                                              const std::string& query_label,
                                              const PatchDescriptor* query_patch) {
    std::vector<std::pair<std::string, std::string>> images;
    for (const auto& e : exemplars) {
        char caption[64];
        std::snprintf(caption, sizeof(caption), "exemplar %s tau=%.2f", e.label.c_str(),
                      e.tau_shifted.tau);
        images.emplace_back(caption, base64_encode(encode_png(render_patch(e.aerial))));
    }
    if (query_patch)
        images.emplace_back("query", base64_encode(encode_png(render_patch(*query_patch))));
    const auto reply =
        chat(prompt.system_text, prompt.build(exemplars, query_label, query_patch), images);
    if (!reply) return std::nullopt;
    auto tau = parse_tau_response(*reply);
    if (!tau) std::clog << "[gronav] remote backend: estimate parse failure\n";
    return tau;
}

std::optional<std::vector<int>> RemoteBackend::select_waypoints(const WaypointQuery& query) {
    std::ostringstream user;
    user << "Choose an ordered sequence of adjacent marker ids from marker " << query.start_id
         << " to marker " << query.goal_id << " on the marked aerial image ("
         << query.marker_count << " markers). Objective: "
         << (query.objective.kind == NavigationObjective::Kind::min_length ? "minimize length"
                                                                           : "avoid hazards")
         << ". Per-terrain traversability (0 good, 1 impassable):";
    for (const auto& [label, tau] : query.label_taus) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %s=%.2f;", label.c_str(), tau);
        user << buf;
    }
    user << " Reply with a fenced JSON object {\"waypoints\": [<ids>]}.";
    const auto reply = chat("You are a global path planner selecting waypoints.", user.str(),
                            {{"", base64_encode(query.marked_png)}});
    if (!reply) return std::nullopt;
    auto ids = parse_waypoints_response(*reply);
    if (!ids) std::clog << "[gronav] remote backend: waypoint parse failure\n";
    return ids;
}

}  // namespace gronav

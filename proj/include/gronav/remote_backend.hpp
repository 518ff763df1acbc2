#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gronav/reasoning.hpp"

namespace gronav {

std::string base64_encode(const std::vector<unsigned char>& bytes);

/// Extracts the first fenced JSON object (```json ... ``` or plain ``` ... ```)
/// from a model reply. Returns the raw JSON text.
std::optional<std::string> extract_fenced_json(const std::string& reply);

std::optional<double> parse_tau_response(const std::string& reply);
std::optional<std::string> parse_label_response(const std::string& reply);
std::optional<std::vector<int>> parse_waypoints_response(const std::string& reply);

struct RemoteConfig {
    std::string base_url;   // e.g. http://localhost:8080
    std::string path{"/v1/chat/completions"};
    std::string model{"gpt-4o"};
    double timeout_s{10.0};
    std::string api_key_env{"GRONAV_VLM_KEY"};
};

/// Chat-completions-compatible backend. Exemplars travel as base64 PNG
/// images with tau captions; replies must carry a fenced JSON object.
/// Failures degrade per the caller's fallback rules and are logged.
class RemoteBackend : public VlmBackend {
public:
    explicit RemoteBackend(RemoteConfig config);

    std::string name() const override { return "remote"; }
    std::string classify(const PatchDescriptor& patch,
                         const std::vector<TerrainClass>& classes) override;
    std::optional<double> estimate(const PromptTemplate& prompt,
                                   const std::vector<Exemplar>& exemplars,
                                   const std::string& query_label,
                                   const PatchDescriptor* query_patch) override;
    std::optional<std::vector<int>> select_waypoints(const WaypointQuery& query) override;

private:
    std::optional<std::string> chat(const std::string& system_text,
                                    const std::string& user_text,
                                    const std::vector<std::pair<std::string, std::string>>&
                                        captioned_images_b64);

    RemoteConfig config_;
};

}  // namespace gronav

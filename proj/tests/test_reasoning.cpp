#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gronav/reasoning.hpp"
#include "gronav/remote_backend.hpp"
#include "test_support.hpp"

using namespace gronav;
using test::make_class;

namespace {

Exemplar make_exemplar(const std::string& label, double tau, double t = 0.0) {
    Exemplar e;
    e.label = label;
    e.tau_shifted = {tau};
    e.t_image = t;
    e.t_proprio = t;
    e.aerial.class_histogram = {{label, 1.0}};
    e.front = e.aerial;
    return e;
}

const std::vector<TerrainClass> kClasses = {
    make_class("grass", 0.2, 0.1, 0.3, 0.15, {170, 190, 90}),
    make_class("mud", 1.0, 0.8, 0.6, 0.65, {110, 90, 50}),
    make_class("concrete", 0.0, 0.0, 0.05, 0.05, {180, 180, 185}),
};

std::vector<std::string> labels_of(const std::vector<TerrainClass>& classes) {
    std::vector<std::string> out;
    for (const auto& c : classes) out.push_back(c.label);
    return out;
}

}  // namespace

TEST_CASE("exemplar pool appends per label and evicts FIFO at capacity") {
    ExemplarPool pool(labels_of(kClasses), 8);

    pool.push(make_exemplar("grass", 0.1));
    CHECK(pool.buffer("grass").size() == 1);
    CHECK(pool.buffer("mud").empty());

    for (int i = 0; i < 9; ++i) pool.push(make_exemplar("mud", i * 0.1, i));
    CHECK(pool.buffer("mud").size() == 8);
    // the first exemplar (t=0) was evicted
    CHECK(pool.buffer("mud").front().t_image == doctest::Approx(1.0));
    CHECK(pool.buffer("mud").back().t_image == doctest::Approx(8.0));
}

TEST_CASE("exemplar pool rejects labels outside the class set") {
    ExemplarPool pool(labels_of(kClasses), 8);
    CHECK_THROWS_AS(pool.push(make_exemplar("lava", 0.9)), std::invalid_argument);
    CHECK_THROWS_AS(pool.buffer("lava"), std::invalid_argument);
    CHECK_THROWS_AS(ExemplarPool(labels_of(kClasses), 0), std::invalid_argument);
}

TEST_CASE("recent exemplars are returned newest first") {
    ExemplarPool pool(labels_of(kClasses), 8);
    for (int i = 0; i < 3; ++i) pool.push(make_exemplar("grass", 0.1 * i, i));
    const auto recent = pool.recent("grass");
    REQUIRE(recent.size() == 3);
    CHECK(recent[0].t_image == doctest::Approx(2.0));
    CHECK(recent[2].t_image == doctest::Approx(0.0));
}

TEST_CASE("mock initialization copies the configured priors") {
    auto cfg = test::flat_scenario(kClasses[0], Embodiment::legged);
    cfg.classes = kClasses;
    MockBackend backend;
    const auto table = init_terrain_classes(backend, cfg);
    REQUIRE(table.entries.size() == 3);
    CHECK(table.tau("grass") == doctest::Approx(0.15));
    CHECK(table.tau("mud") == doctest::Approx(0.65));
    CHECK(table.tau("concrete") == doctest::Approx(0.05));
    for (const auto& [label, entry] : table.entries)
        CHECK(entry.provenance == Provenance::prior);
}

TEST_CASE("estimation falls back to the prior on an empty pool") {
    ExemplarPool pool(labels_of(kClasses), 8);
    MockBackend backend;
    PromptTemplate prompt;
    const auto r = estimate_traversability(backend, prompt, pool, "mud", nullptr, kClasses);
    CHECK(r.value.tau == doctest::Approx(0.65));
    CHECK(r.provenance == Provenance::prior);
}

TEST_CASE("mock estimate is the mean of the pooled exemplars") {
    ExemplarPool pool(labels_of(kClasses), 8);
    pool.push(make_exemplar("mud", 0.6));
    pool.push(make_exemplar("mud", 0.8));
    MockBackend backend;
    PromptTemplate prompt;
    const auto r = estimate_traversability(backend, prompt, pool, "mud", nullptr, kClasses);
    CHECK(r.value.tau == doctest::Approx(0.7));
    CHECK(r.provenance == Provenance::grounded);
}

TEST_CASE("estimates stay in the convex hull of pooled values") {
    ExemplarPool pool(labels_of(kClasses), 8);
    Rng rng(11);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double tau = rng.uniform(0.2, 0.9);
        lo = std::min(lo, tau);
        hi = std::max(hi, tau);
        pool.push(make_exemplar("grass", tau, i));
    }
    MockBackend backend;
    PromptTemplate prompt;
    const auto r = estimate_traversability(backend, prompt, pool, "grass", nullptr, kClasses);
    CHECK(r.value.tau >= lo);
    CHECK(r.value.tau <= hi);
}

TEST_CASE("mock estimate is invariant to insertion order of the retained set") {
    const std::vector<double> taus{0.1, 0.4, 0.9, 0.3, 0.7};
    std::vector<double> perm = taus;
    std::sort(perm.begin(), perm.end());
    MockBackend backend;
    PromptTemplate prompt;
    double reference = -1.0;
    do {
        ExemplarPool pool(labels_of(kClasses), 8);
        for (std::size_t i = 0; i < perm.size(); ++i)
            pool.push(make_exemplar("mud", perm[i], static_cast<double>(i)));
        const auto r =
            estimate_traversability(backend, prompt, pool, "mud", nullptr, kClasses);
        if (reference < 0.0) reference = r.value.tau;
        CHECK(r.value.tau == doctest::Approx(reference).epsilon(1e-12));
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("a patch query resolves to its majority label") {
    ExemplarPool pool(labels_of(kClasses), 8);
    pool.push(make_exemplar("mud", 0.9));
    MockBackend backend;
    PromptTemplate prompt;
    PatchDescriptor patch;
    patch.class_histogram = {{"mud", 0.7}, {"grass", 0.3}};
    const auto r = estimate_traversability(backend, prompt, pool, "", &patch, kClasses);
    CHECK(r.value.tau == doctest::Approx(0.9));
    CHECK(r.provenance == Provenance::grounded);
}

TEST_CASE("an unknown query label is rejected") {
    ExemplarPool pool(labels_of(kClasses), 8);
    MockBackend backend;
    PromptTemplate prompt;
    CHECK_THROWS_AS(estimate_traversability(backend, prompt, pool, "lava", nullptr, kClasses),
                    std::invalid_argument);
}

TEST_CASE("table refresh touches only labels with exemplars") {
    auto cfg = test::flat_scenario(kClasses[0], Embodiment::legged);
    cfg.classes = kClasses;
    MockBackend backend;
    auto table = init_terrain_classes(backend, cfg);
    ExemplarPool pool(labels_of(kClasses), 8);
    PromptTemplate prompt;

    SUBCASE("no exemplars leaves the table unchanged") {
        const auto before = table.entries;
        refresh_table(table, backend, prompt, pool, kClasses, 5.0);
        for (const auto& [label, entry] : before) {
            CHECK(table.entries.at(label).tau == entry.tau);
            CHECK(table.entries.at(label).provenance == Provenance::prior);
        }
    }
    SUBCASE("a single exemplar replaces the prior and marks it grounded") {
        pool.push(make_exemplar("mud", 0.9));
        refresh_table(table, backend, prompt, pool, kClasses, 5.0);
        CHECK(table.tau("mud") == doctest::Approx(0.9));
        CHECK(table.entries.at("mud").provenance == Provenance::grounded);
        CHECK(table.entries.at("mud").last_update == doctest::Approx(5.0));
        CHECK(table.tau("grass") == doctest::Approx(0.15));
        CHECK(table.entries.at("grass").provenance == Provenance::prior);
    }
    SUBCASE("exactly the grounded labels carry the grounded provenance") {
        pool.push(make_exemplar("mud", 0.9));
        pool.push(make_exemplar("concrete", 0.0));
        refresh_table(table, backend, prompt, pool, kClasses, 6.0);
        int grounded = 0;
        for (const auto& [label, entry] : table.entries)
            if (entry.provenance == Provenance::grounded) grounded += 1;
        CHECK(grounded == 2);
        CHECK(table.entries.at("grass").provenance == Provenance::prior);
    }
}

TEST_CASE("table values remain in [0,1] under arbitrary exemplars") {
    auto cfg = test::flat_scenario(kClasses[0], Embodiment::legged);
    cfg.classes = kClasses;
    MockBackend backend;
    auto table = init_terrain_classes(backend, cfg);
    ExemplarPool pool(labels_of(kClasses), 8);
    PromptTemplate prompt;
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        pool.push(make_exemplar(kClasses[i % 3].label, rng.uniform(0.0, 1.0), i));
        refresh_table(table, backend, prompt, pool, kClasses, i * 0.1);
        for (const auto& [label, entry] : table.entries) {
            CHECK(entry.tau >= 0.0);
            CHECK(entry.tau <= 1.0);
        }
    }
}

TEST_CASE("mock classification returns the majority class when p_err is zero") {
    MockBackend backend(0.0, 1);
    PatchDescriptor patch;
    patch.class_histogram = {{"mud", 0.6}, {"grass", 0.4}};
    for (int i = 0; i < 20; ++i) CHECK(backend.classify(patch, kClasses) == "mud");
}

TEST_CASE("mock classification confuses with the appearance-nearest class at p_err 1") {
    MockBackend backend(1.0, 1);
    PatchDescriptor patch;
    patch.class_histogram = {{"grass", 1.0}};
    // appearance distance from grass: mud ~ sqrt(60^2+100^2+40^2), concrete
    // ~ sqrt(10^2+10^2+95^2); concrete is closer
    for (int i = 0; i < 20; ++i) CHECK(backend.classify(patch, kClasses) == "concrete");
}

TEST_CASE("mock classification on a two-class world flips to the other class") {
    MockBackend backend(1.0, 1);
    const std::vector<TerrainClass> two{kClasses[0], kClasses[1]};
    PatchDescriptor patch;
    patch.class_histogram = {{"grass", 1.0}};
    for (int i = 0; i < 10; ++i) CHECK(backend.classify(patch, two) == "mud");
}

TEST_CASE("mock waypoint selection defers to graph-search semantics") {
    MockBackend backend;
    CHECK_FALSE(backend.select_waypoints(WaypointQuery{}).has_value());
}

TEST_CASE("prompt lines round-trip tau at two decimals") {
    PromptTemplate prompt;
    for (double tau : {0.0, 0.05, 0.333333, 0.666666, 0.87, 1.0}) {
        const auto line = prompt.render_exemplar(make_exemplar("mud", tau));
        const double back = parse_prompt_tau(line);
        CHECK(back == doctest::Approx(std::round(tau * 100.0) / 100.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(parse_prompt_tau("no tau here"), std::invalid_argument);
}

TEST_CASE("built prompts carry weather, exemplars, and the query") {
    PromptTemplate prompt;
    prompt.weather = "after heavy rain";
    const auto text = prompt.build({make_exemplar("mud", 0.8)}, "grass", nullptr);
    CHECK(text.find("after heavy rain") != std::string::npos);
    CHECK(text.find("example terrain=mud tau=0.80") != std::string::npos);
    CHECK(text.find("query terrain=grass") != std::string::npos);
}

TEST_CASE("base64 encoding matches the reference vectors") {
    auto enc = [](const std::string& s) {
        return base64_encode(std::vector<unsigned char>(s.begin(), s.end()));
    };
    CHECK(enc("") == "");
    CHECK(enc("f") == "Zg==");
    CHECK(enc("fo") == "Zm8=");
    CHECK(enc("foo") == "Zm9v");
    CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("fenced JSON extraction accepts both fence styles and rejects junk") {
    CHECK(extract_fenced_json("```json\n{\"tau\": 0.5}\n```") == "{\"tau\": 0.5}");
    CHECK(extract_fenced_json("text before ```\n{\"a\":1}\n``` after") == "{\"a\":1}");
    CHECK_FALSE(extract_fenced_json("no fence at all").has_value());
    CHECK_FALSE(extract_fenced_json("``` unterminated").has_value());
    CHECK_FALSE(extract_fenced_json("```\nnot an object\n```").has_value());
}

TEST_CASE("response parsers enforce their field types") {
    CHECK(parse_tau_response("```json\n{\"tau\": 0.42}\n```") == doctest::Approx(0.42));
    CHECK_FALSE(parse_tau_response("```json\n{\"tau\": \"high\"}\n```").has_value());
    CHECK_FALSE(parse_tau_response("```json\n{\"value\": 0.4}\n```").has_value());

    CHECK(parse_label_response("```json\n{\"label\": \"mud\"}\n```") == "mud");
    CHECK_FALSE(parse_label_response("```json\n{\"label\": 3}\n```").has_value());

    const auto ids = parse_waypoints_response("```json\n{\"waypoints\": [1, 4, 9]}\n```");
    REQUIRE(ids.has_value());
    CHECK(*ids == std::vector<int>{1, 4, 9});
    CHECK_FALSE(parse_waypoints_response("```json\n{\"waypoints\": [1, 2.5]}\n```").has_value());
    CHECK_FALSE(parse_waypoints_response("```json\n{\"waypoints\": 7}\n```").has_value());
}

namespace {

/// Local chat-completions stub capturing the last request body.
struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port{0};
    nlohmann::json last_request;
    std::string auth_header;
    std::string reply_content = "```json\n{\"tau\": 0.33}\n```";

    StubServer() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        last_request = nlohmann::json::parse(req.body, nullptr, false);
                        auth_header = req.get_header_value("Authorization");
                        nlohmann::json body = {
                            {"choices",
                             {{{"message", {{"role", "assistant"}, {"content", reply_content}}}}}}};
                        res.set_content(body.dump(), "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubServer() {
        server.stop();
        thread.join();
    }

    RemoteConfig config() const {
        RemoteConfig rc;
        rc.base_url = "http://127.0.0.1:" + std::to_string(port);
        rc.model = "stub-model";
        rc.timeout_s = 5.0;
        return rc;
    }
};

}  // namespace

TEST_CASE("remote backend speaks the chat-completions wire contract") {
    StubServer stub;
    setenv("GRONAV_VLM_KEY", "test-key-123", 1);
    RemoteBackend backend(stub.config());

    PromptTemplate prompt;
    prompt.weather = "clear";
    const auto tau = backend.estimate(prompt, {make_exemplar("mud", 0.8)}, "mud", nullptr);
    REQUIRE(tau.has_value());
    CHECK(*tau == doctest::Approx(0.33));

    const auto& req = stub.last_request;
    REQUIRE_FALSE(req.is_discarded());
    CHECK(req.at("model") == "stub-model");
    CHECK(stub.auth_header == "Bearer test-key-123");
    REQUIRE(req.at("messages").size() == 2);
    CHECK(req.at("messages").at(0).at("role") == "system");
    CHECK(req.at("messages").at(1).at("role") == "user");

    // user content: prompt text, exemplar caption, exemplar image as data URI
    const auto& content = req.at("messages").at(1).at("content");
    REQUIRE(content.is_array());
    CHECK(content.at(0).at("type") == "text");
    bool has_image = false, has_caption = false;
    for (const auto& part : content) {
        if (part.at("type") == "image_url") {
            const std::string url = part.at("image_url").at("url");
            CHECK(url.rfind("data:image/png;base64,", 0) == 0);
            has_image = true;
        } else if (part.at("type") == "text") {
            const std::string text = part.at("text");
            if (text.find("exemplar mud tau=0.80") != std::string::npos) has_caption = true;
        }
    }
    CHECK(has_image);
    CHECK(has_caption);
    unsetenv("GRONAV_VLM_KEY");
}

TEST_CASE("remote classification validates the label against the class set") {
    StubServer stub;
    RemoteBackend backend(stub.config());
    PatchDescriptor patch;
    patch.class_histogram = {{"grass", 0.9}, {"mud", 0.1}};

    stub.reply_content = "```json\n{\"label\": \"mud\"}\n```";
    CHECK(backend.classify(patch, kClasses) == "mud");

    // a label outside the set degrades to the majority class
    stub.reply_content = "```json\n{\"label\": \"lava\"}\n```";
    CHECK(backend.classify(patch, kClasses) == "grass");

    stub.reply_content = "not json at all";
    CHECK(backend.classify(patch, kClasses) == "grass");
}

TEST_CASE("remote waypoint answers parse into id sequences") {
    StubServer stub;
    RemoteBackend backend(stub.config());
    WaypointQuery query;
    query.start_id = 1;
    query.goal_id = 9;
    query.marker_count = 9;
    query.label_taus = {{"grass", 0.15}};

    stub.reply_content = "```json\n{\"waypoints\": [1, 5, 9]}\n```";
    const auto ids = backend.select_waypoints(query);
    REQUIRE(ids.has_value());
    CHECK(*ids == std::vector<int>{1, 5, 9});

    stub.reply_content = "I think you should go north.";
    CHECK_FALSE(backend.select_waypoints(query).has_value());
}

TEST_CASE("an unreachable remote endpoint degrades to no answer") {
    RemoteConfig rc;
    rc.base_url = "http://127.0.0.1:1";  // nothing listens here
    rc.timeout_s = 1.0;
    RemoteBackend backend(rc);
    PromptTemplate prompt;
    CHECK_FALSE(backend.estimate(prompt, {}, "mud", nullptr).has_value());
}

TEST_CASE("remote initialization can override priors within [0,1]") {
    StubServer stub;
    stub.reply_content = "```json\n{\"tau\": 7.5}\n```";  // clamped to 1
    RemoteBackend backend(stub.config());
    auto cfg = test::flat_scenario(kClasses[0], Embodiment::legged);
    cfg.classes = kClasses;
    const auto table = init_terrain_classes(backend, cfg);
    for (const auto& [label, entry] : table.entries) CHECK(entry.tau == doctest::Approx(1.0));
}

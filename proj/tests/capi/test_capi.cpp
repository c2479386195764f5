// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>

#include "objectadd/objectadd.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return (fs::path(OBJECTADD_FIXTURE_DIR) / name).string(); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("objectadd_capi_" + name);
    fs::remove_all(p);
    return p;
}

struct Engine {
    oa_engine* e = nullptr;
    explicit Engine(const char* name = "toy") { REQUIRE(oa_engine_create(name, nullptr, &e) == OA_OK); }
    ~Engine() { oa_engine_destroy(e); }
};

struct Request {
    oa_edit_request* r = nullptr;
    Request() { REQUIRE(oa_edit_request_create(&r) == OA_OK); }
    ~Request() { oa_edit_request_destroy(r); }
};

oa_edit_request* hat(Request& q) {
    REQUIRE(oa_edit_request_set_prompt(q.r, "a woman wearing glasses", 7) == OA_OK);
    REQUIRE(oa_edit_request_set_box(q.r, 10, 20, 16, 24) == OA_OK);
    REQUIRE(oa_edit_request_set_object_prompt(q.r, "A hat") == OA_OK);
    return q.r;
}

std::string artifact(const oa_result* res, const char* name) {
    std::size_t size = 0;
    const std::uint8_t* data = oa_result_artifact_data(res, name, &size);
    REQUIRE(data != nullptr);
    return std::string(reinterpret_cast<const char*>(data), size);
}

}  // namespace

TEST_CASE("engine and descriptor") {
    Engine eng;
    const json d = json::parse(oa_engine_descriptor(eng.e));
    CHECK(d["image"][0] == 64);
    oa_engine* bad = nullptr;
    CHECK(oa_engine_create("sd-1.4", nullptr, &bad) == OA_ERR_BACKEND);
    CHECK(bad == nullptr);
    CHECK(std::strlen(oa_last_error()) > 0);
    CHECK(oa_engine_create("toy", "{not json", &bad) == OA_ERR_CONFIG);
    CHECK(oa_engine_create("toy", R"({"bogus": 1})", &bad) == OA_ERR_CONFIG);
    CHECK(oa_engine_create("toy", nullptr, nullptr) == OA_ERR_CONFIG);
    CHECK(std::string(oa_status_string(OA_ERR_SEGMENTATION)) == "segmentation error");
}

TEST_CASE("generate, edit, replay") {
    Engine eng;
    oa_result* gen = nullptr;
    REQUIRE(oa_generate(eng.e, "a woman wearing glasses", 7, 0, nullptr, &gen) == OA_OK);
    const std::string base = artifact(gen, "base.png");

    Request q;
    const fs::path dir = scratch("edit");
    oa_result* res = nullptr;
    REQUIRE(oa_edit(eng.e, hat(q), dir.string().c_str(), &res) == OA_OK);
    CHECK(artifact(res, "base.png") == base);
    CHECK(oa_result_artifact_count(res) > 6);
    CHECK(oa_result_artifact_name(res, 100000) == nullptr);
    CHECK(std::string(oa_result_artifact_sha256(res, "edited.png")).size() == 64);
    CHECK(fs::exists(dir / "manifest.json"));
    const json manifest = json::parse(oa_result_manifest(res));
    CHECK(manifest["inpaint_step"] == 15);

    oa_result* again = nullptr;
    REQUIRE(oa_replay((dir / "manifest.json").string().c_str(), nullptr, &again) == OA_OK);
    CHECK(artifact(again, "edited.png") == artifact(res, "edited.png"));
    CHECK(std::string(oa_result_manifest(again)) == oa_result_manifest(res));

    // Base manifest as the source of prompt and seed.
    const fs::path gdir = scratch("gen");
    oa_result* gen2 = nullptr;
    REQUIRE(oa_generate(eng.e, "a woman wearing glasses", 7, 0, gdir.string().c_str(), &gen2) == OA_OK);
    Request q2;
    REQUIRE(oa_edit_request_set_base_manifest(q2.r, (gdir / "manifest.json").string().c_str()) == OA_OK);
    REQUIRE(oa_edit_request_set_box(q2.r, 10, 20, 16, 24) == OA_OK);
    REQUIRE(oa_edit_request_set_object_prompt(q2.r, "A hat") == OA_OK);
    oa_result* from_base = nullptr;
    REQUIRE(oa_edit(eng.e, q2.r, nullptr, &from_base) == OA_OK);
    CHECK(artifact(from_base, "edited.png") == artifact(res, "edited.png"));

    oa_result_destroy(from_base);
    oa_result_destroy(gen2);
    oa_result_destroy(again);
    oa_result_destroy(res);
    oa_result_destroy(gen);
}

TEST_CASE("error statuses and stages") {
    Engine eng;
    {
        Request q;
        hat(q);
        oa_edit_request_set_box(q.r, 60, 60, 10, 10);
        oa_result* res = nullptr;
        CHECK(oa_edit(eng.e, q.r, nullptr, &res) == OA_ERR_CONFIG);
        CHECK(res == nullptr);
    }
    {
        Request q;
        hat(q);
        REQUIRE(oa_edit_request_set_object_image(q.r, fixture("white.png").c_str()) == OA_OK);
        oa_result* res = nullptr;
        CHECK(oa_edit(eng.e, q.r, nullptr, &res) == OA_ERR_SEGMENTATION);
        CHECK(std::string(oa_last_error_stage()) == "segmentation");
    }
    {
        Engine fixed("toy-noninvertible");
        Request q;
        hat(q);
        REQUIRE(oa_edit_request_set_object_image(q.r, fixture("object_card.png").c_str()) == OA_OK);
        oa_result* res = nullptr;
        CHECK(oa_edit(fixed.e, q.r, nullptr, &res) == OA_ERR_BACKEND);
    }
    Request q;
    CHECK(oa_edit_request_set_object_image(q.r, "/nonexistent.png") == OA_ERR_IO);
    CHECK(oa_edit_request_set_config_json(q.r, "{\"cluster_count\": \"six\"}") == OA_ERR_CONFIG);
    CHECK(oa_edit_request_set_config_file(q.r, fixture("config.yaml").c_str()) == OA_OK);
    CHECK(oa_edit_request_set_case_file(q.r, fixture("cases/001.txt").c_str()) == OA_OK);
    oa_result* rep = nullptr;
    CHECK(oa_replay("/nonexistent/manifest.json", nullptr, &rep) == OA_ERR_IO);
}

TEST_CASE("evaluate") {
    Engine eng;
    oa_result* res = nullptr;
    const fs::path report = scratch("eval") += ".json";
    REQUIRE(oa_evaluate(eng.e, fixture("cases").c_str(), nullptr, nullptr, report.string().c_str(), &res) == OA_OK);
    const json j = json::parse(oa_result_manifest(res));
    CHECK(j["rows"].size() == 3);
    CHECK(fs::exists(report));
    CHECK(std::string(oa_result_summary(res)).find("mean") != std::string::npos);
    oa_result_destroy(res);
    const fs::path empty = scratch("empty_cases");
    fs::create_directories(empty);
    CHECK(oa_evaluate(eng.e, empty.string().c_str(), nullptr, nullptr, nullptr, &res) == OA_ERR_CONFIG);
}

TEST_CASE("http server returns the same bytes as the library") {
    const fs::path root = scratch("server");
    oa_server* srv = nullptr;
    REQUIRE(oa_server_start("toy", nullptr, "127.0.0.1", 0, 1, root.string().c_str(), &srv) == OA_OK);
    const int port = oa_server_port(srv);
    CHECK(port > 0);
    httplib::Client cli("127.0.0.1", port);
    const json body = {{"prompt", "a woman wearing glasses"},
                       {"seed", 7},
                       {"box", {{"top", 10}, {"left", 20}, {"height", 16}, {"width", 24}}},
                       {"object_prompt", "A hat"}};
    auto posted = cli.Post("/api/edits", body.dump(), "application/json");
    REQUIRE(posted);
    REQUIRE(posted->status == 202);
    const std::string id = json::parse(posted->body)["job_id"];
    json state;
    for (int i = 0; i < 600; ++i) {
        state = json::parse(cli.Get("/api/jobs/" + id)->body);
        if (state["state"] == "done" || state["state"] == "failed") break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    REQUIRE(state["state"] == "done");
    const std::string http = cli.Get("/api/images/" + id + ".edited")->body;

    Engine eng;
    Request q;
    oa_result* res = nullptr;
    REQUIRE(oa_edit(eng.e, hat(q), nullptr, &res) == OA_OK);
    CHECK(http == artifact(res, "edited.png"));
    oa_result_destroy(res);
    oa_server_stop(srv);
    oa_server_destroy(srv);
}

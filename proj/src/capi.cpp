// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/objectadd.h"

#include <memory>
#include <string>

#include "objectadd/backend.hpp"
#include "objectadd/error.hpp"
#include "objectadd/evaluation.hpp"
#include "objectadd/io.hpp"
#include "objectadd/jobs.hpp"
#include "objectadd/service.hpp"

using namespace objectadd;
using nlohmann::json;

struct oa_engine {
    std::string backend;
    std::map<std::string, std::string> parameters;
    std::string descriptor_json;
};

struct oa_edit_request {
    JobRequest request;
};

struct oa_result {
    JobResult job;
    std::string manifest_text;
    std::string summary;
    std::vector<std::string> hashes;
};

struct oa_server {
    std::unique_ptr<Service> service;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

oa_status status_for(ErrorKind kind) {
    switch (exit_code_for(kind)) {
        case 2: return kind == ErrorKind::Io ? OA_ERR_IO : OA_ERR_CONFIG;
        case 3: return OA_ERR_BACKEND;
        case 4: return OA_ERR_SEGMENTATION;
        default: return OA_ERR_INTERNAL;
    }
}

oa_status fail(oa_status status, const std::string& message, const std::string& stage = {}) {
    g_error = message;
    g_stage = stage;
    return status;
}

template <typename F>
oa_status guarded(F&& body) {
    try {
        body();
        return OA_OK;
    } catch (const Error& e) {
        return fail(status_for(e.kind()), std::string(to_string(e.kind())) + " error: " + e.what(), e.stage());
    } catch (const std::bad_alloc&) {
        return fail(OA_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(OA_ERR_INTERNAL, e.what());
    }
}

std::map<std::string, std::string> parse_params(const char* params_json) {
    if (!params_json || !*params_json) return {};
    try {
        const json j = json::parse(params_json);
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : j.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("backend parameters are not a JSON object: ") + e.what());
    }
}

oa_result* wrap(JobResult job) {
    auto r = std::make_unique<oa_result>();
    r->job = std::move(job);
    r->manifest_text = r->job.manifest.dump(2);
    for (const auto& a : r->job.artifacts) r->hashes.push_back(sha256_hex(a.bytes));
    return r.release();
}

#define OA_REQUIRE(cond, msg) \
    do {                       \
        if (!(cond)) return fail(OA_ERR_CONFIG, msg); \
    } while (0)

}  // namespace

extern "C" {

const char* oa_version(void) { return "1.0.0"; }

const char* oa_status_string(oa_status status) {
    switch (status) {
        case OA_OK: return "ok";
        case OA_ERR_INTERNAL: return "internal error";
        case OA_ERR_CONFIG: return "configuration error";
        case OA_ERR_BACKEND: return "backend error";
        case OA_ERR_SEGMENTATION: return "segmentation error";
        case OA_ERR_IO: return "i/o error";
        case OA_ERR_NOT_FOUND: return "not found";
    }
    return "unknown status";
}

const char* oa_last_error(void) { return g_error.c_str(); }
const char* oa_last_error_stage(void) { return g_stage.c_str(); }

oa_status oa_engine_create(const char* backend_name, const char* params_json, oa_engine** out) {
    OA_REQUIRE(out, "output handle pointer is NULL");
    *out = nullptr;
    return guarded([&] {
        auto e = std::make_unique<oa_engine>();
        e->backend = backend_name && *backend_name ? backend_name : "toy";
        e->parameters = parse_params(params_json);
        e->descriptor_json = descriptor_to_json(make_backend(e->backend, e->parameters)->descriptor()).dump(2);
        *out = e.release();
    });
}

void oa_engine_destroy(oa_engine* engine) { delete engine; }

const char* oa_engine_descriptor(const oa_engine* engine) { return engine ? engine->descriptor_json.c_str() : ""; }

oa_status oa_edit_request_create(oa_edit_request** out) {
    OA_REQUIRE(out, "output handle pointer is NULL");
    *out = new (std::nothrow) oa_edit_request();
    return *out ? OA_OK : fail(OA_ERR_INTERNAL, "out of memory");
}

void oa_edit_request_destroy(oa_edit_request* request) { delete request; }

oa_status oa_edit_request_set_prompt(oa_edit_request* request, const char* prompt, int64_t seed) {
    OA_REQUIRE(request && prompt, "NULL argument");
    request->request.prompt = prompt;
    request->request.seed = seed;
    return OA_OK;
}

oa_status oa_edit_request_set_base_manifest(oa_edit_request* request, const char* manifest_path) {
    OA_REQUIRE(request && manifest_path, "NULL argument");
    return guarded([&] {
        const JobRequest base = request_from_manifest(manifest_path);
        request->request.prompt = base.prompt;
        request->request.seed = base.seed;
        request->request.backend_parameters = base.backend_parameters;
        request->request.config = base.config;
    });
}

oa_status oa_edit_request_set_box(oa_edit_request* request, int top, int left, int height, int width) {
    OA_REQUIRE(request, "NULL argument");
    request->request.box = {top, left, height, width};
    return OA_OK;
}

oa_status oa_edit_request_set_case_file(oa_edit_request* request, const char* path) {
    OA_REQUIRE(request && path, "NULL argument");
    return guarded([&] {
        const CaseFile c = parse_case_file(read_text(path));
        request->request.box = c.box;
        request->request.object_prompt = c.object_prompt;
    });
}

oa_status oa_edit_request_set_object_prompt(oa_edit_request* request, const char* object_prompt) {
    OA_REQUIRE(request && object_prompt, "NULL argument");
    request->request.object_prompt = object_prompt;
    return OA_OK;
}

oa_status oa_edit_request_set_object_word_offset(oa_edit_request* request, int offset) {
    OA_REQUIRE(request, "NULL argument");
    request->request.object_word_offset = offset;
    return OA_OK;
}

oa_status oa_edit_request_set_config_file(oa_edit_request* request, const char* path) {
    OA_REQUIRE(request && path, "NULL argument");
    return guarded([&] { request->request.config = config_from_yaml(read_text(path), request->request.config); });
}

oa_status oa_edit_request_set_config_json(oa_edit_request* request, const char* text) {
    OA_REQUIRE(request && text, "NULL argument");
    return guarded([&] {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, std::string("config overrides are not JSON: ") + e.what());
        }
        request->request.config = config_from_json(j, request->request.config);
    });
}

oa_status oa_edit_request_set_object_image(oa_edit_request* request, const char* png_path) {
    OA_REQUIRE(request && png_path, "NULL argument");
    return guarded([&] { request->request.object_image = decode_png(read_file(png_path)); });
}

oa_status oa_generate(const oa_engine* engine, const char* prompt, int64_t seed, int total_steps, const char* out_dir,
                      oa_result** out) {
    OA_REQUIRE(engine && prompt && out, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        JobRequest r;
        r.kind = JobKind::Generate;
        r.backend = engine->backend;
        r.backend_parameters = engine->parameters;
        r.prompt = prompt;
        r.seed = seed;
        if (total_steps > 0) r.config.total_steps = total_steps;
        JobResult job = execute(r);
        if (out_dir && *out_dir) write_artifacts(job, out_dir);
        *out = wrap(std::move(job));
    });
}

oa_status oa_edit(const oa_engine* engine, const oa_edit_request* request, const char* out_dir, oa_result** out) {
    OA_REQUIRE(engine && request && out, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        JobRequest r = request->request;
        r.kind = JobKind::Edit;
        r.backend = engine->backend;
        for (const auto& [k, v] : engine->parameters) r.backend_parameters.try_emplace(k, v);
        JobResult job = execute(r);
        if (out_dir && *out_dir) write_artifacts(job, out_dir);
        *out = wrap(std::move(job));
    });
}

oa_status oa_replay(const char* manifest_path, const char* out_dir, oa_result** out) {
    OA_REQUIRE(manifest_path && out, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        JobResult job = execute(request_from_manifest(manifest_path));
        if (out_dir && *out_dir) write_artifacts(job, out_dir);
        *out = wrap(std::move(job));
    });
}

oa_status oa_evaluate(const oa_engine* engine, const char* case_dir, const char* config_path,
                      const char* external_fid_path, const char* report_path, oa_result** out) {
    OA_REQUIRE(engine && case_dir && out, "NULL argument");
    *out = nullptr;
    return guarded([&] {
        GuidanceConfig config;
        if (config_path && *config_path) config = config_from_yaml(read_text(config_path));
        std::map<std::string, double> fid;
        if (external_fid_path && *external_fid_path) fid = parse_external_fid(read_text(external_fid_path));
        const auto backend = make_backend(engine->backend, engine->parameters);
        const ColorWordEmbedder embedder;
        const MetricReport report = run_benchmark(case_dir, *backend, config, &embedder, fid);

        JobResult job;
        job.manifest = report_to_json(report);
        auto r = std::unique_ptr<oa_result>(wrap(std::move(job)));
        r->summary = report_to_text(report);
        if (report_path && *report_path) {
            write_text_atomic(report_path, r->manifest_text + "\n");
            write_text_atomic(std::string(report_path) + ".txt", r->summary);
        }
        *out = r.release();
    });
}

void oa_result_destroy(oa_result* result) { delete result; }

const char* oa_result_manifest(const oa_result* result) { return result ? result->manifest_text.c_str() : ""; }

size_t oa_result_artifact_count(const oa_result* result) { return result ? result->job.artifacts.size() : 0; }

const char* oa_result_artifact_name(const oa_result* result, size_t index) {
    if (!result || index >= result->job.artifacts.size()) return nullptr;
    return result->job.artifacts[index].name.c_str();
}

const char* oa_result_artifact_sha256(const oa_result* result, const char* name) {
    if (!result || !name) return nullptr;
    for (std::size_t i = 0; i < result->job.artifacts.size(); ++i)
        if (result->job.artifacts[i].name == name) return result->hashes[i].c_str();
    return nullptr;
}

const uint8_t* oa_result_artifact_data(const oa_result* result, const char* name, size_t* size) {
    if (!result || !name) return nullptr;
    const Artifact* a = result->job.find(name);
    if (!a) return nullptr;
    if (size) *size = a->bytes.size();
    return a->bytes.data();
}

const char* oa_result_summary(const oa_result* result) { return result ? result->summary.c_str() : ""; }

oa_status oa_server_start(const char* backend_name, const char* params_json, const char* host, int port, int workers,
                          const char* artifact_root, oa_server** out) {
    OA_REQUIRE(out, "output handle pointer is NULL");
    *out = nullptr;
    return guarded([&] {
        ServiceOptions opts;
        opts.backend = backend_name && *backend_name ? backend_name : "toy";
        opts.backend_parameters = parse_params(params_json);
        if (artifact_root && *artifact_root) opts.artifact_root = artifact_root;
        opts.workers = workers > 0 ? workers : 2;
        auto s = std::make_unique<oa_server>();
        s->service = std::make_unique<Service>(std::move(opts));
        s->service->start(host && *host ? host : "127.0.0.1", port);
        *out = s.release();
    });
}

int oa_server_port(const oa_server* server) { return server ? server->service->port() : -1; }

void oa_server_wait(oa_server* server) {
    if (server) server->service->wait();
}

void oa_server_stop(oa_server* server) {
    if (server) server->service->stop();
}

void oa_server_destroy(oa_server* server) { delete server; }

}  // extern "C"

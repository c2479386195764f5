// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <random>

#include <httplib.h>
#include <openssl/evp.h>

#include "objectadd/backend.hpp"
#include "objectadd/error.hpp"

namespace objectadd {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(JobState state) {
    switch (state) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "unknown";
}

namespace {

std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

JobState parse_state(const std::string& s) {
    if (s == "queued") return JobState::Queued;
    if (s == "running") return JobState::Running;
    if (s == "done") return JobState::Done;
    return JobState::Failed;
}

/// An invalid request, reported as 422 with the offending field.
struct RequestError {
    std::string field;
    std::string message;
};

void check_box(const Box& b, const BackendDescriptor& d) {
    if (b.width <= 0) throw RequestError{"box.width", "width must be positive"};
    if (b.height <= 0) throw RequestError{"box.height", "height must be positive"};
    if (b.top < 0) throw RequestError{"box.top", "top must be non-negative"};
    if (b.left < 0) throw RequestError{"box.left", "left must be non-negative"};
    if (b.top + b.height > d.image_height)
        throw RequestError{"box.height", "box extends below the image (height " + std::to_string(d.image_height) + ")"};
    if (b.left + b.width > d.image_width)
        throw RequestError{"box.width", "box extends past the right edge (width " + std::to_string(d.image_width) + ")"};
}

PixelGrid decode_base64_png(const std::string& text) {
    std::string compact;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) compact.push_back(ch);
    if (compact.empty() || compact.size() % 4 != 0) throw RequestError{"object_image_base64", "not valid base64"};
    Bytes out(compact.size() / 4 * 3);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(compact.data()),
                                  static_cast<int>(compact.size()));
    if (n < 0) throw RequestError{"object_image_base64", "not valid base64"};
    std::size_t size = static_cast<std::size_t>(n);
    if (compact.size() >= 1 && compact.back() == '=') --size;
    if (compact.size() >= 2 && compact[compact.size() - 2] == '=') --size;
    out.resize(size);
    try {
        return decode_png(out);
    } catch (const Error& e) {
        throw RequestError{"object_image_base64", e.what()};
    }
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(2), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                const std::string& field = {}, const json& manifest = nullptr) {
    json err = {{"kind", kind}, {"message", message}};
    if (!field.empty()) err["field"] = field;
    send_json(res, status, {{"error", err}, {"manifest", manifest}});
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    if (options_.workers < 1) throw Error(ErrorKind::Config, "service needs at least one worker");
    root_ = options_.artifact_root;
    if (root_.empty()) {
        const char* env = std::getenv(kArtifactRootEnv);
        root_ = env && *env ? fs::path(env) : fs::path("objectadd-artifacts");
    }
    fs::create_directories(root_ / "jobs");
    // Fail early on an unknown backend instead of on the first job.
    (void)make_backend(options_.backend, options_.backend_parameters);
    load_existing();
}

Service::~Service() { stop(); }

fs::path Service::job_dir(const std::string& id) const { return root_ / "jobs" / id; }

void Service::persist(const JobRecord& r) const {
    json state = {{"id", r.id},
                  {"state", to_string(r.state)},
                  {"created_at", r.created_at},
                  {"updated_at", r.updated_at},
                  {"error", r.error},
                  {"artifacts", r.artifacts},
                  {"manifest", r.manifest}};
    write_text_atomic(job_dir(r.id) / "state.json", state.dump(2) + "\n");
}

void Service::load_existing() {
    for (const auto& entry : fs::directory_iterator(root_ / "jobs")) {
        const fs::path state_path = entry.path() / "state.json";
        if (!fs::exists(state_path)) continue;
        try {
            const json s = json::parse(read_text(state_path));
            JobRecord r;
            r.id = s.at("id").get<std::string>();
            r.state = parse_state(s.at("state").get<std::string>());
            r.created_at = s.value("created_at", "");
            r.updated_at = s.value("updated_at", "");
            r.error = s.value("error", json(nullptr));
            r.artifacts = s.value("artifacts", std::vector<std::string>{});
            r.manifest = s.value("manifest", json(nullptr));
            if (r.manifest.contains("request")) {
                try {
                    r.request = request_from_json(r.manifest["request"], entry.path());
                } catch (const std::exception&) {
                    // Keep the record readable even if its inputs are gone.
                }
            }
            if (r.state == JobState::Queued || r.state == JobState::Running) {
                r.state = JobState::Failed;
                r.error = {{"kind", "service"}, {"stage", "service"}, {"message", "interrupted by a service restart"}};
                r.updated_at = now_utc();
                persist(r);
            }
            jobs_.emplace(r.id, std::move(r));
        } catch (const std::exception&) {
            // Unreadable state files are left on disk untouched.
        }
    }
}

std::string Service::submit(JobRequest request) {
    request.backend = options_.backend;
    for (const auto& [k, v] : options_.backend_parameters) request.backend_parameters.try_emplace(k, v);

    static thread_local std::mt19937_64 rng(std::random_device{}());
    JobRecord r;
    {
        std::lock_guard lock(mutex_);
        do {
            char buf[20];
            std::snprintf(buf, sizeof buf, "j%012llx", static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
            r.id = buf;
        } while (jobs_.count(r.id));
        // Reserve the id before releasing the lock.
        jobs_[r.id].id = r.id;
    }
    r.request = std::move(request);
    r.created_at = r.updated_at = now_utc();
    r.manifest = {{"format", "objectadd-manifest"},
                  {"version", kManifestVersion},
                  {"kind", r.request.kind == JobKind::Generate ? "generate" : "edit"},
                  {"request", request_to_json(r.request)}};
    if (r.request.object_image) write_file_atomic(job_dir(r.id) / "object.png", encode_png(*r.request.object_image));
    persist(r);
    {
        std::lock_guard lock(mutex_);
        jobs_[r.id] = r;
        queue_.push_back(r.id);
    }
    changed_.notify_all();
    return r.id;
}

std::optional<JobRecord> Service::job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end() || it->second.created_at.empty()) return std::nullopt;
    return it->second;
}

std::optional<JobRecord> Service::wait_for(const std::string& id) const {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] {
        const auto it = jobs_.find(id);
        return it == jobs_.end() ||
               (!it->second.created_at.empty() && it->second.state != JobState::Queued &&
                it->second.state != JobState::Running);
    });
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

void Service::worker_loop() {
    for (;;) {
        std::string id;
        {
            std::unique_lock lock(mutex_);
            changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            id = queue_.front();
            queue_.pop_front();
        }
        run_one(id);
    }
}

void Service::run_one(const std::string& id) {
    JobRecord r;
    {
        std::lock_guard lock(mutex_);
        JobRecord& live = jobs_.at(id);
        live.state = JobState::Running;
        live.updated_at = now_utc();
        r = live;
    }
    changed_.notify_all();
    persist(r);

    EditTraces traces;
    try {
        JobResult result = execute(r.request, &traces);
        write_artifacts(result, job_dir(id));
        r.artifacts.clear();
        for (const auto& a : result.artifacts) r.artifacts.push_back(a.name);
        r.manifest = std::move(result.manifest);
        r.state = JobState::Done;
    } catch (const Error& e) {
        r.state = JobState::Failed;
        r.error = {{"kind", to_string(e.kind())}, {"stage", e.stage()}, {"message", e.what()}};
        try {
            write_text_atomic(job_dir(id) / "traces.json", traces_to_json(traces).dump(2) + "\n");
        } catch (const std::exception&) {
        }
    } catch (const std::exception& e) {
        r.state = JobState::Failed;
        r.error = {{"kind", "internal"}, {"stage", ""}, {"message", e.what()}};
    }
    r.updated_at = now_utc();
    persist(r);
    {
        std::lock_guard lock(mutex_);
        jobs_[id] = r;
    }
    changed_.notify_all();
}

void Service::start(const std::string& host, int port) {
    if (started_) throw Error(ErrorKind::Contract, "service already started");
    server_ = std::make_unique<httplib::Server>();
    install_routes();
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
    started_ = true;
    for (int i = 0; i < options_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void Service::wait() {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return stopping_; });
}

void Service::stop() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_ && workers_.empty() && !server_thread_.joinable()) return;
        stopping_ = true;
    }
    changed_.notify_all();
    if (server_) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
    for (auto& w : workers_)
        if (w.joinable()) w.join();
    workers_.clear();
}

void Service::install_routes() {
    httplib::Server& srv = *server_;

    srv.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
    });
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    auto job_view = [](const JobRecord& r) {
        json links = {{"self", "/api/jobs/" + r.id}, {"manifest", "/api/jobs/" + r.id + "/manifest"}};
        if (r.state == JobState::Done) {
            json images = json::object();
            for (const auto& name : r.artifacts) {
                if (name.find('/') != std::string::npos || name.size() < 5 || name.substr(name.size() - 4) != ".png")
                    continue;
                const std::string stem = name.substr(0, name.size() - 4);
                images[stem] = "/api/images/" + r.id + "." + stem;
            }
            links["images"] = images;
            if (r.request.kind == JobKind::Edit) {
                links["masks"] = "/api/jobs/" + r.id + "/masks";
                links["attention"] = "/api/jobs/" + r.id + "/attention/{t}/{layer}";
            }
        }
        return json{{"job_id", r.id},
                    {"kind", r.request.kind == JobKind::Generate ? "generate" : "edit"},
                    {"state", to_string(r.state)},
                    {"created_at", r.created_at},
                    {"updated_at", r.updated_at},
                    {"error", r.error},
                    {"links", links},
                    {"manifest", r.manifest}};
    };

    auto parse_body = [](const httplib::Request& req) {
        try {
            json body = json::parse(req.body);
            if (!body.is_object()) throw RequestError{"", "request body must be a JSON object"};
            return body;
        } catch (const json::exception& e) {
            throw RequestError{"", std::string("request body is not JSON: ") + e.what()};
        }
    };

    auto descriptor = [this] { return make_backend(options_.backend, options_.backend_parameters)->descriptor(); };

    // Shared submit path: validation failures become 422 with the field name.
    auto submit_checked = [this, job_view](httplib::Response& res, const std::function<JobRequest()>& build) {
        try {
            JobRequest request = build();
            const std::string id = submit(std::move(request));
            send_json(res, 202, job_view(*job(id)));
        } catch (const RequestError& e) {
            send_error(res, 422, "config", e.message, e.field);
        } catch (const Error& e) {
            send_error(res, 422, to_string(e.kind()), e.what(), "config");
        }
    };

    auto read_config = [](const json& body, GuidanceConfig base) {
        if (!body.contains("config")) return base;
        try {
            GuidanceConfig c = config_from_json(body["config"], base);
            c.validate();
            return c;
        } catch (const Error& e) {
            throw RequestError{"config", e.what()};
        }
    };

    srv.Post("/api/generate", [=](const httplib::Request& req, httplib::Response& res) {
        submit_checked(res, [&] {
            const json body = parse_body(req);
            JobRequest r;
            r.kind = JobKind::Generate;
            if (!body.contains("prompt") || !body["prompt"].is_string())
                throw RequestError{"prompt", "prompt must be a string"};
            r.prompt = body["prompt"].get<std::string>();
            if (body.contains("seed") && !body["seed"].is_number_integer())
                throw RequestError{"seed", "seed must be an integer"};
            r.seed = body.value("seed", std::int64_t{0});
            r.config = read_config(body, {});
            return r;
        });
    });

    srv.Post("/api/edits", [=, this](const httplib::Request& req, httplib::Response& res) {
        const json body = [&] {
            try {
                return parse_body(req);
            } catch (const RequestError& e) {
                return json{{"__error", e.message}};
            }
        }();
        if (body.contains("__error")) return send_error(res, 400, "parse", body["__error"].get<std::string>());
        if (body.contains("base_job_id")) {
            if (!body["base_job_id"].is_string() || !job(body["base_job_id"].get<std::string>()))
                return send_error(res, 404, "not_found", "unknown base job", "base_job_id");
        }
        submit_checked(res, [&] {
            JobRequest r;
            r.kind = JobKind::Edit;
            if (body.contains("base_job_id")) {
                const JobRecord base = *job(body["base_job_id"].get<std::string>());
                r.prompt = base.request.prompt;
                r.seed = base.request.seed;
                r.config = base.request.config;
                r.backend_parameters = base.request.backend_parameters;
            } else {
                if (!body.contains("prompt") || !body["prompt"].is_string())
                    throw RequestError{"prompt", "either base_job_id or prompt + seed is required"};
                r.prompt = body["prompt"].get<std::string>();
                if (!body.contains("seed") || !body["seed"].is_number_integer())
                    throw RequestError{"seed", "seed must be an integer"};
                r.seed = body["seed"].get<std::int64_t>();
            }
            r.config = read_config(body, r.config);
            if (!body.contains("box") || !body["box"].is_object()) throw RequestError{"box", "box object is required"};
            for (const char* f : {"top", "left", "height", "width"})
                if (!body["box"].contains(f) || !body["box"][f].is_number_integer())
                    throw RequestError{std::string("box.") + f, std::string(f) + " must be an integer"};
            r.box = {body["box"]["top"].get<int>(), body["box"]["left"].get<int>(), body["box"]["height"].get<int>(),
                     body["box"]["width"].get<int>()};
            check_box(r.box, descriptor());
            if (!body.contains("object_prompt") || !body["object_prompt"].is_string() ||
                body["object_prompt"].get<std::string>().empty())
                throw RequestError{"object_prompt", "object_prompt must be a non-empty string"};
            r.object_prompt = body["object_prompt"].get<std::string>();
            if (body.contains("object_word_offset") && !body["object_word_offset"].is_null()) {
                if (!body["object_word_offset"].is_number_integer())
                    throw RequestError{"object_word_offset", "object_word_offset must be an integer"};
                r.object_word_offset = body["object_word_offset"].get<int>();
            }
            if (body.contains("object_image_base64")) {
                if (!body["object_image_base64"].is_string())
                    throw RequestError{"object_image_base64", "expected a base64 PNG string"};
                r.object_image = decode_base64_png(body["object_image_base64"].get<std::string>());
            }
            return r;
        });
    });

    auto with_job = [this](const std::string& id, httplib::Response& res) -> std::optional<JobRecord> {
        auto r = job(id);
        if (!r) send_error(res, 404, "not_found", "unknown job '" + id + "'");
        return r;
    };

    auto send_file = [this](httplib::Response& res, const JobRecord& r, const std::string& name) {
        const fs::path path = job_dir(r.id) / name;
        if (std::find(r.artifacts.begin(), r.artifacts.end(), name) == r.artifacts.end() || !fs::exists(path))
            return send_error(res, 404, "not_found", "job '" + r.id + "' has no artifact '" + name + "'", {},
                              r.manifest);
        const Bytes bytes = read_file(path);
        res.status = 200;
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        res.set_header("X-ObjectAdd-Manifest-Sha256", sha256_hex(r.manifest.dump()));
        res.set_header("Link", "</api/jobs/" + r.id + "/manifest>; rel=\"describedby\"");
    };

    srv.Get(R"(/api/jobs/([A-Za-z0-9]+))", [=](const httplib::Request& req, httplib::Response& res) {
        if (auto r = with_job(req.matches[1], res)) send_json(res, 200, job_view(*r));
    });

    srv.Get(R"(/api/jobs/([A-Za-z0-9]+)/manifest)", [=](const httplib::Request& req, httplib::Response& res) {
        if (auto r = with_job(req.matches[1], res)) send_json(res, 200, r->manifest);
    });

    srv.Get(R"(/api/images/([A-Za-z0-9]+)\.([A-Za-z0-9_]+))", [=](const httplib::Request& req, httplib::Response& res) {
        if (auto r = with_job(req.matches[1], res)) send_file(res, *r, std::string(req.matches[2]) + ".png");
    });

    srv.Get(R"(/api/jobs/([A-Za-z0-9]+)/attention/(\d+)/(\d+))",
            [=](const httplib::Request& req, httplib::Response& res) {
                auto r = with_job(req.matches[1], res);
                if (!r) return;
                const int t = std::stoi(req.matches[2]);
                const int layer = std::stoi(req.matches[3]);
                send_file(res, *r, attention_artifact_name(t, layer));
            });

    srv.Get(R"(/api/jobs/([A-Za-z0-9]+)/masks)", [=](const httplib::Request& req, httplib::Response& res) {
        auto r = with_job(req.matches[1], res);
        if (!r) return;
        if (r->request.kind != JobKind::Edit || r->state != JobState::Done)
            return send_error(res, 404, "not_found", "job '" + r->id + "' has no masks (state " +
                                                         to_string(r->state) + ")", {}, r->manifest);
        const std::string base = "/api/images/" + r->id + ".";
        send_json(res, 200,
                  {{"job_id", r->id},
                   {"box", base + "box_mask"},
                   {"refocused", base + "refocused_mask"},
                   {"expanded", base + "expanded_mask"},
                   {"manifest", r->manifest}});
    });
}

}  // namespace objectadd

// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "objectadd/jobs.hpp"

namespace httplib {
class Server;
}

namespace objectadd {

/// Environment variable naming the artifact root when none is given.
inline constexpr const char* kArtifactRootEnv = "OBJECTADD_ARTIFACT_ROOT";

struct ServiceOptions {
    std::string backend = "toy";
    std::map<std::string, std::string> backend_parameters;
    /// Empty: $OBJECTADD_ARTIFACT_ROOT, falling back to ./objectadd-artifacts.
    std::filesystem::path artifact_root;
    int workers = 2;
};

enum class JobState { Queued, Running, Done, Failed };
const char* to_string(JobState state);

struct JobRecord {
    std::string id;
    JobRequest request;
    JobState state = JobState::Queued;
    std::string created_at;
    std::string updated_at;
    nlohmann::json manifest;  // request part until the job finishes
    nlohmann::json error;     // {kind, stage, message} when failed
    std::vector<std::string> artifacts;
};

/// Local job service. Each job lives in <root>/jobs/<id>/ with its manifest,
/// artifacts and an atomically replaced state.json. Jobs run on a fixed
/// worker pool; every job creates its own backend instance.
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and starts serving in the background. Port 0 picks a free port.
    void start(const std::string& host, int port);
    int port() const noexcept { return port_; }
    /// Blocks until stop() is called (from another thread or a signal).
    void wait();
    void stop();

    const std::filesystem::path& artifact_root() const noexcept { return root_; }

    /// Queues a job and returns its id (also used by the HTTP handlers).
    std::string submit(JobRequest request);
    std::optional<JobRecord> job(const std::string& id) const;
    /// Blocks until the job leaves the queued/running states.
    std::optional<JobRecord> wait_for(const std::string& id) const;

private:
    void worker_loop();
    void run_one(const std::string& id);
    void persist(const JobRecord& record) const;
    void load_existing();
    void install_routes();
    std::filesystem::path job_dir(const std::string& id) const;

    ServiceOptions options_;
    std::filesystem::path root_;
    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
    std::vector<std::thread> workers_;
    int port_ = 0;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::map<std::string, JobRecord> jobs_;
    std::deque<std::string> queue_;
    bool stopping_ = false;
    bool started_ = false;
};

}  // namespace objectadd

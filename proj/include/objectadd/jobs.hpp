// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "objectadd/error.hpp"
#include "objectadd/io.hpp"
#include "objectadd/pipeline.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

inline constexpr int kManifestVersion = 1;

enum class JobKind { Generate, Edit };

/// Everything that determines a job's outputs. Serialized verbatim into the
/// manifest so any job can be replayed from its manifest alone.
struct JobRequest {
    JobKind kind = JobKind::Edit;
    std::string backend = "toy";
    std::map<std::string, std::string> backend_parameters;
    std::string prompt;
    std::int64_t seed = 0;
    GuidanceConfig config;
    // Edit jobs only.
    Box box;
    std::string object_prompt;
    std::optional<int> object_word_offset;
    /// Real-object edits: the object photo (8-bit RGB).
    std::optional<PixelGrid> object_image;
};

struct Artifact {
    std::string name;  // relative path inside the job directory
    std::string media_type;
    Bytes bytes;
};

struct JobResult {
    nlohmann::json manifest;
    std::vector<Artifact> artifacts;  // excludes manifest.json itself
    std::optional<EditOutputs> outputs;

    const Artifact* find(const std::string& name) const;
};

/// Runs a job end to end. Throws Error (stage-tagged) on failure; `traces`,
/// when given, keeps whatever the edit recorded before failing.
JobResult execute(const JobRequest& request, EditTraces* traces = nullptr);

/// Writes every artifact plus manifest.json into `dir`.
void write_artifacts(const JobResult& result, const std::filesystem::path& dir);

nlohmann::json request_to_json(const JobRequest& request);
/// Inverse of request_to_json. A referenced object image is loaded from
/// `base_dir` and its hash checked.
JobRequest request_from_json(const nlohmann::json& request, const std::filesystem::path& base_dir = {});
/// Reads a manifest written by write_artifacts back into its request.
JobRequest request_from_manifest(const std::filesystem::path& manifest_path);

/// 2 for configuration and input errors, 3 for backend and capability
/// errors, 4 for segmentation failures, 1 otherwise.
int exit_code_for(ErrorKind kind);

nlohmann::json traces_to_json(const EditTraces& traces);

/// Artifact name of the object-token attention overlay at (t, layer).
std::string attention_artifact_name(int t, int layer);

}  // namespace objectadd

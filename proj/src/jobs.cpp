// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/jobs.hpp"

#include <cstdio>

#include "objectadd/backend.hpp"

namespace objectadd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kind_name(JobKind k) { return k == JobKind::Generate ? "generate" : "edit"; }

Artifact png_artifact(std::string name, const PixelGrid& pixels) {
    return {std::move(name), "image/png", encode_png(pixels)};
}

Artifact json_artifact(std::string name, const json& j) {
    const std::string text = j.dump(2) + "\n";
    return {std::move(name), "application/json", Bytes(text.begin(), text.end())};
}

std::string latent_hash(const Latent& latent) {
    const auto v = latent.data.values();
    return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(v.data()), v.size_bytes()));
}

json box_json(const Box& b) { return {{"top", b.top}, {"left", b.left}, {"height", b.height}, {"width", b.width}}; }

Box box_from_json(const json& j) {
    Box b;
    for (const char* f : {"top", "left", "height", "width"}) {
        if (!j.contains(f) || !j[f].is_number_integer())
            throw Error(ErrorKind::Config, std::string("box.") + f + " must be an integer");
    }
    b.top = j["top"].get<int>();
    b.left = j["left"].get<int>();
    b.height = j["height"].get<int>();
    b.width = j["width"].get<int>();
    return b;
}

json mask_summary(const BinaryMask& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"count", m.count()}}; }

}  // namespace

const Artifact* JobResult::find(const std::string& name) const {
    for (const auto& a : artifacts)
        if (a.name == name) return &a;
    return nullptr;
}

std::string attention_artifact_name(int t, int layer) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "attention/t%03d_l%d.png", t, layer);
    return buf;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Parse:
        case ErrorKind::Overflow:
        case ErrorKind::Io: return 2;
        case ErrorKind::Capability:
        case ErrorKind::Backend:
        case ErrorKind::DegenerateAttention:
        case ErrorKind::GuidanceDiverged: return 3;
        case ErrorKind::Segmentation: return 4;
        default: return 1;
    }
}

json traces_to_json(const EditTraces& tr) {
    json steps = json::array();
    for (const auto& s : tr.steps)
        steps.push_back({{"t", s.t},
                         {"latent_injected", s.latent_injected},
                         {"attention_injected", s.attention_injected},
                         {"inversion_injected", s.inversion_injected},
                         {"swapped", s.swapped},
                         {"attention_mask_empty", s.attention_mask_empty},
                         {"guidance_iterations", s.guidance_iterations},
                         {"guidance_energy", s.guidance_energy}});
    json j = {{"steps", steps},
              {"object_token", tr.object_token},
              {"object_token_w", tr.object_token_w},
              {"inpaint_step", tr.inpaint_step},
              {"swap_count", tr.swap_count},
              {"warnings", tr.warnings}};
    if (tr.refocus) {
        std::vector<std::size_t> sizes = tr.refocus->labels.sizes();
        j["refocus"] = {{"cluster_sizes", sizes},
                        {"selected_clusters", tr.refocus->selection.clusters},
                        {"argmax_cluster", tr.refocus->selection.argmax_cluster},
                        {"empty_mask", tr.refocus->selection.empty_mask},
                        {"raw_mask", mask_summary(tr.refocus->raw_mask)},
                        {"refined_mask", mask_summary(tr.refocus->refined_mask)}};
    }
    if (tr.expansion)
        j["expansion"] = {{"rounds", tr.expansion->rounds},
                          {"flipped_per_round", tr.expansion->flipped_per_round},
                          {"final_mask", mask_summary(tr.expansion->final_mask)}};
    return j;
}

json request_to_json(const JobRequest& r) {
    json j = {{"kind", kind_name(r.kind)},
              {"backend", r.backend},
              {"backend_parameters", r.backend_parameters},
              {"prompt", r.prompt},
              {"seed", r.seed},
              {"config", config_to_json(r.config)}};
    if (r.kind == JobKind::Edit) {
        j["box"] = box_json(r.box);
        j["object_prompt"] = r.object_prompt;
        j["object_word_offset"] = r.object_word_offset ? json(*r.object_word_offset) : json(nullptr);
        if (r.object_image)
            j["object_image"] = {{"file", "object.png"}, {"sha256", sha256_hex(encode_png(*r.object_image))}};
    }
    return j;
}

JobRequest request_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "request must be a JSON object");
    JobRequest r;
    const std::string kind = j.value("kind", "edit");
    if (kind == "generate") r.kind = JobKind::Generate;
    else if (kind == "edit") r.kind = JobKind::Edit;
    else throw Error(ErrorKind::Config, "unknown job kind '" + kind + "'");
    try {
        r.backend = j.value("backend", std::string("toy"));
        if (j.contains("backend_parameters"))
            r.backend_parameters = j["backend_parameters"].get<std::map<std::string, std::string>>();
        r.prompt = j.at("prompt").get<std::string>();
        r.seed = j.at("seed").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed request: ") + e.what());
    }
    if (j.contains("config")) r.config = config_from_json(j["config"]);
    if (r.kind == JobKind::Edit) {
        if (!j.contains("box")) throw Error(ErrorKind::Config, "edit request needs a box");
        r.box = box_from_json(j["box"]);
        if (!j.contains("object_prompt") || !j["object_prompt"].is_string())
            throw Error(ErrorKind::Config, "edit request needs an object_prompt string");
        r.object_prompt = j["object_prompt"].get<std::string>();
        if (j.contains("object_word_offset") && !j["object_word_offset"].is_null())
            r.object_word_offset = j["object_word_offset"].get<int>();
        if (j.contains("object_image") && !j["object_image"].is_null()) {
            const json& oi = j["object_image"];
            const Bytes bytes = read_file(base_dir / oi.at("file").get<std::string>());
            r.object_image = decode_png(bytes);
            if (oi.contains("sha256") && sha256_hex(encode_png(*r.object_image)) != oi["sha256"].get<std::string>())
                throw Error(ErrorKind::Io, "object image does not match the hash recorded in the manifest");
        }
    }
    return r;
}

JobRequest request_from_manifest(const fs::path& manifest_path) {
    json m;
    try {
        m = json::parse(read_text(manifest_path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, "manifest '" + manifest_path.string() + "' is not JSON: " + e.what());
    }
    if (!m.contains("request")) throw Error(ErrorKind::Parse, "manifest has no request section");
    if (m.value("version", 0) != kManifestVersion)
        throw Error(ErrorKind::Config, "unsupported manifest version");
    return request_from_json(m["request"], manifest_path.parent_path());
}

JobResult execute(const JobRequest& request, EditTraces* traces) {
    // One backend instance per job.
    std::unique_ptr<DenoiserBackend> backend;
    try {
        backend = make_backend(request.backend, request.backend_parameters);
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage("backend");
        throw;
    }

    JobResult result;
    json outputs = json::object();
    auto add = [&](Artifact a) {
        outputs[a.name] = sha256_hex(a.bytes);
        result.artifacts.push_back(std::move(a));
    };

    json manifest = {{"format", "objectadd-manifest"},
                     {"version", kManifestVersion},
                     {"kind", kind_name(request.kind)},
                     {"request", request_to_json(request)},
                     {"backend", descriptor_to_json(backend->descriptor())}};

    if (request.kind == JobKind::Generate) {
        BaseGeneration base;
        try {
            if (request.config.total_steps < 1) throw Error(ErrorKind::Config, "total_steps must be at least 1");
            base = generate_base(request.prompt, request.seed, *backend, request.config.total_steps);
        } catch (Error& e) {
            if (e.stage().empty()) e.set_stage("original");
            throw;
        }
        add(png_artifact("base.png", to_255(base.image)));
        json trajectory = json::array();
        for (const auto& latent : base.trajectory) trajectory.push_back(latent_hash(latent));
        manifest["trajectory_latent_sha256"] = trajectory;
    } else {
        EditSpec spec;
        spec.base_prompt = request.prompt;
        spec.object_prompt = request.object_prompt;
        spec.box = request.box;
        spec.seed = request.seed;
        spec.config = request.config;
        spec.object_word_offset = request.object_word_offset;
        if (request.object_image) spec.real_object_image = from_255(*request.object_image);

        EditTraces local;
        EditTraces& tr = traces ? *traces : local;
        EditOutputs out = run_edit(spec, *backend, &tr);

        if (request.object_image) add(png_artifact("object.png", *request.object_image));
        add(png_artifact("base.png", to_255(out.base_image)));
        add(png_artifact("edited.png", to_255(out.edited_image)));
        add(png_artifact("box_mask.png", mask_to_gray(out.box_mask)));
        add(png_artifact("refocused_mask.png", mask_to_gray(out.refocused_mask)));
        add(png_artifact("expanded_mask.png", mask_to_gray(out.expanded_mask)));
        for (const auto& [key, grid] : out.traces.object_attention)
            add(png_artifact(attention_artifact_name(key.first, key.second), heatmap_to_gray(grid)));
        add(json_artifact("traces.json", traces_to_json(out.traces)));
        manifest["inpaint_step"] = out.traces.inpaint_step;
        result.outputs = std::move(out);
    }
    manifest["outputs"] = outputs;
    result.manifest = std::move(manifest);
    return result;
}

void write_artifacts(const JobResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& a : result.artifacts) write_file_atomic(dir / a.name, a.bytes);
    write_text_atomic(dir / "manifest.json", result.manifest.dump(2) + "\n");
}

}  // namespace objectadd

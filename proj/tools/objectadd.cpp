// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <csignal>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "objectadd/objectadd.h"

namespace {

int exit_code(oa_status s) {
    switch (s) {
        case OA_OK: return 0;
        case OA_ERR_CONFIG:
        case OA_ERR_IO:
        case OA_ERR_NOT_FOUND: return 2;
        case OA_ERR_BACKEND: return 3;
        case OA_ERR_SEGMENTATION: return 4;
        default: return 1;
    }
}

int report_failure(oa_status s) {
    const std::string stage = oa_last_error_stage();
    std::fprintf(stderr, "objectadd: %s%s%s: %s\n", oa_status_string(s), stage.empty() ? "" : " in stage ",
                 stage.c_str(), oa_last_error());
    return exit_code(s);
}

struct BackendOptions {
    std::string name = "toy";
    std::vector<std::string> params;  // key=value

    std::string params_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--backend-param", "expected key=value, got '" + kv + "'");
            j[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return j.dump();
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", name, "Denoiser backend (toy, toy-noninvertible)")->capture_default_str();
        cmd->add_option("--backend-param", params, "Backend parameter as key=value (repeatable)");
    }
};

struct Engine {
    oa_engine* handle = nullptr;
    ~Engine() { oa_engine_destroy(handle); }
};

struct Result {
    oa_result* handle = nullptr;
    ~Result() { oa_result_destroy(handle); }
};

struct Request {
    oa_edit_request* handle = nullptr;
    ~Request() { oa_edit_request_destroy(handle); }
};

void print_outputs(const oa_result* r, const std::string& out_dir) {
    for (const char* name : {"base.png", "edited.png", "refocused_mask.png", "expanded_mask.png"})
        if (const char* h = oa_result_artifact_sha256(r, name)) std::printf("%-20s %s\n", name, h);
    std::printf("artifacts written to %s\n", out_dir.c_str());
}

struct EditOptions {
    std::string base_manifest;
    std::string prompt;
    long long seed = 0;
    bool seed_set = false;
    std::vector<int> box;
    std::string case_file;
    std::string object;
    int object_offset = -1;
    std::string config;
    std::string config_json;
    std::string image;
    std::string out;
    BackendOptions backend;

    void add_to(CLI::App* cmd, bool real) {
        auto* manifest = cmd->add_option("--base-manifest", base_manifest, "Manifest of a generate job to edit")
                             ->check(CLI::ExistingFile);
        auto* prompt_opt = cmd->add_option("--prompt", prompt, "Base prompt (when no base manifest is given)");
        cmd->add_option("--seed", seed, "Seed of the base image")->capture_default_str();
        manifest->excludes(prompt_opt);
        auto* box_opt = cmd->add_option("--box", box, "Box as x,y,w,h in image pixels")->delimiter(',')->expected(4);
        auto* case_opt = cmd->add_option("--case-file", case_file, "Five-line case file (box and object prompt)")
                             ->check(CLI::ExistingFile);
        box_opt->excludes(case_opt);
        cmd->add_option("--object", object, "Object prompt, e.g. \"A hat\"");
        cmd->add_option("--object-offset", object_offset, "Index of the object noun among the object prompt's words");
        cmd->add_option("--config", config, "YAML file of GuidanceConfig fields")->check(CLI::ExistingFile);
        cmd->add_option("--config-json", config_json, "JSON object of GuidanceConfig overrides");
        if (real) cmd->add_option("--image", image, "Object photo on a white background (PNG)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Output directory")->required();
        backend.add_to(cmd);
    }

    int run() {
        Engine engine;
        if (auto s = oa_engine_create(backend.name.c_str(), backend.params_json().c_str(), &engine.handle)) return report_failure(s);
        Request req;
        if (auto s = oa_edit_request_create(&req.handle)) return report_failure(s);

        if (!base_manifest.empty()) {
            if (auto s = oa_edit_request_set_base_manifest(req.handle, base_manifest.c_str())) return report_failure(s);
        } else if (!prompt.empty()) {
            if (auto s = oa_edit_request_set_prompt(req.handle, prompt.c_str(), seed)) return report_failure(s);
        } else {
            std::fprintf(stderr, "objectadd: either --base-manifest or --prompt is required\n");
            return 2;
        }
        if (!case_file.empty()) {
            if (auto s = oa_edit_request_set_case_file(req.handle, case_file.c_str())) return report_failure(s);
        } else if (box.size() == 4) {
            // x, y, w, h -> top, left, height, width
            if (auto s = oa_edit_request_set_box(req.handle, box[1], box[0], box[3], box[2])) return report_failure(s);
        } else {
            std::fprintf(stderr, "objectadd: either --box x,y,w,h or --case-file is required\n");
            return 2;
        }
        if (!object.empty()) {
            if (auto s = oa_edit_request_set_object_prompt(req.handle, object.c_str())) return report_failure(s);
        } else if (case_file.empty()) {
            std::fprintf(stderr, "objectadd: --object is required unless --case-file provides it\n");
            return 2;
        }
        if (object_offset >= 0)
            if (auto s = oa_edit_request_set_object_word_offset(req.handle, object_offset)) return report_failure(s);
        if (!config.empty())
            if (auto s = oa_edit_request_set_config_file(req.handle, config.c_str())) return report_failure(s);
        if (!config_json.empty())
            if (auto s = oa_edit_request_set_config_json(req.handle, config_json.c_str())) return report_failure(s);
        if (!image.empty())
            if (auto s = oa_edit_request_set_object_image(req.handle, image.c_str())) return report_failure(s);

        Result result;
        if (auto s = oa_edit(engine.handle, req.handle, out.c_str(), &result.handle)) return report_failure(s);
        print_outputs(result.handle, out);
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free object addition into a user-drawn box"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(oa_version()));

    // generate
    BackendOptions gen_backend;
    std::string gen_prompt, gen_out;
    long long gen_seed = 0;
    int gen_steps = 50;
    auto* gen = app.add_subcommand("generate", "Generate the base image for a prompt and seed");
    gen->add_option("--prompt", gen_prompt, "Base prompt")->required();
    gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen->add_option("--steps", gen_steps, "Denoising steps T")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen_backend.add_to(gen);

    EditOptions edit_opts, real_opts;
    auto* edit = app.add_subcommand("edit", "Add an object into a box of a generated image");
    edit_opts.add_to(edit, false);
    auto* edit_real = app.add_subcommand("edit-real", "Add a real object photo into a box of a generated image");
    real_opts.add_to(edit_real, true);

    // replay
    std::string replay_manifest, replay_out;
    auto* replay = app.add_subcommand("replay", "Re-run a job from its manifest");
    replay->add_option("--manifest", replay_manifest, "manifest.json of a previous job")->required()->check(CLI::ExistingFile);
    replay->add_option("--out", replay_out, "Output directory")->required();

    // eval
    BackendOptions eval_backend;
    std::string eval_cases, eval_config, eval_fid, eval_report;
    auto* eval = app.add_subcommand("eval", "Benchmark over a directory of five-line case files");
    eval->add_option("--cases", eval_cases, "Case directory (NNN.txt + NNN.json)")->required();
    eval->add_option("--config", eval_config, "YAML file of GuidanceConfig fields")->check(CLI::ExistingFile);
    eval->add_option("--external-fid", eval_fid, "JSON map of case name to FID")->check(CLI::ExistingFile);
    eval->add_option("--report", eval_report, "Report path (JSON; a .txt summary is written next to it)")->required();
    eval_backend.add_to(eval);

    // serve
    BackendOptions serve_backend;
    std::string serve_host = "127.0.0.1", serve_root;
    int serve_port = 8080, serve_workers = 2;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP service");
    serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
    serve->add_option("--port", serve_port, "Port (0 picks a free one)")->capture_default_str();
    serve->add_option("--workers", serve_workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    serve->add_option("--root", serve_root, "Artifact root (default: $OBJECTADD_ARTIFACT_ROOT or ./objectadd-artifacts)");
    serve_backend.add_to(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            Engine engine;
            if (auto s = oa_engine_create(gen_backend.name.c_str(), gen_backend.params_json().c_str(), &engine.handle))
                return report_failure(s);
            Result result;
            if (auto s = oa_generate(engine.handle, gen_prompt.c_str(), gen_seed, gen_steps, gen_out.c_str(), &result.handle))
                return report_failure(s);
            print_outputs(result.handle, gen_out);
            return 0;
        }
        if (*edit) return edit_opts.run();
        if (*edit_real) return real_opts.run();
        if (*replay) {
            Result result;
            if (auto s = oa_replay(replay_manifest.c_str(), replay_out.c_str(), &result.handle)) return report_failure(s);
            print_outputs(result.handle, replay_out);
            return 0;
        }
        if (*eval) {
            Engine engine;
            if (auto s = oa_engine_create(eval_backend.name.c_str(), eval_backend.params_json().c_str(), &engine.handle))
                return report_failure(s);
            Result result;
            if (auto s = oa_evaluate(engine.handle, eval_cases.c_str(), eval_config.empty() ? nullptr : eval_config.c_str(),
                                     eval_fid.empty() ? nullptr : eval_fid.c_str(), eval_report.c_str(), &result.handle))
                return report_failure(s);
            std::fputs(oa_result_summary(result.handle), stdout);
            return 0;
        }
        if (*serve) {
            // Block the shutdown signals before any service thread starts so
            // only this thread receives them.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            oa_server* server = nullptr;
            if (auto s = oa_server_start(serve_backend.name.c_str(), serve_backend.params_json().c_str(), serve_host.c_str(),
                                         serve_port, serve_workers, serve_root.empty() ? nullptr : serve_root.c_str(), &server))
                return report_failure(s);
            std::printf("listening on http://%s:%d\n", serve_host.c_str(), oa_server_port(server));
            std::fflush(stdout);
            int sig = 0;
            sigwait(&signals, &sig);
            oa_server_stop(server);
            oa_server_destroy(server);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "objectadd: %s\n", e.what());
        return 2;
    }
    return 2;
}

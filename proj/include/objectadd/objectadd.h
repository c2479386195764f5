/* Copyright (C) 2026 ObjectAdd contributors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the ObjectAdd library. All handles are opaque. Functions
 * return an oa_status; on failure oa_last_error() and oa_last_error_stage()
 * describe the most recent error on the calling thread. Strings returned by
 * the library stay valid until the owning handle is destroyed (or, for the
 * error accessors, until the next failing call on the same thread).
 */
#ifndef OBJECTADD_OBJECTADD_H
#define OBJECTADD_OBJECTADD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OA_API __declspec(dllexport)
#else
#define OA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oa_status {
    OA_OK = 0,
    OA_ERR_INTERNAL = 1,
    OA_ERR_CONFIG = 2,       /* invalid arguments, config, geometry or input files */
    OA_ERR_BACKEND = 3,      /* backend failure or missing backend capability */
    OA_ERR_SEGMENTATION = 4, /* real-object segmentation found no foreground */
    OA_ERR_IO = 5,
    OA_ERR_NOT_FOUND = 6
} oa_status;

typedef struct oa_engine oa_engine;
typedef struct oa_edit_request oa_edit_request;
typedef struct oa_result oa_result;
typedef struct oa_server oa_server;

OA_API const char* oa_version(void);
OA_API const char* oa_status_string(oa_status status);
OA_API const char* oa_last_error(void);
/* Pipeline stage of the last error ("" when not stage-specific). */
OA_API const char* oa_last_error_stage(void);

/* backend_name: "toy" or "toy-noninvertible". params_json: NULL or a JSON
 * object of string backend parameters. */
OA_API oa_status oa_engine_create(const char* backend_name, const char* params_json, oa_engine** out);
OA_API void oa_engine_destroy(oa_engine* engine);
/* Backend descriptor as JSON. */
OA_API const char* oa_engine_descriptor(const oa_engine* engine);

OA_API oa_status oa_edit_request_create(oa_edit_request** out);
OA_API void oa_edit_request_destroy(oa_edit_request* request);
OA_API oa_status oa_edit_request_set_prompt(oa_edit_request* request, const char* prompt, int64_t seed);
/* Takes prompt, seed, backend parameters and config from a manifest written
 * by oa_generate or oa_edit. */
OA_API oa_status oa_edit_request_set_base_manifest(oa_edit_request* request, const char* manifest_path);
OA_API oa_status oa_edit_request_set_box(oa_edit_request* request, int top, int left, int height, int width);
/* Five-line case file: box and object prompt. */
OA_API oa_status oa_edit_request_set_case_file(oa_edit_request* request, const char* path);
OA_API oa_status oa_edit_request_set_object_prompt(oa_edit_request* request, const char* object_prompt);
OA_API oa_status oa_edit_request_set_object_word_offset(oa_edit_request* request, int offset);
/* YAML file whose keys are GuidanceConfig field names. */
OA_API oa_status oa_edit_request_set_config_file(oa_edit_request* request, const char* path);
/* JSON object of GuidanceConfig overrides applied on top of the current config. */
OA_API oa_status oa_edit_request_set_config_json(oa_edit_request* request, const char* json);
/* PNG of the object on a white background; turns the edit into a real-object edit. */
OA_API oa_status oa_edit_request_set_object_image(oa_edit_request* request, const char* png_path);

/* Generates the base image. out_dir (may be NULL) receives the artifacts. */
OA_API oa_status oa_generate(const oa_engine* engine, const char* prompt, int64_t seed, int total_steps,
                             const char* out_dir, oa_result** out);
OA_API oa_status oa_edit(const oa_engine* engine, const oa_edit_request* request, const char* out_dir,
                         oa_result** out);
/* Re-runs the job described by a manifest. */
OA_API oa_status oa_replay(const char* manifest_path, const char* out_dir, oa_result** out);
/* Benchmark over a case directory. config_path and external_fid_path may be
 * NULL. Writes <report_path> (JSON) and <report_path>.txt when report_path
 * is not NULL. The result's manifest holds the JSON report. */
OA_API oa_status oa_evaluate(const oa_engine* engine, const char* case_dir, const char* config_path,
                             const char* external_fid_path, const char* report_path, oa_result** out);

OA_API void oa_result_destroy(oa_result* result);
OA_API const char* oa_result_manifest(const oa_result* result);
OA_API size_t oa_result_artifact_count(const oa_result* result);
OA_API const char* oa_result_artifact_name(const oa_result* result, size_t index);
/* Hex SHA-256 of the named artifact, or NULL. */
OA_API const char* oa_result_artifact_sha256(const oa_result* result, const char* name);
/* Raw bytes of the named artifact, or NULL. */
OA_API const uint8_t* oa_result_artifact_data(const oa_result* result, const char* name, size_t* size);
/* Human-readable text (benchmark table); "" for other results. */
OA_API const char* oa_result_summary(const oa_result* result);

/* artifact_root NULL: $OBJECTADD_ARTIFACT_ROOT or ./objectadd-artifacts.
 * port 0 picks a free port. */
OA_API oa_status oa_server_start(const char* backend_name, const char* params_json, const char* host, int port,
                                 int workers, const char* artifact_root, oa_server** out);
OA_API int oa_server_port(const oa_server* server);
OA_API void oa_server_wait(oa_server* server);
OA_API void oa_server_stop(oa_server* server);
OA_API void oa_server_destroy(oa_server* server);

#ifdef __cplusplus
}
#endif

#endif /* OBJECTADD_OBJECTADD_H */

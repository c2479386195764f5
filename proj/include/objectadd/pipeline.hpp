// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "objectadd/attention_refocus.hpp"
#include "objectadd/backend.hpp"
#include "objectadd/object_expansion.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

struct BaseGeneration {
    Image image;
    /// trajectory[t] is the latent at timestep t; size T + 1.
    std::vector<Latent> trajectory;
    EmbeddingMatrix embedding;
};

/// Full T-step denoising of `prompt` from the seeded noise.
BaseGeneration generate_base(const std::string& prompt, std::int64_t seed, const DenoiserBackend& backend,
                             int total_steps);

struct StepTrace {
    int t = 0;
    bool latent_injected = false;
    bool attention_injected = false;
    bool inversion_injected = false;
    bool swapped = false;
    bool attention_mask_empty = false;
    int guidance_iterations = 0;
    std::vector<double> guidance_energy;
};

/// Everything recorded while an edit runs. Filled progressively, so a failed
/// edit leaves the stages it completed.
struct EditTraces {
    std::vector<StepTrace> steps;  // in execution order, t = T .. 1
    int object_token = -1;         // row k in the coalesced embedding
    int object_token_w = -1;       // same word inside W's own embedding
    int inpaint_step = -1;
    std::optional<RefocusResult> refocus;
    std::optional<ExpansionTrace> expansion;
    /// Edited latent right before and after the single swap.
    std::optional<Latent> pre_swap_latent;
    std::optional<Latent> post_swap_latent;
    /// Original-trajectory latent used by the swap.
    std::optional<Latent> original_at_swap;
    /// Real-image path: edited latent right after the inverted-latent injection
    /// at the first injected step, and the inverted latent used there.
    std::optional<Latent> inversion_injected_latent;
    std::optional<Latent> inverted_reference;
    /// Object token row of the edited trajectory per (t, layer).
    std::map<std::pair<int, int>, Grid<double>> object_attention;
    int swap_count = 0;
    std::vector<std::string> warnings;
};

struct EditOutputs {
    Image base_image;
    Image edited_image;
    BinaryMask box_mask;        // M, or M' on the real-image path (full resolution)
    BinaryMask refocused_mask;  // refocus layer result upsampled to full resolution
    BinaryMask expanded_mask;   // expansion result upsampled to full resolution
    EditTraces traces;
};

/// Adds the object described by `spec.object_prompt` into `spec.box` of the
/// image generated from `spec.base_prompt`. `traces`, when given, receives the
/// partial traces even if the edit throws; errors carry a stage tag.
EditOutputs edit_generated(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces = nullptr);

/// Real-object variant: segments `spec.real_object_image`, places it in the
/// box, inverts it and injects it into the edit.
EditOutputs edit_real(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces = nullptr);

/// Dispatches on whether a real object image is present.
EditOutputs run_edit(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces = nullptr);

/// Foreground = pixels whose smallest channel is below `threshold`; keeps the
/// largest 4-connected component and fills its holes. Throws Segmentation
/// when nothing qualifies.
BinaryMask segment_white_background(const Image& image, double threshold = 0.9);

struct Placement {
    Image canvas;        // `background` with the object pasted in
    BinaryMask mask;     // M': pasted object pixels, full resolution
    Box region;          // letterboxed rectangle inside the box
};

/// Crops the segmented object, scales it to fit `box` preserving aspect ratio
/// (nearest neighbour), centres it, and pastes it over `background`.
Placement place_object(const Image& object, const BinaryMask& segmentation, const Box& box, const Image& background);

enum class JobStatus { Queued, Running, Done, Failed };

const char* to_string(JobStatus status);

struct EditJob {
    EditSpec spec;
    JobStatus status = JobStatus::Queued;
    std::optional<EditOutputs> outputs;
    EditTraces traces;
    std::string error;
    std::string failed_stage;
};

/// Runs `job` to completion; never throws for pipeline failures, which end in
/// JobStatus::Failed with the stage recorded.
void run_job(EditJob& job, const DenoiserBackend& backend);

}  // namespace objectadd

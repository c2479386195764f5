// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "objectadd/error.hpp"
#include "objectadd/layout_control.hpp"
#include "objectadd/mask_ops.hpp"
#include "objectadd/text_coalesce.hpp"

namespace objectadd {

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Backend, e.what(), stage);
    }
}

std::uint64_t derive_seed(std::int64_t seed, std::uint64_t salt) {
    std::uint64_t z = static_cast<std::uint64_t>(seed) + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct RealObjectInputs {
    BinaryMask precise_mask;               // M', full resolution
    std::vector<Latent> inverted;          // Z~ trajectory indexed by timestep
};

EditOutputs run_edit_core(const EditSpec& spec, const DenoiserBackend& backend, EditTraces& tr, bool real_path) {
    const GuidanceConfig& cfg = spec.config;
    in_stage("config", [&] {
        cfg.validate();
        if (spec.object_prompt.empty()) throw Error(ErrorKind::Config, "object prompt must not be empty");
    });
    const BackendDescriptor& desc = backend.descriptor();
    const int T = cfg.total_steps;

    const BinaryMask box_mask = in_stage("config", [&] {
        if (T > desc.total_steps_supported) throw Error(ErrorKind::Config, "total_steps exceeds what the backend supports");
        if (real_path && !desc.invertible)
            throw Error(ErrorKind::Capability, "backend '" + desc.name + "' does not support inversion");
        return box_to_mask(spec.box, desc.image_extent());
    });

    // Text embeddings.
    EmbeddingMatrix e_w;
    EmbeddingMatrix e_pw;
    in_stage("text", [&] {
        e_w = backend.encode_text(spec.object_prompt);
        const EmbeddingMatrix e_p = backend.encode_text(spec.base_prompt);
        e_pw = coalesce(e_p, e_w);
        int offset = spec.object_word_offset.value_or(default_object_word_offset(backend.tokenize(spec.object_prompt)));
        if (offset < 0 || offset >= e_w.actual_tokens)
            throw Error(ErrorKind::Config, "object word offset outside the object prompt");
        tr.object_token = object_token_index(e_p.actual_tokens, offset, e_pw.max_tokens());
        tr.object_token_w = object_token_index(0, offset, e_w.max_tokens());
    });
    const int k = tr.object_token;

    // (a) original trajectory.
    BaseGeneration base = in_stage("original", [&] { return generate_base(spec.base_prompt, spec.seed, backend, T); });

    EditOutputs out;
    out.base_image = base.image;

    RealObjectInputs real;
    BinaryMask mask_full = box_mask;
    if (real_path) {
        in_stage("segmentation", [&] {
            const BinaryMask seg = segment_white_background(*spec.real_object_image, cfg.segmentation_threshold);
            Placement placed = place_object(*spec.real_object_image, seg, spec.box, base.image);
            real.precise_mask = placed.mask;
            mask_full = placed.mask;
            if (mask_full.none()) throw Error(ErrorKind::Segmentation, "placed object mask is empty");
            return in_stage("inversion", [&] {
                const Latent clean = backend.encode_image(placed.canvas);
                real.inverted = backend.invert(clean, e_w, T);
                if (static_cast<int>(real.inverted.size()) != T + 1)
                    throw Error(ErrorKind::Backend, "inversion returned a trajectory of the wrong length");
                return 0;
            });
        });
    }
    out.box_mask = mask_full;

    const BinaryMask mask_latent = resample_mask(mask_full, desc.latent_extent(), ResolutionTag::latent());
    const std::vector<int> attn_layers = in_stage("config", [&] { return resolve_layers(desc, cfg.attention_layers); });
    std::map<int, BinaryMask> mask_gamma;
    for (const auto& l : desc.attention_layers)
        mask_gamma.emplace(l.id, resample_mask(mask_full, {l.height, l.width}, ResolutionTag::layer(l.id)));

    const int inpaint_step = in_stage("config", [&] { return pick_inpaint_step(cfg, derive_seed(spec.seed, 7)); });
    tr.inpaint_step = inpaint_step;

    const Latent noise = base.trajectory[static_cast<std::size_t>(T)];
    Latent object_latent = real_path ? real.inverted[static_cast<std::size_t>(T)] : noise;
    Latent edited = noise;

    const int inv_first = cfg.inversion_inject_step;
    const int inv_last = std::max(1, cfg.inversion_inject_step - cfg.inversion_inject_window + 1);

    for (int t = T; t >= 1; --t) {
        StepTrace st;
        st.t = t;

        // (b) object trajectory, with box guidance on generated inputs only.
        if (!real_path) {
            in_stage("guidance", [&] {
                GuidanceState gs{object_latent, {}, 0};
                gs = guidance_update(std::move(gs), backend, e_w, mask_full, tr.object_token_w, cfg);
                object_latent = std::move(gs.latent);
                st.guidance_energy = std::move(gs.energy_history);
                st.guidance_iterations = gs.iterations_used;
            });
        }

        // (c) edited trajectory.
        in_stage("latent-injection", [&] {
            if (should_inject_latent(t, cfg)) {
                edited = inject_latent(edited, object_latent, mask_latent);
                st.latent_injected = true;
            }
            if (real_path && t <= inv_first && t >= inv_last) {
                const Latent& ref = real.inverted[static_cast<std::size_t>(t)];
                edited = inject_latent(edited, ref, mask_latent);
                st.inversion_injected = true;
                if (!tr.inversion_injected_latent) {
                    tr.inversion_injected_latent = edited;
                    tr.inverted_reference = ref;
                }
            }
        });

        const auto maps = in_stage("attention", [&] { return backend.cross_attention(edited, e_pw); });
        for (const auto& m : maps) tr.object_attention.emplace(std::make_pair(t, m.layer_id()), m.row_grid(k));

        if (t == inpaint_step) {
            in_stage("refocus", [&] {
                const auto it = std::find_if(maps.begin(), maps.end(),
                                             [&](const auto& m) { return m.layer_id() == desc.refocus_layer; });
                if (it == maps.end()) throw Error(ErrorKind::Backend, "backend returned no refocus layer map");
                tr.refocus = refocus(it->row_grid(k), mask_gamma.at(desc.refocus_layer), cfg, derive_seed(spec.seed, 11));
                if (tr.refocus->selection.empty_mask) tr.warnings.push_back("refocus: empty box mask at refocus layer");
            });
            in_stage("expansion", [&] {
                const BinaryMask refocused_full =
                    upsample_mask(tr.refocus->refined_mask, desc.image_extent(), ResolutionTag::full());
                out.refocused_mask = refocused_full;
                const BinaryMask seed_latent =
                    resample_mask(refocused_full, desc.latent_extent(), ResolutionTag::latent());
                ExpansionResult grown = expand(seed_latent, edited, cfg.h2_threshold);
                tr.expansion = grown.trace;
                out.expanded_mask = upsample_mask(grown.mask, desc.image_extent(), ResolutionTag::full());

                tr.pre_swap_latent = edited;
                tr.original_at_swap = base.trajectory[static_cast<std::size_t>(t)];
                edited = swap_latent(edited, base.trajectory[static_cast<std::size_t>(t)], grown.mask);
                tr.post_swap_latent = edited;
                st.swapped = true;
                ++tr.swap_count;
            });
        }

        in_stage("denoise", [&] {
            AttentionControl control;
            if (should_inject_attention(t, cfg)) {
                control.token = k;
                for (int id : attn_layers) {
                    const auto it =
                        std::find_if(maps.begin(), maps.end(), [&](const auto& m) { return m.layer_id() == id; });
                    if (it == maps.end()) throw Error(ErrorKind::Backend, "missing attention layer " + std::to_string(id));
                    EnhancedAttention enhanced = enhance_attention(*it, mask_gamma.at(id), k, cfg.attention_scope);
                    st.attention_mask_empty = st.attention_mask_empty || enhanced.empty_mask;
                    if (!enhanced.empty_mask) control.maps.push_back(std::move(enhanced.map));
                }
                st.attention_injected = !control.maps.empty();
                if (st.attention_mask_empty) tr.warnings.push_back("attention injection skipped an empty layer mask");
            }
            edited = backend.denoise_step(edited, t, e_pw, st.attention_injected ? &control : nullptr).next_latent;
            object_latent = backend.denoise_step(object_latent, t, e_w).next_latent;
            if (!edited.all_finite() || !object_latent.all_finite())
                throw Error(ErrorKind::Backend, "non-finite latent after step " + std::to_string(t));
        });
        tr.steps.push_back(std::move(st));
    }

    out.edited_image = in_stage("decode", [&] { return backend.decode(edited); });
    if (out.refocused_mask.rows() == 0) {
        out.refocused_mask = BinaryMask(desc.image_height, desc.image_width, false, ResolutionTag::full());
        out.expanded_mask = out.refocused_mask;
    }
    out.traces = tr;
    return out;
}

}  // namespace

BaseGeneration generate_base(const std::string& prompt, std::int64_t seed, const DenoiserBackend& backend,
                             int total_steps) {
    BaseGeneration g;
    g.embedding = backend.encode_text(prompt);
    g.trajectory.resize(static_cast<std::size_t>(total_steps) + 1);
    Latent x = backend.initial_noise(seed, total_steps);
    g.trajectory[static_cast<std::size_t>(total_steps)] = x;
    for (int t = total_steps; t >= 1; --t) {
        try {
            x = backend.denoise_step(x, t, g.embedding).next_latent;
        } catch (Error& e) {
            throw Error(e.kind(), "step " + std::to_string(t) + ": " + e.what(), e.stage());
        }
        g.trajectory[static_cast<std::size_t>(t - 1)] = x;
    }
    g.image = backend.decode(x);
    return g;
}

EditOutputs edit_generated(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces) {
    if (spec.real_object_image) throw Error(ErrorKind::Config, "generated-image edit received a real object image", "config");
    EditTraces local;
    EditTraces& tr = traces ? *traces : local;
    return run_edit_core(spec, backend, tr, false);
}

EditOutputs edit_real(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces) {
    if (!spec.real_object_image) throw Error(ErrorKind::Config, "real-image edit needs an object image", "config");
    EditTraces local;
    EditTraces& tr = traces ? *traces : local;
    return run_edit_core(spec, backend, tr, true);
}

EditOutputs run_edit(const EditSpec& spec, const DenoiserBackend& backend, EditTraces* traces) {
    return spec.real_object_image ? edit_real(spec, backend, traces) : edit_generated(spec, backend, traces);
}

BinaryMask segment_white_background(const Image& image, double threshold) {
    if (image.channels() != 3) throw Error(ErrorKind::Shape, "segmentation expects an RGB image");
    BinaryMask fg(image.rows(), image.cols(), false, ResolutionTag::full());
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c)
            fg.set(r, c, std::min({image(r, c, 0), image(r, c, 1), image(r, c, 2)}) < threshold);
    if (fg.none()) throw Error(ErrorKind::Segmentation, "no foreground below the white-background threshold");

    int count = 0;
    const Grid<int> ids = connected_components(fg, true, count);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
    for (int id : ids.values())
        if (id >= 0) ++sizes[static_cast<std::size_t>(id)];
    const int largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    BinaryMask kept(image.rows(), image.cols(), false, ResolutionTag::full());
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c) kept.set(r, c, ids(r, c) == largest);
    return morph_cleanup(kept, 0);
}

Placement place_object(const Image& object, const BinaryMask& segmentation, const Box& box, const Image& background) {
    if (segmentation.none()) throw Error(ErrorKind::Segmentation, "empty object segmentation");
    if (!box.inside(background.rows(), background.cols())) throw Error(ErrorKind::Config, "box lies outside the image bounds");

    int top = segmentation.rows(), left = segmentation.cols(), bottom = -1, right = -1;
    for (int r = 0; r < segmentation.rows(); ++r)
        for (int c = 0; c < segmentation.cols(); ++c)
            if (segmentation(r, c)) {
                top = std::min(top, r);
                left = std::min(left, c);
                bottom = std::max(bottom, r);
                right = std::max(right, c);
            }
    const int crop_h = bottom - top + 1;
    const int crop_w = right - left + 1;
    const double scale = std::min(static_cast<double>(box.height) / crop_h, static_cast<double>(box.width) / crop_w);
    const int out_h = std::clamp(static_cast<int>(std::lround(crop_h * scale)), 1, box.height);
    const int out_w = std::clamp(static_cast<int>(std::lround(crop_w * scale)), 1, box.width);

    Placement p;
    p.region = {box.top + (box.height - out_h) / 2, box.left + (box.width - out_w) / 2, out_h, out_w};
    p.canvas = background;
    p.mask = BinaryMask(background.rows(), background.cols(), false, ResolutionTag::full());
    for (int r = 0; r < out_h; ++r) {
        const int sr = top + std::min(crop_h - 1, static_cast<int>(static_cast<long long>(r) * crop_h / out_h));
        for (int c = 0; c < out_w; ++c) {
            const int sc = left + std::min(crop_w - 1, static_cast<int>(static_cast<long long>(c) * crop_w / out_w));
            if (!segmentation(sr, sc)) continue;
            const int dr = p.region.top + r;
            const int dc = p.region.left + c;
            p.mask.set(dr, dc, true);
            for (int k = 0; k < 3; ++k) p.canvas(dr, dc, k) = object(sr, sc, k);
        }
    }
    return p;
}

const char* to_string(JobStatus status) {
    switch (status) {
        case JobStatus::Queued: return "queued";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "unknown";
}

void run_job(EditJob& job, const DenoiserBackend& backend) {
    job.status = JobStatus::Running;
    job.traces = {};
    try {
        job.outputs = run_edit(job.spec, backend, &job.traces);
        job.status = JobStatus::Done;
    } catch (const Error& e) {
        job.status = JobStatus::Failed;
        job.error = e.what();
        job.failed_stage = e.stage();
    } catch (const std::exception& e) {
        job.status = JobStatus::Failed;
        job.error = e.what();
        job.failed_stage = "unknown";
    }
}

}  // namespace objectadd

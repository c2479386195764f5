// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "objectadd/backend.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

/// (1 - inside_mass / total_mass)^2 for attention row `token`.
/// Throws Shape on extent mismatch and DegenerateAttention on zero mass.
double energy(const CrossAttentionMap& attn, const BinaryMask& mask_gamma, int token);

/// Same measure on a bare (H, W) row; `weights` in [0, 1] act as a soft mask.
double energy(const Grid<double>& row, const Grid<double>& weights);

struct GuidanceState {
    Latent latent;
    /// Mean per-layer energy before the first update and after each update.
    std::vector<double> energy_history;
    int iterations_used = 0;
};

/// Backward guidance on the object trajectory: repeatedly steps the latent
/// against the gradient of the summed box energy over the guidance layers,
/// stopping after `config.guidance_iters` updates or once the mean energy
/// drops below `config.guidance_stop_energy`.
/// Throws GuidanceDivergedError on a non-finite gradient or latent.
GuidanceState guidance_update(GuidanceState state, const DenoiserBackend& backend, const EmbeddingMatrix& e_w,
                              const BinaryMask& mask, int token, const GuidanceConfig& config);

/// (1 - M) * edited + M * injected, channelwise. `mask` must match the latent
/// grid. Throws TrajectoryAlignment when the timesteps differ.
Latent inject_latent(const Latent& edited, const Latent& injected, const BinaryMask& mask);

struct EnhancedAttention {
    CrossAttentionMap map;
    bool empty_mask = false;  // the map was returned unchanged
};

/// Replaces row `token` by softmax(max(avg(row), 1) * M). With
/// AttentionScope::MaskedRegion the softmax runs over mask cells only and
/// the rest of the row is zero.
EnhancedAttention enhance_attention(const CrossAttentionMap& attn, const BinaryMask& mask_gamma, int token,
                                    AttentionScope scope = AttentionScope::WholeMap);

/// True while t lies in the first `frac` of the schedule: (T - t) < frac * T.
bool in_leading_fraction(int t, int total_steps, double frac);
bool should_inject_latent(int t, const GuidanceConfig& config);
bool should_inject_attention(int t, const GuidanceConfig& config);

}  // namespace objectadd

// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/layout_control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "objectadd/error.hpp"

namespace objectadd {

namespace {

double masked_energy(std::span<const double> row, const BinaryMask& mask) {
    double inside = 0.0;
    double total = 0.0;
    const int w = mask.cols();
    for (std::size_t i = 0; i < row.size(); ++i) {
        total += row[i];
        if (mask(static_cast<int>(i) / w, static_cast<int>(i) % w)) inside += row[i];
    }
    if (!(total > 0.0)) throw Error(ErrorKind::DegenerateAttention, "attention row has zero total mass");
    const double miss = 1.0 - inside / total;
    return miss * miss;
}

void softmax_inplace(std::span<double> v) {
    const double peak = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - peak);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace

double energy(const CrossAttentionMap& attn, const BinaryMask& mask_gamma, int token) {
    if (attn.height() != mask_gamma.rows() || attn.width() != mask_gamma.cols())
        throw Error(ErrorKind::Shape, "attention map and mask differ in spatial shape");
    return masked_energy(attn.row(token), mask_gamma);
}

double energy(const Grid<double>& row, const Grid<double>& weights) {
    if (!row.same_shape(weights)) throw Error(ErrorKind::Shape, "attention row and weights differ in shape");
    double inside = 0.0;
    double total = 0.0;
    const auto r = row.values();
    const auto w = weights.values();
    for (std::size_t i = 0; i < r.size(); ++i) {
        total += r[i];
        inside += w[i] * r[i];
    }
    if (!(total > 0.0)) throw Error(ErrorKind::DegenerateAttention, "attention row has zero total mass");
    const double miss = 1.0 - inside / total;
    return miss * miss;
}

GuidanceState guidance_update(GuidanceState state, const DenoiserBackend& backend, const EmbeddingMatrix& e_w,
                              const BinaryMask& mask, int token, const GuidanceConfig& config) {
    const auto& desc = backend.descriptor();
    if (!desc.differentiable) throw Error(ErrorKind::Capability, "backend '" + desc.name + "' is not differentiable");
    if (token < 0 || token >= e_w.max_tokens()) throw Error(ErrorKind::Contract, "object token outside the embedding");

    const std::vector<int> layers = resolve_layers(desc, config.guidance_layers);
    const double layer_count = static_cast<double>(layers.size());
    auto mean_energy = [&](const Latent& latent) {
        return box_energy(backend, latent, e_w, mask, token, layers) / layer_count;
    };

    double current = mean_energy(state.latent);
    state.energy_history.push_back(current);
    for (int iter = 0; iter < config.guidance_iters; ++iter) {
        if (current < config.guidance_stop_energy) break;
        const Latent grad = backend.energy_gradient(state.latent, e_w, mask, token, layers);
        if (!grad.all_finite())
            throw GuidanceDivergedError("non-finite guidance gradient at iteration " + std::to_string(iter),
                                        state.energy_history);
        auto values = state.latent.data.values();
        const auto g = grad.data.values();
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= config.guidance_lr * g[i];
        if (!state.latent.all_finite())
            throw GuidanceDivergedError("guidance produced a non-finite latent", state.energy_history);
        ++state.iterations_used;
        current = mean_energy(state.latent);
        state.energy_history.push_back(current);
    }
    return state;
}

Latent inject_latent(const Latent& edited, const Latent& injected, const BinaryMask& mask) {
    if (edited.timestep != injected.timestep)
        throw Error(ErrorKind::TrajectoryAlignment, "latents come from different timesteps (" +
                                                        std::to_string(edited.timestep) + " vs " +
                                                        std::to_string(injected.timestep) + ")");
    if (!edited.data.same_shape(injected.data)) throw Error(ErrorKind::Shape, "latent shapes differ");
    if (mask.rows() != edited.height() || mask.cols() != edited.width())
        throw Error(ErrorKind::Shape, "mask is not at latent resolution");

    Latent out = edited;
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            if (mask(r, c)) {
                const auto src = injected.data.cell(r, c);
                std::copy(src.begin(), src.end(), out.data.cell(r, c).begin());
            }
    return out;
}

EnhancedAttention enhance_attention(const CrossAttentionMap& attn, const BinaryMask& mask_gamma, int token,
                                    AttentionScope scope) {
    if (attn.height() != mask_gamma.rows() || attn.width() != mask_gamma.cols())
        throw Error(ErrorKind::Shape, "attention map and mask differ in spatial shape");
    EnhancedAttention out{attn, false};
    if (mask_gamma.none()) {
        out.empty_mask = true;
        return out;
    }

    auto row = out.map.row(token);
    const double avg = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    const double level = std::max(avg, 1.0);
    const int w = attn.width();
    auto inside = [&](std::size_t i) { return mask_gamma(static_cast<int>(i) / w, static_cast<int>(i) % w); };

    if (scope == AttentionScope::WholeMap) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = inside(i) ? level : 0.0;
        softmax_inplace(row);
    } else {
        // Constant inside the mask, so the restricted softmax is uniform there.
        const double share = 1.0 / static_cast<double>(mask_gamma.count());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = inside(i) ? share : 0.0;
    }
    return out;
}

bool in_leading_fraction(int t, int total_steps, double frac) {
    return static_cast<double>(total_steps - t) < frac * static_cast<double>(total_steps);
}

bool should_inject_latent(int t, const GuidanceConfig& config) {
    return in_leading_fraction(t, config.total_steps, config.latent_inject_frac);
}

bool should_inject_attention(int t, const GuidanceConfig& config) {
    return in_leading_fraction(t, config.total_steps, config.attn_inject_frac);
}

}  // namespace objectadd

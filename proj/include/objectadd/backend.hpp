// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "objectadd/mask_ops.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

struct LayerSpec {
    int id = 0;
    int height = 0;
    int width = 0;
    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct BackendDescriptor {
    std::string name;
    int latent_height = 0;
    int latent_width = 0;
    int latent_channels = 0;
    int image_height = 0;
    int image_width = 0;
    std::vector<LayerSpec> attention_layers;
    /// Layer read by attention refocusing; the (32, 32) layer when one exists.
    int refocus_layer = 0;
    int max_tokens = 0;  // N
    int embed_dim = 0;   // D
    int total_steps_supported = 0;
    bool differentiable = false;
    bool invertible = false;
    /// Backend-specific knobs (seeds, scales) recorded for reproducibility.
    std::map<std::string, std::string> parameters;

    Extent latent_extent() const { return {latent_height, latent_width}; }
    Extent image_extent() const { return {image_height, image_width}; }
    const LayerSpec& layer(int id) const;
    std::vector<int> layer_ids() const;
};

/// Replacement for one token row of the cross-attention maps during a step.
/// `maps` holds one map per layer the control applies to; only row `token`
/// is read.
struct AttentionControl {
    int token = -1;
    std::vector<CrossAttentionMap> maps;
};

struct StepOutput {
    Latent next_latent;
    std::vector<CrossAttentionMap> attention;  // one per declared layer, computed on the input latent
};

/// Contract every diffusion stack implements. Implementations must be
/// deterministic: identical arguments give identical results.
class DenoiserBackend {
public:
    virtual ~DenoiserBackend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    virtual std::vector<std::string> tokenize(const std::string& prompt) const = 0;
    /// Throws Overflow when the prompt does not fit N - 2 tokens.
    virtual EmbeddingMatrix encode_text(const std::string& prompt) const = 0;

    /// Seeded Gaussian latent at timestep `total_steps`.
    virtual Latent initial_noise(std::int64_t seed, int total_steps) const = 0;

    virtual std::vector<CrossAttentionMap> cross_attention(const Latent& latent,
                                                           const EmbeddingMatrix& embedding) const = 0;

    /// One denoising step t -> t - 1. Throws Backend when t < 1.
    virtual StepOutput denoise_step(const Latent& latent, int t, const EmbeddingMatrix& embedding,
                                    const AttentionControl* control = nullptr) const = 0;

    /// Gradient of the summed box energy over `layers` with respect to the
    /// latent. `mask` is full resolution; the backend resamples it per layer.
    virtual Latent energy_gradient(const Latent& latent, const EmbeddingMatrix& embedding, const BinaryMask& mask,
                                   int token, std::span<const int> layers) const;

    /// Inverts a clean latent (timestep 0) into a trajectory indexed by
    /// timestep: result[t] holds the latent at step t, result.size() == T + 1.
    virtual std::vector<Latent> invert(const Latent& clean, const EmbeddingMatrix& embedding, int total_steps) const;

    virtual Latent encode_image(const Image& image) const;
    virtual Image decode(const Latent& latent) const = 0;
};

/// Sum of box energies over `layers` for the given latent (backend agnostic).
double box_energy(const DenoiserBackend& backend, const Latent& latent, const EmbeddingMatrix& embedding,
                  const BinaryMask& mask, int token, std::span<const int> layers);

/// Layers to use: `requested` when non-empty, otherwise every declared layer.
std::vector<int> resolve_layers(const BackendDescriptor& descriptor, const std::vector<int>& requested);

/// Known names: "toy", "toy-noninvertible". Throws Backend for anything else.
std::unique_ptr<DenoiserBackend> make_backend(const std::string& name,
                                              const std::map<std::string, std::string>& parameters = {});

/// Adapter that forwards each operation to a user-supplied callable. Any
/// operation whose hook is left empty throws Capability. This is the binding
/// point for an external latent-diffusion stack: wire `denoise_step` to the
/// UNet + scheduler step, `cross_attention` to the attention processors of
/// each declared layer, `energy_gradient` to autograd through those
/// processors, and `invert` to the stack's inversion routine.
class CallbackBackend final : public DenoiserBackend {
public:
    struct Hooks {
        std::function<std::vector<std::string>(const std::string&)> tokenize;
        std::function<EmbeddingMatrix(const std::string&)> encode_text;
        std::function<Latent(std::int64_t, int)> initial_noise;
        std::function<std::vector<CrossAttentionMap>(const Latent&, const EmbeddingMatrix&)> cross_attention;
        std::function<StepOutput(const Latent&, int, const EmbeddingMatrix&, const AttentionControl*)> denoise_step;
        std::function<Latent(const Latent&, const EmbeddingMatrix&, const BinaryMask&, int, std::span<const int>)>
            energy_gradient;
        std::function<std::vector<Latent>(const Latent&, const EmbeddingMatrix&, int)> invert;
        std::function<Latent(const Image&)> encode_image;
        std::function<Image(const Latent&)> decode;
    };

    /// Capability flags in `descriptor` are cleared when the matching hook is empty.
    CallbackBackend(BackendDescriptor descriptor, Hooks hooks);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<std::string> tokenize(const std::string& prompt) const override;
    EmbeddingMatrix encode_text(const std::string& prompt) const override;
    Latent initial_noise(std::int64_t seed, int total_steps) const override;
    std::vector<CrossAttentionMap> cross_attention(const Latent& latent,
                                                   const EmbeddingMatrix& embedding) const override;
    StepOutput denoise_step(const Latent& latent, int t, const EmbeddingMatrix& embedding,
                            const AttentionControl* control) const override;
    Latent energy_gradient(const Latent& latent, const EmbeddingMatrix& embedding, const BinaryMask& mask, int token,
                           std::span<const int> layers) const override;
    std::vector<Latent> invert(const Latent& clean, const EmbeddingMatrix& embedding, int total_steps) const override;
    Latent encode_image(const Image& image) const override;
    Image decode(const Latent& latent) const override;

private:
    BackendDescriptor descriptor_;
    Hooks hooks_;
};

}  // namespace objectadd

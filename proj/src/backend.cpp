// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/backend.hpp"

#include <algorithm>

#include "objectadd/error.hpp"
#include "objectadd/layout_control.hpp"
#include "objectadd/toy_backend.hpp"

namespace objectadd {

const LayerSpec& BackendDescriptor::layer(int id) const {
    for (const auto& l : attention_layers)
        if (l.id == id) return l;
    throw Error(ErrorKind::Config, "backend '" + name + "' has no attention layer " + std::to_string(id));
}

std::vector<int> BackendDescriptor::layer_ids() const {
    std::vector<int> ids;
    ids.reserve(attention_layers.size());
    for (const auto& l : attention_layers) ids.push_back(l.id);
    return ids;
}

Latent DenoiserBackend::energy_gradient(const Latent&, const EmbeddingMatrix&, const BinaryMask&, int,
                                        std::span<const int>) const {
    throw Error(ErrorKind::Capability, "backend '" + descriptor().name + "' is not differentiable");
}

std::vector<Latent> DenoiserBackend::invert(const Latent&, const EmbeddingMatrix&, int) const {
    throw Error(ErrorKind::Capability, "backend '" + descriptor().name + "' does not support inversion");
}

Latent DenoiserBackend::encode_image(const Image&) const {
    throw Error(ErrorKind::Capability, "backend '" + descriptor().name + "' cannot encode images");
}

double box_energy(const DenoiserBackend& backend, const Latent& latent, const EmbeddingMatrix& embedding,
                  const BinaryMask& mask, int token, std::span<const int> layers) {
    const auto maps = backend.cross_attention(latent, embedding);
    double total = 0.0;
    for (int id : layers) {
        const auto it = std::find_if(maps.begin(), maps.end(), [id](const auto& m) { return m.layer_id() == id; });
        if (it == maps.end()) throw Error(ErrorKind::Backend, "backend returned no map for layer " + std::to_string(id));
        const auto mask_gamma = resample_mask(mask, {it->height(), it->width()}, ResolutionTag::layer(id));
        total += energy(*it, mask_gamma, token);
    }
    return total;
}

std::vector<int> resolve_layers(const BackendDescriptor& descriptor, const std::vector<int>& requested) {
    if (requested.empty()) return descriptor.layer_ids();
    for (int id : requested) (void)descriptor.layer(id);
    return requested;
}

std::unique_ptr<DenoiserBackend> make_backend(const std::string& name,
                                              const std::map<std::string, std::string>& parameters) {
    if (name == "toy" || name == "toy-noninvertible") {
        ToyParameters p = ToyParameters::from_map(parameters);
        if (name == "toy-noninvertible") p.invertible = false;
        return std::make_unique<ToyBackend>(p);
    }
    throw Error(ErrorKind::Backend, "unknown backend '" + name + "'");
}

namespace {

template <typename Hook>
const Hook& require(const Hook& hook, const BackendDescriptor& d, const char* op) {
    if (!hook) throw Error(ErrorKind::Capability, "backend '" + d.name + "' does not provide " + op);
    return hook;
}

}  // namespace

CallbackBackend::CallbackBackend(BackendDescriptor descriptor, Hooks hooks)
    : descriptor_(std::move(descriptor)), hooks_(std::move(hooks)) {
    if (!hooks_.energy_gradient) descriptor_.differentiable = false;
    if (!hooks_.invert || !hooks_.encode_image) descriptor_.invertible = false;
}

std::vector<std::string> CallbackBackend::tokenize(const std::string& prompt) const {
    return require(hooks_.tokenize, descriptor_, "tokenize")(prompt);
}

EmbeddingMatrix CallbackBackend::encode_text(const std::string& prompt) const {
    return require(hooks_.encode_text, descriptor_, "encode_text")(prompt);
}

Latent CallbackBackend::initial_noise(std::int64_t seed, int total_steps) const {
    return require(hooks_.initial_noise, descriptor_, "initial_noise")(seed, total_steps);
}

std::vector<CrossAttentionMap> CallbackBackend::cross_attention(const Latent& latent,
                                                                const EmbeddingMatrix& embedding) const {
    return require(hooks_.cross_attention, descriptor_, "cross_attention")(latent, embedding);
}

StepOutput CallbackBackend::denoise_step(const Latent& latent, int t, const EmbeddingMatrix& embedding,
                                         const AttentionControl* control) const {
    return require(hooks_.denoise_step, descriptor_, "denoise_step")(latent, t, embedding, control);
}

Latent CallbackBackend::energy_gradient(const Latent& latent, const EmbeddingMatrix& embedding,
                                        const BinaryMask& mask, int token, std::span<const int> layers) const {
    return require(hooks_.energy_gradient, descriptor_, "energy_gradient")(latent, embedding, mask, token, layers);
}

std::vector<Latent> CallbackBackend::invert(const Latent& clean, const EmbeddingMatrix& embedding,
                                            int total_steps) const {
    return require(hooks_.invert, descriptor_, "invert")(clean, embedding, total_steps);
}

Latent CallbackBackend::encode_image(const Image& image) const {
    return require(hooks_.encode_image, descriptor_, "encode_image")(image);
}

Image CallbackBackend::decode(const Latent& latent) const {
    return require(hooks_.decode, descriptor_, "decode")(latent);
}

}  // namespace objectadd

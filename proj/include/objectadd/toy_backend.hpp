// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "objectadd/backend.hpp"

namespace objectadd {

struct ToyParameters {
    std::uint64_t seed = 20240131;
    int latent_size = 16;       // H = W
    int channels = 4;           // C, even: split into two halves
    int image_scale = 4;        // image pixels per latent cell
    int max_tokens = 16;        // N
    int embed_dim = 8;          // D
    int max_steps = 1000;
    double noise_scale = 1.0;   // std-dev of the initial latent
    double attention_sharpness = 4.0;
    double content_strength = 0.1;
    int smoothing_passes = 2;   // 3x3 box filters applied before attention
    double rotation_angle = 0.08;
    double decode_scale = 8.0;
    bool invertible = true;

    /// Overrides from string key/value pairs (e.g. from a manifest).
    static ToyParameters from_map(const std::map<std::string, std::string>& values);
    std::map<std::string, std::string> to_map() const;
};

/// Deterministic, differentiable, exactly invertible stand-in for a latent
/// diffusion stack.
///
/// Latent: (16, 16, 4), channels split into halves A = {0, 1}, B = {2, 3}.
/// Image: 64 x 64 RGB. Layers: id 0 = (8, 8) over 2x2 pooled cells, id 1 =
/// (16, 16) native, id 2 = (32, 32) nearest-upsampled view of id 1 (each cell
/// carries a quarter of its parent's score). Layer 2 is the refocus layer.
///
/// Attention of token i at cell p is the spatial softmax of
/// sharpness * cos(S(x_B)[p], K_B e_i), where S is a small spatial box blur
/// of the B half. The blur gives attention maps spatially coherent blobs.
///
/// One step t -> t - 1 is an additive coupling:
///   A' = Q_A(t) A + s * sum_i R_i(p)  K_A e_i,  R_i = HW * attention_i
///   B' = Q_B(t) B + s * sum_i R'_i(p) K_B e_i,  R'_i = HW * softmax_p(sharpness * cos(S(A')[p], K_A e_i))
/// summed over the prompt's actual tokens. Q_A and Q_B are seeded per-step
/// rotations (Cayley transforms of skew matrices). Tokens that attend to a
/// cell write content that makes them attend to it more, so a layout set
/// early persists. An AttentionControl replaces R_k with the supplied map
/// normalized to mean 1. Without control each half is recovered in closed
/// form, so inversion is exact up to rounding.
class ToyBackend final : public DenoiserBackend {
public:
    explicit ToyBackend(ToyParameters params = {});

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    const ToyParameters& parameters() const noexcept { return params_; }

    std::vector<std::string> tokenize(const std::string& prompt) const override;
    EmbeddingMatrix encode_text(const std::string& prompt) const override;
    Latent initial_noise(std::int64_t seed, int total_steps) const override;
    std::vector<CrossAttentionMap> cross_attention(const Latent& latent,
                                                   const EmbeddingMatrix& embedding) const override;
    StepOutput denoise_step(const Latent& latent, int t, const EmbeddingMatrix& embedding,
                            const AttentionControl* control = nullptr) const override;
    Latent energy_gradient(const Latent& latent, const EmbeddingMatrix& embedding, const BinaryMask& mask, int token,
                           std::span<const int> layers) const override;
    std::vector<Latent> invert(const Latent& clean, const EmbeddingMatrix& embedding, int total_steps) const override;
    Latent encode_image(const Image& image) const override;
    Image decode(const Latent& latent) const override;

    /// Per-step channel rotation (exposed for tests).
    Eigen::MatrixXd rotation(int t) const;

    static constexpr int kPooledLayer = 0;
    static constexpr int kNativeLayer = 1;
    static constexpr int kRefocusLayer = 2;

private:
    Eigen::VectorXd token_vector(const std::string& word) const;
    Eigen::VectorXd embedding_row(const EmbeddingMatrix& embedding, int token) const;
    /// Channels [offset, offset + C/2) of `cells` after `smoothing_passes`
    /// edge-normalized 3x3 box filters.
    Grid<double> field(const Grid<double>& cells, int offset) const;
    /// Adjoint of the smoothing in `field`.
    Grid<double> field_transpose(const Grid<double>& grad_field) const;
    /// sharpness * cos(field[p], key) per cell.
    Grid<double> logits(const Grid<double>& field, const Eigen::VectorXd& key) const;
    Grid<double> pooled(const Grid<double>& cells) const;
    /// Coupling term written into the half starting at `write_offset`, routed
    /// by attention over the half starting at `read_offset` of `source`.
    /// `routing_override` replaces the routing of `override_token` when non-null.
    Grid<double> coupling(const Grid<double>& source, int read_offset, const Eigen::MatrixXd& read_keys,
                          const Eigen::MatrixXd& write_keys, const EmbeddingMatrix& embedding, int override_token,
                          const Grid<double>* routing_override) const;
    void check_latent(const Latent& latent) const;
    void check_embedding(const EmbeddingMatrix& embedding) const;

    ToyParameters params_;
    BackendDescriptor descriptor_;
    int half_ = 0;
    Eigen::MatrixXd key_a_;              // C/2 x D
    Eigen::MatrixXd key_b_;              // C/2 x D
    Eigen::MatrixXd color_projection_;   // 3 x C
    Eigen::MatrixXd color_pseudo_inverse_;  // C x 3
    Eigen::VectorXd cls_, eos_, pad_;
};

}  // namespace objectadd

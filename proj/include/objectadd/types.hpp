// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "objectadd/grid.hpp"

namespace objectadd {

/// Diffusion state at one time step: (H, W, C) grid.
struct Latent {
    Grid<double> data;
    int timestep = 0;

    int height() const noexcept { return data.rows(); }
    int width() const noexcept { return data.cols(); }
    int channels() const noexcept { return data.channels(); }

    bool all_finite() const noexcept;
    friend bool operator==(const Latent&, const Latent&) = default;
};

/// Per-token spatial scores of one cross-attention layer, token-major.
class CrossAttentionMap {
public:
    CrossAttentionMap() = default;
    CrossAttentionMap(int layer_id, int timestep, int tokens, int height, int width);

    int layer_id() const noexcept { return layer_id_; }
    int timestep() const noexcept { return timestep_; }
    int tokens() const noexcept { return tokens_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t area() const noexcept { return static_cast<std::size_t>(height_) * width_; }

    std::span<double> row(int token);
    std::span<const double> row(int token) const;
    /// Row `token` as an (H, W) grid copy.
    Grid<double> row_grid(int token) const;
    void set_row(int token, const Grid<double>& values);

    double& at(int token, int r, int c) { return row(token)[static_cast<std::size_t>(r) * width_ + c]; }
    double at(int token, int r, int c) const { return row(token)[static_cast<std::size_t>(r) * width_ + c]; }

    friend bool operator==(const CrossAttentionMap&, const CrossAttentionMap&) = default;

private:
    int layer_id_ = 0;
    int timestep_ = 0;
    int tokens_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> scores_;
};

enum class Resolution { Full, Latent, Layer };

struct ResolutionTag {
    Resolution kind = Resolution::Full;
    int layer_id = -1;  // meaningful for Resolution::Layer only

    static ResolutionTag full() { return {Resolution::Full, -1}; }
    static ResolutionTag latent() { return {Resolution::Latent, -1}; }
    static ResolutionTag layer(int id) { return {Resolution::Layer, id}; }
    friend bool operator==(const ResolutionTag&, const ResolutionTag&) = default;
};

/// {0,1} grid. Constructors never admit other values.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int rows, int cols, bool fill = false, ResolutionTag tag = ResolutionTag::full());
    /// Throws Contract when `cells` contains anything other than 0/1.
    BinaryMask(Grid<std::uint8_t> cells, ResolutionTag tag);

    int rows() const noexcept { return cells_.rows(); }
    int cols() const noexcept { return cells_.cols(); }
    const ResolutionTag& tag() const noexcept { return tag_; }
    void set_tag(ResolutionTag tag) { tag_ = tag; }

    bool operator()(int r, int c) const noexcept { return cells_(r, c) != 0; }
    void set(int r, int c, bool on) noexcept { cells_(r, c) = on ? 1 : 0; }
    bool in_bounds(int r, int c) const noexcept { return cells_.in_bounds(r, c); }

    std::size_t count() const noexcept;
    bool none() const noexcept { return count() == 0; }
    const Grid<std::uint8_t>& cells() const noexcept { return cells_; }

    /// True when every cell set here is also set in `other`.
    bool subset_of(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask& a, const BinaryMask& b) { return a.cells_ == b.cells_; }

private:
    Grid<std::uint8_t> cells_;
    ResolutionTag tag_;
};

/// N x D text embedding. Row 0 is the start token; rows 1..actual_tokens carry
/// the prompt; the remainder is end/pad.
struct EmbeddingMatrix {
    Grid<double> data;  // rows = N, cols = D
    int actual_tokens = 0;

    int max_tokens() const noexcept { return data.rows(); }
    int dim() const noexcept { return data.cols(); }
    std::span<const double> row(int i) const {
        return {&data(i, 0), static_cast<std::size_t>(data.cols())};
    }
    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

/// Axis-aligned box in full-resolution pixels.
struct Box {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;

    bool inside(int image_height, int image_width) const noexcept {
        return top >= 0 && left >= 0 && height > 0 && width > 0 &&
               top + height <= image_height && left + width <= image_width;
    }
    friend bool operator==(const Box&, const Box&) = default;
};

/// RGB image, values in [0, 1].
using Image = Grid<double>;

enum class AttentionScope {
    WholeMap,      // softmax over every spatial position
    MaskedRegion,  // softmax restricted to mask cells, zeros elsewhere
};

struct GuidanceConfig {
    int total_steps = 50;
    double latent_inject_frac = 0.2;
    double attn_inject_frac = 0.3;
    int inpaint_step = 15;
    bool random_inpaint_step = false;
    /// When false the inpaint step may sit anywhere in [1, T].
    bool enforce_inpaint_window = true;
    int cluster_count = 6;
    double h1_threshold = 0.35;
    double h2_threshold = 5.0;
    double guidance_lr = 2.0;
    int guidance_iters = 5;
    double guidance_stop_energy = 0.05;
    /// Empty means every layer the backend exposes.
    std::vector<int> guidance_layers;
    std::vector<int> attention_layers;
    int inversion_inject_step = 39;
    /// Number of consecutive steps starting at inversion_inject_step that
    /// receive the inverted latent.
    int inversion_inject_window = 1;
    AttentionScope attention_scope = AttentionScope::WholeMap;
    /// 0 selects 1% of the refocus layer area.
    int min_component_size = 0;
    bool refocus_split_components = false;
    double segmentation_threshold = 0.9;
    int kmeans_max_iters = 50;

    /// Throws Config on any violated invariant.
    void validate() const;
    friend bool operator==(const GuidanceConfig&, const GuidanceConfig&) = default;
};

struct EditSpec {
    std::string base_prompt;
    std::string object_prompt;
    Box box;
    std::int64_t seed = 0;
    GuidanceConfig config;
    std::optional<Image> real_object_image;
    /// Position of the object noun among W's actual tokens; defaults to the
    /// last non-article token.
    std::optional<int> object_word_offset;
};

}  // namespace objectadd

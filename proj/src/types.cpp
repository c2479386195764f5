// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "objectadd/error.hpp"

namespace objectadd {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Resolution: return "resolution";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Overflow: return "overflow";
        case ErrorKind::DegenerateAttention: return "degenerate-attention";
        case ErrorKind::GuidanceDiverged: return "guidance-diverged";
        case ErrorKind::TrajectoryAlignment: return "trajectory-alignment";
        case ErrorKind::Capability: return "capability";
        case ErrorKind::Backend: return "backend";
        case ErrorKind::Segmentation: return "segmentation";
        case ErrorKind::Io: return "io";
        case ErrorKind::Contract: return "contract";
    }
    return "unknown";
}

bool Latent::all_finite() const noexcept {
    const auto v = data.values();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

CrossAttentionMap::CrossAttentionMap(int layer_id, int timestep, int tokens, int height, int width)
    : layer_id_(layer_id), timestep_(timestep), tokens_(tokens), height_(height), width_(width),
      scores_(static_cast<std::size_t>(tokens) * height * width, 0.0) {}

std::span<double> CrossAttentionMap::row(int token) {
    if (token < 0 || token >= tokens_) throw Error(ErrorKind::Contract, "attention token index out of range");
    return {scores_.data() + static_cast<std::size_t>(token) * area(), area()};
}

std::span<const double> CrossAttentionMap::row(int token) const {
    if (token < 0 || token >= tokens_) throw Error(ErrorKind::Contract, "attention token index out of range");
    return {scores_.data() + static_cast<std::size_t>(token) * area(), area()};
}

Grid<double> CrossAttentionMap::row_grid(int token) const {
    Grid<double> g(height_, width_);
    const auto src = row(token);
    std::copy(src.begin(), src.end(), g.values().begin());
    return g;
}

void CrossAttentionMap::set_row(int token, const Grid<double>& values) {
    if (values.rows() != height_ || values.cols() != width_ || values.channels() != 1)
        throw Error(ErrorKind::Shape, "attention row shape mismatch");
    const auto src = values.values();
    std::copy(src.begin(), src.end(), row(token).begin());
}

BinaryMask::BinaryMask(int rows, int cols, bool fill, ResolutionTag tag)
    : cells_(rows, cols, 1, fill ? 1 : 0), tag_(tag) {}

BinaryMask::BinaryMask(Grid<std::uint8_t> cells, ResolutionTag tag) : cells_(std::move(cells)), tag_(tag) {
    if (cells_.channels() != 1) throw Error(ErrorKind::Contract, "mask must have a single channel");
    for (auto v : cells_.values())
        if (v > 1) throw Error(ErrorKind::Contract, "mask values must be 0 or 1");
}

std::size_t BinaryMask::count() const noexcept {
    const auto v = cells_.values();
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
    if (!cells_.same_extent(other.cells_)) throw Error(ErrorKind::Shape, "mask extents differ");
    const auto a = cells_.values();
    const auto b = other.cells_.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

void GuidanceConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, what); };
    if (total_steps < 1) fail("total_steps must be positive");
    if (!(latent_inject_frac > 0.0 && latent_inject_frac <= 1.0)) fail("latent_inject_frac must lie in (0, 1]");
    if (!(attn_inject_frac > 0.0 && attn_inject_frac <= 1.0)) fail("attn_inject_frac must lie in (0, 1]");
    if (cluster_count < 2) fail("cluster_count must be at least 2");
    if (!(h1_threshold > 0.0 && h1_threshold < 1.0)) fail("h1_threshold must lie in (0, 1)");
    if (!(h2_threshold > 0.0)) fail("h2_threshold must be positive");
    if (!(guidance_lr >= 0.0) || !std::isfinite(guidance_lr)) fail("guidance_lr must be finite and non-negative");
    if (guidance_iters < 0) fail("guidance_iters must be non-negative");
    if (!(guidance_stop_energy >= 0.0)) fail("guidance_stop_energy must be non-negative");
    if (inversion_inject_step < 1 || inversion_inject_step > total_steps)
        fail("inversion_inject_step must lie in [1, total_steps]");
    if (inversion_inject_window < 1) fail("inversion_inject_window must be at least 1");
    if (min_component_size < 0) fail("min_component_size must be non-negative");
    if (!(segmentation_threshold > 0.0 && segmentation_threshold <= 1.0))
        fail("segmentation_threshold must lie in (0, 1]");
    if (kmeans_max_iters < 1) fail("kmeans_max_iters must be positive");

    const double T = total_steps;
    if (random_inpaint_step) {
        // Open interval (0.3T, 0.5T) must contain an integer.
        const int lo = 3 * total_steps / 10 + 1;
        const int hi = (total_steps + 1) / 2 - 1;
        if (lo > hi) fail("random inpaint interval (0.3T, 0.5T) holds no integer step");
    } else {
        if (inpaint_step < 1 || inpaint_step > total_steps) fail("inpaint_step must lie in [1, total_steps]");
        // The lower bound is closed so the default t = 15 at T = 50 is admissible.
        if (enforce_inpaint_window && (10 * inpaint_step < 3 * total_steps || 2 * inpaint_step >= total_steps)) {
            std::ostringstream os;
            os << "inpaint_step " << inpaint_step << " outside [0.3T, 0.5T) for T = " << total_steps;
            fail(os.str());
        }
        // Injection windows must close before the swap step.
        if (enforce_inpaint_window && (total_steps - inpaint_step) < attn_inject_frac * T)
            fail("inpaint_step falls inside the attention injection window");
    }
}

}  // namespace objectadd

// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/object_expansion.hpp"

#include <cmath>
#include <random>

#include "objectadd/error.hpp"
#include "objectadd/layout_control.hpp"

namespace objectadd {

namespace {

double euclid(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

std::vector<Cell> find_seeds(const BinaryMask& mask) {
    std::vector<Cell> seeds;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) {
            if (!mask(r, c)) continue;
            bool boundary = false;
            for (int dr = -1; dr <= 1 && !boundary; ++dr)
                for (int dc = -1; dc <= 1 && !boundary; ++dc)
                    if (!mask.in_bounds(r + dr, c + dc) || !mask(r + dr, c + dc)) boundary = true;
            if (boundary) seeds.push_back({r, c});
        }
    return seeds;
}

double neighbor_distance(const Latent& latent, Cell seed, Cell neighbor) {
    const int dr = std::abs(neighbor.row - seed.row);
    const int dc = std::abs(neighbor.col - seed.col);
    if (dr > 1 || dc > 1 || (dr == 0 && dc == 0))
        throw Error(ErrorKind::Contract, "neighbor is not 8-adjacent to the seed");
    if (!latent.data.in_bounds(seed.row, seed.col) || !latent.data.in_bounds(neighbor.row, neighbor.col))
        throw Error(ErrorKind::Contract, "cell outside the latent grid");

    const int ch = latent.channels();
    std::vector<double> mean(static_cast<std::size_t>(ch), 0.0);
    int members = 0;
    for (int r = seed.row - 1; r <= seed.row + 1; ++r)
        for (int c = seed.col - 1; c <= seed.col + 1; ++c) {
            if (!latent.data.in_bounds(r, c)) continue;
            const auto v = latent.data.cell(r, c);
            for (int k = 0; k < ch; ++k) mean[static_cast<std::size_t>(k)] += v[static_cast<std::size_t>(k)];
            ++members;
        }
    for (double& m : mean) m /= static_cast<double>(members);

    const auto x = latent.data.cell(neighbor.row, neighbor.col);
    return 0.5 * (euclid(x, latent.data.cell(seed.row, seed.col)) + euclid(x, mean));
}

ExpansionResult expand(const BinaryMask& mask, const Latent& latent, double h2) {
    if (mask.rows() != latent.height() || mask.cols() != latent.width())
        throw Error(ErrorKind::Shape, "mask and latent differ in spatial shape");

    ExpansionResult result{mask, {}};
    BinaryMask& current = result.mask;
    std::vector<Cell> seeds = find_seeds(current);
    const std::size_t limit = static_cast<std::size_t>(mask.rows()) * mask.cols() + 1;

    while (result.trace.flipped_per_round.size() < limit) {
        BinaryMask next = current;
        std::vector<Cell> flipped;
        for (const Cell& s : seeds)
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const Cell n{s.row + dr, s.col + dc};
                    if ((dr == 0 && dc == 0) || !current.in_bounds(n.row, n.col)) continue;
                    if (current(n.row, n.col) || next(n.row, n.col)) continue;
                    if (neighbor_distance(latent, s, n) < h2) {
                        next.set(n.row, n.col, true);
                        flipped.push_back(n);
                    }
                }
        result.trace.flipped_per_round.push_back(static_cast<int>(flipped.size()));
        current = std::move(next);
        if (flipped.empty()) break;
        seeds = std::move(flipped);
    }
    result.trace.rounds = static_cast<int>(result.trace.flipped_per_round.size());
    result.trace.final_mask = current;
    return result;
}

Latent swap_latent(const Latent& edited, const Latent& original, const BinaryMask& mask) {
    if (edited.timestep != original.timestep)
        throw Error(ErrorKind::TrajectoryAlignment, "swap operands come from different timesteps");
    // Outside the mask the original wins; inside, the edited latent.
    BinaryMask outside(mask.rows(), mask.cols(), false, mask.tag());
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) outside.set(r, c, !mask(r, c));
    return inject_latent(edited, original, outside);
}

int pick_inpaint_step(const GuidanceConfig& config, std::uint64_t rng_seed) {
    if (!config.random_inpaint_step) return config.inpaint_step;
    const int lo = 3 * config.total_steps / 10 + 1;
    const int hi = (config.total_steps + 1) / 2 - 1;
    if (lo > hi) throw Error(ErrorKind::Config, "no integer step in (0.3T, 0.5T)");
    std::mt19937_64 rng(rng_seed);
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace objectadd

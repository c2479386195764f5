// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "objectadd/types.hpp"

namespace objectadd {

struct ExpansionTrace {
    int rounds = 0;
    std::vector<int> flipped_per_round;  // last entry is 0 on normal termination
    BinaryMask final_mask;
};

/// Foreground cells whose 8-neighbourhood holds a 0; out-of-grid neighbours
/// count as 0. Raster order.
std::vector<Cell> find_seeds(const BinaryMask& mask);

/// Seed-anchored edge distance:
/// 0.5 * (|x_n - x_s| + |x_n - mean(S)|), S being the seed and its in-grid
/// 8-neighbours. Throws Contract unless `neighbor` is 8-adjacent to `seed`.
double neighbor_distance(const Latent& latent, Cell seed, Cell neighbor);

struct ExpansionResult {
    BinaryMask mask;
    ExpansionTrace trace;
};

/// Region growing from boundary seeds. Each round flips every background
/// 8-neighbour of a current seed whose distance is below `h2`, judged against
/// the round-start mask; flipped cells seed the next round. Stops after a
/// round that flips nothing.
ExpansionResult expand(const BinaryMask& mask, const Latent& latent, double h2);

/// (1 - M) * original + M * edited.
Latent swap_latent(const Latent& edited, const Latent& original, const BinaryMask& mask);

/// Configured step, or a seeded uniform draw from the open interval
/// (0.3 T, 0.5 T) in random mode. Throws Config when that interval is empty.
int pick_inpaint_step(const GuidanceConfig& config, std::uint64_t rng_seed);

}  // namespace objectadd

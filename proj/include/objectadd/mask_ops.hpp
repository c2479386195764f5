// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "objectadd/types.hpp"

namespace objectadd {

struct Extent {
    int rows = 0;
    int cols = 0;
    friend bool operator==(const Extent&, const Extent&) = default;
};

/// Majority-vote downsampling; a target cell is 1 when at least half of its
/// source block is 1. Blocks come from proportional index ranges, so targets
/// need not divide the source. Throws Resolution if the target is larger.
BinaryMask downsample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag);

/// Nearest-neighbour replication. Throws Resolution if the target is smaller.
BinaryMask upsample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag);

/// Resample in whichever direction `target` requires (majority going down,
/// replication going up).
BinaryMask resample_mask(const BinaryMask& mask, Extent target, ResolutionTag tag);

/// Full-resolution indicator of `box`. Throws Config when the box leaves the image.
BinaryMask box_to_mask(const Box& box, Extent image);

/// Mask as an (rows, cols, 1) grid of 0.0/1.0.
Grid<double> mask_to_real(const BinaryMask& mask);

}  // namespace objectadd

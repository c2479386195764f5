// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "objectadd/types.hpp"

namespace objectadd {

/// Partition of a layer grid into `k` labelled regions. Every cell carries
/// exactly one label in [0, k); a label may be unused.
struct ClusterLabels {
    Grid<int> labels;
    int k = 0;

    /// Cell count per label.
    std::vector<std::size_t> sizes() const;
};

/// 1-D k-means on per-cell intensity with seeded farthest-point
/// initialization. Labels are renumbered by ascending centroid, so label 0
/// is the weakest response. Throws Config when k < 2 or k exceeds the cell count.
ClusterLabels cluster_map(const Grid<double>& attn_row, int k, std::uint64_t rng_seed, int max_iters = 50);

/// Splits every label into its 4-connected components, renumbering in raster
/// order of first appearance.
ClusterLabels split_connected(const ClusterLabels& labels);

struct AreaSelection {
    std::vector<int> clusters;  // ascending
    int argmax_cluster = -1;    // cluster with the largest in-box attention mass
    bool empty_mask = false;
};

/// Object area: the cluster holding the most in-box attention mass, plus
/// every cluster whose in-box cell fraction exceeds `h1`.
AreaSelection select_object_area(const ClusterLabels& labels, const Grid<double>& attn_row,
                                 const BinaryMask& mask_gamma, double h1);

/// Indicator of the selected clusters.
BinaryMask refocus_mask(const std::vector<int>& selected, const ClusterLabels& labels, ResolutionTag tag);

/// Removes 4-connected foreground components smaller than
/// `min_component_size`, then fills background components that do not touch
/// the border.
BinaryMask morph_cleanup(const BinaryMask& mask, int min_component_size);

/// 4-connected component labelling of the cells equal to `value`; returns
/// component ids (-1 elsewhere) and the component count.
Grid<int> connected_components(const BinaryMask& mask, bool value, int& count);

struct RefocusResult {
    ClusterLabels labels;
    AreaSelection selection;
    BinaryMask raw_mask;      // before morphology
    BinaryMask refined_mask;  // after morphology
};

/// Full chain on the refocus layer: cluster, select, build mask, clean.
RefocusResult refocus(const Grid<double>& attn_row, const BinaryMask& mask_gamma, const GuidanceConfig& config,
                      std::uint64_t rng_seed);

}  // namespace objectadd

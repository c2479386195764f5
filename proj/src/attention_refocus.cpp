// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/attention_refocus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "objectadd/error.hpp"

namespace objectadd {

std::vector<std::size_t> ClusterLabels::sizes() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
    for (int v : labels.values()) ++out[static_cast<std::size_t>(v)];
    return out;
}

ClusterLabels cluster_map(const Grid<double>& attn_row, int k, std::uint64_t rng_seed, int max_iters) {
    const auto values = attn_row.values();
    const std::size_t n = values.size();
    if (k < 2) throw Error(ErrorKind::Config, "cluster count must be at least 2");
    if (static_cast<std::size_t>(k) > n) throw Error(ErrorKind::Config, "cluster count exceeds the number of cells");

    std::vector<double> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centroids.push_back(values[pick(rng)]);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < static_cast<std::size_t>(k)) {
        std::size_t best = 0;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], std::abs(values[i] - centroids.back()));
            if (nearest[i] > best_dist) {
                best_dist = nearest[i];
                best = i;
            }
        }
        centroids.push_back(values[best]);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < k; ++c)
                if (std::abs(values[i] - centroids[static_cast<std::size_t>(c)]) <
                    std::abs(values[i] - centroids[static_cast<std::size_t>(best)]))
                    best = c;
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(assign[i])] += values[i];
            ++count[static_cast<std::size_t>(assign[i])];
        }
        for (std::size_t c = 0; c < centroids.size(); ++c)
            if (count[c] > 0) centroids[c] = sum[c] / static_cast<double>(count[c]);
    }

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return centroids[static_cast<std::size_t>(a)] < centroids[static_cast<std::size_t>(b)];
    });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

    ClusterLabels out{Grid<int>(attn_row.rows(), attn_row.cols()), k};
    auto dst = out.labels.values();
    for (std::size_t i = 0; i < n; ++i) dst[i] = rank[static_cast<std::size_t>(assign[i])];
    return out;
}

ClusterLabels split_connected(const ClusterLabels& labels) {
    const int rows = labels.labels.rows();
    const int cols = labels.labels.cols();
    ClusterLabels out{Grid<int>(rows, cols, 1, -1), 0};
    std::vector<Cell> stack;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (out.labels(r, c) >= 0) continue;
            const int id = out.k++;
            const int source = labels.labels(r, c);
            out.labels(r, c) = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Cell cur = stack.back();
                stack.pop_back();
                constexpr int dr[] = {-1, 1, 0, 0};
                constexpr int dc[] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int nr = cur.row + dr[d];
                    const int nc = cur.col + dc[d];
                    if (!labels.labels.in_bounds(nr, nc) || out.labels(nr, nc) >= 0) continue;
                    if (labels.labels(nr, nc) != source) continue;
                    out.labels(nr, nc) = id;
                    stack.push_back({nr, nc});
                }
            }
        }
    return out;
}

AreaSelection select_object_area(const ClusterLabels& labels, const Grid<double>& attn_row,
                                 const BinaryMask& mask_gamma, double h1) {
    if (!labels.labels.same_extent(attn_row) || labels.labels.rows() != mask_gamma.rows() ||
        labels.labels.cols() != mask_gamma.cols())
        throw Error(ErrorKind::Shape, "labels, attention and mask differ in extent");

    AreaSelection sel;
    if (mask_gamma.none()) {
        sel.empty_mask = true;
        return sel;
    }

    const auto k = static_cast<std::size_t>(labels.k);
    std::vector<double> mass(k, 0.0);
    std::vector<std::size_t> inside(k, 0);
    std::vector<std::size_t> size(k, 0);
    for (int r = 0; r < mask_gamma.rows(); ++r)
        for (int c = 0; c < mask_gamma.cols(); ++c) {
            const auto g = static_cast<std::size_t>(labels.labels(r, c));
            ++size[g];
            if (mask_gamma(r, c)) {
                mass[g] += attn_row(r, c);
                ++inside[g];
            }
        }

    // Argmax over non-empty clusters; when no attention lands in the box the
    // in-box cell count breaks the tie.
    for (std::size_t g = 0; g < k; ++g) {
        if (size[g] == 0) continue;
        if (sel.argmax_cluster < 0) {
            sel.argmax_cluster = static_cast<int>(g);
            continue;
        }
        const auto b = static_cast<std::size_t>(sel.argmax_cluster);
        if (mass[g] > mass[b] || (mass[g] == mass[b] && inside[g] > inside[b])) sel.argmax_cluster = static_cast<int>(g);
    }

    for (std::size_t g = 0; g < k; ++g) {
        if (size[g] == 0) continue;
        const double fraction = static_cast<double>(inside[g]) / static_cast<double>(size[g]);
        if (static_cast<int>(g) == sel.argmax_cluster || fraction > h1) sel.clusters.push_back(static_cast<int>(g));
    }
    return sel;
}

BinaryMask refocus_mask(const std::vector<int>& selected, const ClusterLabels& labels, ResolutionTag tag) {
    for (int id : selected)
        if (id < 0 || id >= labels.k) throw Error(ErrorKind::Contract, "selected cluster id out of range");
    BinaryMask out(labels.labels.rows(), labels.labels.cols(), false, tag);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c)
            out.set(r, c, std::find(selected.begin(), selected.end(), labels.labels(r, c)) != selected.end());
    return out;
}

Grid<int> connected_components(const BinaryMask& mask, bool value, int& count) {
    Grid<int> ids(mask.rows(), mask.cols(), 1, -1);
    count = 0;
    std::vector<Cell> stack;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) {
            if (mask(r, c) != value || ids(r, c) >= 0) continue;
            const int id = count++;
            ids(r, c) = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Cell cur = stack.back();
                stack.pop_back();
                constexpr int dr[] = {-1, 1, 0, 0};
                constexpr int dc[] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int nr = cur.row + dr[d];
                    const int nc = cur.col + dc[d];
                    if (!mask.in_bounds(nr, nc) || ids(nr, nc) >= 0 || mask(nr, nc) != value) continue;
                    ids(nr, nc) = id;
                    stack.push_back({nr, nc});
                }
            }
        }
    return ids;
}

BinaryMask morph_cleanup(const BinaryMask& mask, int min_component_size) {
    BinaryMask out = mask;

    int fg_count = 0;
    const Grid<int> fg = connected_components(mask, true, fg_count);
    std::vector<int> fg_size(static_cast<std::size_t>(fg_count), 0);
    for (int id : fg.values())
        if (id >= 0) ++fg_size[static_cast<std::size_t>(id)];
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) {
            const int id = fg(r, c);
            if (id >= 0 && fg_size[static_cast<std::size_t>(id)] < min_component_size) out.set(r, c, false);
        }

    int bg_count = 0;
    const Grid<int> bg = connected_components(out, false, bg_count);
    std::vector<bool> touches_border(static_cast<std::size_t>(bg_count), false);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c)
            if (bg(r, c) >= 0 && (r == 0 || c == 0 || r == out.rows() - 1 || c == out.cols() - 1))
                touches_border[static_cast<std::size_t>(bg(r, c))] = true;
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c)
            if (bg(r, c) >= 0 && !touches_border[static_cast<std::size_t>(bg(r, c))]) out.set(r, c, true);
    return out;
}

RefocusResult refocus(const Grid<double>& attn_row, const BinaryMask& mask_gamma, const GuidanceConfig& config,
                      std::uint64_t rng_seed) {
    RefocusResult result;
    result.labels = cluster_map(attn_row, config.cluster_count, rng_seed, config.kmeans_max_iters);
    if (config.refocus_split_components) result.labels = split_connected(result.labels);
    result.selection = select_object_area(result.labels, attn_row, mask_gamma, config.h1_threshold);
    result.raw_mask = refocus_mask(result.selection.clusters, result.labels, mask_gamma.tag());
    const int min_size = config.min_component_size > 0
                             ? config.min_component_size
                             : static_cast<int>(0.01 * static_cast<double>(attn_row.cells()));
    result.refined_mask = morph_cleanup(result.raw_mask, min_size);
    return result;
}

}  // namespace objectadd

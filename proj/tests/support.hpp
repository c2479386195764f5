// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

// Reference oracles and random-input helpers shared by the unit tests and the
// acceptance runner. The oracles are deliberately naive re-derivations written
// without calling the library routine under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "objectadd/types.hpp"

#ifndef OBJECTADD_FIXTURE_DIR
#define OBJECTADD_FIXTURE_DIR "tests/fixtures"
#endif

namespace oracle {

using namespace objectadd;

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(OBJECTADD_FIXTURE_DIR) / name; }

/// Embedding whose cell (i, j) holds a value unique to (tag, i, j).
inline EmbeddingMatrix marked_embedding(int n, int d, int actual, double tag) {
    EmbeddingMatrix e;
    e.data = Grid<double>(n, d);
    e.actual_tokens = actual;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) e.data(i, j) = tag * 1000.0 + i * 10.0 + j + 0.125;
    return e;
}

/// Splice: start row and prompt rows of P, then W from its first token row on.
inline std::vector<std::vector<double>> splice(const EmbeddingMatrix& p, const EmbeddingMatrix& w) {
    std::vector<std::vector<double>> rows;
    auto row_of = [](const EmbeddingMatrix& e, int i) {
        std::vector<double> r;
        for (int j = 0; j < e.dim(); ++j) r.push_back(e.data(i, j));
        return r;
    };
    for (int i = 0; i <= p.actual_tokens; ++i) rows.push_back(row_of(p, i));
    for (int i = 1; i < w.max_tokens(); ++i) rows.push_back(row_of(w, i));
    rows.resize(static_cast<std::size_t>(p.max_tokens()));
    return rows;
}

inline Latent random_latent(std::mt19937_64& rng, int h, int w, int c, int t, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Latent l{Grid<double>(h, w, c), t};
    for (double& v : l.data.values()) v = n(rng);
    return l;
}

inline BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p, ResolutionTag tag = ResolutionTag::latent()) {
    std::bernoulli_distribution b(p);
    BinaryMask m(h, w, false, tag);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) m.set(r, c, b(rng));
    return m;
}

/// (1 - M) * a + M * b written as a loop over every scalar.
inline Latent blend(const Latent& a, const Latent& b, const BinaryMask& m) {
    Latent out = a;
    for (int r = 0; r < a.height(); ++r)
        for (int c = 0; c < a.width(); ++c)
            for (int k = 0; k < a.channels(); ++k) {
                const double mv = m(r, c) ? 1.0 : 0.0;
                out.data(r, c, k) = (1.0 - mv) * a.data(r, c, k) + mv * b.data(r, c, k);
            }
    return out;
}

/// Seed-anchored distance recomputed scalar by scalar.
inline double distance(const Latent& x, int sr, int sc, int nr, int nc) {
    double d_seed = 0.0, d_mean = 0.0;
    for (int k = 0; k < x.channels(); ++k) {
        double sum = 0.0;
        int n = 0;
        for (int r = sr - 1; r <= sr + 1; ++r)
            for (int c = sc - 1; c <= sc + 1; ++c)
                if (r >= 0 && c >= 0 && r < x.height() && c < x.width()) {
                    sum += x.data(r, c, k);
                    ++n;
                }
        const double a = x.data(nr, nc, k) - x.data(sr, sc, k);
        const double b = x.data(nr, nc, k) - sum / n;
        d_seed += a * a;
        d_mean += b * b;
    }
    return 0.5 * (std::sqrt(d_seed) + std::sqrt(d_mean));
}

/// Region growing by exhaustive scan: every round visits every background
/// cell and flips it when any 8-adjacent cell in the current seed set is
/// close enough. Round 0 seeds are the boundary cells of the input.
inline BinaryMask grow(const BinaryMask& input, const Latent& x, double h2, int* rounds = nullptr) {
    const int H = input.rows(), W = input.cols();
    std::vector<std::vector<bool>> cur(H, std::vector<bool>(W));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) cur[r][c] = input(r, c);
    std::set<std::pair<int, int>> seeds;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            if (!cur[r][c]) continue;
            bool edge = false;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= H || cc >= W || !cur[rr][cc]) edge = true;
                }
            if (edge) seeds.insert({r, c});
        }
    int n = 0;
    for (;;) {
        ++n;
        std::set<std::pair<int, int>> flipped;
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) {
                if (cur[r][c]) continue;
                for (const auto& [sr, sc] : seeds)
                    if (std::max(std::abs(sr - r), std::abs(sc - c)) == 1 && distance(x, sr, sc, r, c) < h2) {
                        flipped.insert({r, c});
                        break;
                    }
            }
        for (const auto& [r, c] : flipped) cur[r][c] = true;
        if (flipped.empty()) break;
        seeds = flipped;
    }
    if (rounds) *rounds = n;
    BinaryMask out(H, W, false, input.tag());
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) out.set(r, c, cur[r][c]);
    return out;
}

/// Breadth-first flood fill of background from the border; unreached
/// background is a hole. Foreground components (4-connected) smaller than
/// `min_size` are cleared first.
inline BinaryMask fill_and_despeck(const BinaryMask& m, int min_size) {
    const int H = m.rows(), W = m.cols();
    std::vector<std::vector<int>> v(H, std::vector<int>(W));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) v[r][c] = m(r, c);
    const int dr[] = {1, -1, 0, 0}, dc[] = {0, 0, 1, -1};

    std::vector<std::vector<bool>> seen(H, std::vector<bool>(W));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            if (!v[r][c] || seen[r][c]) continue;
            std::vector<std::pair<int, int>> comp;
            std::deque<std::pair<int, int>> q{{r, c}};
            seen[r][c] = true;
            while (!q.empty()) {
                auto [a, b] = q.front();
                q.pop_front();
                comp.push_back({a, b});
                for (int d = 0; d < 4; ++d) {
                    const int na = a + dr[d], nb = b + dc[d];
                    if (na < 0 || nb < 0 || na >= H || nb >= W || seen[na][nb] || !v[na][nb]) continue;
                    seen[na][nb] = true;
                    q.push_back({na, nb});
                }
            }
            if (static_cast<int>(comp.size()) < min_size)
                for (auto [a, b] : comp) v[a][b] = 0;
        }

    std::vector<std::vector<bool>> outside(H, std::vector<bool>(W));
    std::deque<std::pair<int, int>> q;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if ((r == 0 || c == 0 || r == H - 1 || c == W - 1) && !v[r][c]) {
                outside[r][c] = true;
                q.push_back({r, c});
            }
    while (!q.empty()) {
        auto [a, b] = q.front();
        q.pop_front();
        for (int d = 0; d < 4; ++d) {
            const int na = a + dr[d], nb = b + dc[d];
            if (na < 0 || nb < 0 || na >= H || nb >= W || outside[na][nb] || v[na][nb]) continue;
            outside[na][nb] = true;
            q.push_back({na, nb});
        }
    }
    BinaryMask out(H, W, false, m.tag());
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) out.set(r, c, v[r][c] || !outside[r][c]);
    return out;
}

inline BinaryMask from_rows(const std::vector<std::string>& rows, ResolutionTag tag = ResolutionTag::layer(2)) {
    BinaryMask m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), false, tag);
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m.set(r, c, rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '#');
    return m;
}

/// Filled ring: a square annulus of foreground with a background hole.
inline BinaryMask ring(int n, int outer_lo, int outer_hi, int inner_lo, int inner_hi) {
    BinaryMask m(n, n, false, ResolutionTag::layer(2));
    for (int r = outer_lo; r <= outer_hi; ++r)
        for (int c = outer_lo; c <= outer_hi; ++c)
            m.set(r, c, !(r >= inner_lo && r <= inner_hi && c >= inner_lo && c <= inner_hi));
    return m;
}

/// Mean absolute out-of-mask difference on 0-255 values, by hand.
inline double mean_outside(const std::vector<int>& a, const std::vector<int>& b, const std::vector<int>& mask, int channels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!mask[i / static_cast<std::size_t>(channels)]) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

}  // namespace oracle

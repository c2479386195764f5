// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "../support.hpp"
#include "objectadd/error.hpp"
#include "objectadd/layout_control.hpp"
#include "objectadd/toy_backend.hpp"

using namespace objectadd;

namespace {

CrossAttentionMap map_2x2(std::initializer_list<double> row_k, int tokens = 2, int k = 1) {
    CrossAttentionMap m(0, 10, tokens, 2, 2);
    for (int t = 0; t < tokens; ++t)
        for (int i = 0; i < 4; ++i) m.row(t)[static_cast<std::size_t>(i)] = 0.1 * (t + 1) + 0.01 * i;
    std::size_t i = 0;
    for (double v : row_k) m.row(k)[i++] = v;
    return m;
}

BinaryMask mask_2x2(bool a, bool b, bool c, bool d) {
    BinaryMask m(2, 2, false, ResolutionTag::layer(0));
    m.set(0, 0, a);
    m.set(0, 1, b);
    m.set(1, 0, c);
    m.set(1, 1, d);
    return m;
}

}  // namespace

TEST_SUITE("layout_control") {

TEST_CASE("energy hand cases") {
    CHECK(energy(map_2x2({1, 1, 1, 1}), mask_2x2(true, true, false, false), 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(energy(map_2x2({1, 1, 1, 1}), mask_2x2(true, true, false, false), 1) - 0.25) < 1e-12);
    CHECK(energy(map_2x2({0.2, 0.8, 0, 0}), mask_2x2(true, true, false, false), 1) == 0.0);
    CHECK(energy(map_2x2({0, 0, 0.3, 0.7}), mask_2x2(true, true, false, false), 1) == 1.0);
    CHECK_THROWS_AS(energy(map_2x2({0, 0, 0, 0}), mask_2x2(true, false, false, false), 1), Error);
    BinaryMask wrong(3, 3);
    CHECK_THROWS_AS(energy(map_2x2({1, 1, 1, 1}), wrong, 1), Error);
}

TEST_CASE("energy stays in [0, 1] on random rows") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        CrossAttentionMap m(0, 1, 1, 5, 7);
        for (double& v : m.row(0)) v = u(rng);
        const BinaryMask mask = oracle::random_mask(rng, 5, 7, 0.4);
        const double e = energy(m, mask, 0);
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}

TEST_CASE("injection: all-zero and all-one masks, checkerboard oracle, idempotence") {
    std::mt19937_64 rng(5);
    const Latent a = oracle::random_latent(rng, 4, 4, 2, 30);
    const Latent b = oracle::random_latent(rng, 4, 4, 2, 30);
    CHECK(inject_latent(a, b, BinaryMask(4, 4, false, ResolutionTag::latent())) == a);
    CHECK(inject_latent(a, b, BinaryMask(4, 4, true, ResolutionTag::latent())).data == b.data);
    BinaryMask checker(4, 4, false, ResolutionTag::latent());
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) checker.set(r, c, (r + c) % 2 == 0);
    const Latent once = inject_latent(a, b, checker);
    CHECK(once == oracle::blend(a, b, checker));
    CHECK(inject_latent(once, b, checker) == once);

    Latent late = b;
    late.timestep = 29;
    try {
        inject_latent(a, late, checker);
        FAIL("expected a trajectory alignment error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TrajectoryAlignment);
    }
}

TEST_CASE("enhancement: hand softmax cases") {
    // avg = 3 -> softmax([3, 0, 0, 0]).
    const auto out = enhance_attention(map_2x2({6, 2, 3, 1}), mask_2x2(true, false, false, false), 1);
    const double z = std::exp(3.0) + 3.0;
    CHECK(std::abs(out.map.row(1)[0] - std::exp(3.0) / z) < 1e-12);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(out.map.row(1)[static_cast<std::size_t>(i)] - 1.0 / z) < 1e-12);

    // avg = 0.5 -> level clamps to 1.
    const auto low = enhance_attention(map_2x2({0.5, 0.5, 0.5, 0.5}), mask_2x2(true, false, false, false), 1);
    const double zl = std::exp(1.0) + 3.0;
    CHECK(std::abs(low.map.row(1)[0] - std::exp(1.0) / zl) < 1e-12);

    // Full mask -> uniform.
    const auto full = enhance_attention(map_2x2({6, 2, 3, 1}), mask_2x2(true, true, true, true), 1);
    for (double v : full.map.row(1)) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("enhancement: row sums, argmax in mask, other rows untouched") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        CrossAttentionMap m(1, 5, 4, 6, 6);
        for (int t = 0; t < 4; ++t)
            for (double& v : m.row(t)) v = u(rng);
        BinaryMask mask = oracle::random_mask(rng, 6, 6, 0.3, ResolutionTag::layer(1));
        if (mask.none()) mask.set(2, 2, true);
        for (auto scope : {AttentionScope::WholeMap, AttentionScope::MaskedRegion}) {
            const auto out = enhance_attention(m, mask, 2, scope);
            CHECK_FALSE(out.empty_mask);
            const auto row = out.map.row(2);
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
            const auto arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
            CHECK(mask(arg / 6, arg % 6));
            for (int t : {0, 1, 3})
                for (std::size_t i = 0; i < 36; ++i) CHECK(out.map.row(t)[i] == m.row(t)[i]);
        }
    }
}

TEST_CASE("enhancement with an empty mask is a flagged no-op") {
    const auto m = map_2x2({1, 2, 3, 4});
    const auto out = enhance_attention(m, mask_2x2(false, false, false, false), 1);
    CHECK(out.empty_mask);
    CHECK(out.map == m);
}

TEST_CASE("schedule boundaries") {
    GuidanceConfig cfg;
    CHECK(should_inject_latent(50, cfg));
    CHECK(should_inject_attention(50, cfg));
    CHECK(should_inject_latent(41, cfg));
    CHECK_FALSE(should_inject_latent(40, cfg));
    CHECK(should_inject_attention(36, cfg));
    CHECK_FALSE(should_inject_attention(35, cfg));
    int latent = 0, attn = 0;
    for (int t = 50; t >= 1; --t) {
        latent += should_inject_latent(t, cfg);
        attn += should_inject_attention(t, cfg);
        if (should_inject_latent(t, cfg)) CHECK(should_inject_attention(t, cfg));
    }
    CHECK(latent == 10);
    CHECK(attn == 15);
}

TEST_CASE("toy gradient matches central differences") {
    ToyBackend toy;
    const auto& d = toy.descriptor();
    const auto e_w = toy.encode_text("a red hat");
    const auto layers = d.layer_ids();
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 4; ++trial) {
        const Latent x = oracle::random_latent(rng, d.latent_height, d.latent_width, d.latent_channels, 40);
        const Box box{8 + 4 * trial, 6 + 3 * trial, 20, 24};
        const BinaryMask mask = box_to_mask(box, d.image_extent());
        const Latent g = toy.energy_gradient(x, e_w, mask, 3, layers);
        double num = 0.0, den = 0.0;
        const double h = 1e-5;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            Latent plus = x, minus = x;
            plus.data.values()[i] += h;
            minus.data.values()[i] -= h;
            const double fd = (box_energy(toy, plus, e_w, mask, 3, layers) - box_energy(toy, minus, e_w, mask, 3, layers)) /
                              (2 * h);
            const double diff = fd - g.data.values()[i];
            num += diff * diff;
            den += fd * fd;
        }
        CHECK(den > 0.0);
        CHECK(std::sqrt(num / den) < 1e-4);
    }
}

TEST_CASE("full-coverage mask gives a zero gradient") {
    ToyBackend toy;
    const auto& d = toy.descriptor();
    std::mt19937_64 rng(8);
    const Latent x = oracle::random_latent(rng, 16, 16, 4, 40);
    const auto e_w = toy.encode_text("a hat");
    const BinaryMask all(d.image_height, d.image_width, true);
    const Latent g = toy.energy_gradient(x, e_w, all, 2, d.layer_ids());
    for (double v : g.data.values()) CHECK(v == 0.0);
}

TEST_CASE("guidance: zero step is a no-op and small steps descend") {
    ToyBackend toy;
    const auto& d = toy.descriptor();
    const auto e_w = toy.encode_text("a hat");
    std::mt19937_64 rng(99);
    const Latent x = oracle::random_latent(rng, 16, 16, 4, 50);
    const BinaryMask mask = box_to_mask({10, 20, 24, 30}, d.image_extent());

    GuidanceConfig cfg;
    cfg.guidance_lr = 0.0;
    cfg.guidance_iters = 3;
    cfg.guidance_stop_energy = 0.0;
    const auto still = guidance_update({x, {}, 0}, toy, e_w, mask, 2, cfg);
    CHECK(still.latent == x);
    CHECK(still.energy_history.size() == 4);
    for (double e : still.energy_history) CHECK(e == still.energy_history.front());

    cfg.guidance_lr = 1e-2;
    cfg.guidance_iters = 10;
    const auto moved = guidance_update({x, {}, 0}, toy, e_w, mask, 2, cfg);
    CHECK(moved.iterations_used == 10);
    CHECK(moved.energy_history.back() < moved.energy_history.front());
    for (double e : moved.energy_history) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}

TEST_CASE("guidance stops early once under the threshold") {
    ToyBackend toy;
    const auto e_w = toy.encode_text("a hat");
    std::mt19937_64 rng(4);
    const Latent x = oracle::random_latent(rng, 16, 16, 4, 50);
    GuidanceConfig cfg;
    cfg.guidance_stop_energy = 2.0;  // every energy is below this
    const auto out = guidance_update({x, {}, 0}, toy, e_w, box_to_mask({0, 0, 32, 32}, {64, 64}), 2, cfg);
    CHECK(out.iterations_used == 0);
    CHECK(out.latent == x);
}

TEST_CASE("guidance rejects a non-differentiable backend") {
    ToyParameters p;
    BackendDescriptor d = ToyBackend(p).descriptor();
    CallbackBackend cb(d, {});
    const auto e_w = ToyBackend(p).encode_text("a hat");
    try {
        guidance_update({Latent{Grid<double>(16, 16, 4), 5}, {}, 0}, cb, e_w, BinaryMask(64, 64, true), 1, {});
        FAIL("expected a capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Capability);
    }
}

}  // TEST_SUITE

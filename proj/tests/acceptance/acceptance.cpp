// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per primary criterion, nonzero exit
// status when any criterion fails. Usage: objectadd_acceptance [path/to/cli]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "../support.hpp"
#include "objectadd/attention_refocus.hpp"
#include "objectadd/error.hpp"
#include "objectadd/evaluation.hpp"
#include "objectadd/io.hpp"
#include "objectadd/jobs.hpp"
#include "objectadd/layout_control.hpp"
#include "objectadd/mask_ops.hpp"
#include "objectadd/object_expansion.hpp"
#include "objectadd/pipeline.hpp"
#include "objectadd/service.hpp"
#include "objectadd/text_coalesce.hpp"
#include "objectadd/toy_backend.hpp"

// After the Eigen-based headers: resolv.h defines a _res macro that Eigen
// uses as a parameter name.
#include <httplib.h>

using namespace objectadd;
namespace fs = std::filesystem;

namespace {

/// Collects failed expectations of one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    template <typename F>
    void expect_error(ErrorKind kind, F&& f, const std::string& what) {
        try {
            f();
            expect(false, what + ": no error");
        } catch (const Error& e) {
            expect(e.kind() == kind, what + ": wrong error kind " + to_string(e.kind()));
        }
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }

    bool ok() const { return failed_ == 0; }
    std::string summary() const {
        std::ostringstream os;
        os << (total_ - failed_) << "/" << total_ << " checks";
        if (!notes_.empty()) os << "; " << notes_;
        for (const auto& f : failures_) os << " | " << f;
        return os.str();
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
    std::string notes_;
};

EditSpec hat_spec() {
    EditSpec s;
    s.base_prompt = "a woman wearing glasses";
    s.object_prompt = "A hat";
    s.box = {10, 20, 16, 24};
    s.seed = 7;
    return s;
}

bool rows_equal(const EmbeddingMatrix& e, const std::vector<std::vector<double>>& rows) {
    if (static_cast<std::size_t>(e.max_tokens()) != rows.size()) return false;
    for (int i = 0; i < e.max_tokens(); ++i)
        for (int j = 0; j < e.dim(); ++j)
            if (e.data(i, j) != rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) return false;
    return true;
}

// --- criteria ---------------------------------------------------------------

void coalesce_criterion(Check& c) {
    ToyBackend toy;
    const int n = toy.descriptor().max_tokens;
    const int d = toy.descriptor().embed_dim;
    std::mt19937_64 rng(100);
    int overflow = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int np = std::uniform_int_distribution<int>(0, n - 2)(rng);
        const int nw = std::uniform_int_distribution<int>(0, n - 2)(rng);
        const auto p = oracle::marked_embedding(n, d, np, 1 + trial);
        const auto w = oracle::marked_embedding(n, d, nw, 700 + trial);
        if (np + nw + 2 > n) {
            ++overflow;
            c.expect_error(ErrorKind::Overflow, [&] { coalesce(p, w); }, "overflow " + std::to_string(np) + "+" +
                                                                             std::to_string(nw));
        } else {
            bool same = false;
            try {
                same = rows_equal(coalesce(p, w), oracle::splice(p, w));
            } catch (const Error&) {
            }
            c.expect(same, "splice mismatch at " + std::to_string(np) + "," + std::to_string(nw));
        }
    }
    c.note(std::to_string(overflow) + " overflow pairs");
}

void energy_criterion(Check& c) {
    auto map4 = [](std::initializer_list<double> vals) {
        CrossAttentionMap m(0, 1, 1, 2, 2);
        std::size_t i = 0;
        for (double v : vals) m.row(0)[i++] = v;
        return m;
    };
    BinaryMask top(2, 2, false, ResolutionTag::layer(0));
    top.set(0, 0, true);
    top.set(0, 1, true);
    c.expect(std::abs(energy(map4({1, 1, 1, 1}), top, 0) - 0.25) < 1e-12, "hand case 0.25");
    c.expect(energy(map4({0.3, 0.7, 0, 0}), top, 0) == 0.0, "full containment");
    c.expect(energy(map4({0, 0, 0.4, 0.6}), top, 0) == 1.0, "zero containment");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        CrossAttentionMap m(0, 1, 1, 6, 5);
        for (double& v : m.row(0)) v = u(rng);
        const double e = energy(m, oracle::random_mask(rng, 6, 5, 0.5, ResolutionTag::layer(0)), 0);
        c.expect(e >= 0.0 && e <= 1.0, "energy out of range");
    }
}

void gradient_criterion(Check& c) {
    ToyBackend toy;
    const auto& d = toy.descriptor();
    const auto e_w = toy.encode_text("a red hat");
    const auto layers = d.layer_ids();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Latent x = oracle::random_latent(rng, d.latent_height, d.latent_width, d.latent_channels, 40);
        const int top = std::uniform_int_distribution<int>(0, 40)(rng);
        const int left = std::uniform_int_distribution<int>(0, 40)(rng);
        const BinaryMask mask = box_to_mask({top, left, 20, 22}, d.image_extent());
        const Latent g = toy.energy_gradient(x, e_w, mask, 3, layers);
        double num = 0.0, den = 0.0;
        const double h = 1e-5;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            Latent plus = x, minus = x;
            plus.data.values()[i] += h;
            minus.data.values()[i] -= h;
            const double fd =
                (box_energy(toy, plus, e_w, mask, 3, layers) - box_energy(toy, minus, e_w, mask, 3, layers)) / (2 * h);
            num += (fd - g.data.values()[i]) * (fd - g.data.values()[i]);
            den += fd * fd;
        }
        const double rel = den > 0 ? std::sqrt(num / den) : 1.0;
        worst = std::max(worst, rel);
        c.expect(rel < 1e-4, "relative gradient error " + std::to_string(rel));
    }

    GuidanceConfig cfg;
    cfg.guidance_lr = 1e-2;
    cfg.guidance_iters = 10;
    cfg.guidance_stop_energy = 0.0;
    int reduced = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Latent x = oracle::random_latent(rng, 16, 16, 4, 50);
        const int top = std::uniform_int_distribution<int>(0, 40)(rng);
        const int left = std::uniform_int_distribution<int>(0, 40)(rng);
        const BinaryMask mask = box_to_mask({top, left, 24, 24}, d.image_extent());
        const auto out = guidance_update({x, {}, 0}, toy, e_w, mask, 3, cfg);
        reduced += out.energy_history.back() < out.energy_history.front();
    }
    c.expect(reduced >= 48, "guidance reduced energy on " + std::to_string(reduced) + "/50");
    std::ostringstream os;
    os << "worst rel err " << worst << ", descent " << reduced << "/50";
    c.note(os.str());
}

void injection_criterion(Check& c) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Latent a = oracle::random_latent(rng, 16, 16, 4, 30);
        const Latent b = oracle::random_latent(rng, 16, 16, 4, 30);
        const BinaryMask m = oracle::random_mask(rng, 16, 16, 0.4);
        const Latent once = inject_latent(a, b, m);
        c.expect(once == oracle::blend(a, b, m), "inject oracle");
        c.expect(inject_latent(once, b, m) == once, "inject idempotence");
        const Latent s = swap_latent(a, b, m);
        c.expect(s == oracle::blend(b, a, m), "swap oracle");
        c.expect(swap_latent(s, b, m) == s, "swap idempotence");
    }
}

void enhancement_criterion(Check& c) {
    CrossAttentionMap hand(0, 1, 2, 2, 2);
    const double vals[4] = {6, 2, 3, 1};
    for (int i = 0; i < 4; ++i) {
        hand.row(0)[static_cast<std::size_t>(i)] = 0.1 * i;
        hand.row(1)[static_cast<std::size_t>(i)] = vals[i];
    }
    BinaryMask corner(2, 2, false, ResolutionTag::layer(0));
    corner.set(0, 0, true);
    const auto out = enhance_attention(hand, corner, 1);
    const double z = std::exp(3.0) + 3.0;
    c.expect(std::abs(out.map.row(1)[0] - std::exp(3.0) / z) < 1e-12, "hand softmax inside");
    for (int i = 1; i < 4; ++i) c.expect(std::abs(out.map.row(1)[static_cast<std::size_t>(i)] - 1.0 / z) < 1e-12, "hand softmax outside");

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        CrossAttentionMap m(1, 5, 4, 8, 8);
        for (int t = 0; t < 4; ++t)
            for (double& v : m.row(t)) v = u(rng);
        BinaryMask mask = oracle::random_mask(rng, 8, 8, 0.25, ResolutionTag::layer(1));
        if (mask.none()) mask.set(3, 3, true);
        const auto e = enhance_attention(m, mask, 2);
        const auto row = e.map.row(2);
        c.expect(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-12, "row sum");
        const auto arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        c.expect(mask(arg / 8, arg % 8), "argmax inside mask");
        for (int t : {0, 1, 3})
            c.expect(std::equal(e.map.row(t).begin(), e.map.row(t).end(), m.row(t).begin()), "other rows untouched");
    }
}

void schedule_criterion(Check& c) {
    ToyBackend toy;
    EditTraces tr;
    edit_generated(hat_spec(), toy, &tr);
    std::vector<int> latent, attn, want_latent, want_attn;
    for (const auto& s : tr.steps) {
        if (s.latent_injected) latent.push_back(s.t);
        if (s.attention_injected) attn.push_back(s.t);
    }
    for (int t = 50; t > 40; --t) want_latent.push_back(t);
    for (int t = 50; t > 35; --t) want_attn.push_back(t);
    c.expect(tr.steps.size() == 50, "50 steps traced");
    c.expect(latent == want_latent, "latent injection steps");
    c.expect(attn == want_attn, "attention injection steps");
    c.expect(tr.swap_count == 1, "single swap");
    c.note("latent " + std::to_string(latent.size()) + " steps, attention " + std::to_string(attn.size()) + " steps");
}

void refocus_criterion(Check& c) {
    std::mt19937_64 rng(77);
    std::gamma_distribution<double> g(0.6, 1.0);
    GuidanceConfig cfg;
    for (int trial = 0; trial < 50; ++trial) {
        Grid<double> row(32, 32);
        for (double& v : row.values()) v = g(rng);
        BinaryMask mask(32, 32, false, ResolutionTag::layer(2));
        const int top = std::uniform_int_distribution<int>(0, 20)(rng);
        const int left = std::uniform_int_distribution<int>(0, 20)(rng);
        for (int r = top; r < top + 10; ++r)
            for (int col = left; col < left + 9; ++col) mask.set(r, col, true);
        const auto res = refocus(row, mask, cfg, static_cast<std::uint64_t>(trial));
        // Partition: every cell labelled once, clusters are intensity intervals.
        const auto& L = res.labels;
        std::vector<double> lo(static_cast<std::size_t>(L.k), 1e300), hi(static_cast<std::size_t>(L.k), -1e300);
        std::vector<double> mass(static_cast<std::size_t>(L.k), 0.0);
        bool labelled = true;
        for (int r = 0; r < 32; ++r)
            for (int col = 0; col < 32; ++col) {
                const int l = L.labels(r, col);
                if (l < 0 || l >= L.k) {
                    labelled = false;
                    continue;
                }
                lo[static_cast<std::size_t>(l)] = std::min(lo[static_cast<std::size_t>(l)], row(r, col));
                hi[static_cast<std::size_t>(l)] = std::max(hi[static_cast<std::size_t>(l)], row(r, col));
                if (mask(r, col)) mass[static_cast<std::size_t>(l)] += row(r, col);
            }
        c.expect(labelled, "every cell labelled");
        for (int a = 0; a < L.k; ++a)
            for (int b = a + 1; b < L.k; ++b)
                if (hi[static_cast<std::size_t>(a)] > -1e300 && lo[static_cast<std::size_t>(b)] < 1e300)
                    c.expect(hi[static_cast<std::size_t>(a)] <= lo[static_cast<std::size_t>(b)], "interval order");
        const int argmax = static_cast<int>(std::max_element(mass.begin(), mass.end()) - mass.begin());
        c.expect(res.selection.argmax_cluster == argmax, "argmax cluster");
        c.expect(std::find(res.selection.clusters.begin(), res.selection.clusters.end(), argmax) !=
                     res.selection.clusters.end(),
                 "argmax selected");
    }

    // Threshold fixture: 40% and 30% inside fractions around the 0.35 cut.
    ClusterLabels labels{Grid<int>(10, 10, 1, 3), 4};
    Grid<double> row(10, 10, 1, 0.0);
    BinaryMask box(10, 10, false, ResolutionTag::layer(2));
    for (int r = 0; r < 10; ++r)
        for (int col = 0; col < 5; ++col) box.set(r, col, true);
    for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 5; ++col) {
            labels.labels(r, col) = 0;
            row(r, col) = 1.0;
        }
    for (int col : {0, 1, 2, 3, 5, 6, 7, 8, 9}) labels.labels(2, col) = 1;
    labels.labels(3, 9) = 1;
    for (int col : {0, 1, 2, 5, 6, 7, 8}) labels.labels(3, col) = 2;
    for (int col : {5, 6, 7}) labels.labels(4, col) = 2;
    c.expect(select_object_area(labels, row, box, 0.35).clusters == std::vector<int>{0, 1, 3}, "h1 threshold fixture");

    const BinaryMask ring = oracle::ring(12, 2, 9, 4, 7);
    const BinaryMask disk = morph_cleanup(ring, 4);
    c.expect(disk == oracle::fill_and_despeck(ring, 4) && disk.count() == 64, "ring to disk");
    BinaryMask speck = oracle::from_rows({"........", ".####...", ".####...", ".####..#", "........"});
    const BinaryMask cleaned = morph_cleanup(speck, 4);
    c.expect(cleaned == oracle::fill_and_despeck(speck, 4) && !cleaned(3, 7) && cleaned.count() == 12, "speck removal");
}

void expansion_criterion(Check& c) {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 50; ++trial) {
        const int h = std::uniform_int_distribution<int>(2, 12)(rng);
        const int w = std::uniform_int_distribution<int>(2, 12)(rng);
        const Latent x = oracle::random_latent(rng, h, w, 4, 15, 2.0);
        const BinaryMask m = oracle::random_mask(rng, h, w, 0.2);
        const double h2 = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
        int rounds = 0;
        const BinaryMask want = oracle::grow(m, x, h2, &rounds);
        const auto res = expand(m, x, h2);
        c.expect(res.mask == want, "oracle equivalence");
        c.expect(m.subset_of(res.mask), "monotone growth");
        c.expect(res.trace.rounds == rounds && res.trace.rounds <= h * w + 1 &&
                     res.trace.flipped_per_round.back() == 0,
                 "termination");
        c.expect(expand(m, x, 0.0).mask == m, "h2 = 0 no-op");
    }
}

void real_image_criterion(Check& c) {
    ToyBackend toy;
    const auto e = toy.encode_text("a hat");
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const Latent z = oracle::random_latent(rng, 16, 16, 4, 0, 3.0);
        const auto traj = toy.invert(z, e, 50);
        Latent x = traj[50];
        for (int t = 50; t >= 1; --t) x = toy.denoise_step(x, t, e).next_latent;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            worst = std::max(worst, std::abs(x.data.values()[i] - z.data.values()[i]));
    }
    c.expect(worst < 1e-9, "inversion round trip");

    EditSpec s = hat_spec();
    s.config.total_steps = 50;
    s.config.inversion_inject_step = 39;
    s.real_object_image = from_255(decode_png(read_file(oracle::fixture("object_card.png"))));
    EditTraces tr;
    const auto out = edit_real(s, toy, &tr);
    const bool have = tr.inversion_injected_latent && tr.inverted_reference;
    c.expect(have, "injection traced");
    if (have) {
        c.expect(tr.inversion_injected_latent->timestep == 39, "injected at t=39");
        const BinaryMask m = resample_mask(out.box_mask, {16, 16}, ResolutionTag::latent());
        c.expect(m.count() > 0, "non-empty latent mask");
        bool exact = true;
        for (int r = 0; r < 16; ++r)
            for (int col = 0; col < 16; ++col)
                if (m(r, col))
                    for (int k = 0; k < 4; ++k)
                        exact = exact && tr.inversion_injected_latent->data(r, col, k) == tr.inverted_reference->data(r, col, k);
        c.expect(exact, "latent inside M' equals the inverted latent");
    }
    s.real_object_image = from_255(decode_png(read_file(oracle::fixture("white.png"))));
    c.expect_error(ErrorKind::Segmentation, [&] { edit_real(s, toy); }, "all-white image");
    std::ostringstream os;
    os << "round-trip max err " << worst;
    c.note(os.str());
}

void metrics_criterion(Check& c) {
    PixelGrid a(2, 2, 3), b(2, 2, 3);
    const int av[12] = {0, 0, 0, 10, 10, 10, 100, 100, 100, 200, 200, 200};
    const int bv[12] = {30, 30, 30, 10, 10, 10, 100, 100, 100, 0, 0, 0};
    for (int i = 0; i < 12; ++i) {
        a.values()[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(av[i]);
        b.values()[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(bv[i]);
    }
    BinaryMask m(2, 2);
    m.set(1, 1, true);
    c.expect(by_pixels(a, b, m) == 7.5, "by_pixels hand case");
    c.expect(by_pixels(a, b, BinaryMask(2, 2)) == 57.5, "by_pixels unmasked hand case");
    PixelGrid b2 = b;
    b2(1, 1, 0) = 17;
    c.expect(by_pixels(a, b2, m) == by_pixels(a, b, m), "in-mask invariance");

    ToyBackend toy;
    const auto report = run_benchmark(oracle::fixture("cases"), toy, {}, nullptr);
    c.expect(report.case_count == 3, "three fixture cases");
    const auto set = load_case_dir(oracle::fixture("cases"));
    double sum = 0.0;
    for (std::size_t i = 0; i < set.cases.size() && i < report.rows.size(); ++i) {
        const auto& bc = set.cases[i];
        EditSpec s;
        s.base_prompt = bc.base_prompt;
        s.object_prompt = bc.object_prompt;
        s.seed = bc.seed;
        s.box = bc.box;
        const auto out = edit_generated(s, toy);
        const BinaryMask box = box_to_mask(bc.box, {64, 64});
        std::vector<int> x, y, mv;
        const PixelGrid x_px = to_255(out.base_image);
        for (auto v : x_px.values()) x.push_back(v);
        const PixelGrid y_px = to_255(out.edited_image);
        for (auto v : y_px.values()) y.push_back(v);
        for (int r = 0; r < 64; ++r)
            for (int col = 0; col < 64; ++col) mv.push_back(box(r, col));
        const double hand = oracle::mean_outside(x, y, mv, 3);
        c.expect(std::abs(report.rows[i].by_pixels - hand) < 1e-12, "row " + bc.name);
        sum += hand;
    }
    c.expect(report.mean_by_pixels && std::abs(*report.mean_by_pixels - sum / 3.0) < 1e-12, "mean by_pixels");

    for (const auto& name : {"001", "002", "003"}) {
        const std::string text = read_text(oracle::fixture(std::string("cases/") + name + ".txt"));
        const CaseFile cf = parse_case_file(text);
        c.expect(parse_case_file(format_case_file(cf)) == cf, std::string("round trip ") + name);
    }
    try {
        parse_case_file("1\n2\n3\n4\n");
        c.expect(false, "four-line file accepted");
    } catch (const ParseError& e) {
        c.expect(e.line() == 5, "line number of missing prompt");
    }
    try {
        parse_case_file("1\n2\nwide\n4\nhat\n");
        c.expect(false, "non-numeric width accepted");
    } catch (const ParseError& e) {
        c.expect(e.line() == 3, "line number of bad width");
    }
}

std::string http_edited_png() {
    const fs::path root = fs::temp_directory_path() / "objectadd_acceptance_http";
    fs::remove_all(root);
    ServiceOptions opts;
    opts.artifact_root = root;
    opts.workers = 1;
    Service svc(opts);
    svc.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", svc.port());
    cli.set_read_timeout(60, 0);
    const nlohmann::json body = {{"prompt", "a woman wearing glasses"},
                                 {"seed", 7},
                                 {"box", {{"top", 10}, {"left", 20}, {"height", 16}, {"width", 24}}},
                                 {"object_prompt", "A hat"}};
    auto posted = cli.Post("/api/edits", body.dump(), "application/json");
    std::string out;
    if (posted && posted->status == 202) {
        const std::string id = nlohmann::json::parse(posted->body)["job_id"];
        svc.wait_for(id);
        if (auto img = cli.Get("/api/images/" + id + ".edited"); img && img->status == 200) out = img->body;
    }
    svc.stop();
    return out;
}

void determinism_criterion(Check& c, const std::string& cli) {
    ToyBackend toy;
    const auto t0 = std::chrono::steady_clock::now();
    JobRequest r;
    r.prompt = "a woman wearing glasses";
    r.seed = 7;
    r.box = {10, 20, 16, 24};
    r.object_prompt = "A hat";
    const JobResult first = execute(r);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const JobResult second = execute(r);
    const Bytes& a = first.find("edited.png")->bytes;
    c.expect(a == second.find("edited.png")->bytes, "two in-process runs");
    c.expect(seconds < 10.0, "end-to-end under 10 s");

    const std::string http = http_edited_png();
    c.expect(!http.empty() && http == std::string(a.begin(), a.end()), "HTTP path");

    if (!cli.empty()) {
        const fs::path out = fs::temp_directory_path() / "objectadd_acceptance_cli";
        fs::remove_all(out);
        const std::string cmd = "\"" + cli + "\" edit --prompt \"a woman wearing glasses\" --seed 7 --box 20,10,24,16 "
                                "--object \"A hat\" --out \"" + out.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        c.expect(rc == 0, "CLI exit status");
        if (rc == 0) c.expect(read_file(out / "edited.png") == a, "CLI path");
    } else {
        c.note("CLI path not given");
    }
    std::ostringstream os;
    os.precision(3);
    os << "edit took " << seconds << " s, sha256 " << sha256_hex(a).substr(0, 12);
    c.note(os.str());
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"embedding coalesce", coalesce_criterion},
        {"energy bounds and extremes", energy_criterion},
        {"gradient check and guidance descent", gradient_criterion},
        {"injection exactness", injection_criterion},
        {"attention enhancement", enhancement_criterion},
        {"schedules", schedule_criterion},
        {"refocus chain", refocus_criterion},
        {"expansion", expansion_criterion},
        {"real-image path", real_image_criterion},
        {"metrics", metrics_criterion},
        {"end-to-end determinism", [&](Check& c) { determinism_criterion(c, cli); }},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Check c;
        try {
            run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("unexpected exception: ") + e.what());
        }
        std::cout << (c.ok() ? "PASS " : "FAIL ") << name << " (" << c.summary() << ")" << std::endl;
        failed += !c.ok();
    }
    return failed == 0 ? 0 : 1;
}

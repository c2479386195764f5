// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "objectadd/backend.hpp"
#include "objectadd/io.hpp"
#include "objectadd/types.hpp"

namespace objectadd {

/// Mean over every pixel and channel of |(1 - M) * a - (1 - M) * b| on the
/// 0-255 scale. Pixels inside `mask` contribute zero.
double by_pixels(const PixelGrid& original, const PixelGrid& edited, const BinaryMask& mask);
double by_pixels(const Image& original, const Image& edited, const BinaryMask& mask);

/// Text-image similarity model used for the masked CLIP score. Adapters for
/// real CLIP models implement this interface.
class TextImageSimilarity {
public:
    virtual ~TextImageSimilarity() = default;
    virtual std::string name() const = 0;
    /// Human-readable description of the score's scale, recorded in reports.
    virtual std::string scale() const = 0;
    virtual double similarity(const Image& image, const std::string& text) const = 0;
};

/// Desk-scale embedder: the image embeds as its mean RGB colour, the text as
/// the mean of the colour-word prototypes it mentions (neutral grey when it
/// names none). Score = 100 * cosine.
class ColorWordEmbedder final : public TextImageSimilarity {
public:
    std::string name() const override { return "color-word"; }
    std::string scale() const override { return "100 x cosine(mean RGB, colour-word prototype)"; }
    double similarity(const Image& image, const std::string& text) const override;
};

struct ClipScore {
    double value = 0.0;
    /// The masked image is all black (e.g. an empty mask).
    bool degenerate = false;
};

/// Similarity between M * edited (outside pixels zeroed) and `object_prompt`.
/// Throws Capability when `adapter` is null.
ClipScore clip_score(const Image& edited, const BinaryMask& mask, const std::string& object_prompt,
                     const TextImageSimilarity* adapter);

/// Contents of one five-line case file.
struct CaseFile {
    Box box;
    std::string object_prompt;
    friend bool operator==(const CaseFile&, const CaseFile&) = default;
};

/// Lines: 1 = left (x), 2 = top (y), 3 = width, 4 = height, 5 = object
/// prompt. Lines are trimmed; trailing blank lines are ignored. Throws
/// ParseError naming the offending line.
CaseFile parse_case_file(const std::string& text);
std::string format_case_file(const CaseFile& c);

struct BenchmarkCase {
    std::string name;  // file stem, e.g. "001"
    std::string base_prompt;
    std::int64_t seed = 0;
    Box box;
    std::string object_prompt;
};

struct CaseLoadFailure {
    std::string name;
    std::string error;
};

struct CaseSet {
    std::vector<BenchmarkCase> cases;
    std::vector<CaseLoadFailure> failures;
};

/// Reads every "NNN.txt" with its "NNN.json" companion ({base_prompt, seed})
/// in name order. Unreadable cases land in `failures`. Throws Config when
/// the directory holds no case files.
CaseSet load_case_dir(const std::filesystem::path& dir);

struct MetricRow {
    std::string name;
    bool ok = false;
    std::string error;
    std::string failed_stage;
    double by_pixels = 0.0;
    std::optional<double> clip_score;
    bool clip_degenerate = false;
    std::optional<double> external_fid;
};

struct MetricReport {
    std::vector<MetricRow> rows;
    std::size_t case_count = 0;     // rows that completed
    std::optional<double> mean_by_pixels;
    std::optional<double> mean_clip_score;
    std::optional<double> mean_external_fid;
    std::string clip_adapter;       // empty when no adapter ran
    std::string clip_scale;

    /// Recomputes counts and means from `rows`.
    void aggregate();
};

/// Regenerates each case's base image, runs the edit, and scores it.
/// Per-case failures are recorded and the run continues. `external_fid`
/// maps case names to externally computed FID values.
MetricReport run_benchmark(const std::filesystem::path& case_dir, const DenoiserBackend& backend,
                           const GuidanceConfig& config, const TextImageSimilarity* adapter,
                           const std::map<std::string, double>& external_fid = {});

/// {"case name": fid, ...}
std::map<std::string, double> parse_external_fid(const std::string& json_text);

nlohmann::json report_to_json(const MetricReport& report);
std::string report_to_text(const MetricReport& report);

}  // namespace objectadd

// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "objectadd/error.hpp"
#include "objectadd/pipeline.hpp"

namespace objectadd {

namespace fs = std::filesystem;
using nlohmann::json;

double by_pixels(const PixelGrid& original, const PixelGrid& edited, const BinaryMask& mask) {
    if (!original.same_shape(edited)) throw Error(ErrorKind::Shape, "by_pixels: images differ in shape");
    if (mask.rows() != original.rows() || mask.cols() != original.cols())
        throw Error(ErrorKind::Shape, "by_pixels: mask does not match the image size");
    if (original.size() == 0) throw Error(ErrorKind::Shape, "by_pixels: empty image");
    long long total = 0;
    for (int r = 0; r < original.rows(); ++r)
        for (int c = 0; c < original.cols(); ++c) {
            if (mask(r, c)) continue;
            for (int k = 0; k < original.channels(); ++k) total += std::abs(int(original(r, c, k)) - int(edited(r, c, k)));
        }
    return static_cast<double>(total) / static_cast<double>(original.size());
}

double by_pixels(const Image& original, const Image& edited, const BinaryMask& mask) {
    return by_pixels(to_255(original), to_255(edited), mask);
}

namespace {

struct ColorWord {
    const char* word;
    double r, g, b;
};

constexpr ColorWord kColorWords[] = {
    {"red", 1.0, 0.0, 0.0},    {"green", 0.0, 1.0, 0.0},  {"blue", 0.0, 0.0, 1.0},    {"yellow", 1.0, 1.0, 0.0},
    {"orange", 1.0, 0.5, 0.0}, {"purple", 0.5, 0.0, 0.5}, {"pink", 1.0, 0.75, 0.8},   {"brown", 0.6, 0.3, 0.1},
    {"black", 0.0, 0.0, 0.0},  {"white", 1.0, 1.0, 1.0},  {"gray", 0.5, 0.5, 0.5},    {"grey", 0.5, 0.5, 0.5},
    {"cyan", 0.0, 1.0, 1.0},   {"magenta", 1.0, 0.0, 1.0},
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\f\v");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\f\v");
    return s.substr(first, last - first + 1);
}

}  // namespace

double ColorWordEmbedder::similarity(const Image& image, const std::string& text) const {
    if (image.channels() != 3) throw Error(ErrorKind::Shape, "embedder expects an RGB image");
    double img[3] = {0, 0, 0};
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c)
            for (int k = 0; k < 3; ++k) img[k] += image(r, c, k);

    double txt[3] = {0, 0, 0};
    int hits = 0;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        std::string clean;
        for (unsigned char ch : word)
            if (std::isalpha(ch)) clean.push_back(static_cast<char>(std::tolower(ch)));
        for (const auto& cw : kColorWords)
            if (clean == cw.word) {
                txt[0] += cw.r;
                txt[1] += cw.g;
                txt[2] += cw.b;
                ++hits;
            }
    }
    if (hits == 0) txt[0] = txt[1] = txt[2] = 0.5;

    const double dot = img[0] * txt[0] + img[1] * txt[1] + img[2] * txt[2];
    const double ni = std::sqrt(img[0] * img[0] + img[1] * img[1] + img[2] * img[2]);
    const double nt = std::sqrt(txt[0] * txt[0] + txt[1] * txt[1] + txt[2] * txt[2]);
    if (ni == 0.0 || nt == 0.0) return 0.0;
    return 100.0 * dot / (ni * nt);
}

ClipScore clip_score(const Image& edited, const BinaryMask& mask, const std::string& object_prompt,
                     const TextImageSimilarity* adapter) {
    if (!adapter) throw Error(ErrorKind::Capability, "no text-image similarity adapter configured");
    if (mask.rows() != edited.rows() || mask.cols() != edited.cols())
        throw Error(ErrorKind::Shape, "clip_score: mask does not match the image size");
    Image masked = edited;
    bool any = false;
    for (int r = 0; r < masked.rows(); ++r)
        for (int c = 0; c < masked.cols(); ++c) {
            if (mask(r, c)) {
                for (int k = 0; k < masked.channels(); ++k) any = any || masked(r, c, k) != 0.0;
                continue;
            }
            for (int k = 0; k < masked.channels(); ++k) masked(r, c, k) = 0.0;
        }
    return {adapter->similarity(masked, object_prompt), !any};
}

CaseFile parse_case_file(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(trim(line));
    while (!lines.empty() && lines.back().empty()) lines.pop_back();

    for (std::size_t i = 0; i < lines.size() && i < 5; ++i)
        if (lines[i].empty()) throw ParseError(static_cast<int>(i) + 1, "empty line");
    if (lines.size() < 5)
        throw ParseError(static_cast<int>(lines.size()) + 1,
                         "expected 5 lines, found " + std::to_string(lines.size()));
    if (lines.size() > 5) throw ParseError(6, "expected 5 lines, found " + std::to_string(lines.size()));

    auto integer = [&](int idx, const char* what) {
        const std::string& s = lines[static_cast<std::size_t>(idx)];
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ParseError(idx + 1, std::string(what) + " is not an integer: '" + s + "'");
        return v;
    };
    CaseFile c;
    c.box.left = integer(0, "x (left)");
    c.box.top = integer(1, "y (top)");
    c.box.width = integer(2, "width");
    c.box.height = integer(3, "height");
    if (c.box.width <= 0) throw ParseError(3, "width must be positive");
    if (c.box.height <= 0) throw ParseError(4, "height must be positive");
    c.object_prompt = lines[4];
    return c;
}

std::string format_case_file(const CaseFile& c) {
    std::ostringstream os;
    os << c.box.left << '\n' << c.box.top << '\n' << c.box.width << '\n' << c.box.height << '\n' << c.object_prompt << '\n';
    return os.str();
}

CaseSet load_case_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Config, "case directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    if (files.empty()) throw Error(ErrorKind::Config, "case directory '" + dir.string() + "' holds no case files");
    std::sort(files.begin(), files.end());

    CaseSet set;
    for (const auto& path : files) {
        const std::string name = path.stem().string();
        try {
            const CaseFile cf = parse_case_file(read_text(path));
            fs::path companion = path;
            companion.replace_extension(".json");
            const json meta = json::parse(read_text(companion));
            if (!meta.contains("base_prompt") || !meta["base_prompt"].is_string())
                throw Error(ErrorKind::Parse, name + ".json: missing string 'base_prompt'");
            if (!meta.contains("seed") || !meta["seed"].is_number_integer())
                throw Error(ErrorKind::Parse, name + ".json: missing integer 'seed'");
            set.cases.push_back({name, meta["base_prompt"].get<std::string>(), meta["seed"].get<std::int64_t>(), cf.box,
                                 cf.object_prompt});
        } catch (const std::exception& e) {
            set.failures.push_back({name, e.what()});
        }
    }
    return set;
}

void MetricReport::aggregate() {
    case_count = 0;
    double px = 0.0, clip = 0.0, fid = 0.0;
    std::size_t n_clip = 0, n_fid = 0;
    for (const auto& row : rows) {
        if (!row.ok) continue;
        ++case_count;
        px += row.by_pixels;
        if (row.clip_score) {
            clip += *row.clip_score;
            ++n_clip;
        }
        if (row.external_fid) {
            fid += *row.external_fid;
            ++n_fid;
        }
    }
    mean_by_pixels = case_count ? std::optional(px / static_cast<double>(case_count)) : std::nullopt;
    mean_clip_score = n_clip ? std::optional(clip / static_cast<double>(n_clip)) : std::nullopt;
    mean_external_fid = n_fid ? std::optional(fid / static_cast<double>(n_fid)) : std::nullopt;
}

MetricReport run_benchmark(const fs::path& case_dir, const DenoiserBackend& backend, const GuidanceConfig& config,
                           const TextImageSimilarity* adapter, const std::map<std::string, double>& external_fid) {
    const CaseSet set = load_case_dir(case_dir);
    if (set.cases.empty()) throw Error(ErrorKind::Config, "no parseable case in '" + case_dir.string() + "'");

    MetricReport report;
    if (adapter) {
        report.clip_adapter = adapter->name();
        report.clip_scale = adapter->scale();
    }
    for (const auto& f : set.failures) report.rows.push_back({f.name, false, f.error, "parse", 0.0, {}, false, {}});

    for (const auto& c : set.cases) {
        MetricRow row;
        row.name = c.name;
        if (auto it = external_fid.find(c.name); it != external_fid.end()) row.external_fid = it->second;
        try {
            EditSpec spec;
            spec.base_prompt = c.base_prompt;
            spec.object_prompt = c.object_prompt;
            spec.box = c.box;
            spec.seed = c.seed;
            spec.config = config;
            const EditOutputs out = edit_generated(spec, backend);
            row.by_pixels = by_pixels(out.base_image, out.edited_image, out.box_mask);
            if (adapter) {
                const ClipScore cs = clip_score(out.edited_image, out.box_mask, c.object_prompt, adapter);
                row.clip_score = cs.value;
                row.clip_degenerate = cs.degenerate;
            }
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
            row.failed_stage = e.stage();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    report.aggregate();
    return report;
}

std::map<std::string, double> parse_external_fid(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("external FID file is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Parse, "external FID file must map case names to numbers");
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw Error(ErrorKind::Parse, "external FID for '" + k + "' is not a number");
        out[k] = v.get<double>();
    }
    return out;
}

json report_to_json(const MetricReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row = {{"case", r.name}, {"ok", r.ok}, {"by_pixels", r.ok ? json(r.by_pixels) : json(nullptr)},
                    {"clip_score", opt(r.clip_score)}, {"clip_degenerate", r.clip_degenerate},
                    {"external_fid", opt(r.external_fid)}};
        if (!r.ok) row["error"] = {{"message", r.error}, {"stage", r.failed_stage}};
        rows.push_back(std::move(row));
    }
    return {
        {"rows", rows},
        {"case_count", report.case_count},
        {"means", {{"by_pixels", opt(report.mean_by_pixels)}, {"clip_score", opt(report.mean_clip_score)},
                   {"external_fid", opt(report.mean_external_fid)}}},
        {"clip_adapter", report.clip_adapter.empty() ? json(nullptr) : json(report.clip_adapter)},
        {"clip_scale", report.clip_scale.empty() ? json(nullptr) : json(report.clip_scale)},
    };
}

std::string report_to_text(const MetricReport& report) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s  %s\n", "case", "by_pixels", "clip", "fid", "status");
    os << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%-12s %10s %10s %10s  %s\n", r.name.c_str(),
                      cell(r.ok ? std::optional(r.by_pixels) : std::nullopt).c_str(), cell(r.clip_score).c_str(),
                      cell(r.external_fid).c_str(), r.ok ? (r.clip_degenerate ? "ok (clip degenerate)" : "ok")
                                                         : ("failed: " + r.error).c_str());
        os << line;
    }
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s  %zu case(s)\n", "mean", cell(report.mean_by_pixels).c_str(),
                  cell(report.mean_clip_score).c_str(), cell(report.mean_external_fid).c_str(), report.case_count);
    os << line;
    if (!report.clip_scale.empty()) os << "clip scale: " << report.clip_scale << " (" << report.clip_adapter << ")\n";
    return os.str();
}

}  // namespace objectadd

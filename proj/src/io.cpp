// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>
#include <png.h>
#include <yaml-cpp/yaml.h>

#include "objectadd/error.hpp"

namespace objectadd {

namespace fs = std::filesystem;
using nlohmann::json;

PixelGrid to_255(const Image& image) {
    PixelGrid out(image.rows(), image.cols(), image.channels());
    auto src = image.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double v = std::clamp(src[i], 0.0, 1.0) * 255.0;
        dst[i] = static_cast<std::uint8_t>(std::lround(v));
    }
    return out;
}

Image from_255(const PixelGrid& pixels) {
    Image out(pixels.rows(), pixels.cols(), pixels.channels());
    auto src = pixels.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
    return out;
}

PixelGrid mask_to_gray(const BinaryMask& mask) {
    PixelGrid out(mask.rows(), mask.cols(), 1);
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) out(r, c, 0) = mask(r, c) ? 255 : 0;
    return out;
}

PixelGrid heatmap_to_gray(const Grid<double>& values) {
    double peak = 0.0;
    for (double v : values.values()) peak = std::max(peak, v);
    PixelGrid out(values.rows(), values.cols(), 1);
    for (int r = 0; r < values.rows(); ++r)
        for (int c = 0; c < values.cols(); ++c) {
            const double v = peak > 0.0 ? std::clamp(values(r, c) / peak, 0.0, 1.0) : 0.0;
            out(r, c, 0) = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    return out;
}

Bytes encode_png(const PixelGrid& pixels) {
    if (pixels.channels() != 1 && pixels.channels() != 3)
        throw Error(ErrorKind::Shape, "PNG encoding supports 1 or 3 channels");
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(pixels.cols());
    img.height = static_cast<png_uint_32>(pixels.rows());
    img.format = pixels.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.values().data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("PNG encode failed: ") + img.message);
    Bytes out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.values().data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("PNG encode failed: ") + img.message);
    out.resize(size);
    return out;
}

PixelGrid decode_png(std::span<const std::uint8_t> bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw Error(ErrorKind::Io, std::string("not a readable PNG: ") + img.message);
    img.format = PNG_FORMAT_RGB;
    PixelGrid out(static_cast<int>(img.height), static_cast<int>(img.width), 3);
    // Transparent pixels composite onto white so cut-out objects keep a white background.
    png_color white{255, 255, 255};
    if (!png_image_finish_read(&img, &white, out.values().data(), 0, nullptr)) {
        png_image_free(&img);
        throw Error(ErrorKind::Io, std::string("PNG decode failed: ") + img.message);
    }
    return out;
}

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const fs::path& path) {
    const Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorKind::Io, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw Error(ErrorKind::Io, "SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

std::string sha256_hex(const std::string& text) {
    return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

const char* scope_name(AttentionScope s) { return s == AttentionScope::WholeMap ? "whole_map" : "masked_region"; }

AttentionScope parse_scope(const std::string& s) {
    if (s == "whole_map") return AttentionScope::WholeMap;
    if (s == "masked_region") return AttentionScope::MaskedRegion;
    throw Error(ErrorKind::Config, "attention_scope must be 'whole_map' or 'masked_region'");
}

// One table drives YAML and JSON so both formats accept exactly the same keys.
template <typename Source>
void apply_field(GuidanceConfig& c, const std::string& key, const Source& get) {
    if (key == "total_steps") c.total_steps = get.template as<int>();
    else if (key == "latent_inject_frac") c.latent_inject_frac = get.template as<double>();
    else if (key == "attn_inject_frac") c.attn_inject_frac = get.template as<double>();
    else if (key == "inpaint_step") c.inpaint_step = get.template as<int>();
    else if (key == "random_inpaint_step") c.random_inpaint_step = get.template as<bool>();
    else if (key == "enforce_inpaint_window") c.enforce_inpaint_window = get.template as<bool>();
    else if (key == "cluster_count") c.cluster_count = get.template as<int>();
    else if (key == "h1_threshold") c.h1_threshold = get.template as<double>();
    else if (key == "h2_threshold") c.h2_threshold = get.template as<double>();
    else if (key == "guidance_lr") c.guidance_lr = get.template as<double>();
    else if (key == "guidance_iters") c.guidance_iters = get.template as<int>();
    else if (key == "guidance_stop_energy") c.guidance_stop_energy = get.template as<double>();
    else if (key == "guidance_layers") c.guidance_layers = get.template as<std::vector<int>>();
    else if (key == "attention_layers") c.attention_layers = get.template as<std::vector<int>>();
    else if (key == "inversion_inject_step") c.inversion_inject_step = get.template as<int>();
    else if (key == "inversion_inject_window") c.inversion_inject_window = get.template as<int>();
    else if (key == "attention_scope") c.attention_scope = parse_scope(get.template as<std::string>());
    else if (key == "min_component_size") c.min_component_size = get.template as<int>();
    else if (key == "refocus_split_components") c.refocus_split_components = get.template as<bool>();
    else if (key == "segmentation_threshold") c.segmentation_threshold = get.template as<double>();
    else if (key == "kmeans_max_iters") c.kmeans_max_iters = get.template as<int>();
    else throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
}

struct YamlValue {
    const YAML::Node& node;
    template <typename T>
    T as() const {
        return node.as<T>();
    }
};

struct JsonValue {
    const json& node;
    template <typename T>
    T as() const {
        if constexpr (std::is_same_v<T, int>) {
            if (!node.is_number_integer()) throw Error(ErrorKind::Config, "expected an integer");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!node.is_number()) throw Error(ErrorKind::Config, "expected a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!node.is_boolean()) throw Error(ErrorKind::Config, "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!node.is_string()) throw Error(ErrorKind::Config, "expected a string");
        } else {
            if (!node.is_array()) throw Error(ErrorKind::Config, "expected a list of integers");
        }
        return node.get<T>();
    }
};

}  // namespace

GuidanceConfig config_from_yaml(const std::string& text, const GuidanceConfig& base) {
    GuidanceConfig c = base;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid YAML: ") + e.what());
    }
    if (root.IsNull()) return c;
    if (!root.IsMap()) throw Error(ErrorKind::Config, "config must be a mapping of GuidanceConfig fields");
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        try {
            apply_field(c, key, YamlValue{kv.second});
        } catch (const YAML::Exception&) {
            throw Error(ErrorKind::Config, "config key '" + key + "' has the wrong type");
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config && std::string(e.what()).rfind("unknown", 0) == 0) throw;
            throw Error(ErrorKind::Config, "config key '" + key + "': " + e.what());
        }
    }
    return c;
}

std::string config_to_yaml(const GuidanceConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    const json fields = config_to_json(c);
    for (const auto& [key, value] : fields.items()) {
        out << YAML::Key << key << YAML::Value;
        if (value.is_boolean()) out << value.get<bool>();
        else if (value.is_number_integer()) out << value.get<int>();
        else if (value.is_number()) out << YAML::Precision(17) << value.get<double>();
        else if (value.is_string()) out << value.get<std::string>();
        else out << YAML::Flow << value.get<std::vector<int>>();
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

GuidanceConfig config_from_json(const json& overrides, const GuidanceConfig& base) {
    GuidanceConfig c = base;
    if (overrides.is_null()) return c;
    if (!overrides.is_object()) throw Error(ErrorKind::Config, "config overrides must be a JSON object");
    for (const auto& [key, value] : overrides.items()) {
        try {
            apply_field(c, key, JsonValue{value});
        } catch (const json::exception&) {
            throw Error(ErrorKind::Config, "config key '" + key + "' has the wrong type");
        } catch (const Error& e) {
            if (std::string(e.what()).rfind("unknown", 0) == 0) throw;
            throw Error(ErrorKind::Config, "config key '" + key + "': " + e.what());
        }
    }
    return c;
}

json config_to_json(const GuidanceConfig& c) {
    return {
        {"total_steps", c.total_steps},
        {"latent_inject_frac", c.latent_inject_frac},
        {"attn_inject_frac", c.attn_inject_frac},
        {"inpaint_step", c.inpaint_step},
        {"random_inpaint_step", c.random_inpaint_step},
        {"enforce_inpaint_window", c.enforce_inpaint_window},
        {"cluster_count", c.cluster_count},
        {"h1_threshold", c.h1_threshold},
        {"h2_threshold", c.h2_threshold},
        {"guidance_lr", c.guidance_lr},
        {"guidance_iters", c.guidance_iters},
        {"guidance_stop_energy", c.guidance_stop_energy},
        {"guidance_layers", c.guidance_layers},
        {"attention_layers", c.attention_layers},
        {"inversion_inject_step", c.inversion_inject_step},
        {"inversion_inject_window", c.inversion_inject_window},
        {"attention_scope", scope_name(c.attention_scope)},
        {"min_component_size", c.min_component_size},
        {"refocus_split_components", c.refocus_split_components},
        {"segmentation_threshold", c.segmentation_threshold},
        {"kmeans_max_iters", c.kmeans_max_iters},
    };
}

json descriptor_to_json(const BackendDescriptor& d) {
    json layers = json::array();
    for (const auto& l : d.attention_layers) layers.push_back({{"id", l.id}, {"height", l.height}, {"width", l.width}});
    return {
        {"name", d.name},
        {"latent", {d.latent_height, d.latent_width, d.latent_channels}},
        {"image", {d.image_height, d.image_width}},
        {"attention_layers", layers},
        {"refocus_layer", d.refocus_layer},
        {"max_tokens", d.max_tokens},
        {"embed_dim", d.embed_dim},
        {"total_steps_supported", d.total_steps_supported},
        {"differentiable", d.differentiable},
        {"invertible", d.invertible},
        {"parameters", d.parameters},
    };
}

}  // namespace objectadd

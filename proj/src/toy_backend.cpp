// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#include "objectadd/toy_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "objectadd/error.hpp"

namespace objectadd {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Keeps the cosine logits smooth at the zero vector.
constexpr double kCosineEps = 1e-6;

Eigen::MatrixXd gaussian_matrix(std::uint64_t seed, int rows, int cols, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = scale * normal(rng);
    return m;
}

void softmax_inplace(std::span<double> v) {
    const double peak = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - peak);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size()) throw Error(ErrorKind::Config, "toy parameter '" + key + "' is not a number");
    return v;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ToyParameters ToyParameters::from_map(const std::map<std::string, std::string>& values) {
    ToyParameters p;
    for (const auto& [key, value] : values) {
        if (key == "seed") p.seed = static_cast<std::uint64_t>(parse_double(key, value));
        else if (key == "noise_scale") p.noise_scale = parse_double(key, value);
        else if (key == "attention_sharpness") p.attention_sharpness = parse_double(key, value);
        else if (key == "content_strength") p.content_strength = parse_double(key, value);
        else if (key == "smoothing_passes") p.smoothing_passes = static_cast<int>(parse_double(key, value));
        else if (key == "rotation_angle") p.rotation_angle = parse_double(key, value);
        else if (key == "decode_scale") p.decode_scale = parse_double(key, value);
        else if (key == "invertible") p.invertible = (value == "true" || value == "1");
        else if (key == "latent_size" || key == "channels" || key == "image_scale" || key == "max_tokens" ||
                 key == "embed_dim" || key == "max_steps") {
            const int v = static_cast<int>(parse_double(key, value));
            if (key == "latent_size") p.latent_size = v;
            else if (key == "channels") p.channels = v;
            else if (key == "image_scale") p.image_scale = v;
            else if (key == "max_tokens") p.max_tokens = v;
            else if (key == "embed_dim") p.embed_dim = v;
            else p.max_steps = v;
        } else {
            throw Error(ErrorKind::Config, "unknown toy parameter '" + key + "'");
        }
    }
    return p;
}

std::map<std::string, std::string> ToyParameters::to_map() const {
    return {
        {"seed", std::to_string(seed)},
        {"latent_size", std::to_string(latent_size)},
        {"channels", std::to_string(channels)},
        {"image_scale", std::to_string(image_scale)},
        {"max_tokens", std::to_string(max_tokens)},
        {"embed_dim", std::to_string(embed_dim)},
        {"max_steps", std::to_string(max_steps)},
        {"noise_scale", format_double(noise_scale)},
        {"attention_sharpness", format_double(attention_sharpness)},
        {"content_strength", format_double(content_strength)},
        {"smoothing_passes", std::to_string(smoothing_passes)},
        {"rotation_angle", format_double(rotation_angle)},
        {"decode_scale", format_double(decode_scale)},
        {"invertible", invertible ? "true" : "false"},
    };
}

ToyBackend::ToyBackend(ToyParameters params) : params_(params) {
    if (params_.latent_size < 2 || params_.latent_size % 2 != 0)
        throw Error(ErrorKind::Config, "toy latent_size must be even and at least 2");
    if (params_.channels < 4 || params_.channels % 2 != 0)
        throw Error(ErrorKind::Config, "toy channels must be even and at least 4");
    if (params_.smoothing_passes < 0) throw Error(ErrorKind::Config, "toy smoothing_passes must be non-negative");
    if (params_.max_tokens < 4 || params_.embed_dim < 1 || params_.image_scale < 1)
        throw Error(ErrorKind::Config, "toy shape parameters out of range");

    const int n = params_.latent_size;
    const int c = params_.channels;
    const int d = params_.embed_dim;
    half_ = c / 2;

    descriptor_.name = params_.invertible ? "toy" : "toy-noninvertible";
    descriptor_.latent_height = n;
    descriptor_.latent_width = n;
    descriptor_.latent_channels = c;
    descriptor_.image_height = n * params_.image_scale;
    descriptor_.image_width = n * params_.image_scale;
    descriptor_.attention_layers = {{kPooledLayer, n / 2, n / 2}, {kNativeLayer, n, n}, {kRefocusLayer, 2 * n, 2 * n}};
    descriptor_.refocus_layer = kRefocusLayer;
    descriptor_.max_tokens = params_.max_tokens;
    descriptor_.embed_dim = d;
    descriptor_.total_steps_supported = params_.max_steps;
    descriptor_.differentiable = true;
    descriptor_.invertible = params_.invertible;
    descriptor_.parameters = params_.to_map();

    const double key_scale = 1.0 / std::sqrt(static_cast<double>(d));
    key_a_ = gaussian_matrix(mix(params_.seed, 1), half_, d, key_scale);
    key_b_ = gaussian_matrix(mix(params_.seed, 4), half_, d, key_scale);
    color_projection_ = gaussian_matrix(mix(params_.seed, 2), 3, c, 1.0 / std::sqrt(static_cast<double>(c)));
    const Eigen::MatrixXd& p = color_projection_;
    color_pseudo_inverse_ = p.transpose() * (p * p.transpose()).inverse();

    cls_ = token_vector("<|startoftext|>");
    eos_ = token_vector("<|endoftext|>");
    pad_ = token_vector("<|pad|>");
}

Eigen::VectorXd ToyBackend::token_vector(const std::string& word) const {
    return gaussian_matrix(mix(params_.seed, fnv1a(word)), params_.embed_dim, 1, 1.0);
}

std::vector<std::string> ToyBackend::tokenize(const std::string& prompt) const {
    std::vector<std::string> tokens;
    std::istringstream in(prompt);
    std::string word;
    while (in >> word) {
        std::string clean;
        for (unsigned char ch : word)
            if (std::isalnum(ch)) clean.push_back(static_cast<char>(std::tolower(ch)));
        if (!clean.empty()) tokens.push_back(std::move(clean));
    }
    return tokens;
}

EmbeddingMatrix ToyBackend::encode_text(const std::string& prompt) const {
    const auto tokens = tokenize(prompt);
    const int n = params_.max_tokens;
    const int d = params_.embed_dim;
    if (static_cast<int>(tokens.size()) > n - 2)
        throw Error(ErrorKind::Overflow, "prompt has " + std::to_string(tokens.size()) + " tokens, window allows " +
                                             std::to_string(n - 2));
    EmbeddingMatrix e;
    e.data = Grid<double>(n, d);
    e.actual_tokens = static_cast<int>(tokens.size());
    auto put = [&](int row, const Eigen::VectorXd& v) {
        for (int k = 0; k < d; ++k) e.data(row, k) = v(k);
    };
    put(0, cls_);
    for (int i = 0; i < e.actual_tokens; ++i) put(i + 1, token_vector(tokens[static_cast<std::size_t>(i)]));
    put(e.actual_tokens + 1, eos_);
    for (int i = e.actual_tokens + 2; i < n; ++i) put(i, pad_);
    return e;
}

Latent ToyBackend::initial_noise(std::int64_t seed, int total_steps) const {
    if (total_steps < 1 || total_steps > params_.max_steps)
        throw Error(ErrorKind::Config, "total_steps outside the toy backend's supported range");
    std::mt19937_64 rng(mix(params_.seed ^ 0x5eedULL, static_cast<std::uint64_t>(seed)));
    std::normal_distribution<double> normal(0.0, params_.noise_scale);
    Latent x{Grid<double>(params_.latent_size, params_.latent_size, params_.channels), total_steps};
    for (double& v : x.data.values()) v = normal(rng);
    return x;
}

void ToyBackend::check_latent(const Latent& latent) const {
    if (latent.height() != params_.latent_size || latent.width() != params_.latent_size ||
        latent.channels() != params_.channels)
        throw Error(ErrorKind::Shape, "latent shape does not match the toy backend");
}

void ToyBackend::check_embedding(const EmbeddingMatrix& embedding) const {
    if (embedding.max_tokens() != params_.max_tokens || embedding.dim() != params_.embed_dim)
        throw Error(ErrorKind::Shape, "embedding shape does not match the toy backend");
}

Eigen::VectorXd ToyBackend::embedding_row(const EmbeddingMatrix& embedding, int token) const {
    Eigen::VectorXd e(params_.embed_dim);
    for (int k = 0; k < params_.embed_dim; ++k) e(k) = embedding.data(token, k);
    return e;
}

Grid<double> ToyBackend::field(const Grid<double>& cells, int offset) const {
    const int rows = cells.rows();
    const int cols = cells.cols();
    Grid<double> cur(rows, cols, half_);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            for (int k = 0; k < half_; ++k) cur(r, c, k) = cells(r, c, offset + k);
    for (int pass = 0; pass < params_.smoothing_passes; ++pass) {
        Grid<double> next(rows, cols, half_);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                int members = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (!cur.in_bounds(r + dr, c + dc)) continue;
                        ++members;
                        for (int k = 0; k < half_; ++k) next(r, c, k) += cur(r + dr, c + dc, k);
                    }
                for (int k = 0; k < half_; ++k) next(r, c, k) /= members;
            }
        cur = std::move(next);
    }
    return cur;
}

Grid<double> ToyBackend::field_transpose(const Grid<double>& grad_field) const {
    const int rows = grad_field.rows();
    const int cols = grad_field.cols();
    Grid<double> cur = grad_field;
    for (int pass = 0; pass < params_.smoothing_passes; ++pass) {
        Grid<double> next(rows, cols, half_);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                int members = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) members += cur.in_bounds(r + dr, c + dc) ? 1 : 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (!cur.in_bounds(r + dr, c + dc)) continue;
                        for (int k = 0; k < half_; ++k) next(r + dr, c + dc, k) += cur(r, c, k) / members;
                    }
            }
        cur = std::move(next);
    }
    return cur;
}

Grid<double> ToyBackend::logits(const Grid<double>& field, const Eigen::VectorXd& key) const {
    const double key_norm = std::sqrt(key.squaredNorm() + kCosineEps);
    Grid<double> s(field.rows(), field.cols());
    for (int r = 0; r < field.rows(); ++r)
        for (int c = 0; c < field.cols(); ++c) {
            const auto v = field.cell(r, c);
            double dot = 0.0;
            double sq = 0.0;
            for (int k = 0; k < half_; ++k) {
                const double x = v[static_cast<std::size_t>(k)];
                dot += x * key(k);
                sq += x * x;
            }
            s(r, c) = params_.attention_sharpness * dot / (key_norm * std::sqrt(sq + kCosineEps));
        }
    return s;
}

Grid<double> ToyBackend::pooled(const Grid<double>& cells) const {
    Grid<double> out(cells.rows() / 2, cells.cols() / 2, cells.channels());
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c)
            for (int k = 0; k < cells.channels(); ++k)
                out(r, c, k) = 0.25 * (cells(2 * r, 2 * c, k) + cells(2 * r + 1, 2 * c, k) +
                                       cells(2 * r, 2 * c + 1, k) + cells(2 * r + 1, 2 * c + 1, k));
    return out;
}

std::vector<CrossAttentionMap> ToyBackend::cross_attention(const Latent& latent,
                                                           const EmbeddingMatrix& embedding) const {
    check_latent(latent);
    check_embedding(embedding);
    const int n = params_.latent_size;
    const int tokens = params_.max_tokens;
    CrossAttentionMap small(kPooledLayer, latent.timestep, tokens, n / 2, n / 2);
    CrossAttentionMap native(kNativeLayer, latent.timestep, tokens, n, n);
    CrossAttentionMap large(kRefocusLayer, latent.timestep, tokens, 2 * n, 2 * n);
    const Grid<double> smooth = field(latent.data, half_);
    const Grid<double> pool = pooled(smooth);

    for (int i = 0; i < tokens; ++i) {
        const Eigen::VectorXd key = key_b_ * embedding_row(embedding, i);

        Grid<double> s = logits(smooth, key);
        softmax_inplace(s.values());
        native.set_row(i, s);

        Grid<double> sp = logits(pool, key);
        softmax_inplace(sp.values());
        small.set_row(i, sp);

        Grid<double> up(2 * n, 2 * n);
        for (int r = 0; r < 2 * n; ++r)
            for (int c = 0; c < 2 * n; ++c) up(r, c) = 0.25 * s(r / 2, c / 2);
        large.set_row(i, up);
    }
    return {std::move(small), std::move(native), std::move(large)};
}

Grid<double> ToyBackend::coupling(const Grid<double>& source, int read_offset, const Eigen::MatrixXd& read_keys,
                                  const Eigen::MatrixXd& write_keys, const EmbeddingMatrix& embedding,
                                  int override_token, const Grid<double>* routing_override) const {
    const int n = params_.latent_size;
    const double cells = static_cast<double>(n * n);
    Grid<double> out(n, n, half_);
    const Grid<double> smooth = field(source, read_offset);
    for (int i = 1; i <= embedding.actual_tokens; ++i) {
        const Eigen::VectorXd e = embedding_row(embedding, i);
        const Eigen::VectorXd value = params_.content_strength * (write_keys * e);
        Grid<double> weights;
        if (i == override_token && routing_override) {
            weights = *routing_override;
        } else {
            weights = logits(smooth, read_keys * e);
            softmax_inplace(weights.values());
            for (double& w : weights.values()) w *= cells;
        }
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                for (int k = 0; k < half_; ++k) out(r, c, k) += weights(r, c) * value(k);
    }
    return out;
}

Eigen::MatrixXd ToyBackend::rotation(int t) const {
    // Block diagonal: one rotation per channel half.
    const int c = params_.channels;
    const Eigen::MatrixXd a = gaussian_matrix(mix(params_.seed ^ 0x0707ULL, static_cast<std::uint64_t>(t)), c, c, 1.0);
    Eigen::MatrixXd skew = 0.5 * params_.rotation_angle * (a - a.transpose());
    skew.block(0, half_, half_, half_).setZero();
    skew.block(half_, 0, half_, half_).setZero();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(c, c);
    return (id - skew).partialPivLu().solve(id + skew);
}

StepOutput ToyBackend::denoise_step(const Latent& latent, int t, const EmbeddingMatrix& embedding,
                                    const AttentionControl* control) const {
    check_latent(latent);
    check_embedding(embedding);
    if (t < 1) throw Error(ErrorKind::Backend, "cannot denoise past the terminal state t = 0");
    if (t > params_.max_steps) throw Error(ErrorKind::Backend, "timestep beyond the toy schedule");

    const int n = params_.latent_size;
    const int ch = params_.channels;
    Grid<double> override_routing;
    const Grid<double>* routing_ptr = nullptr;
    int override_token = -1;
    if (control && control->token >= 0) {
        for (const auto& m : control->maps) {
            Grid<double> g(n, n);
            if (m.layer_id() == kNativeLayer) {
                g = m.row_grid(control->token);
            } else if (m.layer_id() == kRefocusLayer) {
                for (int r = 0; r < 2 * n; ++r)
                    for (int c = 0; c < 2 * n; ++c) g(r / 2, c / 2) += m.at(control->token, r, c);
            } else {
                continue;
            }
            double sum = 0.0;
            for (double v : g.values()) sum += v;
            if (!(sum > 0.0)) continue;
            for (double& v : g.values()) v *= static_cast<double>(n * n) / sum;
            override_routing = std::move(g);
            routing_ptr = &override_routing;
            override_token = control->token;
            if (m.layer_id() == kNativeLayer) break;
        }
    }

    StepOutput out;
    out.attention = cross_attention(latent, embedding);
    const Eigen::MatrixXd q = rotation(t);
    Latent next{Grid<double>(n, n, ch), t - 1};

    // A' = Q_A A + f(B)
    const Grid<double> add_a = coupling(latent.data, half_, key_b_, key_a_, embedding, override_token, routing_ptr);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const auto src = latent.data.cell(r, c);
            auto dst = next.data.cell(r, c);
            for (int i = 0; i < ch; ++i) {
                double acc = 0.0;
                for (int j = 0; j < ch; ++j) acc += q(i, j) * src[static_cast<std::size_t>(j)];
                dst[static_cast<std::size_t>(i)] = acc + (i < half_ ? add_a(r, c, i) : 0.0);
            }
        }
    // B' = Q_B B + g(A')
    const Grid<double> add_b = coupling(next.data, 0, key_a_, key_b_, embedding, -1, nullptr);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < half_; ++k) next.data(r, c, half_ + k) += add_b(r, c, k);
    out.next_latent = std::move(next);
    return out;
}

Latent ToyBackend::energy_gradient(const Latent& latent, const EmbeddingMatrix& embedding, const BinaryMask& mask,
                                   int token, std::span<const int> layers) const {
    check_latent(latent);
    check_embedding(embedding);
    if (token < 0 || token >= params_.max_tokens) throw Error(ErrorKind::Contract, "token index out of range");
    const int n = params_.latent_size;
    const int ch = params_.channels;
    const double beta = params_.attention_sharpness;

    const Eigen::VectorXd key = key_b_ * embedding_row(embedding, token);
    const Eigen::VectorXd kappa = key / std::sqrt(key.squaredNorm() + kCosineEps);

    // Gradient with respect to the smoothed B field; pulled back through the
    // smoothing at the end.
    Grid<double> grad_field(n, n, half_);

    // For a = softmax(s) and E = (1 - sum w a)^2: dE/ds_p = -2 (1 - r) a_p (w_p - r).
    // s_p = beta <y, kappa> / m with m = sqrt(|y|^2 + eps), so
    // ds_p/dy = beta (kappa / m - <y, kappa> y / m^3).
    auto accumulate = [&](const Grid<double>& cells, const Grid<double>& attn, const Grid<double>& weights, int block) {
        // r = inside / total as in the energy itself; the softmax sums to 1
        // only up to rounding.
        double inside = 0.0, total = 0.0;
        for (std::size_t i = 0; i < attn.size(); ++i) {
            total += attn.values()[i];
            inside += weights.values()[i] * attn.values()[i];
        }
        const double r = inside / total;
        const double outer = -2.0 * (1.0 - r);
        const double spread = 1.0 / static_cast<double>(block * block);
        Eigen::VectorXd y(half_);
        for (int pr = 0; pr < attn.rows(); ++pr)
            for (int pc = 0; pc < attn.cols(); ++pc) {
                const double coef = outer * attn(pr, pc) * (weights(pr, pc) - r) * spread;
                if (coef == 0.0) continue;
                for (int k = 0; k < half_; ++k) y(k) = cells(pr, pc, k);
                const double m2 = y.squaredNorm() + kCosineEps;
                const double m = std::sqrt(m2);
                const Eigen::VectorXd ds = beta * (kappa / m - y.dot(kappa) * y / (m2 * m));
                for (int dr = 0; dr < block; ++dr)
                    for (int dc = 0; dc < block; ++dc)
                        for (int k = 0; k < half_; ++k) grad_field(pr * block + dr, pc * block + dc, k) += coef * ds(k);
            }
    };

    const Grid<double> smooth = field(latent.data, half_);
    Grid<double> native = logits(smooth, key);
    softmax_inplace(native.values());

    for (int id : layers) {
        if (id == kNativeLayer) {
            accumulate(smooth, native, mask_to_real(resample_mask(mask, {n, n}, ResolutionTag::layer(id))), 1);
        } else if (id == kRefocusLayer) {
            const BinaryMask m32 = resample_mask(mask, {2 * n, 2 * n}, ResolutionTag::layer(id));
            Grid<double> w(n, n);
            for (int r = 0; r < 2 * n; ++r)
                for (int c = 0; c < 2 * n; ++c) w(r / 2, c / 2) += m32(r, c) ? 0.25 : 0.0;
            accumulate(smooth, native, w, 1);
        } else if (id == kPooledLayer) {
            const Grid<double> pool = pooled(smooth);
            Grid<double> small = logits(pool, key);
            softmax_inplace(small.values());
            accumulate(pool, small, mask_to_real(resample_mask(mask, {n / 2, n / 2}, ResolutionTag::layer(id))), 2);
        } else {
            throw Error(ErrorKind::Config, "toy backend has no attention layer " + std::to_string(id));
        }
    }

    const Grid<double> pulled = field_transpose(grad_field);
    Latent grad{Grid<double>(n, n, ch), latent.timestep};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < half_; ++k) grad.data(r, c, half_ + k) = pulled(r, c, k);
    return grad;
}

std::vector<Latent> ToyBackend::invert(const Latent& clean, const EmbeddingMatrix& embedding, int total_steps) const {
    if (!params_.invertible) throw Error(ErrorKind::Capability, "backend '" + descriptor_.name + "' does not support inversion");
    check_latent(clean);
    check_embedding(embedding);
    if (total_steps < 1 || total_steps > params_.max_steps)
        throw Error(ErrorKind::Config, "total_steps outside the toy backend's supported range");

    const int n = params_.latent_size;
    const int ch = params_.channels;
    std::vector<Latent> traj(static_cast<std::size_t>(total_steps) + 1);
    traj[0] = clean;
    traj[0].timestep = 0;
    for (int t = 1; t <= total_steps; ++t) {
        // Undo the step t -> t - 1: first B from (A', B'), then A from (A', B).
        const Eigen::MatrixXd q = rotation(t);
        const Latent& next = traj[static_cast<std::size_t>(t - 1)];
        Grid<double> residual = next.data;
        const Grid<double> add_b = coupling(next.data, 0, key_a_, key_b_, embedding, -1, nullptr);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                for (int k = 0; k < half_; ++k) residual(r, c, half_ + k) -= add_b(r, c, k);

        Latent cur{Grid<double>(n, n, ch), t};
        auto rotate_back = [&](int lo, int hi) {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    for (int i = lo; i < hi; ++i) {
                        double acc = 0.0;
                        for (int j = lo; j < hi; ++j) acc += q(j, i) * residual(r, c, j);
                        cur.data(r, c, i) = acc;
                    }
        };
        rotate_back(half_, ch);
        const Grid<double> add_a = coupling(cur.data, half_, key_b_, key_a_, embedding, -1, nullptr);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                for (int k = 0; k < half_; ++k) residual(r, c, k) -= add_a(r, c, k);
        rotate_back(0, half_);
        traj[static_cast<std::size_t>(t)] = std::move(cur);
    }
    return traj;
}

Latent ToyBackend::encode_image(const Image& image) const {
    if (!params_.invertible) throw Error(ErrorKind::Capability, "backend '" + descriptor_.name + "' cannot encode images");
    if (image.rows() != descriptor_.image_height || image.cols() != descriptor_.image_width || image.channels() != 3)
        throw Error(ErrorKind::Shape, "image size does not match the toy backend");
    const int n = params_.latent_size;
    const int s = params_.image_scale;
    Latent x{Grid<double>(n, n, params_.channels), 0};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
            for (int dr = 0; dr < s; ++dr)
                for (int dc = 0; dc < s; ++dc)
                    for (int k = 0; k < 3; ++k) rgb(k) += image(r * s + dr, c * s + dc, k);
            rgb /= static_cast<double>(s * s);
            const Eigen::VectorXd v = color_pseudo_inverse_ * ((rgb.array() - 0.5) * 2.0 * params_.decode_scale).matrix();
            for (int k = 0; k < params_.channels; ++k) x.data(r, c, k) = v(k);
        }
    return x;
}

Image ToyBackend::decode(const Latent& latent) const {
    check_latent(latent);
    const int n = params_.latent_size;
    const int s = params_.image_scale;
    Image img(n * s, n * s, 3);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const auto v = latent.data.cell(r, c);
            for (int k = 0; k < 3; ++k) {
                double acc = 0.0;
                for (int j = 0; j < params_.channels; ++j) acc += color_projection_(k, j) * v[static_cast<std::size_t>(j)];
                const double value = std::clamp(0.5 + acc / (2.0 * params_.decode_scale), 0.0, 1.0);
                for (int dr = 0; dr < s; ++dr)
                    for (int dc = 0; dc < s; ++dc) img(r * s + dr, c * s + dc, k) = value;
            }
        }
    return img;
}

}  // namespace objectadd

#include "dslab/models.hpp"

#include <cmath>

#include "byteio.hpp"
#include "dslab/rng.hpp"

namespace dslab {

Activation activation_from_name(const std::string& name) {
    if (name == "gelu") return Activation::Gelu;
    if (name == "identity") return Activation::Identity;
    fail(ErrorCode::InvalidArgument, "unknown activation \"" + name + "\"");
}

std::string activation_name(Activation activation) {
    return activation == Activation::Gelu ? "gelu" : "identity";
}

std::vector<int> EdsrConfig::stages() const {
    std::vector<int> out;
    int rest = factor;
    while (rest % 2 == 0 && rest > 1) {
        out.push_back(2);
        rest /= 2;
    }
    if (rest > 1) out.push_back(rest);
    return out;
}

void EdsrConfig::validate() const {
    if (width < 1 || depth < 1 || factor < 1)
        fail(ErrorCode::InvalidArgument, "edsr config: width, depth and factor must be >= 1");
}

void FnoConfig::validate() const {
    if (layers < 1 || width < 1 || modes1 < 1 || modes2 < 1 || lift_width < 0 || proj_width < 0)
        fail(ErrorCode::InvalidArgument, "fno config: layers/width/modes must be >= 1");
}

void ModelParams::add(const std::string& name, Tensor tensor) {
    if (has(name)) fail(ErrorCode::InvalidArgument, "duplicate parameter \"" + name + "\"");
    entries_.emplace_back(name, std::move(tensor));
}

const Tensor& ModelParams::get(const std::string& name) const {
    for (const auto& [key, tensor] : entries_)
        if (key == name) return tensor;
    fail(ErrorCode::InvalidArgument, "unknown parameter \"" + name + "\"");
}

bool ModelParams::has(const std::string& name) const {
    for (const auto& [key, tensor] : entries_)
        if (key == name) return true;
    return false;
}

std::int64_t ModelParams::value_count() const {
    std::int64_t total = 0;
    for (const auto& [key, tensor] : entries_) total += tensor.size();
    return total;
}

void ModelParams::set_requires_grad(bool value) {
    for (auto& [key, tensor] : entries_) tensor.set_requires_grad(value);
}

void ModelParams::zero_grad() {
    for (auto& [key, tensor] : entries_) tensor.zero_grad();
}

namespace {

std::uint64_t layout_fingerprint(const std::vector<std::pair<std::string, Shape>>& layout) {
    std::vector<char> stream;
    for (const auto& [name, shape] : layout) {
        byteio::put_bytes(stream, name.data(), name.size());
        const char nul = 0;
        byteio::put_bytes(stream, &nul, 1);
        byteio::put_u32(stream, std::uint32_t(shape.size()));
        for (int dim : shape) byteio::put_u32(stream, std::uint32_t(dim));
    }
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : stream) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 1099511628211ULL;
    }
    return h;
}

// One named block plus the init law for its values.
struct LayoutEntry {
    std::string name;
    Shape shape;
    double lo, hi;
};

void conv_entries(std::vector<LayoutEntry>& out, const std::string& name, int out_c, int in_c,
                  int k) {
    const double bound = 1.0 / std::sqrt(double(in_c) * k * k);
    out.push_back({name + ".weight", {out_c, in_c, k, k}, -bound, bound});
    out.push_back({name + ".bias", {out_c}, -bound, bound});
}

void spectral_entries(std::vector<LayoutEntry>& out, const std::string& name, int in_c, int out_c,
                      int m1, int m2) {
    const double s = 1.0 / (double(in_c) * double(out_c));
    out.push_back({name + ".re", {in_c, out_c, m1, m2}, 0.0, s});
    out.push_back({name + ".im", {in_c, out_c, m1, m2}, 0.0, s});
}

std::vector<LayoutEntry> edsr_layout(const EdsrConfig& config) {
    config.validate();
    std::vector<LayoutEntry> out;
    conv_entries(out, "head", config.width, 1, 3);
    for (int i = 0; i < config.depth; ++i) {
        const std::string base = "block" + std::to_string(i);
        conv_entries(out, base + ".conv1", config.width, config.width, 3);
        conv_entries(out, base + ".conv2", config.width, config.width, 3);
    }
    int stage = 0;
    for (int r : config.stages())
        conv_entries(out, "up" + std::to_string(stage++), config.width * r * r, config.width, 3);
    conv_entries(out, "tail", 1, config.width, 3);
    return out;
}

std::vector<LayoutEntry> fno_layout(const FnoConfig& config) {
    config.validate();
    std::vector<LayoutEntry> out;
    conv_entries(out, "lift1", config.lift(), 1, 1);
    conv_entries(out, "lift2", config.width, config.lift(), 1);
    for (int l = 0; l < config.layers; ++l) {
        const std::string base = "layer" + std::to_string(l);
        spectral_entries(out, base + ".w1", config.width, config.width, config.modes1,
                         config.modes2);
        spectral_entries(out, base + ".w2", config.width, config.width, config.modes1,
                         config.modes2);
        conv_entries(out, base + ".bypass", config.width, config.width, 1);
    }
    conv_entries(out, "proj1", config.proj(), config.width, 1);
    conv_entries(out, "proj2", 1, config.proj(), 1);
    return out;
}

ModelParams materialize(const std::vector<LayoutEntry>& layout, std::uint64_t seed) {
    ModelParams params;
    Rng rng(seed);
    for (const auto& entry : layout) {
        std::vector<double> values(std::size_t(shape_size(entry.shape)));
        for (double& v : values) v = rng.uniform(entry.lo, entry.hi);
        params.add(entry.name, Tensor::from(entry.shape, std::move(values)));
    }
    return params;
}

std::vector<double>& param_values(ModelParams& params, const std::string& name) {
    for (auto& [entry_name, tensor] : params.entries())
        if (entry_name == name) return tensor.data()->values;
    fail(ErrorCode::InvalidArgument, "no parameter named " + name);
}

/// Rewrites the handful of taps that make a freshly drawn parameter set
/// compute a separable linear upsample of its input: head channel 0 carries
/// input/2 (the global skip doubles it back), every residual branch starts
/// at zero, each upsampling stage interpolates channel 0 through subpixel
/// taps, and the tail reads channel 0 back out. Zeroed weights still
/// receive gradients, so nothing is frozen; the network merely starts at an
/// interpolation baseline instead of noise, which is what makes small fixed
/// learning rates productive from the first step.
void seed_linear_start(const EdsrConfig& config, ModelParams& params) {
    const int w = config.width;
    auto& head = param_values(params, "head.weight");
    auto& head_bias = param_values(params, "head.bias");
    // head.weight is [width, 1, 3, 3]; out channel 0 = input / 2.
    std::fill(head.begin(), head.begin() + 9, 0.0);
    head[4] = 0.5;
    head_bias[0] = 0.0;
    for (int i = 0; i < config.depth; ++i) {
        const std::string base = "block" + std::to_string(i);
        auto& conv2 = param_values(params, base + ".conv2.weight");
        auto& bias2 = param_values(params, base + ".conv2.bias");
        std::fill(conv2.begin(), conv2.end(), 0.0);
        std::fill(bias2.begin(), bias2.end(), 0.0);
    }
    int stage = 0;
    for (int r : config.stages()) {
        auto& weight = param_values(params, "up" + std::to_string(stage) + ".weight");
        auto& bias = param_values(params, "up" + std::to_string(stage) + ".bias");
        ++stage;
        // Output channels [0, r*r) feed subpixels (a, b) of shuffled
        // channel 0. Both grids are cell-centered, so subpixel (a, b)
        // samples the coarse field at fractional offset (a - (r-1)/2)/r per
        // axis; two-tap linear weights for that offset fit in the 3x3
        // kernel (center at (1, 1), the -1/+1 neighbors at 0 and 2).
        // Iterating centered x2 stages reproduces the centered x4 offsets.
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                const int out_c = a * r + b;
                double* taps = weight.data() + std::size_t(out_c) * w * 9;
                std::fill(taps, taps + std::size_t(w) * 9, 0.0);
                const double fy = (a - 0.5 * (r - 1)) / r;
                const double fx = (b - 0.5 * (r - 1)) / r;
                const double wy[3] = {fy < 0.0 ? -fy : 0.0, 1.0 - std::fabs(fy),
                                      fy > 0.0 ? fy : 0.0};
                const double wx[3] = {fx < 0.0 ? -fx : 0.0, 1.0 - std::fabs(fx),
                                      fx > 0.0 ? fx : 0.0};
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) taps[ky * 3 + kx] = wy[ky] * wx[kx];
                bias[std::size_t(out_c)] = 0.0;
            }
    }
    auto& tail = param_values(params, "tail.weight");
    auto& tail_bias = param_values(params, "tail.bias");
    std::fill(tail.begin(), tail.end(), 0.0);
    tail[4] = 1.0;  // center tap of input channel 0
    tail_bias[0] = 0.0;
}

std::vector<std::pair<std::string, Shape>> shapes_of(const std::vector<LayoutEntry>& layout) {
    std::vector<std::pair<std::string, Shape>> out;
    out.reserve(layout.size());
    for (const auto& entry : layout) out.emplace_back(entry.name, entry.shape);
    return out;
}

void check_fingerprint(const char* model, std::uint64_t expected, const ModelParams& params) {
    const std::uint64_t actual = params.fingerprint();
    if (actual != expected)
        fail(ErrorCode::FingerprintMismatch,
             std::string(model) + " params do not match the config: config fingerprint " +
                 std::to_string(expected) + ", params fingerprint " + std::to_string(actual));
}

Tensor apply_act(Activation activation, const Tensor& x) {
    return activation == Activation::Gelu ? gelu(x) : x;
}

}  // namespace

std::uint64_t ModelParams::fingerprint() const {
    std::vector<std::pair<std::string, Shape>> layout;
    layout.reserve(entries_.size());
    for (const auto& [name, tensor] : entries_) layout.emplace_back(name, tensor.shape());
    return layout_fingerprint(layout);
}

ModelParams init_edsr(const EdsrConfig& config, std::uint64_t seed) {
    ModelParams params = materialize(edsr_layout(config), seed);
    seed_linear_start(config, params);
    return params;
}

ModelParams init_fno(const FnoConfig& config, std::uint64_t seed) {
    return materialize(fno_layout(config), seed);
}

std::uint64_t edsr_fingerprint(const EdsrConfig& config) {
    return layout_fingerprint(shapes_of(edsr_layout(config)));
}

std::uint64_t fno_fingerprint(const FnoConfig& config) {
    return layout_fingerprint(shapes_of(fno_layout(config)));
}

std::int64_t edsr_param_count(const EdsrConfig& config) {
    const std::int64_t w = config.width;
    std::int64_t total = w * 9 + w;               // head
    total += config.depth * 2 * (w * w * 9 + w);  // residual blocks
    for (int r : config.stages())                 // upsampling stages
        total += (w * r * r) * w * 9 + w * r * r;
    total += w * 9 + 1;                           // tail
    return total;
}

std::int64_t fno_param_count(const FnoConfig& config) {
    const std::int64_t w = config.width, l = config.lift(), p = config.proj();
    std::int64_t total = l + l + w * l + w;  // lifting pair
    total += config.layers *
             (4 * w * w * config.modes1 * config.modes2 + w * w + w);  // spectral + bypass
    total += p * w + p + p + 1;                                        // projection pair
    return total;
}

Tensor edsr_forward(const EdsrConfig& config, const ModelParams& params, const Tensor& input) {
    check_fingerprint("edsr", edsr_fingerprint(config), params);
    if (input.shape().size() != 4 || input.shape()[1] != 1)
        fail(ErrorCode::ShapeMismatch, "edsr input must be N x 1 x h x w, got " +
                                           shape_string(input.shape()));
    Tensor x = conv2d(input, params.get("head.weight"), params.get("head.bias"), 1);
    Tensor skip = x;
    for (int i = 0; i < config.depth; ++i) {
        const std::string base = "block" + std::to_string(i);
        Tensor r = conv2d(x, params.get(base + ".conv1.weight"), params.get(base + ".conv1.bias"),
                          1);
        r = relu(r);
        r = conv2d(r, params.get(base + ".conv2.weight"), params.get(base + ".conv2.bias"), 1);
        x = add(x, scale(r, config.residual_scaling));
    }
    x = add(x, skip);
    int stage = 0;
    for (int r : config.stages()) {
        const std::string base = "up" + std::to_string(stage++);
        x = conv2d(x, params.get(base + ".weight"), params.get(base + ".bias"), 1);
        x = pixel_shuffle(x, r);
    }
    return conv2d(x, params.get("tail.weight"), params.get("tail.bias"), 1);
}

Tensor fno_forward(const FnoConfig& config, const ModelParams& params, const Tensor& input) {
    check_fingerprint("fno", fno_fingerprint(config), params);
    if (input.shape().size() != 4 || input.shape()[1] != 1)
        fail(ErrorCode::ShapeMismatch, "fno input must be N x 1 x H x W, got " +
                                           shape_string(input.shape()));
    const int h = input.shape()[2], w = input.shape()[3];
    const int wh = w / 2 + 1;
    if (2 * config.modes1 > h || config.modes2 > wh)
        fail(ErrorCode::ModeTruncationTooLarge,
             "fno modes " + std::to_string(config.modes1) + " x " + std::to_string(config.modes2) +
                 " exceed the spectrum of a " + std::to_string(h) + " x " + std::to_string(w) +
                 " field");
    Tensor x = conv2d(input, params.get("lift1.weight"), params.get("lift1.bias"), 0);
    x = apply_act(config.activation, x);
    x = conv2d(x, params.get("lift2.weight"), params.get("lift2.bias"), 0);
    for (int l = 0; l < config.layers; ++l) {
        const std::string base = "layer" + std::to_string(l);
        // Two conjugate row blocks carry the retained modes: rows [0, m1)
        // and [H - m1, H), columns [0, m2) of the half spectrum. The
        // truncated transforms never touch the discarded bins.
        ComplexPair top = rfft2_rows(x, 0, config.modes1, config.modes2);
        ComplexPair bottom = rfft2_rows(x, h - config.modes1, config.modes1, config.modes2);
        ComplexPair mixed_top =
            spectral_mix(top, {params.get(base + ".w1.re"), params.get(base + ".w1.im")});
        ComplexPair mixed_bottom =
            spectral_mix(bottom, {params.get(base + ".w2.re"), params.get(base + ".w2.im")});
        Tensor spectral_path = add(irfft2_block(mixed_top, h, w, 0),
                                   irfft2_block(mixed_bottom, h, w, h - config.modes1));
        Tensor bypass =
            conv2d(x, params.get(base + ".bypass.weight"), params.get(base + ".bypass.bias"), 0);
        x = add(spectral_path, bypass);
        if (l + 1 < config.layers) x = apply_act(config.activation, x);
    }
    x = conv2d(x, params.get("proj1.weight"), params.get("proj1.bias"), 0);
    x = apply_act(config.activation, x);
    return conv2d(x, params.get("proj2.weight"), params.get("proj2.bias"), 0);
}

void save_params(const ModelParams& params, const std::string& path) {
    std::vector<char> out;
    byteio::put_bytes(out, "PRM1", 4);
    byteio::put_u64(out, params.fingerprint());
    byteio::put_u64(out, std::uint64_t(params.entries().size()));
    for (const auto& [name, tensor] : params.entries()) {
        byteio::put_u32(out, std::uint32_t(name.size()));
        byteio::put_bytes(out, name.data(), name.size());
        byteio::put_u32(out, std::uint32_t(tensor.shape().size()));
        for (int dim : tensor.shape()) byteio::put_u32(out, std::uint32_t(dim));
        for (double v : tensor.values()) byteio::put_f64(out, v);
    }
    byteio::spill(path, out);
}

ModelParams load_params(const std::string& path) {
    byteio::Reader r(byteio::slurp(path), path);
    r.expect_magic("PRM1");
    const std::uint64_t stored = r.u64("fingerprint");
    const std::uint64_t count = r.u64("entry count");
    ModelParams params;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = r.u32("name length");
        const std::string name = r.str(name_len, "name");
        const std::uint32_t rank = r.u32("rank");
        Shape shape(rank);
        std::int64_t total = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = int(r.u32("dim"));
            if (shape[d] < 1) fail(ErrorCode::OutOfRange, path + ": non-positive dim in " + name);
            total *= shape[d];
        }
        r.expect_payload(std::size_t(total) * 8, "value payload");
        std::vector<double> values(std::size_t(total), 0.0);
        for (auto& v : values) v = r.f64("value");
        params.add(name, Tensor::from(std::move(shape), std::move(values)));
    }
    r.expect_end();
    const std::uint64_t actual = params.fingerprint();
    if (actual != stored)
        fail(ErrorCode::FingerprintMismatch,
             path + ": fingerprint mismatch, header says " + std::to_string(stored) +
                 ", entries hash to " + std::to_string(actual));
    return params;
}

}  // namespace dslab

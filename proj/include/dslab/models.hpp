#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dslab/tensor.hpp"

namespace dslab {

enum class Activation { Gelu, Identity };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation activation);

/// Residual super-resolution CNN: 3x3 head conv, `depth` residual blocks
/// (conv-ReLU-conv scaled by residual_scaling), a global skip, then one
/// conv + pixel-shuffle stage per entry of stages(), and a 1-channel tail.
/// No normalization layers anywhere.
struct EdsrConfig {
    int width = 64;
    int depth = 8;
    int factor = 4;
    double residual_scaling = 0.1;

    /// Upsampling decomposition: factor 4 -> {2, 2}, 2 -> {2}, 3 -> {3},
    /// 6 -> {2, 3}; factor 1 -> no upsampling stages.
    std::vector<int> stages() const;
    void validate() const;
};

/// Fourier neural operator working at a fixed resolution (inputs are
/// upsampled to the target grid before entering the network). Each layer is
/// irfft2(mode-mix(rfft2(x))) + 1x1 bypass conv; mode-mix keeps the lowest
/// modes1 positive and negative row frequencies and the lowest modes2
/// column frequencies of the half spectrum, each block with its own
/// complex weights.
struct FnoConfig {
    int layers = 4;
    int width = 32;
    int modes1 = 12;
    int modes2 = 12;
    int lift_width = 0;  // 0 -> width
    int proj_width = 0;  // 0 -> 2 * width
    Activation activation = Activation::Gelu;

    int lift() const { return lift_width > 0 ? lift_width : width; }
    int proj() const { return proj_width > 0 ? proj_width : 2 * width; }
    void validate() const;
};

/// Ordered name -> tensor map. Order is fixed by construction and defines
/// both the serialized layout and the fingerprint.
class ModelParams {
public:
    void add(const std::string& name, Tensor tensor);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;

    std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

    std::int64_t value_count() const;
    void set_requires_grad(bool value);
    void zero_grad();

    /// Architecture hash: FNV-1a 64-bit over every entry in order — name
    /// bytes, NUL, rank and dims as little-endian u32. Values do not enter,
    /// so the fingerprint is a pure function of the model config.
    std::uint64_t fingerprint() const;

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
};

ModelParams init_edsr(const EdsrConfig& config, std::uint64_t seed);
ModelParams init_fno(const FnoConfig& config, std::uint64_t seed);

/// Fingerprint a config would produce, without materializing parameters.
std::uint64_t edsr_fingerprint(const EdsrConfig& config);
std::uint64_t fno_fingerprint(const FnoConfig& config);

std::int64_t edsr_param_count(const EdsrConfig& config);
std::int64_t fno_param_count(const FnoConfig& config);

/// N x 1 x h x w -> N x 1 x (factor*h) x (factor*w).
Tensor edsr_forward(const EdsrConfig& config, const ModelParams& params, const Tensor& input);

/// N x 1 x H x W -> N x 1 x H x W. Requires 2*modes1 <= H and
/// modes2 <= W/2 + 1, else ModeTruncationTooLarge.
Tensor fno_forward(const FnoConfig& config, const ModelParams& params, const Tensor& input);

/// PRM1 container: magic, fingerprint, entry count, then per entry the
/// name, shape, and f64 payload, all little-endian.
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace dslab
